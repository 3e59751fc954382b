#include "rdmft/interaction.hpp"

#include <cmath>
#include <numbers>

#include "rdmft/errors.hpp"

namespace rdmft {

namespace {

int orbital_of(const LatticeSpec& lat, int k, int spin_bit) { return lat.spinful ? 2 * k + spin_bit : k; }

std::vector<OperatorTerm> hubbard_terms(const LatticeSpec& lat) {
  if (!lat.spinful) throw PreconditionError("on-site Hubbard interaction needs a spinful lattice");
  const int ns = lat.sites();
  std::vector<OperatorTerm> terms;
  terms.reserve(ns * ns * ns);
  // (1/Ns) sum c+_{k+q up} c+_{p-q down} c_{p down} c_{k up}
  for (int k = 0; k < ns; ++k) {
    for (int p = 0; p < ns; ++p) {
      for (int q = 0; q < ns; ++q) {
        const int kq = momentum_add(lat, k, q);
        const int pq = momentum_add(lat, p, momentum_negate(lat, q));
        terms.push_back({1.0 / ns, {cdag(2 * kq), cdag(2 * pq + 1), c(2 * p + 1), c(2 * k)}});
      }
    }
  }
  return terms;
}

std::vector<OperatorTerm> density_terms(const LatticeSpec& lat, int range) {
  if (range % lat.length == 0) {
    throw PreconditionError("density-density range " + std::to_string(range) + " is a multiple of L");
  }
  const int ns = lat.sites();
  const int spins = lat.spin_states();
  std::vector<OperatorTerm> terms;
  // sum_i n_i n_{i+delta} = (1/Ns) sum_{k1-k2+k3-k4=0} cos((k3-k4).delta) c+_1 c_2 c+_3 c_4,
  // symmetrized over +-delta so every coefficient is real.
  for (int axis = 0; axis < lat.dimension; ++axis) {
    for (int k1 = 0; k1 < ns; ++k1) {
      for (int k2 = 0; k2 < ns; ++k2) {
        for (int k3 = 0; k3 < ns; ++k3) {
          const int k4 = momentum_add(lat, momentum_add(lat, k1, momentum_negate(lat, k2)), k3);
          const int diff = momentum_vector(lat, momentum_add(lat, k3, momentum_negate(lat, k4)))[axis];
          const double phase = 2.0 * std::numbers::pi * diff * range / lat.length;
          const double coef = std::cos(phase) / ns;
          if (std::abs(coef) < 1e-15) continue;
          for (int s = 0; s < spins; ++s) {
            for (int sp = 0; sp < spins; ++sp) {
              terms.push_back({coef,
                               {cdag(orbital_of(lat, k1, s)), c(orbital_of(lat, k2, s)), cdag(orbital_of(lat, k3, sp)),
                                c(orbital_of(lat, k4, sp))}});
            }
          }
        }
      }
    }
  }
  return terms;
}

void validate_explicit(const std::vector<OperatorTerm>& terms, const LatticeSpec& lat) {
  for (const auto& term : terms) {
    int creators = 0, momentum = 0, mz = 0;
    for (const auto& op : term.ops) {
      if (op.orbital < 0 || op.orbital >= lat.orbitals()) {
        throw InvalidOrbitalError("explicit term acts on orbital " + std::to_string(op.orbital) +
                                  " outside the lattice");
      }
      const int k = momentum_index(lat, op.orbital);
      if (op.create) {
        ++creators;
        momentum = momentum_add(lat, momentum, k);
        mz += twice_spin_z(lat, op.orbital);
      } else {
        momentum = momentum_add(lat, momentum, momentum_negate(lat, k));
        mz -= twice_spin_z(lat, op.orbital);
      }
    }
    if (2 * creators != static_cast<int>(term.ops.size())) {
      throw PreconditionError("explicit term does not conserve particle number");
    }
    if (momentum != 0) throw PreconditionError("explicit term does not conserve momentum");
    if (mz != 0) throw PreconditionError("explicit term does not conserve Mz");
  }
}

}  // namespace

InteractionSpec InteractionSpec::hubbard(double u) {
  InteractionSpec s;
  s.kind = InteractionKind::Hubbard;
  s.hubbard_u = u;
  return s;
}

InteractionSpec InteractionSpec::density_density(std::vector<double> couplings) {
  InteractionSpec s;
  s.kind = InteractionKind::DensityDensity;
  s.couplings = std::move(couplings);
  return s;
}

InteractionSpec InteractionSpec::explicit_terms(std::vector<OperatorTerm> terms) {
  InteractionSpec s;
  s.kind = InteractionKind::Explicit;
  s.terms = std::move(terms);
  return s;
}

int InteractionSpec::body_count() const {
  if (kind != InteractionKind::Explicit) return 2;
  int p = 1;
  for (const auto& t : terms) p = std::max(p, static_cast<int>(t.ops.size()) / 2);
  return p;
}

std::string InteractionSpec::kind_name() const {
  switch (kind) {
    case InteractionKind::Hubbard:
      return "hubbard";
    case InteractionKind::DensityDensity:
      return "density-density";
    case InteractionKind::Explicit:
      return "explicit";
  }
  return "unknown";
}

InteractionComponents expand_interaction(const InteractionSpec& spec, const LatticeSpec& lattice) {
  lattice.validate();
  InteractionComponents out;
  switch (spec.kind) {
    case InteractionKind::Hubbard:
      out.couplings.push_back(spec.hubbard_u);
      out.operators.push_back(hubbard_terms(lattice));
      break;
    case InteractionKind::DensityDensity:
      for (std::size_t r = 0; r < spec.couplings.size(); ++r) {
        out.couplings.push_back(spec.couplings[r]);
        out.operators.push_back(density_terms(lattice, static_cast<int>(r) + 1));
      }
      break;
    case InteractionKind::Explicit:
      validate_explicit(spec.terms, lattice);
      out.couplings.push_back(1.0);
      out.operators.push_back(spec.terms);
      break;
  }
  return out;
}

InteractionMatrix build_interaction_matrix(const InteractionSpec& spec, const SectorBasis& basis) {
  if (basis.empty()) throw PreconditionError("cannot build an interaction matrix on an empty basis");
  const auto expanded = expand_interaction(spec, basis.lattice);
  InteractionMatrix out;
  out.couplings = expanded.couplings;
  out.values = Eigen::MatrixXd::Zero(basis.size(), basis.size());
  for (std::size_t i = 0; i < expanded.operators.size(); ++i) {
    Eigen::MatrixXd m = operator_matrix(expanded.operators[i], basis);
    require_symmetric(m, "interaction matrix");
    m = 0.5 * (m + m.transpose());
    out.values += expanded.couplings[i] * m;
    out.components.push_back(std::move(m));
  }
  return out;
}

InteractionMatrix build_interaction_matrix(const InteractionSpec& spec, const AdaptedBasis& basis) {
  if (basis.empty()) throw PreconditionError("cannot build an interaction matrix on an empty basis");
  InteractionMatrix parent = build_interaction_matrix(spec, basis.parent);
  const Eigen::MatrixXd& c = basis.coefficients;
  InteractionMatrix out;
  out.couplings = parent.couplings;
  out.values = Eigen::MatrixXd::Zero(c.rows(), c.rows());
  for (std::size_t i = 0; i < parent.components.size(); ++i) {
    Eigen::MatrixXd m = c * parent.components[i] * c.transpose();
    m = 0.5 * (m + m.transpose());
    out.values += out.couplings[i] * m;
    out.components.push_back(std::move(m));
  }
  return out;
}

Eigen::MatrixXd kinetic_matrix(const SectorBasis& basis) {
  const auto eps = orbital_energies(basis.lattice);
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(basis.size(), basis.size());
  for (int r = 0; r < basis.size(); ++r) {
    for (int q : basis.orbitals(r)) t(r, r) += eps[q];
  }
  return t;
}

Eigen::MatrixXd kinetic_matrix(const AdaptedBasis& basis) {
  const Eigen::MatrixXd t = kinetic_matrix(basis.parent);
  Eigen::MatrixXd out = basis.coefficients * t * basis.coefficients.transpose();
  return 0.5 * (out + out.transpose());
}

}  // namespace rdmft
