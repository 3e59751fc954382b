#include "rdmft/adapted.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rdmft/errors.hpp"
#include "rdmft/operator.hpp"

namespace rdmft {

namespace {

constexpr double kEigTol = 1e-9;
constexpr double kCheckTol = 1e-12;

void require_spinful(const SectorBasis& basis) {
  if (!basis.lattice.spinful) throw PreconditionError("spin and parity adaptation needs a spinful lattice");
}

double sz(const SectorBasis& basis) {
  if (basis.empty()) return 0.0;
  return 0.5 * total_twice_mz(basis.lattice, basis.configurations.front());
}

Eigen::MatrixXd eigenspace(const Eigen::MatrixXd& m, double value) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  std::vector<int> keep;
  for (int i = 0; i < m.rows(); ++i) {
    if (std::abs(es.eigenvalues()(i) - value) < kEigTol) keep.push_back(i);
  }
  Eigen::MatrixXd out(m.rows(), keep.size());
  for (std::size_t j = 0; j < keep.size(); ++j) out.col(j) = es.eigenvectors().col(keep[j]);
  return out;
}

// Canonical orthonormal rows spanning the column space of q.
Eigen::MatrixXd canonical_rows(const Eigen::MatrixXd& q) {
  const int n = q.rows();
  const int k = q.cols();
  Eigen::MatrixXd proj = q * q.transpose();
  std::vector<Eigen::VectorXd> rows;
  for (int j = 0; j < n && static_cast<int>(rows.size()) < k; ++j) {
    Eigen::VectorXd v = proj.col(j);
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& r : rows) v -= r.dot(v) * r;
    }
    const double norm = v.norm();
    if (norm < 1e-8) continue;
    rows.push_back(v / norm);
  }
  for (auto& v : rows) {
    int lead = 0;
    for (int i = 1; i < n; ++i) {
      if (std::abs(v(i)) > std::abs(v(lead)) + 1e-12) lead = i;
    }
    if (v(lead) < 0) v = -v;
    for (int i = 0; i < n; ++i) {
      if (std::abs(v(i)) < 1e-14) v(i) = 0.0;
    }
  }
  auto support = [](const Eigen::VectorXd& v) {
    int count = 0, first = -1;
    for (int i = 0; i < v.size(); ++i) {
      if (std::abs(v(i)) > 1e-12) {
        ++count;
        if (first < 0) first = i;
      }
    }
    return std::pair{count, first};
  };
  std::stable_sort(rows.begin(), rows.end(),
                   [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return support(a) < support(b); });
  Eigen::MatrixXd out(rows.size(), n);
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = rows[i].transpose();
  return out;
}

}  // namespace

Eigen::MatrixXd spin_squared_matrix(const SectorBasis& basis) {
  require_spinful(basis);
  const int sites = basis.lattice.sites();
  std::vector<OperatorTerm> terms;
  terms.reserve(sites * sites);
  for (int k = 0; k < sites; ++k) {
    for (int kp = 0; kp < sites; ++kp) {
      terms.push_back({1.0, {cdag(2 * k + 1), c(2 * k), cdag(2 * kp), c(2 * kp + 1)}});
    }
  }
  Eigen::MatrixXd s2 = operator_matrix(terms, basis);
  const double m = sz(basis);
  s2.diagonal().array() += m * (m + 1.0);
  return s2;
}

Eigen::MatrixXd parity_matrix(const SectorBasis& basis) {
  require_spinful(basis);
  const auto& lat = basis.lattice;
  const int n = basis.size();
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (int r = 0; r < n; ++r) {
    std::vector<LadderOp> ops;
    for (int q : basis.orbitals(r)) {
      const int k = momentum_negate(lat, momentum_index(lat, q));
      ops.push_back(cdag(lat.spinful ? 2 * k + (q % 2) : k));
    }
    auto image = apply_ops(ops, Occupation{0});
    const int target = basis.find(image->state);
    if (target < 0) throw PreconditionError("basis is not closed under the parity reflection");
    p(target, r) = image->sign;
  }
  return p;
}

AdaptedBasis adapt_symmetry(const SectorBasis& basis, std::optional<int> twice_s, std::optional<int> parity) {
  require_spinful(basis);
  if (parity && *parity != 1 && *parity != -1) throw PreconditionError("parity must be +1 or -1");
  if (twice_s && *twice_s < 0) throw PreconditionError("total spin must be non-negative");
  AdaptedBasis out;
  out.parent = basis;
  out.twice_s = twice_s;
  out.parity = parity;
  const int n = basis.size();
  if (n == 0) {
    out.coefficients.resize(0, 0);
    return out;
  }

  Eigen::MatrixXd block = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd s2;
  Eigen::MatrixXd par;
  if (twice_s) s2 = spin_squared_matrix(basis);
  if (parity) par = parity_matrix(basis);
  if (twice_s && parity) {
    const double comm = (s2 * par - par * s2).cwiseAbs().maxCoeff();
    if (comm > 1e-10) throw ConsistencyError("S^2 and parity matrices do not commute on this sector");
  }
  if (twice_s) {
    const double s = 0.5 * *twice_s;
    block = eigenspace(s2, s * (s + 1.0));
  }
  if (parity && block.cols() > 0) {
    Eigen::MatrixXd reduced = block.transpose() * par * block;
    reduced = 0.5 * (reduced + reduced.transpose());
    block = block * eigenspace(reduced, static_cast<double>(*parity));
  }
  if (block.cols() == 0) {
    out.coefficients.resize(0, n);
    return out;
  }
  out.coefficients = canonical_rows(block);
  return out;
}

AdaptedBasis AdaptedBasis::from_rows(SectorBasis parent, Eigen::MatrixXd rows, std::optional<int> twice_s,
                                     std::optional<int> parity) {
  if (rows.cols() != parent.size()) {
    throw DimensionMismatchError("coefficient rows have " + std::to_string(rows.cols()) + " columns, basis has " +
                                 std::to_string(parent.size()) + " determinants");
  }
  const Eigen::MatrixXd gram = rows * rows.transpose();
  if ((gram - Eigen::MatrixXd::Identity(rows.rows(), rows.rows())).cwiseAbs().maxCoeff() > kCheckTol) {
    throw PreconditionError("adapted rows are not orthonormal");
  }
  auto check = [&](const Eigen::MatrixXd& op, double value, const char* what) {
    for (int a = 0; a < rows.rows(); ++a) {
      Eigen::VectorXd v = rows.row(a).transpose();
      if ((op * v - value * v).cwiseAbs().maxCoeff() > kCheckTol) {
        throw PreconditionError(std::string("adapted row ") + std::to_string(a) + " is not a " + what + " eigenvector");
      }
    }
  };
  if (twice_s) {
    const double s = 0.5 * *twice_s;
    check(spin_squared_matrix(parent), s * (s + 1.0), "S^2");
  }
  if (parity) check(parity_matrix(parent), static_cast<double>(*parity), "parity");
  AdaptedBasis out;
  out.parent = std::move(parent);
  out.coefficients = std::move(rows);
  out.twice_s = twice_s;
  out.parity = parity;
  return out;
}

Eigen::MatrixXd occupation_map(const SectorBasis& basis) {
  const int d = basis.lattice.orbitals();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, basis.size());
  for (int r = 0; r < basis.size(); ++r) {
    for (int q : basis.orbitals(r)) m(q, r) = 1.0;
  }
  return m;
}

Eigen::MatrixXd occupation_map(const AdaptedBasis& basis) {
  const Eigen::MatrixXd vertices = occupation_map(basis.parent);
  const Eigen::MatrixXd& c = basis.coefficients;
  const int d = vertices.rows();
  Eigen::MatrixXd m(d, c.rows());
  for (int q = 0; q < d; ++q) {
    // <a|n_q|b> = sum_s c_as c_bs v_s(q): determinants are n_q eigenstates.
    const Eigen::MatrixXd nq = c * vertices.row(q).transpose().asDiagonal() * c.transpose();
    Eigen::MatrixXd off = nq;
    off.diagonal().setZero();
    if (off.size() && off.cwiseAbs().maxCoeff() > kCheckTol) {
      throw NotDiagonalError("adapted states mix under n_q for orbital " + std::to_string(q) +
                             "; occupations are not a function of |alpha|^2");
    }
    m.row(q) = nq.diagonal().transpose();
  }
  return m;
}

}  // namespace rdmft
