#include "rdmft/lattice.hpp"

#include <cmath>
#include <numbers>

#include "rdmft/errors.hpp"

namespace rdmft {

int LatticeSpec::sites() const {
  int n = 1;
  for (int i = 0; i < dimension; ++i) n *= length;
  return n;
}

int LatticeSpec::orbitals() const { return sites() * spin_states(); }

void LatticeSpec::validate() const {
  if (dimension < 1) throw PreconditionError("lattice dimension D must be >= 1");
  if (length < 2) throw PreconditionError("lattice length L must be >= 2");
  double d = std::pow(static_cast<double>(length), dimension) * spin_states();
  if (d > 64) {
    throw CapacityError("one-particle dimension " + std::to_string(static_cast<long long>(d)) +
                        " exceeds the 64-orbital occupation word");
  }
}

int orbital_index(const LatticeSpec& lattice, const SpinMomentumOrbital& q) {
  if (static_cast<int>(q.momentum.size()) != lattice.dimension) {
    throw InvalidOrbitalError("momentum vector has wrong dimension");
  }
  for (int nu : q.momentum) {
    if (nu < 0 || nu >= lattice.length) throw InvalidOrbitalError("momentum index out of range");
  }
  const int k = momentum_flat(lattice, q.momentum);
  if (!lattice.spinful) {
    if (q.spin != Spin::None) throw InvalidOrbitalError("spin given on a spinless lattice");
    return k;
  }
  if (q.spin == Spin::None) throw InvalidOrbitalError("spin missing on a spinful lattice");
  return 2 * k + (q.spin == Spin::Down ? 1 : 0);
}

SpinMomentumOrbital orbital_at(const LatticeSpec& lattice, int index) {
  if (index < 0 || index >= lattice.orbitals()) throw InvalidOrbitalError("orbital index out of range");
  SpinMomentumOrbital q;
  q.momentum = momentum_vector(lattice, momentum_index(lattice, index));
  const int s = twice_spin_z(lattice, index);
  q.spin = s == 0 ? Spin::None : (s > 0 ? Spin::Up : Spin::Down);
  return q;
}

int momentum_index(const LatticeSpec& lattice, int orbital) {
  return lattice.spinful ? orbital / 2 : orbital;
}

int twice_spin_z(const LatticeSpec& lattice, int orbital) {
  if (!lattice.spinful) return 0;
  return orbital % 2 == 0 ? 1 : -1;
}

std::vector<int> momentum_vector(const LatticeSpec& lattice, int flat) {
  std::vector<int> nu(lattice.dimension);
  for (int i = lattice.dimension - 1; i >= 0; --i) {
    nu[i] = flat % lattice.length;
    flat /= lattice.length;
  }
  return nu;
}

int momentum_flat(const LatticeSpec& lattice, std::span<const int> momentum) {
  int flat = 0;
  for (int nu : momentum) flat = flat * lattice.length + nu;
  return flat;
}

int momentum_add(const LatticeSpec& lattice, int a, int b) {
  int flat = 0, scale = 1;
  for (int i = 0; i < lattice.dimension; ++i) {
    const int ai = a % lattice.length, bi = b % lattice.length;
    flat += ((ai + bi) % lattice.length) * scale;
    a /= lattice.length;
    b /= lattice.length;
    scale *= lattice.length;
  }
  return flat;
}

int momentum_negate(const LatticeSpec& lattice, int a) {
  int flat = 0, scale = 1;
  for (int i = 0; i < lattice.dimension; ++i) {
    const int ai = a % lattice.length;
    flat += ((lattice.length - ai) % lattice.length) * scale;
    a /= lattice.length;
    scale *= lattice.length;
  }
  return flat;
}

std::string orbital_label(const LatticeSpec& lattice, int orbital) {
  const auto nu = momentum_vector(lattice, momentum_index(lattice, orbital));
  std::string out;
  if (nu.size() == 1) {
    out = std::to_string(nu[0]);
  } else {
    out = "(";
    for (std::size_t i = 0; i < nu.size(); ++i) {
      if (i) out += ",";
      out += std::to_string(nu[i]);
    }
    out += ")";
  }
  const int s = twice_spin_z(lattice, orbital);
  if (s > 0) out += "u";
  if (s < 0) out += "d";
  return out;
}

double dispersion(const LatticeSpec& lattice, const SpinMomentumOrbital& q) {
  return dispersion(lattice, orbital_index(lattice, q));
}

double dispersion(const LatticeSpec& lattice, int orbital) {
  if (orbital < 0 || orbital >= lattice.orbitals()) throw InvalidOrbitalError("orbital index out of range");
  double e = 0.0;
  for (int nu : momentum_vector(lattice, momentum_index(lattice, orbital))) {
    // Exact zeros and signs for the common quarter/half turns keep golden
    // values like eps = 0 on the square free of 1e-16 noise.
    const int turn4 = 4 * nu;
    double c;
    if (turn4 % lattice.length == 0) {
      static constexpr double quarter[4] = {1.0, 0.0, -1.0, 0.0};
      c = quarter[(turn4 / lattice.length) % 4];
    } else {
      c = std::cos(2.0 * std::numbers::pi * nu / lattice.length);
    }
    e += -2.0 * lattice.hopping * c;
  }
  return e;
}

std::vector<double> orbital_energies(const LatticeSpec& lattice) {
  std::vector<double> eps(lattice.orbitals());
  for (int q = 0; q < lattice.orbitals(); ++q) eps[q] = dispersion(lattice, q);
  return eps;
}

double kinetic_functional(const LatticeSpec& lattice, std::span<const double> occupations) {
  if (static_cast<int>(occupations.size()) != lattice.orbitals()) {
    throw DimensionMismatchError("occupation vector length " + std::to_string(occupations.size()) +
                                 " != one-particle dimension " + std::to_string(lattice.orbitals()));
  }
  double t = 0.0;
  for (int q = 0; q < lattice.orbitals(); ++q) t += dispersion(lattice, q) * occupations[q];
  return t;
}

}  // namespace rdmft
