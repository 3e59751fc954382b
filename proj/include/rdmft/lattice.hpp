#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rdmft {

/// Hypercubic one-band lattice with periodic boundaries and nearest-neighbour
/// hopping. Energies are in the same units as `hopping`.
struct LatticeSpec {
  int dimension = 1;
  int length = 2;
  double hopping = 1.0;
  bool spinful = true;

  int sites() const;
  /// One-particle dimension d = L^D (x2 when spinful).
  int orbitals() const;
  int spin_states() const { return spinful ? 2 : 1; }
  /// Throws UsageError unless D >= 1, L >= 2 and d fits a 64-bit occupation word.
  void validate() const;

  friend bool operator==(const LatticeSpec&, const LatticeSpec&) = default;
};

/// Up = +1/2, Down = -1/2; spinless lattices use None.
enum class Spin : int { None = 0, Up = 1, Down = -1 };

/// Plane-wave spin orbital |nu m>. Orbitals are ordered lexicographically on
/// (nu_1, ..., nu_D, m) with Up before Down; the flat index follows that order.
struct SpinMomentumOrbital {
  std::vector<int> momentum;
  Spin spin = Spin::None;

  friend bool operator==(const SpinMomentumOrbital&, const SpinMomentumOrbital&) = default;
};

int orbital_index(const LatticeSpec& lattice, const SpinMomentumOrbital& q);
SpinMomentumOrbital orbital_at(const LatticeSpec& lattice, int index);

/// Flat momentum (site) index of an orbital and its spin as +1/-1/0.
int momentum_index(const LatticeSpec& lattice, int orbital);
int twice_spin_z(const LatticeSpec& lattice, int orbital);

std::vector<int> momentum_vector(const LatticeSpec& lattice, int momentum_flat);
int momentum_flat(const LatticeSpec& lattice, std::span<const int> momentum);
/// Componentwise (a + b) mod L, and -a mod L, on flat momentum indices.
int momentum_add(const LatticeSpec& lattice, int a, int b);
int momentum_negate(const LatticeSpec& lattice, int a);

/// Human-readable label such as "2u" / "0d" (1-D) or "(1,0)u".
std::string orbital_label(const LatticeSpec& lattice, int orbital);

/// eps = -2t sum_i cos(2 pi nu_i / L).
double dispersion(const LatticeSpec& lattice, const SpinMomentumOrbital& q);
double dispersion(const LatticeSpec& lattice, int orbital);
std::vector<double> orbital_energies(const LatticeSpec& lattice);

/// T[n] = sum_q eps_q n_q over a full-length occupation vector.
double kinetic_functional(const LatticeSpec& lattice, std::span<const double> occupations);

}  // namespace rdmft
