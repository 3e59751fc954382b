#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rdmft/configuration.hpp"
#include "rdmft/lattice.hpp"

namespace rdmft {

/// Quantum numbers of a symmetry sector. Spin quantities are stored doubled so
/// they stay integral: twice_mz = 2 Mz, twice_s = 2 S.
struct SectorLabel {
  std::vector<int> momentum;
  int twice_mz = 0;
  std::optional<int> twice_s;
  std::optional<int> parity;

  std::string to_string() const;
  friend bool operator==(const SectorLabel&, const SectorLabel&) = default;
};

/// Ordered Slater-determinant basis |r>, r = 0..R-1. The label is absent for
/// hand-built bases that need not share quantum numbers.
struct SectorBasis {
  LatticeSpec lattice;
  int particles = 0;
  std::optional<SectorLabel> label;
  std::vector<Occupation> configurations;

  int size() const { return static_cast<int>(configurations.size()); }
  bool empty() const { return configurations.empty(); }
  std::vector<int> orbitals(int r) const { return occupied_orbitals(configurations.at(r)); }
  /// Index of a determinant in the basis, or -1.
  int find(Occupation s) const;
};

int total_momentum(const LatticeSpec& lattice, Occupation s);
int total_twice_mz(const LatticeSpec& lattice, Occupation s);

/// All N-particle determinants with momentum K and magnetization Mz in
/// lexicographic order of their sorted orbital lists. On a spinless lattice the
/// magnetization is fixed at N/2 and twice_mz must equal N.
SectorBasis enumerate_sector(const LatticeSpec& lattice, int particles, const SectorLabel& sector);

/// Every (K, Mz) sector with at least one determinant, ordered by Mz then K.
std::vector<SectorBasis> enumerate_all_sectors(const LatticeSpec& lattice, int particles);

/// Basis from an explicit determinant list (kept in the given order).
SectorBasis basis_from_configurations(const LatticeSpec& lattice, int particles,
                                      std::vector<Occupation> configurations);

/// Row r is the 0/1 occupation vector of determinant r.
std::vector<std::vector<int>> vertex_vectors(const SectorBasis& basis);

}  // namespace rdmft
