#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace rdmft {

/// Slater determinant as an occupation word: bit q set iff orbital q occupied.
/// The determinant is c+_{q1} c+_{q2} ... c+_{qN} |0> with q1 < q2 < ... < qN.
using Occupation = std::uint64_t;

struct LadderOp {
  int orbital = 0;
  bool create = true;
};

inline LadderOp cdag(int q) { return {q, true}; }
inline LadderOp c(int q) { return {q, false}; }

inline int particle_count(Occupation s) { return std::popcount(s); }

Occupation make_occupation(std::span<const int> orbitals);
std::vector<int> occupied_orbitals(Occupation s);
std::vector<int> occupation_vector(Occupation s, int orbitals);

struct SignedState {
  Occupation state = 0;
  int sign = 1;
};

/// Applies a product of ladder operators, rightmost first, to |s>. Returns
/// nothing when the result vanishes. Each operator on orbital q picks up
/// (-1)^(number of occupied orbitals below q).
std::optional<SignedState> apply_ops(std::span<const LadderOp> ops, Occupation s);

/// Number of orbitals in which two determinants differ (half the Hamming distance
/// for equal particle number).
inline int excitation_level(Occupation a, Occupation b) { return std::popcount(a ^ b) / 2; }

}  // namespace rdmft
