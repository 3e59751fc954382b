#include "rdmft/configuration.hpp"

#include <string>

#include "rdmft/errors.hpp"

namespace rdmft {

Occupation make_occupation(std::span<const int> orbitals) {
  Occupation s = 0;
  for (int q : orbitals) {
    if (q < 0 || q >= 64) throw InvalidOrbitalError("orbital " + std::to_string(q) + " outside 0..63");
    const Occupation bit = Occupation{1} << q;
    if (s & bit) throw InvalidOrbitalError("orbital " + std::to_string(q) + " listed twice");
    s |= bit;
  }
  return s;
}

std::vector<int> occupied_orbitals(Occupation s) {
  std::vector<int> out;
  out.reserve(std::popcount(s));
  while (s) {
    out.push_back(std::countr_zero(s));
    s &= s - 1;
  }
  return out;
}

std::vector<int> occupation_vector(Occupation s, int orbitals) {
  std::vector<int> v(orbitals, 0);
  for (int q : occupied_orbitals(s)) {
    if (q >= orbitals) throw InvalidOrbitalError("occupied orbital beyond one-particle dimension");
    v[q] = 1;
  }
  return v;
}

std::optional<SignedState> apply_ops(std::span<const LadderOp> ops, Occupation s) {
  int sign = 1;
  for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
    if (it->orbital < 0 || it->orbital >= 64) throw InvalidOrbitalError("ladder operator orbital out of range");
    const Occupation bit = Occupation{1} << it->orbital;
    const bool occupied = (s & bit) != 0;
    if (occupied == it->create) return std::nullopt;
    if (std::popcount(s & (bit - 1)) & 1) sign = -sign;
    s ^= bit;
  }
  return SignedState{s, sign};
}

}  // namespace rdmft
