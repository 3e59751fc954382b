#pragma once

#include <span>
#include <vector>

#include "rdmft/adapted.hpp"
#include "rdmft/interaction.hpp"
#include "rdmft/polytope.hpp"
#include "rdmft/table.hpp"

/// Four-site Hubbard ring at half filling in the K = pi, Mz = 0 sector,
/// restricted to its S = 0, p = -1 block. Couplings are u = U/t and energies
/// are in units of t.
namespace rdmft::square {

LatticeSpec lattice();
SectorLabel sector();
/// The ten determinants with K = pi, Mz = 0.
SectorBasis sector_basis();
/// Three S = 0, p = -1 states in the order (|0u0d3u3d> - |0u0d1u1d>)/sqrt2,
/// (|1u1d2u2d> - |2u2d3u3d>)/sqrt2 and the six-determinant open-shell state.
AdaptedBasis reference_basis();
/// Orbital of 2-up, the independent chart coordinate n2.
inline constexpr int kChartOrbital = 4;
/// Polytope of the reference basis charted by n2.
RepresentabilityPolytope polytope();
InteractionSpec interaction(double u);

/// Exact F(n2) by bounded minimization of U[a1^2 + 2 a2(n2; a1)^2] over a1.
/// Throws PreconditionError unless 0 <= n2 <= 1 and u >= 0.
double exact_functional(double u, double n2);

enum class Regime { Weak, Strong };

/// Weak: U[3/4 - (sqrt13/2) sqrt(m)] with m = min(n2, 1 - n2).
/// Strong: U[(4/3) d^2 + (40/27) d^4] with d = 1/2 - n2.
double asymptotic_functional(double u, double n2, Regime regime);

struct EnergyPoint {
  double energy = 0.0;
  double n2 = 0.0;
};

/// Weak: E0 = -4 + 3u/4 - 13u^2/128, n2 = 13u^2/1024.
/// Strong: E0 = -12/u + 120/u^3, n2 = 1/2 - 3/u + 60/u^3.
EnergyPoint asymptotic_energy(double u, Regime regime);

/// Ground state of the ten-determinant sector by exact diagonalization.
EnergyPoint exact_energy(double u);

/// min over n2 of -4 + 8 n2 + u F(n2).
EnergyPoint functional_energy(double u);

struct SquareScan {
  double u = 0.0;
  std::vector<double> n2;
  std::vector<double> values;
  /// -1 or +1: the branch that attained the minimum (0 at n2 = 1/2).
  std::vector<int> branches;
};

SquareScan scan_functional(double u, std::span<const double> n2, int workers = 1);

/// Columns n2, F_exact, F_weak, F_strong.
Table figure_functional(double u, std::span<const double> n2, int workers = 1);
/// Columns u, E0_exact, E0_weak, E0_strong, rel_err_strong, n2_exact, n2_weak,
/// n2_strong.
Table figure_energy(std::span<const double> u, int workers = 1);

}  // namespace rdmft::square
