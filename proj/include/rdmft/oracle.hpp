#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "rdmft/adapted.hpp"
#include "rdmft/interaction.hpp"
#include "rdmft/polytope.hpp"

namespace rdmft {

/// H = T + V on a sector basis; `occupation` is the map n = M |Psi|^2.
struct SectorHamiltonian {
  Eigen::MatrixXd matrix;
  Eigen::MatrixXd occupation;
  std::optional<SectorLabel> label;

  int size() const { return static_cast<int>(matrix.rows()); }
};

SectorHamiltonian make_hamiltonian(const SectorBasis& basis, const InteractionMatrix& v);
SectorHamiltonian make_hamiltonian(const AdaptedBasis& basis, const InteractionMatrix& v);

struct GroundStateResult {
  double energy = 0.0;
  Eigen::VectorXd vector;
  std::vector<double> occupations;
  std::optional<SectorLabel> label;
  double residual = 0.0;
};

inline constexpr int kMaxDenseSector = 2000;

/// Lowest eigenpair by dense symmetric diagonalization; the eigenvector's
/// largest-magnitude component is made positive.
GroundStateResult ground_state(const SectorHamiltonian& h);

struct BruteForceOptions {
  int restarts = 200;
  std::uint64_t seed = 7;
  int workers = 1;
};

struct BruteForceResult {
  double value = 0.0;
  Eigen::VectorXd amplitudes;
  double residual = 0.0;
  /// Best value after each restart.
  std::vector<double> best_so_far;
};

inline constexpr int kMaxBruteForceStates = 12;

/// min <Psi|V|Psi> over real unit Psi with M |Psi|^2 = n (full occupation
/// vector). Augmented-Lagrangian Newton runs from starts whose sign patterns
/// cycle through every orthant, each followed by a Gauss-Newton projection
/// onto the constraints.
BruteForceResult levy_brute_force(const Eigen::MatrixXd& occupation, const Eigen::MatrixXd& v,
                                  std::span<const double> n, const BruteForceOptions& options = {});
BruteForceResult levy_brute_force(const SectorBasis& basis, const Eigen::MatrixXd& v, std::span<const double> n,
                                  const BruteForceOptions& options = {});
BruteForceResult levy_brute_force(const AdaptedBasis& basis, const Eigen::MatrixXd& v, std::span<const double> n,
                                  const BruteForceOptions& options = {});

struct EnergyOptions {
  int starts = 8;
  std::uint64_t seed = 11;
  int max_iterations = 400;
};

struct EnergyMinimum {
  double energy = 0.0;
  std::vector<double> chart;
  bool converged = true;
};

using ChartFunctional = std::function<double(std::span<const double>)>;

/// min over the polytope of E[n] = T[n] + F[n]. One chart coordinate: bounded
/// Brent search plus the endpoints. More: multi-start descent in barycentric
/// vertex weights with finite-difference gradients, vertices included as
/// candidates.
EnergyMinimum minimize_total_energy(const LatticeSpec& lattice, const RepresentabilityPolytope& polytope,
                                    const ChartFunctional& functional, const EnergyOptions& options = {});

}  // namespace rdmft
