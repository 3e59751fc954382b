#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rdmft/polytope.hpp"

namespace rdmft {

struct FunctionalOptions {
  int restarts = 16;
  std::uint64_t seed = 20240601;
  int max_iterations = 300;
  /// Patterns are enumerated exhaustively up to this many states, greedy beyond.
  int exhaustive_sign_limit = 20;
  int greedy_starts = 8;
  /// Sign patterns that receive random restarts after the first sweep.
  int restart_patterns = 4;
  double constraint_tol = 1e-10;
  /// Facets with D(n) below this are treated as tight.
  double snap_tol = 1e-10;
  /// Ensemble search: extra random starts besides the pure warm start.
  int ensemble_restarts = 4;
};

/// Fixed data of Levy's constrained search on one polytope: V, the equality
/// system B x = b with B = [M_ind; 1^T], and an orthonormal basis W of ker B.
struct ConstrainedSearchProblem {
  RepresentabilityPolytope polytope;
  Eigen::MatrixXd interaction;
  Eigen::MatrixXd constraint;
  Eigen::MatrixXd null_space;
  Eigen::VectorXd singular_values;

  int size() const { return static_cast<int>(interaction.rows()); }
  Eigen::VectorXd rhs(std::span<const double> chart) const;
};

ConstrainedSearchProblem make_problem(const RepresentabilityPolytope& polytope, const Eigen::MatrixXd& v);
/// Complex input is accepted only when it is real; otherwise UnsupportedError.
ConstrainedSearchProblem make_problem(const RepresentabilityPolytope& polytope, const Eigen::MatrixXcd& v);

struct FunctionalEvaluation {
  double value = 0.0;
  /// x_r = |alpha_r|^2.
  Eigen::VectorXd weights;
  std::vector<int> signs;
  bool converged = true;
  std::vector<double> facet_margins;
  int sign_patterns = 0;
  int local_solves = 0;
  int restarts = 0;
  /// Ensemble only: Gamma_rq = sqrt(x_r x_q) u_r . u_q with unit rows u_r.
  Eigen::MatrixXd directions;
};

/// eta with V_rq eta_r eta_q <= 0 for all r != q, if one exists.
std::optional<std::vector<int>> sign_structure(const Eigen::MatrixXd& v, double tol = 1e-14);

/// sum_rq V_rq eta_r eta_q sqrt(x_r x_q).
double levy_energy(const Eigen::MatrixXd& v, const Eigen::VectorXd& x, const std::vector<int>& signs);

FunctionalEvaluation functional_simplex(const RepresentabilityPolytope& polytope, const Eigen::MatrixXd& v,
                                        std::span<const double> chart, const FunctionalOptions& options = {});

FunctionalEvaluation functional_general(const ConstrainedSearchProblem& problem, std::span<const double> chart,
                                        const FunctionalOptions& options = {});
FunctionalEvaluation functional_general(const RepresentabilityPolytope& polytope, const Eigen::MatrixXd& v,
                                        std::span<const double> chart, const FunctionalOptions& options = {});

FunctionalEvaluation functional_ensemble(const ConstrainedSearchProblem& problem, std::span<const double> chart,
                                         const FunctionalOptions& options = {});

/// Central-difference dF/dn per chart coordinate. step <= 0 selects
/// 1e-5 * polytope diameter.
std::vector<double> exchange_force(const ConstrainedSearchProblem& problem, std::span<const double> chart,
                                   double step = 0.0, const FunctionalOptions& options = {});

struct BoundaryPath {
  /// Interior start point; defaults to the vertex centroid.
  std::vector<double> origin;
  /// Sampled D(n) values, geometrically spaced.
  std::vector<double> distances;
};

struct BoundaryFit {
  double f0 = 0.0;
  double g = 0.0;
  double beta = 0.0;
  double residual = 0.0;
  bool poor_fit = false;
  std::vector<double> facet_point;
  std::vector<double> distances;
  std::vector<double> values;
};

/// Fits F(n) = F0 + G D^beta along the ray from `origin` to the centroid of
/// the vertices on facet j (0-based).
BoundaryFit boundary_expansion(const ConstrainedSearchProblem& problem, int facet, const BoundaryPath& path = {},
                               const FunctionalOptions& options = {});

std::vector<double> default_boundary_distances();

}  // namespace rdmft
