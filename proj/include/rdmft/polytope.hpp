#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "rdmft/rational.hpp"

namespace rdmft {

/// Independent occupation coordinates and the affine relations fixing the rest:
/// n_q = constant[q] + sum_k coefficients[q][k] * n_{independent[k]}.
struct AffineChart {
  int full_dimension = 0;
  std::vector<int> independent;
  RationalVector constant;
  RationalMatrix coefficients;

  int dimension() const { return static_cast<int>(independent.size()); }
  std::vector<double> expand(std::span<const double> chart) const;
  RationalVector expand(const RationalVector& chart) const;
  std::vector<double> restrict(std::span<const double> full) const;
  RationalVector restrict(const RationalVector& full) const;
};

/// D(n) = constant + sum_k coefficients[k] n_{independent[k]} >= 0 with coprime
/// integer coefficients.
struct FacetConstraint {
  std::int64_t constant = 0;
  std::vector<std::int64_t> coefficients;
  int label = 0;

  double value(std::span<const double> chart) const;
  Rational value(const RationalVector& chart) const;
  friend bool operator==(const FacetConstraint&, const FacetConstraint&) = default;
};

struct Membership {
  bool inside = false;
  double margin = 0.0;
};

struct RepresentabilityPolytope {
  RationalMatrix vertices;
  AffineChart chart;
  std::vector<FacetConstraint> facets;
  RationalMatrix incidence;
  bool simplex = false;
  /// For simplices: facet_of_vertex[r] is the facet not containing vertex r.
  std::vector<int> facet_of_vertex;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int facet_count() const { return static_cast<int>(facets.size()); }
  int dimension() const { return chart.dimension(); }

  std::vector<double> chart_vertex(int r) const;
  std::vector<double> centroid() const;
  /// Largest distance between two chart vertices.
  double diameter() const;
  std::vector<double> facet_values(std::span<const double> chart) const;
  /// Simplices only: D(n) of the facet opposite vertex r, rescaled so it is 1 at v_r.
  double simplex_coordinate(int r, std::span<const double> chart) const;
};

/// Exact affine hull. Pivot columns are taken from `preferred` first and then
/// in ascending orbital order; independent indices are reported ascending.
AffineChart affine_chart(const RationalMatrix& vertices, std::span<const int> preferred = {});

/// Brute-force hyperplane enumeration over affinely independent vertex subsets.
/// Facets are oriented inward, reduced to coprime integers and ordered by the
/// first vertex they do not contain, then lexicographically.
std::vector<FacetConstraint> facet_enumeration(const RationalMatrix& vertices, const AffineChart& chart);

RationalMatrix incidence_matrix(const RepresentabilityPolytope& polytope);
Membership contains(const RepresentabilityPolytope& polytope, std::span<const double> chart);
bool is_simplex(const RepresentabilityPolytope& polytope);

RepresentabilityPolytope build_polytope(const RationalMatrix& vertices, std::span<const int> preferred = {});

/// Exact vertices from the columns of an occupation map (entries recovered as
/// small-denominator fractions).
RationalMatrix rational_vertices(const Eigen::MatrixXd& occupation_map);

/// Facet enumeration guard limits.
inline constexpr int kMaxChartDimension = 12;
inline constexpr int kMaxVertices = 512;
inline constexpr double kMaxSubsets = 2e7;

}  // namespace rdmft
