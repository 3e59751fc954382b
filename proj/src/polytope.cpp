#include "rdmft/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "rdmft/errors.hpp"

namespace rdmft {

namespace {

// Reduced row echelon form, visiting columns in `order`. Returns pivot columns
// (one per nonzero row, in row order).
std::vector<int> rref(RationalMatrix& m, const std::vector<int>& order) {
  std::vector<int> pivots;
  std::size_t row = 0;
  for (int col : order) {
    if (row == m.size()) break;
    std::size_t sel = row;
    while (sel < m.size() && m[sel][col].is_zero()) ++sel;
    if (sel == m.size()) continue;
    std::swap(m[row], m[sel]);
    const Rational inv = Rational(1) / m[row][col];
    for (auto& x : m[row]) x *= inv;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (i == row || m[i][col].is_zero()) continue;
      const Rational f = m[i][col];
      for (std::size_t j = 0; j < m[i].size(); ++j) m[i][j] -= f * m[row][j];
    }
    pivots.push_back(col);
    ++row;
  }
  m.resize(row);
  return pivots;
}

std::int64_t lcm_checked(std::int64_t a, std::int64_t b) {
  const std::int64_t g = std::gcd(a, b);
  std::int64_t out = 0;
  if (__builtin_mul_overflow(a / g, b, &out)) throw ConsistencyError("facet normalization overflow");
  return out;
}

// Scales a rational hyperplane to coprime integers (sign preserved).
std::vector<std::int64_t> to_coprime_integers(const RationalVector& h) {
  std::int64_t l = 1;
  for (const auto& x : h) l = lcm_checked(l, x.den());
  std::vector<std::int64_t> out;
  std::int64_t g = 0;
  for (const auto& x : h) {
    const Rational scaled = x * Rational(l);
    out.push_back(scaled.num());
    g = std::gcd(g, scaled.num());
  }
  if (g > 1) {
    for (auto& x : out) x /= g;
  }
  return out;
}

double binomial(int n, int k) {
  double b = 1.0;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

}  // namespace

std::vector<double> AffineChart::expand(std::span<const double> chart) const {
  if (static_cast<int>(chart.size()) != dimension()) {
    throw DimensionMismatchError("chart point has " + std::to_string(chart.size()) + " coordinates, expected " +
                                 std::to_string(dimension()));
  }
  std::vector<double> full(full_dimension);
  for (int q = 0; q < full_dimension; ++q) {
    double v = constant[q].to_double();
    for (int k = 0; k < dimension(); ++k) v += coefficients[q][k].to_double() * chart[k];
    full[q] = v;
  }
  return full;
}

RationalVector AffineChart::expand(const RationalVector& chart) const {
  if (static_cast<int>(chart.size()) != dimension()) throw DimensionMismatchError("chart point has wrong length");
  RationalVector full(full_dimension);
  for (int q = 0; q < full_dimension; ++q) {
    Rational v = constant[q];
    for (int k = 0; k < dimension(); ++k) v += coefficients[q][k] * chart[k];
    full[q] = v;
  }
  return full;
}

std::vector<double> AffineChart::restrict(std::span<const double> full) const {
  if (static_cast<int>(full.size()) != full_dimension) {
    throw DimensionMismatchError("occupation vector has " + std::to_string(full.size()) + " entries, expected " +
                                 std::to_string(full_dimension));
  }
  std::vector<double> out;
  for (int q : independent) out.push_back(full[q]);
  return out;
}

RationalVector AffineChart::restrict(const RationalVector& full) const {
  if (static_cast<int>(full.size()) != full_dimension) throw DimensionMismatchError("occupation vector has wrong length");
  RationalVector out;
  for (int q : independent) out.push_back(full[q]);
  return out;
}

double FacetConstraint::value(std::span<const double> chart) const {
  if (chart.size() != coefficients.size()) throw DimensionMismatchError("chart point has wrong length for facet");
  double v = static_cast<double>(constant);
  for (std::size_t k = 0; k < coefficients.size(); ++k) v += static_cast<double>(coefficients[k]) * chart[k];
  return v;
}

Rational FacetConstraint::value(const RationalVector& chart) const {
  if (chart.size() != coefficients.size()) throw DimensionMismatchError("chart point has wrong length for facet");
  Rational v(constant);
  for (std::size_t k = 0; k < coefficients.size(); ++k) v += Rational(coefficients[k]) * chart[k];
  return v;
}

AffineChart affine_chart(const RationalMatrix& vertices, std::span<const int> preferred) {
  if (vertices.empty()) throw PreconditionError("affine chart needs at least one vertex");
  const int d = static_cast<int>(vertices.front().size());
  for (const auto& v : vertices) {
    if (static_cast<int>(v.size()) != d) throw DimensionMismatchError("vertices have different lengths");
  }
  std::vector<int> order;
  std::vector<bool> seen(d, false);
  for (int q : preferred) {
    if (q < 0 || q >= d) throw InvalidOrbitalError("preferred pivot outside the one-particle dimension");
    if (!seen[q]) order.push_back(q);
    seen[q] = true;
  }
  for (int q = 0; q < d; ++q) {
    if (!seen[q]) order.push_back(q);
  }

  RationalMatrix diffs;
  for (std::size_t i = 1; i < vertices.size(); ++i) {
    RationalVector row(d);
    for (int q = 0; q < d; ++q) row[q] = vertices[i][q] - vertices[0][q];
    diffs.push_back(std::move(row));
  }
  std::vector<int> pivots = rref(diffs, order);

  // Report independent coordinates ascending; permute rows to match.
  std::vector<int> perm(pivots.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::sort(perm.begin(), perm.end(), [&](int a, int b) { return pivots[a] < pivots[b]; });

  AffineChart chart;
  chart.full_dimension = d;
  const auto& v0 = vertices.front();
  for (int j : perm) chart.independent.push_back(pivots[j]);
  chart.constant.assign(d, Rational(0));
  chart.coefficients.assign(d, RationalVector(pivots.size(), Rational(0)));
  for (int q = 0; q < d; ++q) {
    Rational c = v0[q];
    for (std::size_t k = 0; k < perm.size(); ++k) {
      const auto& row = diffs[perm[k]];
      chart.coefficients[q][k] = row[q];
      c -= row[q] * v0[pivots[perm[k]]];
    }
    chart.constant[q] = c;
  }
  return chart;
}

std::vector<FacetConstraint> facet_enumeration(const RationalMatrix& vertices, const AffineChart& chart) {
  const int k = chart.dimension();
  if (k == 0) return {};
  if (k > kMaxChartDimension || static_cast<int>(vertices.size()) > kMaxVertices) {
    throw CapacityError("facet enumeration guard exceeded (chart dimension " + std::to_string(k) + ", " +
                        std::to_string(vertices.size()) + " vertices); use an external convex-hull tool");
  }
  RationalMatrix points;
  for (std::size_t r = 0; r < vertices.size(); ++r) {
    auto y = chart.restrict(vertices[r]);
    if (std::find(points.begin(), points.end(), y) == points.end()) points.push_back(std::move(y));
  }
  const int p = static_cast<int>(points.size());
  if (binomial(p, k) > kMaxSubsets) {
    throw CapacityError("facet enumeration would scan " + std::to_string(binomial(p, k)) +
                        " vertex subsets; use an external convex-hull tool");
  }

  std::map<std::vector<std::int64_t>, int> found;
  std::vector<int> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<int> natural(k + 1);
  std::iota(natural.begin(), natural.end(), 0);
  while (true) {
    RationalMatrix sys;
    for (int i : idx) {
      RationalVector row{Rational(1)};
      row.insert(row.end(), points[i].begin(), points[i].end());
      sys.push_back(std::move(row));
    }
    auto piv = rref(sys, natural);
    if (static_cast<int>(piv.size()) == k) {
      int free_col = 0;
      while (std::find(piv.begin(), piv.end(), free_col) != piv.end()) ++free_col;
      RationalVector h(k + 1, Rational(0));
      h[free_col] = Rational(1);
      for (int i = 0; i < k; ++i) h[piv[i]] = -sys[i][free_col];
      int pos = 0, neg = 0;
      for (const auto& y : points) {
        Rational v = h[0];
        for (int j = 0; j < k; ++j) v += h[j + 1] * y[j];
        pos += v.sign() > 0;
        neg += v.sign() < 0;
        if (pos && neg) break;
      }
      if (!(pos && neg)) {
        if (neg) {
          for (auto& x : h) x = -x;
        }
        found.emplace(to_coprime_integers(h), 0);
      }
    }
    int i = k - 1;
    while (i >= 0 && idx[i] == p - k + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }

  struct Keyed {
    std::size_t first_positive;
    std::vector<std::int64_t> coeffs;
  };
  std::vector<Keyed> keyed;
  for (const auto& [coeffs, unused] : found) {
    FacetConstraint f{coeffs[0], std::vector<std::int64_t>(coeffs.begin() + 1, coeffs.end()), 0};
    std::size_t first = vertices.size();
    for (std::size_t r = 0; r < vertices.size(); ++r) {
      if (f.value(chart.restrict(vertices[r])).sign() > 0) {
        first = r;
        break;
      }
    }
    keyed.push_back({first, coeffs});
  }
  std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
    if (a.first_positive != b.first_positive) return a.first_positive < b.first_positive;
    return a.coeffs < b.coeffs;
  });
  std::vector<FacetConstraint> out;
  for (std::size_t j = 0; j < keyed.size(); ++j) {
    out.push_back({keyed[j].coeffs[0],
                   std::vector<std::int64_t>(keyed[j].coeffs.begin() + 1, keyed[j].coeffs.end()),
                   static_cast<int>(j) + 1});
  }
  return out;
}

RationalMatrix incidence_matrix(const RepresentabilityPolytope& polytope) {
  RationalMatrix a;
  for (const auto& f : polytope.facets) {
    RationalVector row;
    for (const auto& v : polytope.vertices) row.push_back(f.value(polytope.chart.restrict(v)));
    a.push_back(std::move(row));
  }
  return a;
}

Membership contains(const RepresentabilityPolytope& polytope, std::span<const double> chart) {
  if (static_cast<int>(chart.size()) != polytope.dimension()) {
    throw DimensionMismatchError("point has " + std::to_string(chart.size()) + " chart coordinates, polytope has " +
                                 std::to_string(polytope.dimension()));
  }
  if (polytope.facets.empty()) return {true, 0.0};
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& f : polytope.facets) margin = std::min(margin, f.value(chart));
  return {margin >= -1e-12, margin};
}

bool is_simplex(const RepresentabilityPolytope& polytope) {
  const int r = polytope.vertex_count();
  if (polytope.facet_count() != r) return false;
  for (const auto& row : polytope.incidence) {
    int tight = 0;
    for (const auto& a : row) tight += a.is_zero();
    if (tight != r - 1) return false;
  }
  return true;
}

RepresentabilityPolytope build_polytope(const RationalMatrix& vertices, std::span<const int> preferred) {
  RepresentabilityPolytope p;
  p.vertices = vertices;
  p.chart = affine_chart(vertices, preferred);
  p.facets = facet_enumeration(vertices, p.chart);
  p.incidence = incidence_matrix(p);
  p.simplex = is_simplex(p);
  if (p.simplex) {
    p.facet_of_vertex.assign(p.vertex_count(), -1);
    for (int j = 0; j < p.facet_count(); ++j) {
      for (int r = 0; r < p.vertex_count(); ++r) {
        if (!p.incidence[j][r].is_zero()) p.facet_of_vertex[r] = j;
      }
    }
  }
  return p;
}

std::vector<double> RepresentabilityPolytope::chart_vertex(int r) const {
  std::vector<double> out;
  for (const auto& x : chart.restrict(vertices.at(r))) out.push_back(x.to_double());
  return out;
}

std::vector<double> RepresentabilityPolytope::centroid() const {
  std::vector<double> c(dimension(), 0.0);
  for (int r = 0; r < vertex_count(); ++r) {
    const auto v = chart_vertex(r);
    for (int k = 0; k < dimension(); ++k) c[k] += v[k] / vertex_count();
  }
  return c;
}

double RepresentabilityPolytope::diameter() const {
  double best = 0.0;
  for (int a = 0; a < vertex_count(); ++a) {
    const auto va = chart_vertex(a);
    for (int b = a + 1; b < vertex_count(); ++b) {
      const auto vb = chart_vertex(b);
      double s = 0.0;
      for (int k = 0; k < dimension(); ++k) s += (va[k] - vb[k]) * (va[k] - vb[k]);
      best = std::max(best, std::sqrt(s));
    }
  }
  return best;
}

std::vector<double> RepresentabilityPolytope::facet_values(std::span<const double> chart_point) const {
  std::vector<double> out;
  for (const auto& f : facets) out.push_back(f.value(chart_point));
  return out;
}

double RepresentabilityPolytope::simplex_coordinate(int r, std::span<const double> chart_point) const {
  if (!simplex) throw NotSimplexError("polytope is not a simplex");
  const int j = facet_of_vertex.at(r);
  return facets[j].value(chart_point) / incidence[j][r].to_double();
}

RationalMatrix rational_vertices(const Eigen::MatrixXd& occupation_map) {
  RationalMatrix out;
  for (int r = 0; r < occupation_map.cols(); ++r) {
    RationalVector v;
    for (int q = 0; q < occupation_map.rows(); ++q) v.push_back(Rational::from_double(occupation_map(q, r), 1 << 12));
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace rdmft
