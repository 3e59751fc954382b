#include <doctest.h>

#include <numeric>
#include <random>

#include "rdmft/adapted.hpp"
#include "rdmft/errors.hpp"
#include "rdmft/hubbard_square.hpp"
#include "rdmft/polytope.hpp"
#include "rdmft/sector.hpp"
#include "support/oracles.hpp"

using namespace rdmft;

namespace {

RationalMatrix to_rational(const std::vector<std::vector<int>>& rows) {
  RationalMatrix out;
  for (const auto& row : rows) out.emplace_back(row.begin(), row.end());
  return out;
}

Eigen::MatrixXd columns(const RationalMatrix& vertices) {
  Eigen::MatrixXd m(vertices.front().size(), vertices.size());
  for (std::size_t r = 0; r < vertices.size(); ++r) {
    for (std::size_t q = 0; q < vertices[r].size(); ++q) m(q, r) = vertices[r][q].to_double();
  }
  return m;
}

const RationalMatrix kRingVertices = to_rational(
    {{1, 1, 0, 0, 0, 1}, {1, 0, 1, 0, 1, 0}, {0, 1, 1, 1, 0, 0}, {0, 0, 0, 1, 1, 1}});

int affine_rank(const std::vector<std::vector<double>>& points) {
  if (points.size() < 2) return 0;
  Eigen::MatrixXd m(points.front().size(), points.size() - 1);
  for (std::size_t i = 1; i < points.size(); ++i) {
    for (std::size_t k = 0; k < points[i].size(); ++k) m(k, i - 1) = points[i][k] - points[0][k];
  }
  return static_cast<int>(Eigen::FullPivLU<Eigen::MatrixXd>(m).rank());
}

// Every facet: vertices on the inner side, tight set spans a hyperplane,
// integer coefficients coprime.
void check_facets(const RepresentabilityPolytope& p) {
  for (int j = 0; j < p.facet_count(); ++j) {
    const auto& f = p.facets[j];
    std::int64_t g = std::abs(f.constant);
    for (auto a : f.coefficients) g = std::gcd(g, std::abs(a));
    CHECK(g == 1);
    std::vector<std::vector<double>> tight;
    for (int r = 0; r < p.vertex_count(); ++r) {
      CHECK(p.incidence[j][r] >= Rational(0));
      if (p.incidence[j][r].is_zero()) tight.push_back(p.chart_vertex(r));
    }
    CHECK(affine_rank(tight) == p.dimension() - 1);
  }
}

}  // namespace

TEST_CASE("ring chart and its four facets") {
  const auto p = build_polytope(kRingVertices);
  CHECK(p.chart.independent == std::vector<int>{0, 1, 2});
  // n3 = 1 - n0, n4 = 1 - n1, n5 = 1 - n2.
  for (int q = 3; q < 6; ++q) {
    CHECK(p.chart.constant[q] == Rational(1));
    for (int k = 0; k < 3; ++k) CHECK(p.chart.coefficients[q][k] == Rational(k == q - 3 ? -1 : 0));
  }
  REQUIRE(p.facet_count() == 4);
  CHECK(p.facets[0].constant == 0);
  CHECK(p.facets[0].coefficients == std::vector<std::int64_t>{1, 1, -1});
  CHECK(p.facets[1].coefficients == std::vector<std::int64_t>{1, -1, 1});
  CHECK(p.facets[2].coefficients == std::vector<std::int64_t>{-1, 1, 1});
  CHECK(p.facets[3].constant == 2);
  CHECK(p.facets[3].coefficients == std::vector<std::int64_t>{-1, -1, -1});
  CHECK(p.simplex);
  CHECK(p.facet_of_vertex == std::vector<int>{0, 1, 2, 3});
  check_facets(p);

  const auto centroid = p.centroid();
  CHECK(contains(p, centroid).inside);
  CHECK(contains(p, centroid).margin == doctest::Approx(0.5));
  for (int r = 0; r < 4; ++r) CHECK(p.simplex_coordinate(r, p.chart_vertex(r)) == doctest::Approx(1.0));
  CHECK(p.diameter() == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("expand and restrict round trip") {
  const auto p = build_polytope(kRingVertices);
  const std::vector<double> y{0.2, 0.3, 0.4};
  const auto n = p.chart.expand(y);
  CHECK(n[3] == doctest::Approx(0.8));
  CHECK(n[5] == doctest::Approx(0.6));
  CHECK(p.chart.restrict(n) == std::vector<double>{0.2, 0.3, 0.4});
  CHECK_THROWS_AS(p.chart.expand(std::vector<double>{0.1}), DimensionMismatchError);
  CHECK_THROWS_AS(p.chart.restrict(std::vector<double>{0.1}), DimensionMismatchError);
  CHECK_THROWS_AS(contains(p, std::vector<double>{0.1, 0.2}), DimensionMismatchError);
}

TEST_CASE("Hubbard square chart is the segment 0 <= n2 <= 1") {
  const auto p = square::polytope();
  CHECK(p.chart.independent == std::vector<int>{square::kChartOrbital});
  REQUIRE(p.facet_count() == 2);
  std::vector<std::pair<std::int64_t, std::int64_t>> got;
  for (const auto& f : p.facets) got.emplace_back(f.constant, f.coefficients[0]);
  std::sort(got.begin(), got.end());
  CHECK(got == std::vector<std::pair<std::int64_t, std::int64_t>>{{0, 1}, {1, -1}});
  CHECK(p.simplex == false);  // three vertices on a line
  std::vector<double> chart;
  for (int r = 0; r < 3; ++r) chart.push_back(p.chart_vertex(r)[0]);
  CHECK(chart == std::vector<double>{0.0, 1.0, 0.5});

  const auto in = contains(p, std::vector<double>{0.3});
  CHECK(in.inside);
  CHECK(in.margin == doctest::Approx(0.3));
  const auto out = contains(p, std::vector<double>{1.1});
  CHECK_FALSE(out.inside);
  CHECK(out.margin == doctest::Approx(-0.1));
  // n_{1 up} is 1/2 on every vertex, so it is a constant in the chart.
  const auto n = p.chart.expand(std::vector<double>{0.3});
  CHECK(n[2] == doctest::Approx(0.5));
  CHECK(n[0] == doctest::Approx(0.7));
}

TEST_CASE("preferred pivots and validation") {
  const std::vector<int> pref{5};
  const auto c = affine_chart(kRingVertices, pref);
  CHECK(c.independent == std::vector<int>{0, 1, 5});
  const std::vector<int> bad{6};
  CHECK_THROWS_AS(affine_chart(kRingVertices, bad), InvalidOrbitalError);
  CHECK_THROWS_AS(affine_chart({}), PreconditionError);
  CHECK_THROWS_AS(affine_chart(to_rational({{1, 0}, {1}})), DimensionMismatchError);
}

TEST_CASE("degenerate and low-dimensional hulls") {
  const auto one = build_polytope(to_rational({{1, 0, 1}}));
  CHECK(one.dimension() == 0);
  CHECK(one.facet_count() == 0);
  CHECK(contains(one, std::vector<double>{}).inside);

  const auto two = build_polytope(to_rational({{1, 0}, {0, 1}}));
  CHECK(two.dimension() == 1);
  CHECK(two.facet_count() == 2);
  CHECK(two.simplex);

  const auto square = build_polytope(to_rational({{0, 0}, {1, 0}, {0, 1}, {1, 1}}));
  CHECK(square.facet_count() == 4);
  CHECK_FALSE(square.simplex);
  CHECK_THROWS_AS(square.simplex_coordinate(0, std::vector<double>{0.5, 0.5}), NotSimplexError);
  check_facets(square);
}

TEST_CASE("membership agrees with a convex-combination oracle") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<RationalMatrix> cases{kRingVertices, square::polytope().vertices};
  for (const auto& b : enumerate_all_sectors(LatticeSpec{1, 4, 1.0, true}, 4)) {
    if (b.size() >= 4) cases.push_back(rational_vertices(occupation_map(b)));
  }
  for (const auto& b : enumerate_all_sectors(LatticeSpec{1, 7, 1.0, false}, 3)) cases.push_back(rational_vertices(occupation_map(b)));
  int checked = 0;
  for (const auto& v : cases) {
    const auto p = build_polytope(v);
    check_facets(p);
    const Eigen::MatrixXd cols = columns(v);
    // Inside: random convex combinations.
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXd w(v.size());
      for (auto& x : w) x = -std::log(unit(rng));
      w /= w.sum();
      const Eigen::VectorXd n = cols * w;
      const auto m = contains(p, p.chart.restrict(std::vector<double>(n.data(), n.data() + n.size())));
      CHECK(m.inside);
      CHECK(m.margin >= -1e-12);
    }
    // Random chart points: membership must match the NNLS residual.
    for (int trial = 0; trial < 40; ++trial) {
      std::vector<double> y(p.dimension());
      for (auto& x : y) x = 1.4 * unit(rng) - 0.2;
      const auto m = contains(p, y);
      if (std::abs(m.margin) < 1e-6) continue;
      const auto full = p.chart.expand(y);
      const double res = oracle::hull_residual(cols, Eigen::Map<const Eigen::VectorXd>(full.data(), full.size()));
      CHECK(m.inside == (res < 1e-8));
      ++checked;
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("simplex detection on sector polytopes") {
  // Any two determinants give a segment, any affinely independent set a simplex.
  const auto p = build_polytope(to_rational({{1, 1, 0, 0}, {1, 0, 1, 0}, {0, 1, 0, 1}}));
  CHECK(p.simplex);
  CHECK(p.dimension() == 2);
  const auto q = build_polytope(to_rational({{1, 1, 0, 0}, {1, 0, 1, 0}, {0, 1, 0, 1}, {0, 0, 1, 1}}));
  CHECK_FALSE(q.simplex);
  CHECK(q.dimension() == 2);
}

TEST_CASE("rational vertices from an occupation map") {
  Eigen::MatrixXd m(2, 2);
  m << 0.5, 1.0 / 3.0, 0.5, 2.0 / 3.0;
  const auto v = rational_vertices(m);
  CHECK(v[0][0] == Rational(1, 2));
  CHECK(v[1][0] == Rational(1, 3));
  CHECK(v[1][1] == Rational(2, 3));
}

TEST_CASE("facet enumeration guards") {
  std::vector<std::vector<int>> wide;
  for (int i = 0; i < 14; ++i) {
    std::vector<int> e(14, 0);
    e[i] = 1;
    wide.push_back(e);
  }
  wide.push_back(std::vector<int>(14, 0));
  CHECK_THROWS_AS(build_polytope(to_rational(wide)), CapacityError);

  std::vector<std::vector<int>> many;
  for (int mask = 0; mask < 600; ++mask) {
    std::vector<int> e(12);
    for (int i = 0; i < 12; ++i) e[i] = (mask >> i) & 1;
    many.push_back(e);
  }
  CHECK_THROWS_AS(build_polytope(to_rational(many)), CapacityError);
  many.resize(400);
  // 400 points in 12 dimensions: subset count exceeds the scan budget.
  CHECK_THROWS_AS(build_polytope(to_rational(many)), CapacityError);
}

TEST_CASE("Hubbard square incidence matrix and its Gram matrix") {
  const auto p = square::polytope();
  const RationalMatrix expected{{Rational(1), Rational(0), Rational(1, 2)}, {Rational(0), Rational(1), Rational(1, 2)}};
  CHECK(p.incidence == expected);
  Eigen::MatrixXd a(2, 3);
  for (int j = 0; j < 2; ++j) {
    for (int r = 0; r < 3; ++r) a(j, r) = p.incidence[j][r].to_double();
  }
  Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a.transpose() * a).eigenvalues();
  CHECK(std::abs(ev(0)) < 1e-12);
  CHECK(ev(1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ev(2) == doctest::Approx(1.5).epsilon(1e-12));
}
