#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "rdmft/errors.hpp"
#include "rdmft/hubbard_square.hpp"
#include "rdmft/levy.hpp"
#include "rdmft/oracle.hpp"
#include "rdmft/sector.hpp"

using namespace rdmft;

namespace {

const LatticeSpec kRing{1, 6, 1.0, false};

SectorLabel label(std::vector<int> k, int twice_mz) {
  SectorLabel l;
  l.momentum = std::move(k);
  l.twice_mz = twice_mz;
  return l;
}

SectorBasis ring_sector() { return enumerate_sector(kRing, 3, label({0}, 3)); }

RepresentabilityPolytope polytope_of(const SectorBasis& b) { return build_polytope(rational_vertices(occupation_map(b))); }

Eigen::MatrixXd square_v(double u) {
  return build_interaction_matrix(square::interaction(u), square::reference_basis()).values;
}

Eigen::MatrixXd random_symmetric(int r, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd v(r, r);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j <= i; ++j) v(i, j) = v(j, i) = normal(rng);
  }
  return v;
}

Eigen::MatrixXd vertex_columns(const RepresentabilityPolytope& p) {
  const int d = static_cast<int>(p.vertices.front().size());
  Eigen::MatrixXd m(d, p.vertex_count());
  for (int r = 0; r < p.vertex_count(); ++r) {
    for (int q = 0; q < d; ++q) m(q, r) = p.vertices[r][q].to_double();
  }
  return m;
}

std::vector<double> random_interior(const RepresentabilityPolytope& p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  Eigen::VectorXd w(p.vertex_count());
  for (auto& x : w) x = unit(rng);
  w /= w.sum();
  const Eigen::VectorXd n = vertex_columns(p) * w;
  return p.chart.restrict(std::vector<double>(n.data(), n.data() + n.size()));
}

void check_feasible(const RepresentabilityPolytope& p, const FunctionalEvaluation& e, std::span<const double> chart) {
  CHECK(e.weights.minCoeff() >= -1e-12);
  CHECK(std::abs(e.weights.sum() - 1.0) <= 1e-10);
  const auto n = p.chart.expand(chart);
  const Eigen::VectorXd mx = vertex_columns(p) * e.weights;
  for (std::size_t q = 0; q < n.size(); ++q) CHECK(std::abs(mx(q) - n[q]) <= 1e-10);
}

std::vector<double> at(double x) { return {x}; }

}  // namespace

TEST_CASE("sign structure") {
  const auto eta = sign_structure(square_v(4.0));
  REQUIRE(eta);
  CHECK(*eta == std::vector<int>{1, 1, 1});

  Eigen::MatrixXd two(2, 2);
  two << 0.3, 0.7, 0.7, -1.0;
  CHECK(sign_structure(two) == std::optional<std::vector<int>>(std::vector<int>{1, -1}));

  Eigen::MatrixXd tri = Eigen::MatrixXd::Ones(3, 3);
  CHECK_FALSE(sign_structure(tri).has_value());

  // Zero couplings leave signs free: a 4-cycle with one missing edge is fine.
  Eigen::MatrixXd chain = Eigen::MatrixXd::Zero(4, 4);
  chain(0, 1) = chain(1, 0) = 1;
  chain(1, 2) = chain(2, 1) = -1;
  chain(2, 3) = chain(3, 2) = 1;
  const auto s = sign_structure(chain);
  REQUIRE(s);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (i != j) CHECK(chain(i, j) * (*s)[i] * (*s)[j] <= 0);
    }
  }
}

TEST_CASE("simplex closed form: trivial values") {
  const auto p = polytope_of(ring_sector());
  REQUIRE(p.simplex);
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(4, 4);
  CHECK(functional_simplex(p, zero, p.centroid()).value == doctest::Approx(0.0));
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd v = random_symmetric(4, rng);
  for (int r = 0; r < 4; ++r) {
    CHECK(functional_simplex(p, v, p.chart_vertex(r)).value == doctest::Approx(v(r, r)).epsilon(1e-12));
    CHECK(functional_general(p, v, p.chart_vertex(r)).value == doctest::Approx(v(r, r)).epsilon(1e-10));
  }
  CHECK_THROWS_AS(functional_simplex(square::polytope(), square_v(1.0), at(0.3)), NotSimplexError);
  CHECK_THROWS_AS(functional_simplex(p, v, std::vector<double>{0.9, 0.9, 0.9}), InfeasibleError);
}

TEST_CASE("simplex closed form agrees with the null-space search") {
  const auto b = ring_sector();
  const auto p = polytope_of(b);
  const Eigen::MatrixXd v = build_interaction_matrix(InteractionSpec::density_density({1.0}), b).values;
  const std::vector<double> half{0.5, 0.5, 0.5};
  const auto s = functional_simplex(p, v, half);
  CHECK(s.value == doctest::Approx(functional_general(p, v, half).value).epsilon(1e-10));
  CHECK(s.value == doctest::Approx(levy_brute_force(b, v, p.chart.expand(half)).value).epsilon(1e-10));
  check_feasible(p, s, half);
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const auto y = random_interior(p, rng);
    const Eigen::MatrixXd w = random_symmetric(4, rng);
    CHECK(functional_simplex(p, w, y).value == doctest::Approx(functional_general(p, w, y).value).epsilon(1e-10));
  }
}

TEST_CASE("null-space search agrees with the brute-force oracle") {
  std::mt19937_64 rng(21);
  std::vector<SectorBasis> bases;
  for (const auto& b : enumerate_all_sectors(LatticeSpec{1, 4, 1.0, true}, 4)) {
    if (b.size() >= 4 && b.size() <= 10) bases.push_back(b);
  }
  for (const auto& b : enumerate_all_sectors(LatticeSpec{1, 8, 1.0, false}, 4)) {
    if (b.size() <= 10) bases.push_back(b);
  }
  REQUIRE(bases.size() >= 4);
  int compared = 0;
  for (int trial = 0; trial < 8; ++trial) {
    const auto& b = bases[trial % bases.size()];
    const auto p = polytope_of(b);
    const Eigen::MatrixXd v = random_symmetric(b.size(), rng);
    const auto y = random_interior(p, rng);
    const auto fast = functional_general(p, v, y);
    const auto slow = levy_brute_force(b, v, p.chart.expand(y));
    CHECK(fast.value == doctest::Approx(slow.value).epsilon(1e-6).scale(1.0));
    CHECK(fast.converged);
    check_feasible(p, fast, y);
    CHECK(levy_energy(v, fast.weights, fast.signs) == doctest::Approx(fast.value).epsilon(1e-12));
    ++compared;
  }
  CHECK(compared == 8);
}

TEST_CASE("invariance under shifts and basis permutations") {
  std::mt19937_64 rng(4);
  const auto b = enumerate_sector(LatticeSpec{1, 4, 1.0, true}, 4, label({2}, 0));
  const auto p = polytope_of(b);
  const Eigen::MatrixXd v = random_symmetric(b.size(), rng);
  const auto y = random_interior(p, rng);
  const double f = functional_general(p, v, y).value;
  const Eigen::MatrixXd shifted = v + 0.75 * Eigen::MatrixXd::Identity(b.size(), b.size());
  CHECK(functional_general(p, shifted, y).value == doctest::Approx(f + 0.75).epsilon(1e-9));

  std::vector<int> perm(b.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  RationalMatrix pv;
  Eigen::MatrixXd pvv(b.size(), b.size());
  for (int i = 0; i < b.size(); ++i) {
    pv.push_back(p.vertices[perm[i]]);
    for (int j = 0; j < b.size(); ++j) pvv(i, j) = v(perm[i], perm[j]);
  }
  const auto q = build_polytope(pv);
  const auto yq = q.chart.restrict(p.chart.expand(y));
  CHECK(functional_general(q, pvv, yq).value == doctest::Approx(f).epsilon(1e-9));
}

TEST_CASE("Hubbard square functional values") {
  const auto problem = make_problem(square::polytope(), square_v(4.0));
  CHECK(std::abs(functional_general(problem, at(0.5)).value) < 1e-10);
  for (double n2 : {0.05, 0.25, 0.7}) {
    CHECK(functional_general(problem, at(n2)).value == doctest::Approx(square::exact_functional(4.0, n2)).epsilon(1e-9));
  }
  CHECK(functional_general(problem, at(1e-10)).value == doctest::Approx(3.0).epsilon(1e-4));
  // Non-negative V: F >= 0 everywhere.
  for (int i = 0; i <= 20; ++i) CHECK(functional_general(problem, at(i / 20.0)).value >= -1e-12);
  CHECK_THROWS_AS(functional_general(problem, at(1.2)), InfeasibleError);
}

TEST_CASE("ensemble functional") {
  std::mt19937_64 rng(12);
  const auto b = enumerate_sector(LatticeSpec{1, 4, 1.0, true}, 4, label({2}, 0));
  const auto p = polytope_of(b);
  for (int trial = 0; trial < 4; ++trial) {
    Eigen::MatrixXd v = random_symmetric(b.size(), rng);
    const auto y = random_interior(p, rng);
    const auto problem = make_problem(p, v);
    const double fp = functional_general(problem, y).value;
    const auto fe = functional_ensemble(problem, y);
    CHECK(fe.value <= fp + 1e-8);
    check_feasible(p, fe, y);
    // Sign condition: make every off-diagonal negative.
    for (int i = 0; i < v.rows(); ++i) {
      for (int j = 0; j < v.cols(); ++j) {
        if (i != j) v(i, j) = -std::abs(v(i, j));
      }
    }
    const auto signed_problem = make_problem(p, v);
    CHECK(functional_ensemble(signed_problem, y).value ==
          doctest::Approx(functional_general(signed_problem, y).value).epsilon(1e-6).scale(1.0));
  }
  const auto zero = make_problem(p, Eigen::MatrixXd(Eigen::MatrixXd::Zero(b.size(), b.size())));
  CHECK(std::abs(functional_ensemble(zero, random_interior(p, rng)).value) < 1e-12);

  const auto sq = make_problem(square::polytope(), square_v(1.0));
  for (int i = 1; i + 2 <= 9; ++i) {
    const double a = i / 10.0;
    const double c = (i + 2) / 10.0;
    const double fm = functional_ensemble(sq, at(0.5 * (a + c))).value;
    CHECK(fm <= 0.5 * (functional_ensemble(sq, at(a)).value + functional_ensemble(sq, at(c)).value) + 1e-8);
  }
}

TEST_CASE("exchange force on the Hubbard square") {
  const auto problem = make_problem(square::polytope(), square_v(1.0));
  CHECK(std::abs(exchange_force(problem, at(0.5))[0]) < 1e-6);
  const double near = exchange_force(problem, at(1e-4))[0];
  const double far = exchange_force(problem, at(1e-2))[0];
  CHECK(near < 0);
  CHECK(std::abs(near / far) == doctest::Approx(10.0).epsilon(0.15));
  // Force -dF/dn points into the polytope near both facets.
  CHECK(-exchange_force(problem, at(1e-3))[0] > 0);
  CHECK(-exchange_force(problem, at(1 - 1e-3))[0] < 0);
  CHECK_THROWS_AS(exchange_force(problem, at(1e-4), 1e-3), StepTooLargeError);
}

TEST_CASE("finite-difference force matches the simplex closed-form gradient") {
  const auto p = polytope_of(ring_sector());
  std::mt19937_64 rng(30);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::MatrixXd v = random_symmetric(4, rng);
    const auto y = random_interior(p, rng);
    const auto eval = functional_simplex(p, v, y);
    const auto problem = make_problem(p, v);
    const auto fd = exchange_force(problem, y);
    Eigen::VectorXd x(4);
    for (int r = 0; r < 4; ++r) x(r) = p.simplex_coordinate(r, y);
    for (int k = 0; k < p.dimension(); ++k) {
      double g = 0.0;
      for (int r = 0; r < 4; ++r) {
        const int j = p.facet_of_vertex[r];
        const double dx = p.facets[j].coefficients[k] / p.incidence[j][r].to_double();
        double s = 0.0;
        for (int q = 0; q < 4; ++q) s += v(r, q) * eval.signs[r] * eval.signs[q] * std::sqrt(x(q));
        g += dx * s / std::sqrt(x(r));
      }
      CHECK(fd[k] == doctest::Approx(g).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("boundary exponent") {
  const auto sq = make_problem(square::polytope(), square_v(0.01));
  for (int j = 0; j < 2; ++j) {
    const auto fit = boundary_expansion(sq, j);
    CHECK(fit.beta == doctest::Approx(0.5).epsilon(0.04));
    CHECK(fit.g / 0.01 == doctest::Approx(-std::sqrt(13.0) / 2).epsilon(0.01));
    CHECK(fit.f0 / 0.01 == doctest::Approx(0.75).epsilon(1e-6));
  }
  const auto p = polytope_of(ring_sector());
  std::mt19937_64 rng(9);
  Eigen::MatrixXd v = random_symmetric(4, rng);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (i != j) v(i, j) = -std::abs(v(i, j));
    }
  }
  const auto ring = make_problem(p, v);
  for (int j = 0; j < 4; ++j) CHECK(boundary_expansion(ring, j).beta == doctest::Approx(0.5).epsilon(0.04));

  const auto zero = make_problem(p, Eigen::MatrixXd(Eigen::MatrixXd::Zero(4, 4)));
  const auto flat = boundary_expansion(zero, 0);
  CHECK(std::abs(flat.g) < 1e-12);
  CHECK(std::abs(flat.f0) < 1e-12);

  BoundaryPath bad;
  bad.distances = {1e-3, 1e-4};
  CHECK_THROWS_AS(boundary_expansion(ring, 0, bad), PreconditionError);
}

TEST_CASE("complex interactions") {
  const auto p = square::polytope();
  Eigen::MatrixXcd v = square_v(1.0).cast<std::complex<double>>();
  CHECK_NOTHROW(make_problem(p, v));
  v(0, 1) += std::complex<double>(0, 0.1);
  v(1, 0) -= std::complex<double>(0, 0.1);
  CHECK_THROWS_AS(make_problem(p, v), UnsupportedError);
}
