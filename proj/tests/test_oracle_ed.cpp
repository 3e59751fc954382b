#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <tuple>

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

GroundStateResult square_ground_state(double u) {
  const auto b = square::sector_basis();
  return ground_state(make_hamiltonian(b, build_interaction_matrix(square::interaction(u), b)));
}

}  // namespace

TEST_CASE("square ground state in both limits") {
  CHECK(square_ground_state(1e-6).energy == doctest::Approx(-4.0).epsilon(1e-5));
  const double u = 50.0;
  const double series = -12.0 / u + 120.0 / std::pow(u, 3);
  CHECK(std::abs(square_ground_state(u).energy - series) <= 1e-3 * std::abs(series));
}

TEST_CASE("ground state residual, sign and occupations") {
  const auto b = square::sector_basis();
  const auto h = make_hamiltonian(b, build_interaction_matrix(square::interaction(4.0), b));
  const auto g = ground_state(h);
  CHECK((h.matrix * g.vector - g.energy * g.vector).cwiseAbs().maxCoeff() <= 1e-10 * h.matrix.norm());
  CHECK(g.residual <= 1e-10 * h.matrix.norm());
  Eigen::Index lead = 0;
  g.vector.cwiseAbs().maxCoeff(&lead);
  CHECK(g.vector(lead) > 0);
  const auto p = build_polytope(rational_vertices(h.occupation));
  CHECK(contains(p, p.chart.restrict(g.occupations)).inside);
  CHECK(g.label.has_value());
  CHECK(g.label->momentum == std::vector<int>{2});
  // Adapted and determinant bases agree on E0.
  const auto a = square::reference_basis();
  CHECK(ground_state(make_hamiltonian(a, build_interaction_matrix(square::interaction(4.0), a))).energy ==
        doctest::Approx(g.energy).epsilon(1e-12));
}

TEST_CASE("noninteracting limit: sum of the lowest allowed band energies") {
  for (const auto& b : enumerate_all_sectors(kRing, 3)) {
    const auto h = make_hamiltonian(b, build_interaction_matrix(InteractionSpec::density_density({0.0}), b));
    double lowest = 1e300;
    for (int r = 0; r < b.size(); ++r) {
      double e = 0.0;
      for (int q : b.orbitals(r)) e += dispersion(kRing, q);
      lowest = std::min(lowest, e);
    }
    CHECK(ground_state(h).energy == doctest::Approx(lowest).epsilon(1e-12));
  }
  CHECK(square_ground_state(0.0).energy == doctest::Approx(-4.0).epsilon(1e-12));
}

TEST_CASE("brute-force Levy search: trivial cases") {
  const auto b = square::sector_basis();
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(b.size(), b.size());
  const auto m = occupation_map(b);
  std::vector<double> n(m.rows());
  Eigen::VectorXd::Map(n.data(), n.size()) = m * Eigen::VectorXd::Constant(b.size(), 1.0 / b.size());
  CHECK(std::abs(levy_brute_force(b, zero, n).value) < 1e-12);

  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal;
  // An extreme point fixes Psi up to sign. The third adapted square state
  // sits at n2 = 1/2, between the other two.
  const auto ring = enumerate_sector(kRing, 3, label({0}, 3));
  for (const auto& [occ, size, extreme] : {std::tuple{occupation_map(ring), ring.size(), 4},
                                           std::tuple{occupation_map(square::reference_basis()), 3, 2}}) {
    Eigen::MatrixXd v(size, size);
    for (int i = 0; i < size; ++i) {
      for (int j = 0; j <= i; ++j) v(i, j) = v(j, i) = normal(rng);
    }
    for (int r = 0; r < extreme; ++r) {
      std::vector<double> vertex(occ.rows());
      Eigen::VectorXd::Map(vertex.data(), vertex.size()) = occ.col(r);
      // Constraint gradients vanish at a vertex, so convergence there is slow.
      CHECK(levy_brute_force(occ, v, vertex).value == doctest::Approx(v(r, r)).epsilon(1e-6).scale(1.0));
    }
  }
  const Eigen::MatrixXd v = Eigen::MatrixXd::Identity(b.size(), b.size());
  const std::vector<double> bad(m.rows(), 0.9);
  CHECK_THROWS_AS(levy_brute_force(b, v, bad), InfeasibleError);
}

TEST_CASE("brute-force Levy search on the Hubbard square") {
  const auto a = square::reference_basis();
  const Eigen::MatrixXd v = build_interaction_matrix(square::interaction(4.0), a).values;
  const auto p = square::polytope();
  const std::vector<double> chart{0.25};
  const auto res = levy_brute_force(a, v, p.chart.expand(chart));
  CHECK(res.value == doctest::Approx(functional_general(p, v, chart).value).epsilon(1e-6));
  CHECK(res.value == doctest::Approx(square::exact_functional(4.0, 0.25)).epsilon(1e-6));
  CHECK(res.residual < 1e-8);
  CHECK(std::abs(res.amplitudes.norm() - 1.0) < 1e-10);
  CHECK(res.amplitudes.dot(v * res.amplitudes) == doctest::Approx(res.value).epsilon(1e-10));
  REQUIRE_FALSE(res.best_so_far.empty());
  for (std::size_t i = 1; i < res.best_so_far.size(); ++i) CHECK(res.best_so_far[i] <= res.best_so_far[i - 1]);
}

TEST_CASE("brute-force guard and determinism") {
  const auto sectors = enumerate_all_sectors(LatticeSpec{1, 10, 1.0, false}, 5);
  const auto big = std::max_element(sectors.begin(), sectors.end(),
                                    [](const auto& x, const auto& y) { return x.size() < y.size(); });
  REQUIRE(big->size() > kMaxBruteForceStates);
  const auto m = occupation_map(*big);
  std::vector<double> n(m.rows());
  Eigen::VectorXd::Map(n.data(), n.size()) = m * Eigen::VectorXd::Constant(big->size(), 1.0 / big->size());
  CHECK_THROWS_AS(levy_brute_force(*big, Eigen::MatrixXd::Identity(big->size(), big->size()), n), CapacityError);

  const auto b = enumerate_sector(kRing, 3, label({0}, 3));
  const Eigen::MatrixXd v = build_interaction_matrix(InteractionSpec::density_density({1.0}), b).values;
  const std::vector<double> half{0.5, 0.5, 0.5, 0.5, 0.5, 0.5};
  BruteForceOptions two_workers;
  two_workers.workers = 2;
  CHECK(levy_brute_force(b, v, half).value == levy_brute_force(b, v, half, two_workers).value);
}

TEST_CASE("total-energy minimization reproduces exact diagonalization") {
  const auto p = square::polytope();
  const auto a = square::reference_basis();
  for (double u : {0.0, 0.1, 20.0}) {
    const Eigen::MatrixXd v = build_interaction_matrix(square::interaction(u), a).values;
    const auto problem = make_problem(p, v);
    const auto min = minimize_total_energy(square::lattice(), p, [&](std::span<const double> y) {
      return functional_general(problem, y).value;
    });
    const auto ed = square_ground_state(u);
    CHECK(min.energy == doctest::Approx(ed.energy).epsilon(1e-6));
    CHECK(min.chart[0] == doctest::Approx(ed.occupations[square::kChartOrbital]).epsilon(1e-3).scale(1e-4));
  }

  const auto b = enumerate_sector(kRing, 3, label({0}, 3));
  const auto ring = build_polytope(rational_vertices(occupation_map(b)));
  const Eigen::MatrixXd v = build_interaction_matrix(InteractionSpec::density_density({1.0}), b).values;
  const auto min = minimize_total_energy(kRing, ring, [&](std::span<const double> y) {
    return functional_simplex(ring, v, y).value;
  });
  const auto ed = ground_state(make_hamiltonian(b, build_interaction_matrix(InteractionSpec::density_density({1.0}), b)));
  CHECK(min.energy == doctest::Approx(ed.energy).epsilon(1e-6));
  CHECK(min.converged);
}

TEST_CASE("total-energy minimization with the minimum on a facet") {
  // For K=2 and K=4 the exact ground state has zero weight on one vertex.
  for (int k : {1, 2, 4}) {
    const auto b = enumerate_sector(kRing, 3, label({k}, 3));
    const auto ring = build_polytope(rational_vertices(occupation_map(b)));
    const auto im = build_interaction_matrix(InteractionSpec::density_density({1.0}), b);
    const auto problem = make_problem(ring, im.values);
    const auto min = minimize_total_energy(kRing, ring, [&](std::span<const double> y) {
      return functional_general(problem, y).value;
    });
    const double e0 = ground_state(make_hamiltonian(b, im)).energy;
    CHECK(std::abs(min.energy - e0) <= 1e-6 * std::max(std::abs(e0), 1e-6));
    CHECK(min.converged);
    CHECK(contains(ring, min.chart).inside);
  }
}
