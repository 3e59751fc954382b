#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "rdmft/errors.hpp"
#include "rdmft/interaction.hpp"
#include "rdmft/oracle.hpp"
#include "support/oracles.hpp"

using namespace rdmft;

namespace {

const LatticeSpec kSquare{1, 4, 1.0, true};
const LatticeSpec kRing{1, 6, 1.0, false};

SectorLabel label(std::vector<int> k, int twice_mz) {
  SectorLabel l;
  l.momentum = std::move(k);
  l.twice_mz = twice_mz;
  return l;
}

double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

TEST_CASE("lattice dimensions and validation") {
  CHECK(kSquare.sites() == 4);
  CHECK(kSquare.orbitals() == 8);
  CHECK(kRing.orbitals() == 6);
  CHECK(LatticeSpec{2, 3, 1.0, true}.orbitals() == 18);
  CHECK_THROWS_AS(LatticeSpec({0, 4, 1.0, true}).validate(), UsageError);
  CHECK_THROWS_AS(LatticeSpec({1, 1, 1.0, true}).validate(), UsageError);
  CHECK_THROWS_AS(LatticeSpec({1, 33, 1.0, true}).validate(), CapacityError);
}

TEST_CASE("orbital ordering puts up before down within a momentum") {
  CHECK(orbital_index(kSquare, {{0}, Spin::Up}) == 0);
  CHECK(orbital_index(kSquare, {{0}, Spin::Down}) == 1);
  CHECK(orbital_index(kSquare, {{2}, Spin::Up}) == 4);
  CHECK(orbital_at(kSquare, 7) == SpinMomentumOrbital{{3}, Spin::Down});
  CHECK(orbital_label(kSquare, 5) == "2d");
  const LatticeSpec plane{2, 3, 1.0, false};
  CHECK(orbital_index(plane, {{1, 2}, Spin::None}) == 5);
  CHECK_THROWS_AS(orbital_index(kSquare, {{4}, Spin::Up}), InvalidOrbitalError);
  CHECK_THROWS_AS(orbital_at(kSquare, 8), InvalidOrbitalError);
}

TEST_CASE("tight-binding dispersion") {
  CHECK(dispersion(kRing, {{0}, Spin::None}) == -2.0);
  CHECK(dispersion(kSquare, {{2}, Spin::Up}) == 2.0);
  CHECK(dispersion(kSquare, {{1}, Spin::Down}) == 0.0);
  CHECK(dispersion(kRing, {{1}, Spin::None}) == doctest::Approx(-1.0).epsilon(1e-15));
  const LatticeSpec plane{2, 4, 0.5, true};
  CHECK(dispersion(plane, orbital_index(plane, {{2, 2}, Spin::Up})) == doctest::Approx(2.0));
  CHECK_THROWS_AS(dispersion(kSquare, 9), InvalidOrbitalError);
}

TEST_CASE("kinetic functional") {
  for (double n2 : {0.0, 0.1, 0.37, 0.5, 1.0}) {
    std::vector<double> n(8);
    for (int s : {0, 1}) {
      n[0 + s] = 1.0 - n2;
      n[2 + s] = 0.5;
      n[4 + s] = n2;
      n[6 + s] = 0.5;
    }
    CHECK(kinetic_functional(kSquare, n) == doctest::Approx(-8.0 * (0.5 - n2)).epsilon(1e-14));
  }
  CHECK(kinetic_functional(kSquare, std::vector<double>(8, 0.0)) == 0.0);
  CHECK_THROWS_AS(kinetic_functional(kSquare, std::vector<double>(7, 0.0)), DimensionMismatchError);
}

TEST_CASE("ladder operator signs") {
  const int occ[] = {0, 2, 5};
  const Occupation s = make_occupation(occ);
  // c+_3 passes two occupied orbitals below it.
  const LadderOp add3[] = {cdag(3)};
  auto r = apply_ops(add3, s);
  REQUIRE(r);
  CHECK(r->sign == 1);
  const LadderOp add1[] = {cdag(1)};
  CHECK(apply_ops(add1, s)->sign == -1);
  const LadderOp remove5[] = {c(5)};
  CHECK(apply_ops(remove5, s)->sign == 1);
  const LadderOp twice[] = {cdag(2)};
  CHECK_FALSE(apply_ops(twice, s));
  // c+_a c_b c+_b c_a = n_a (1 - n_b) on a state with a occupied, b empty.
  const LadderOp cycle[] = {cdag(0), c(1), cdag(1), c(0)};
  auto back = apply_ops(cycle, s);
  REQUIRE(back);
  CHECK(back->state == s);
  CHECK(back->sign == 1);
  CHECK(excitation_level(s, make_occupation(std::vector<int>{0, 3, 4})) == 2);
}

TEST_CASE("zero coupling gives a zero interaction matrix") {
  const auto basis = enumerate_sector(kSquare, 4, label({2}, 0));
  CHECK(max_abs(build_interaction_matrix(InteractionSpec::hubbard(0.0), basis).values) == 0.0);
  const auto ring = enumerate_sector(kRing, 3, label({0}, 3));
  CHECK(max_abs(build_interaction_matrix(InteractionSpec::density_density({0.0}), ring).values) == 0.0);
}

TEST_CASE("ring interaction matches the real-space Fock construction") {
  const auto basis = enumerate_sector(kRing, 3, label({0}, 3));
  REQUIRE(basis.size() == 4);
  const oracle::RealSpace fock(kRing, 3);
  REQUIRE(fock.basis.size() == 20);
  const double v0 = 0.83;
  const Eigen::MatrixXd hv = fock.hamiltonian(0.0, {v0}, false);
  const Eigen::MatrixXcd b = fock.embed(basis);
  CHECK((b.adjoint() * b - Eigen::MatrixXcd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
  const Eigen::MatrixXcd reference = b.adjoint() * hv * b;
  const auto v = build_interaction_matrix(InteractionSpec::density_density({v0}), basis);
  CHECK(reference.imag().cwiseAbs().maxCoeff() < 1e-12);
  CHECK(max_abs(reference.real() - v.values) < 1e-12);
  // Kinetic part too.
  const Eigen::MatrixXcd t = b.adjoint() * fock.hamiltonian(0.0, {}, true) * b;
  CHECK(max_abs(t.real() - kinetic_matrix(basis)) < 1e-12);
}

TEST_CASE("Hubbard square sector matrices match the real-space Fock construction") {
  const auto basis = enumerate_sector(kSquare, 4, label({2}, 0));
  const oracle::RealSpace fock(kSquare, 4);
  const Eigen::MatrixXcd b = fock.embed(basis);
  for (double u : {1.0, 3.7}) {
    const Eigen::MatrixXcd ref = b.adjoint() * fock.hamiltonian(u, {0.4}, false) * b;
    const Eigen::MatrixXd v = build_interaction_matrix(InteractionSpec::hubbard(u), basis).values +
                              build_interaction_matrix(InteractionSpec::density_density({0.4}), basis).values;
    CHECK(ref.imag().cwiseAbs().maxCoeff() < 1e-12);
    CHECK(max_abs(ref.real() - v) < 1e-12);
  }
}

TEST_CASE("sector spectra reassemble the full Fock-space spectrum") {
  struct Case {
    LatticeSpec lattice;
    int particles;
    double u;
    std::vector<double> couplings;
  };
  const std::vector<Case> cases{
      {kSquare, 4, 2.5, {}},
      {kSquare, 3, 1.0, {0.6}},
      {kRing, 3, 0.0, {1.0, -0.3}},
      {LatticeSpec{2, 3, 0.7, false}, 3, 0.0, {0.9}},
      {LatticeSpec{1, 5, 1.0, true}, 3, 4.0, {0.5, 0.25}},
  };
  for (const auto& tc : cases) {
    CAPTURE(tc.lattice.length);
    CAPTURE(tc.particles);
    const oracle::RealSpace fock(tc.lattice, tc.particles);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fock.hamiltonian(tc.u, tc.couplings));
    std::vector<double> expected(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());

    std::vector<double> got;
    for (const auto& basis : enumerate_all_sectors(tc.lattice, tc.particles)) {
      Eigen::MatrixXd v = Eigen::MatrixXd::Zero(basis.size(), basis.size());
      if (tc.lattice.spinful) v += build_interaction_matrix(InteractionSpec::hubbard(tc.u), basis).values;
      if (!tc.couplings.empty()) {
        v += build_interaction_matrix(InteractionSpec::density_density(tc.couplings), basis).values;
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sector(v + kinetic_matrix(basis));
      for (int i = 0; i < basis.size(); ++i) got.push_back(sector.eigenvalues()(i));
    }
    std::sort(got.begin(), got.end());
    REQUIRE(got.size() == expected.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) worst = std::max(worst, std::abs(got[i] - expected[i]));
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("interaction matrices are symmetric and vanish across momentum sectors") {
  // Mixed basis from two different K sectors with equal Mz.
  const auto a = enumerate_sector(kSquare, 4, label({0}, 0));
  const auto b = enumerate_sector(kSquare, 4, label({2}, 0));
  std::vector<Occupation> mixed = a.configurations;
  mixed.insert(mixed.end(), b.configurations.begin(), b.configurations.end());
  const auto basis = basis_from_configurations(kSquare, 4, mixed);
  const auto v = build_interaction_matrix(InteractionSpec::hubbard(2.0), basis).values;
  CHECK(max_abs(v - v.transpose()) == 0.0);
  const int na = a.size();
  CHECK(max_abs(v.block(0, na, na, b.size())) == 0.0);
  CHECK(max_abs(v.block(na, 0, b.size(), na)) == 0.0);
}

TEST_CASE("explicit terms reproduce the Hubbard interaction") {
  const double u = 1.7;
  const int ns = kSquare.sites();
  std::vector<OperatorTerm> terms;
  for (int k = 0; k < 4; ++k) {
    for (int p = 0; p < 4; ++p) {
      for (int q = 0; q < 4; ++q) {
        const int a = orbital_index(kSquare, {{(k + q) % 4}, Spin::Up});
        const int bb = orbital_index(kSquare, {{(p - q + 4) % 4}, Spin::Down});
        const int cc = orbital_index(kSquare, {{p}, Spin::Down});
        const int d = orbital_index(kSquare, {{k}, Spin::Up});
        terms.push_back({u / ns, {cdag(a), cdag(bb), c(cc), c(d)}});
      }
    }
  }
  const auto basis = enumerate_sector(kSquare, 4, label({2}, 0));
  const auto custom = InteractionSpec::explicit_terms(terms);
  CHECK(custom.body_count() == 2);
  const auto v1 = build_interaction_matrix(custom, basis).values;
  const auto v2 = build_interaction_matrix(InteractionSpec::hubbard(u), basis).values;
  CHECK(max_abs(v1 - v2) < 1e-12);

  const auto bad_momentum = InteractionSpec::explicit_terms({{1.0, {cdag(2), c(0)}}});
  CHECK_THROWS_AS(build_interaction_matrix(bad_momentum, basis), PreconditionError);
  const auto bad_spin = InteractionSpec::explicit_terms({{1.0, {cdag(1), c(0)}}});
  CHECK_THROWS_AS(build_interaction_matrix(bad_spin, basis), PreconditionError);
  const auto bad_orbital = InteractionSpec::explicit_terms({{1.0, {cdag(9), c(9)}}});
  CHECK_THROWS_AS(build_interaction_matrix(bad_orbital, basis), InvalidOrbitalError);
  const auto non_hermitian = InteractionSpec::explicit_terms({{1.0, {cdag(2), cdag(5), c(3), c(4)}}});
  CHECK_THROWS_AS(build_interaction_matrix(non_hermitian, basis), ConsistencyError);
}

TEST_CASE("density-density coupling at a multiple of L is rejected") {
  const auto basis = enumerate_sector(kRing, 3, label({0}, 3));
  std::vector<double> couplings(6, 0.0);
  couplings[5] = 1.0;
  CHECK_THROWS_AS(build_interaction_matrix(InteractionSpec::density_density(couplings), basis), PreconditionError);
}
