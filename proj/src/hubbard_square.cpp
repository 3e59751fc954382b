#include "rdmft/hubbard_square.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>

#include "rdmft/errors.hpp"
#include "rdmft/oracle.hpp"
#include "rdmft/parallel.hpp"

namespace rdmft::square {

namespace {

const double kSqrt3 = std::sqrt(3.0);
constexpr double kSeam = 1e-6;

Occupation det(std::initializer_list<std::pair<int, Spin>> orbitals) {
  const LatticeSpec lat = lattice();
  std::vector<int> indices;
  for (const auto& [nu, spin] : orbitals) indices.push_back(orbital_index(lat, {{nu}, spin}));
  return make_occupation(indices);
}

struct BranchMinimum {
  double value = std::numeric_limits<double>::infinity();
  int branch = 0;
};

// U-free functional a1^2 + 2 a2^2 on one branch. The branch is traced by
// t = sqrt(a1^2 (1 - a1^2) - delta^2) in [0, tmax] rather than by a1, because
// near n2 = 1/2 its minimum is a valley of width ~delta^3 in a1 but ~delta in
// t. Each t has two a1 roots (sheet -1: a1^2 <= 1/2, sheet +1: a1^2 >= 1/2).
// Returns +inf where a1^2 + a2^2 > 1.
double branch_value(double delta, int branch, int sheet, double t) {
  const double q = std::max(0.0, 1.0 - 4.0 * (delta * delta + t * t));
  const double r = delta * delta + t * t;
  const double a1 = sheet > 0 ? std::sqrt((1.0 + std::sqrt(q)) / 2.0) : std::sqrt(2.0 * r / (1.0 + std::sqrt(q)));
  if (a1 <= 0.0) return std::numeric_limits<double>::infinity();
  const double a2 = (delta + branch * kSqrt3 * t) / (2.0 * a1);
  if (a1 * a1 + a2 * a2 > 1.0 + 1e-14) return std::numeric_limits<double>::infinity();
  return a1 * a1 + 2.0 * a2 * a2;
}

double minimize_branch(double delta, int branch) {
  const double tmax = std::sqrt(std::max(0.0, 0.25 - delta * delta));
  if (tmax == 0.0) return branch_value(delta, branch, 1, 0.0);
  // Uniform plus geometric nodes; Brent then polishes between the neighbours
  // of the best node.
  std::vector<double> nodes{0.0};
  for (int i = 1; i <= 256; ++i) nodes.push_back(tmax * i / 256.0);
  for (int k = 1; k <= 320; ++k) nodes.push_back(tmax * std::pow(10.0, -k / 20.0));
  std::sort(nodes.begin(), nodes.end());
  double best = std::numeric_limits<double>::infinity();
  for (int sheet : {-1, 1}) {
    auto f = [&](double t) { return branch_value(delta, branch, sheet, t); };
    int best_i = -1;
    double sheet_best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double v = f(nodes[i]);
      if (v < sheet_best) {
        sheet_best = v;
        best_i = static_cast<int>(i);
      }
    }
    if (best_i < 0) continue;
    const double a = nodes[std::max(0, best_i - 1)];
    const double b = nodes[std::min<int>(static_cast<int>(nodes.size()) - 1, best_i + 1)];
    // Brent's tolerance has an absolute floor, so search the unit interval.
    auto g = [&](double s) { return f(a + s * (b - a)); };
    std::uintmax_t iterations = 200;
    const double v =
        boost::math::tools::brent_find_minima(g, 0.0, 1.0, std::numeric_limits<double>::digits / 2, iterations).second;
    best = std::min({best, sheet_best, v});
  }
  return best;
}

BranchMinimum minimize_functional(double n2) {
  const double delta = 0.5 - n2;
  BranchMinimum out;
  if (n2 == 0.5) {
    out.value = 0.0;
    return out;
  }
  const bool seam = std::abs(delta) < kSeam;
  for (int branch : {-1, 1}) {
    if (!seam && branch != (n2 < 0.5 ? -1 : 1)) continue;
    const double v = minimize_branch(delta, branch);
    if (v < out.value) out = {v, branch};
  }
  return out;
}

void check_u(double u) {
  if (!(u >= 0.0) || !std::isfinite(u)) throw PreconditionError("coupling u must be finite and non-negative");
}

}  // namespace

LatticeSpec lattice() { return LatticeSpec{1, 4, 1.0, true}; }

SectorLabel sector() {
  SectorLabel label;
  label.momentum = {2};
  label.twice_mz = 0;
  return label;
}

SectorBasis sector_basis() { return enumerate_sector(lattice(), 4, sector()); }

AdaptedBasis reference_basis() {
  SectorBasis parent = sector_basis();
  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(3, parent.size());
  auto set = [&](int row, Occupation s, double value) {
    const int r = parent.find(s);
    if (r < 0) throw ConsistencyError("reference determinant missing from the sector");
    rows(row, r) = value;
  };
  using enum Spin;
  const double h = 1.0 / std::sqrt(2.0);
  set(0, det({{0, Up}, {0, Down}, {3, Up}, {3, Down}}), h);
  set(0, det({{0, Up}, {0, Down}, {1, Up}, {1, Down}}), -h);
  set(1, det({{1, Up}, {1, Down}, {2, Up}, {2, Down}}), h);
  set(1, det({{2, Up}, {2, Down}, {3, Up}, {3, Down}}), -h);
  const double c = 1.0 / (2.0 * kSqrt3);
  set(2, det({{0, Down}, {1, Up}, {2, Down}, {3, Up}}), -2.0 * c);
  set(2, det({{0, Up}, {1, Down}, {2, Up}, {3, Down}}), -2.0 * c);
  set(2, det({{0, Down}, {1, Down}, {2, Up}, {3, Up}}), c);
  set(2, det({{0, Up}, {1, Up}, {2, Down}, {3, Down}}), c);
  set(2, det({{0, Up}, {1, Down}, {2, Down}, {3, Up}}), c);
  set(2, det({{0, Down}, {1, Up}, {2, Up}, {3, Down}}), c);
  return AdaptedBasis::from_rows(std::move(parent), std::move(rows), 0, -1);
}

RepresentabilityPolytope polytope() {
  const int preferred[] = {kChartOrbital};
  return build_polytope(rational_vertices(occupation_map(reference_basis())), preferred);
}

InteractionSpec interaction(double u) { return InteractionSpec::hubbard(u); }

double exact_functional(double u, double n2) {
  check_u(u);
  if (!(n2 >= 0.0 && n2 <= 1.0)) throw PreconditionError("n2 must lie in [0, 1]");
  return u * minimize_functional(n2).value;
}

double asymptotic_functional(double u, double n2, Regime regime) {
  if (regime == Regime::Weak) {
    const double m = std::max(0.0, std::min(n2, 1.0 - n2));
    return u * (0.75 - std::sqrt(13.0) / 2.0 * std::sqrt(m));
  }
  const double d2 = (0.5 - n2) * (0.5 - n2);
  return u * (4.0 / 3.0 * d2 + 40.0 / 27.0 * d2 * d2);
}

EnergyPoint asymptotic_energy(double u, Regime regime) {
  if (regime == Regime::Weak) return {-4.0 + 0.75 * u - 13.0 / 128.0 * u * u, 13.0 / 1024.0 * u * u};
  return {-12.0 / u + 120.0 / (u * u * u), 0.5 - 3.0 / u + 60.0 / (u * u * u)};
}

EnergyPoint exact_energy(double u) {
  check_u(u);
  const SectorBasis basis = sector_basis();
  const auto h = make_hamiltonian(basis, build_interaction_matrix(interaction(u), basis));
  const auto gs = ground_state(h);
  return {gs.energy, gs.occupations.at(kChartOrbital)};
}

EnergyPoint functional_energy(double u) {
  check_u(u);
  auto e = [&](double n2) { return -4.0 + 8.0 * n2 + exact_functional(u, n2); };
  std::uintmax_t iterations = 500;
  const auto [x, v] = boost::math::tools::brent_find_minima(e, 0.0, 1.0, std::numeric_limits<double>::digits / 2,
                                                            iterations);
  EnergyPoint best{v, x};
  for (double end : {0.0, 1.0}) {
    if (e(end) < best.energy) best = {e(end), end};
  }
  return best;
}

SquareScan scan_functional(double u, std::span<const double> n2, int workers) {
  check_u(u);
  SquareScan scan;
  scan.u = u;
  scan.n2.assign(n2.begin(), n2.end());
  scan.values.resize(n2.size());
  scan.branches.resize(n2.size());
  for (double x : n2) {
    if (!(x >= 0.0 && x <= 1.0)) throw PreconditionError("n2 must lie in [0, 1]");
  }
  parallel_for(static_cast<int>(n2.size()), workers, [&](int i) {
    const auto m = minimize_functional(n2[i]);
    scan.values[i] = u * m.value;
    scan.branches[i] = m.branch;
  });
  return scan;
}

Table figure_functional(double u, std::span<const double> n2, int workers) {
  if (n2.empty()) throw PreconditionError("n2 grid is empty");
  const SquareScan scan = scan_functional(u, n2, workers);
  Table table{{"n2", "F_exact", "F_weak", "F_strong"}, {}};
  for (std::size_t i = 0; i < n2.size(); ++i) {
    table.rows.push_back({n2[i], scan.values[i], asymptotic_functional(u, n2[i], Regime::Weak),
                          asymptotic_functional(u, n2[i], Regime::Strong)});
  }
  return table;
}

Table figure_energy(std::span<const double> u, int workers) {
  if (u.empty()) throw PreconditionError("u grid is empty");
  for (double x : u) check_u(x);
  std::vector<EnergyPoint> exact(u.size());
  parallel_for(static_cast<int>(u.size()), workers, [&](int i) { exact[i] = exact_energy(u[i]); });
  Table table{{"u", "E0_exact", "E0_weak", "E0_strong", "rel_err_strong", "n2_exact", "n2_weak", "n2_strong"}, {}};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < u.size(); ++i) {
    const auto weak = asymptotic_energy(u[i], Regime::Weak);
    const auto strong = u[i] > 0.0 ? asymptotic_energy(u[i], Regime::Strong) : EnergyPoint{nan, nan};
    const double rel = u[i] > 0.0 ? std::abs((strong.energy - exact[i].energy) / exact[i].energy) : nan;
    table.rows.push_back(
        {u[i], exact[i].energy, weak.energy, strong.energy, rel, exact[i].n2, weak.n2, strong.n2});
  }
  return table;
}

}  // namespace rdmft::square
