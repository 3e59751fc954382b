#include "rdmft/oracle.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "rdmft/errors.hpp"
#include "rdmft/parallel.hpp"

namespace rdmft {


SectorHamiltonian make_hamiltonian(const SectorBasis& basis, const InteractionMatrix& v) {
  if (v.size() != basis.size()) throw DimensionMismatchError("interaction matrix does not match the basis");
  SectorHamiltonian h;
  h.matrix = kinetic_matrix(basis) + v.values;
  h.occupation = occupation_map(basis);
  h.label = basis.label;
  return h;
}

SectorHamiltonian make_hamiltonian(const AdaptedBasis& basis, const InteractionMatrix& v) {
  if (v.size() != basis.size()) throw DimensionMismatchError("interaction matrix does not match the basis");
  SectorHamiltonian h;
  h.matrix = kinetic_matrix(basis) + v.values;
  h.occupation = occupation_map(basis);
  h.label = basis.parent.label;
  if (h.label) {
    h.label->twice_s = basis.twice_s;
    h.label->parity = basis.parity;
  }
  return h;
}

GroundStateResult ground_state(const SectorHamiltonian& h) {
  const int n = h.size();
  if (n < 1) throw EmptySectorError("sector has no states");
  if (n > kMaxDenseSector) {
    throw CapacityError("sector dimension " + std::to_string(n) + " exceeds the dense eigensolver guard of " +
                        std::to_string(kMaxDenseSector));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.matrix);
  GroundStateResult out;
  out.energy = es.eigenvalues()(0);
  out.vector = es.eigenvectors().col(0);
  Eigen::Index lead = 0;
  out.vector.cwiseAbs().maxCoeff(&lead);
  if (out.vector(lead) < 0) out.vector = -out.vector;
  const Eigen::VectorXd n_full = h.occupation * out.vector.cwiseAbs2();
  out.occupations.assign(n_full.data(), n_full.data() + n_full.size());
  out.label = h.label;
  out.residual = (h.matrix * out.vector - out.energy * out.vector).cwiseAbs().maxCoeff();
  return out;
}

BruteForceResult levy_brute_force(const Eigen::MatrixXd& occupation, const Eigen::MatrixXd& v,
                                  std::span<const double> n, const BruteForceOptions& options) {
  const int r = static_cast<int>(v.rows());
  if (v.cols() != r || occupation.cols() != r) throw DimensionMismatchError("interaction and occupation map disagree");
  if (static_cast<int>(n.size()) != occupation.rows()) {
    throw DimensionMismatchError("occupation vector has " + std::to_string(n.size()) + " entries, expected " +
                                 std::to_string(occupation.rows()));
  }
  if (r > kMaxBruteForceStates) {
    throw CapacityError("brute-force search is limited to " + std::to_string(kMaxBruteForceStates) + " states");
  }
  if (options.restarts < 1) throw PreconditionError("brute-force search needs at least one restart");
  const int m = static_cast<int>(occupation.rows());
  Eigen::VectorXd target(m + 1);
  for (int q = 0; q < m; ++q) target(q) = n[q];
  target(m) = 1.0;
  Eigen::MatrixXd cons(m + 1, r);
  cons.topRows(m) = occupation;
  cons.row(m).setOnes();
  const double scale = std::max(1.0, v.cwiseAbs().maxCoeff());

  auto residual = [&](const Eigen::VectorXd& psi) { return (cons * psi.cwiseAbs2() - target).eval(); };

  struct Run {
    double value = std::numeric_limits<double>::infinity();
    Eigen::VectorXd psi;
    double resid = std::numeric_limits<double>::infinity();
  };
  // Each sign orthant of Psi is a separate sheet of the constraint manifold, so
  // starting signs are stratified over all patterns (every one visited twice).
  const int orthants = 1 << (r - 1);
  const int restarts = std::max(options.restarts, 2 * orthants);
  std::vector<Run> runs(restarts);
  parallel_for(restarts, options.workers, [&](int i) {
    std::mt19937_64 rng(options.seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(i + 1));
    std::exponential_distribution<double> expo;
    Eigen::VectorXd psi(r);
    for (int k = 0; k < r; ++k) psi(k) = expo(rng);
    psi /= psi.sum();
    const int bits = i % orthants;
    for (int k = 0; k < r; ++k) psi(k) = std::sqrt(psi(k)) * (k > 0 && ((bits >> (k - 1)) & 1) ? -1.0 : 1.0);

    // Quadratic penalty ramped x10 over six rounds, with multiplier updates
    // between rounds; each round is a modified-Newton solve in Psi.
    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m + 1);
    double mu = 1000.0 * scale;
    for (int round = 0; round < 6; ++round, mu *= 10.0) {
      auto merit = [&](const Eigen::VectorXd& p) {
        const Eigen::VectorXd c = residual(p);
        return p.dot(v * p) + lambda.dot(c) + 0.5 * mu * c.squaredNorm();
      };
      for (int it = 0; it < 100; ++it) {
        const Eigen::VectorXd c = residual(psi);
        const Eigen::VectorXd w = lambda + mu * c;
        const Eigen::VectorXd grad = 2.0 * v * psi + 2.0 * psi.cwiseProduct(cons.transpose() * w);
        if (grad.cwiseAbs().maxCoeff() < 1e-13 * mu) break;
        const Eigen::MatrixXd jac = 2.0 * cons * psi.asDiagonal();
        Eigen::MatrixXd hess = 2.0 * v + mu * jac.transpose() * jac;
        hess.diagonal() += 2.0 * (cons.transpose() * w);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hess);
        const Eigen::VectorXd ev = es.eigenvalues().cwiseAbs().cwiseMax(1e-10 * mu);
        const Eigen::VectorXd step =
            -es.eigenvectors() * (es.eigenvectors().transpose() * grad).cwiseQuotient(ev);
        const double f0 = merit(psi);
        double alpha = 1.0;
        bool ok = false;
        for (int ls = 0; ls < 50; ++ls) {
          if (merit(psi + alpha * step) <= f0 + 1e-4 * alpha * grad.dot(step)) {
            ok = true;
            break;
          }
          alpha *= 0.5;
        }
        if (!ok) break;
        psi += alpha * step;
      }
      lambda += mu * residual(psi);
    }
    // Gauss-Newton projection onto {cons |psi|^2 = target}.
    for (int it = 0; it < 60; ++it) {
      const Eigen::VectorXd c = residual(psi);
      if (c.cwiseAbs().maxCoeff() < 1e-14) break;
      const Eigen::MatrixXd jac = 2.0 * cons * psi.asDiagonal();
      psi -= jac.completeOrthogonalDecomposition().solve(c);
    }
    runs[i].psi = psi;
    runs[i].resid = residual(psi).cwiseAbs().maxCoeff();
    runs[i].value = psi.dot(v * psi);
  });

  BruteForceResult out;
  out.value = std::numeric_limits<double>::infinity();
  out.residual = std::numeric_limits<double>::infinity();
  for (const auto& run : runs) {
    if (run.resid <= 1e-8 && run.value < out.value) {
      out.value = run.value;
      out.amplitudes = run.psi;
      out.residual = run.resid;
    }
    out.best_so_far.push_back(out.value);
  }
  if (!std::isfinite(out.value)) {
    throw InfeasibleError("no restart reached the occupation constraints; n is not representable");
  }
  return out;
}

BruteForceResult levy_brute_force(const SectorBasis& basis, const Eigen::MatrixXd& v, std::span<const double> n,
                                  const BruteForceOptions& options) {
  return levy_brute_force(occupation_map(basis), v, n, options);
}

BruteForceResult levy_brute_force(const AdaptedBasis& basis, const Eigen::MatrixXd& v, std::span<const double> n,
                                  const BruteForceOptions& options) {
  return levy_brute_force(occupation_map(basis), v, n, options);
}

EnergyMinimum minimize_total_energy(const LatticeSpec& lattice, const RepresentabilityPolytope& polytope,
                                    const ChartFunctional& functional, const EnergyOptions& options) {
  const int k = polytope.dimension();
  auto energy = [&](std::span<const double> y) {
    return kinetic_functional(lattice, polytope.chart.expand(y)) + functional(y);
  };
  EnergyMinimum best;
  best.energy = std::numeric_limits<double>::infinity();
  auto consider = [&](const std::vector<double>& y, double e) {
    if (e < best.energy) {
      best.energy = e;
      best.chart = y;
    }
  };
  for (int r = 0; r < polytope.vertex_count(); ++r) {
    const auto y = polytope.chart_vertex(r);
    consider(y, energy(y));
  }
  if (k == 0) return best;

  if (k == 1) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int r = 0; r < polytope.vertex_count(); ++r) {
      const double y = polytope.chart_vertex(r)[0];
      lo = std::min(lo, y);
      hi = std::max(hi, y);
    }
    auto f = [&](double y) {
      const double pt[1] = {y};
      return energy(pt);
    };
    std::uintmax_t iters = static_cast<std::uintmax_t>(options.max_iterations);
    const auto [y, e] = boost::math::tools::brent_find_minima(f, lo, hi, std::numeric_limits<double>::digits / 2, iters);
    best.converged = iters < static_cast<std::uintmax_t>(options.max_iterations);
    consider({y}, e);
    return best;
  }

  // Several chart coordinates: quasi-Newton descent on the current face of the
  // polytope. A step that reaches a facet puts it in the active set; an active
  // facet is released when the one-sided slope off it is negative.
  const double diam = std::max(polytope.diameter(), 1e-12);
  const int nf = polytope.facet_count();
  Eigen::MatrixXd normals(nf, k);
  Eigen::VectorXd norms(nf);
  for (int j = 0; j < nf; ++j) {
    for (int i = 0; i < k; ++i) normals(j, i) = static_cast<double>(polytope.facets[j].coefficients[i]);
    norms(j) = normals.row(j).norm();
  }
  auto distance = [&](int j, std::span<const double> y) { return polytope.facets[j].value(y) / norms(j); };
  const double active_tol = 1e-12 * diam;
  const double probe = 1e-6 * diam;

  auto active_set = [&](const std::vector<double>& y) {
    std::vector<int> a;
    for (int j = 0; j < nf; ++j) {
      if (distance(j, y) <= active_tol) a.push_back(j);
    }
    return a;
  };
  auto rows = [&](const std::vector<int>& a) {
    Eigen::MatrixXd m(a.size(), k);
    for (std::size_t i = 0; i < a.size(); ++i) m.row(i) = normals.row(a[i]) / norms(a[i]);
    return m;
  };
  auto tangent = [&](const std::vector<int>& a) -> Eigen::MatrixXd {
    if (a.empty()) return Eigen::MatrixXd::Identity(k, k);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(rows(a), Eigen::ComputeFullV);
    svd.setThreshold(1e-10);
    const auto rank = svd.rank();
    return svd.matrixV().rightCols(k - rank);
  };
  // Largest step along p before an inactive facet is crossed.
  auto step_limit = [&](const std::vector<double>& y, const Eigen::VectorXd& p, const std::vector<int>& a) {
    double amax = std::numeric_limits<double>::infinity();
    for (int j = 0; j < nf; ++j) {
      if (std::find(a.begin(), a.end(), j) != a.end()) continue;
      const double rate = normals.row(j).dot(p) / norms(j);
      if (rate < 0.0) amax = std::min(amax, std::max(0.0, distance(j, y)) / -rate);
    }
    return amax;
  };
  auto moved = [&](const std::vector<double>& y, const Eigen::VectorXd& p, double alpha) {
    std::vector<double> out(k);
    for (int i = 0; i < k; ++i) out[i] = y[i] + alpha * p(i);
    return out;
  };
  auto face_gradient = [&](const std::vector<double>& y, const Eigen::MatrixXd& t, const std::vector<int>& a) {
    Eigen::VectorXd g(t.cols());
    for (Eigen::Index c = 0; c < t.cols(); ++c) {
      const Eigen::VectorXd dir = t.col(c);
      const double h = std::min({probe, 0.25 * step_limit(y, dir, a), 0.25 * step_limit(y, -dir, a)});
      g(c) = (energy(moved(y, dir, h)) - energy(moved(y, dir, -h))) / (2.0 * h);
    }
    return g;
  };

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit;
  bool all_converged = true;
  for (int start = 0; start < options.starts; ++start) {
    std::vector<double> y = polytope.centroid();
    if (start > 0) {
      std::vector<double> w(polytope.vertex_count());
      double total = 0.0;
      for (auto& x : w) total += (x = -std::log(1.0 - unit(rng)));
      std::fill(y.begin(), y.end(), 0.0);
      for (int r = 0; r < polytope.vertex_count(); ++r) {
        const auto v = polytope.chart_vertex(r);
        for (int i = 0; i < k; ++i) y[i] += w[r] / total * v[i];
      }
    }
    if (!active_set(y).empty()) continue;
    double e = energy(y);
    std::vector<int> active;
    Eigen::MatrixXd t = Eigen::MatrixXd::Identity(k, k);
    Eigen::MatrixXd hinv;
    Eigen::VectorXd g;
    bool fresh = true;
    bool converged = false;
    for (int it = 0; it < options.max_iterations; ++it) {
      if (fresh) {
        active = active_set(y);
        t = tangent(active);
        hinv = Eigen::MatrixXd::Identity(t.cols(), t.cols()) * (0.1 * diam);
        g = face_gradient(y, t, active);
        fresh = false;
      }
      bool stationary = t.cols() == 0 || g.norm() == 0.0;
      if (!stationary) {
        Eigen::VectorXd q = -hinv * g;
        if (g.dot(q) >= 0.0) {
          hinv = Eigen::MatrixXd::Identity(t.cols(), t.cols()) * (0.1 * diam);
          q = -hinv * g;
        }
        const Eigen::VectorXd p = t * q;
        const double amax = step_limit(y, p, active);
        double alpha = std::min(1.0, amax);
        bool ok = false;
        std::vector<double> yn;
        double en = e;
        for (int ls = 0; ls < 60; ++ls) {
          yn = moved(y, p, alpha);
          en = energy(yn);
          if (en <= e + 1e-4 * alpha * g.dot(q)) {
            ok = true;
            break;
          }
          alpha *= 0.5;
        }
        if (ok) {
          const double gain = e - en;
          const double length = alpha * p.norm();
          const bool hit = alpha == amax;
          y = yn;
          e = en;
          if (hit || active_set(y) != active) {
            fresh = true;
          } else {
            const Eigen::VectorXd gn = face_gradient(y, t, active);
            const Eigen::VectorXd s = alpha * q, dy = gn - g;
            const double sy = s.dot(dy);
            if (sy > 1e-14 * s.norm() * dy.norm()) {
              const double rho = 1.0 / sy;
              const Eigen::MatrixXd left = Eigen::MatrixXd::Identity(t.cols(), t.cols()) - rho * s * dy.transpose();
              hinv = left * hinv * left.transpose() + rho * s * s.transpose();
            }
            g = gn;
          }
          stationary = gain < 1e-15 * std::max(1.0, std::abs(e)) && length < 1e-10 * diam;
          if (!stationary) continue;
        } else {
          stationary = true;
        }
      }
      if (active.empty()) {
        converged = true;
        break;
      }
      // Off-facet slopes: direction leaving facet j while staying on the others.
      const Eigen::MatrixXd n = rows(active);
      Eigen::VectorXd best_dir;
      double best_slope = 0.0;
      for (std::size_t j = 0; j < active.size(); ++j) {
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(active.size());
        rhs(j) = 1.0;
        Eigen::VectorXd d = n.completeOrthogonalDecomposition().solve(rhs);
        if ((n * d - rhs).norm() > 1e-8 || d.norm() == 0.0) continue;
        d.normalize();
        const double h = std::min(probe, 0.5 * step_limit(y, d, active));
        if (!(h > 0.0)) continue;
        const double slope = (energy(moved(y, d, h)) - e) / h;
        if (slope < best_slope) {
          best_slope = slope;
          best_dir = d;
        }
      }
      if (best_slope >= -1e-7 * std::max(1.0, std::abs(e)) / diam) {
        converged = true;
        break;
      }
      double alpha = std::min(0.1 * diam, step_limit(y, best_dir, active));
      bool ok = false;
      for (int ls = 0; ls < 60 && alpha > 0.0; ++ls) {
        const auto yn = moved(y, best_dir, alpha);
        const double en = energy(yn);
        if (en < e) {
          y = yn;
          e = en;
          ok = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!ok) {
        converged = true;
        break;
      }
      fresh = true;
    }
    all_converged = all_converged && converged;
    consider(y, e);
  }
  best.converged = all_converged;
  return best;
}

}  // namespace rdmft
