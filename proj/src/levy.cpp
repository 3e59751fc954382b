#include "rdmft/levy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "rdmft/errors.hpp"

namespace rdmft {

namespace {

constexpr double kZeroWeight = 1e-16;

Eigen::MatrixXd null_space_of(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.cols());
  if (a.rows() == 0 || n == 0) return Eigen::MatrixXd::Identity(n, n);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) rank += sv(i) > 1e-10 * std::max(1.0, smax);
  return svd.matrixV().rightCols(n - rank);
}

std::vector<int> indices_where(const std::vector<char>& mask, bool value) {
  std::vector<int> out;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (static_cast<bool>(mask[i]) == value) out.push_back(static_cast<int>(i));
  }
  return out;
}

Eigen::MatrixXd columns(const Eigen::MatrixXd& a, const std::vector<int>& cols) {
  Eigen::MatrixXd out(a.rows(), cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(j) = a.col(cols[j]);
  return out;
}

// Orthonormal basis (embedded in R^R) of {z : B z = 0, z_r = 0 for r not free}.
Eigen::MatrixXd free_null_space(const Eigen::MatrixXd& b, const std::vector<char>& fixed) {
  const auto free = indices_where(fixed, false);
  const Eigen::MatrixXd local = null_space_of(columns(b, free));
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(b.cols(), local.cols());
  for (std::size_t j = 0; j < free.size(); ++j) z.row(free[j]) = local.row(j);
  return z;
}

// Minimum-norm correction of the free entries so that B x = rhs.
void restore_feasibility(const Eigen::MatrixXd& b, const Eigen::VectorXd& rhs, const std::vector<char>& fixed,
                         Eigen::VectorXd& x) {
  const auto free = indices_where(fixed, false);
  if (free.empty()) return;
  const Eigen::MatrixXd bf = columns(b, free);
  const Eigen::VectorXd resid = rhs - b * x;
  const Eigen::VectorXd delta = bf.completeOrthogonalDecomposition().solve(resid);
  for (std::size_t j = 0; j < free.size(); ++j) x(free[j]) = std::max(0.0, x(free[j]) + delta(j));
}

// Maximum-entropy point of {x >= 0, B x = rhs, x_r = 0 for fixed r} by Newton
// on the convex dual sum_r exp((B^T l)_r) - rhs.l.
Eigen::VectorXd max_entropy_point(const Eigen::MatrixXd& b, const Eigen::VectorXd& rhs,
                                  const std::vector<char>& fixed) {
  const auto free = indices_where(fixed, false);
  if (free.empty()) throw InfeasibleError("no admissible states remain at this occupation vector");
  const Eigen::MatrixXd bf = columns(b, free);
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(b.rows());
  auto primal = [&](const Eigen::VectorXd& l) { return (bf.transpose() * l).array().exp().matrix().eval(); };
  auto dual = [&](const Eigen::VectorXd& l) { return primal(l).sum() - rhs.dot(l); };
  Eigen::VectorXd xf = primal(lambda);
  double phi = dual(lambda);
  for (int it = 0; it < 500; ++it) {
    const Eigen::VectorXd grad = bf * xf - rhs;
    if (grad.cwiseAbs().maxCoeff() < 1e-15) break;
    const Eigen::MatrixXd hess = bf * xf.asDiagonal() * bf.transpose();
    const Eigen::VectorXd step = hess.completeOrthogonalDecomposition().solve(grad);
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Eigen::VectorXd trial = lambda - t * step;
      const double val = dual(trial);
      // Near the optimum the dual value is flat to rounding, so a full step
      // that shrinks the gradient is also taken.
      const bool shrinks = ls == 0 && std::isfinite(val) &&
                           (bf * primal(trial) - rhs).cwiseAbs().maxCoeff() < 0.5 * grad.cwiseAbs().maxCoeff();
      if (shrinks || (std::isfinite(val) && val <= phi - 1e-4 * t * grad.dot(step))) {
        lambda = trial;
        phi = val;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    xf = primal(lambda);
    if (!moved) break;
  }
  const double resid = (bf * xf - rhs).cwiseAbs().maxCoeff();
  if (!std::isfinite(resid) || resid > 1e-8) {
    throw InfeasibleError("occupation vector is not representable by the sector states (residual " +
                          std::to_string(resid) + ")");
  }
  Eigen::VectorXd x = Eigen::VectorXd::Zero(b.cols());
  for (std::size_t j = 0; j < free.size(); ++j) x(free[j]) = xf(j);
  restore_feasibility(b, rhs, fixed, x);
  return x;
}

double quad_energy(const Eigen::MatrixXd& k, const Eigen::VectorXd& x) {
  const Eigen::VectorXd s = x.cwiseMax(0.0).cwiseSqrt();
  return s.dot(k * s);
}

struct LocalResult {
  Eigen::VectorXd x;
  double value = 0.0;
  bool converged = true;
};

// Minimizes sqrt(x)^T K sqrt(x) over {x >= 0, B x = rhs, x_forced = 0} from a
// feasible start: Newton with absolute-eigenvalue Hessian modification,
// fraction-to-boundary step limits, and an active set for x_r = 0.
class LocalSolver {
 public:
  LocalSolver(const Eigen::MatrixXd& k, const Eigen::MatrixXd& b, const Eigen::VectorXd& rhs,
              const std::vector<char>& forced, int max_iterations)
      : k_(k), b_(b), rhs_(rhs), forced_(forced), max_iterations_(max_iterations) {
    scale_ = std::max(1e-300, k.cwiseAbs().maxCoeff());
  }

  LocalResult run(Eigen::VectorXd x) const {
    const int n = static_cast<int>(x.size());
    std::vector<char> active(n, 0);
    for (int r = 0; r < n; ++r) {
      if (forced_[r]) x(r) = 0.0;
      active[r] = forced_[r] || x(r) <= kZeroWeight;
      if (active[r]) x(r) = 0.0;
    }
    double f = quad_energy(k_, x);
    bool converged = false;
    int releases = 0;
    Eigen::MatrixXd z = free_null_space(b_, active);
    for (int it = 0; it < max_iterations_; ++it) {
      bool stationary = z.cols() == 0;
      if (!stationary) {
        const Eigen::VectorXd s = x.cwiseSqrt();
        const Eigen::VectorXd ks = k_ * s;
        Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
        for (int r = 0; r < n; ++r) {
          if (active[r]) continue;
          g(r) = ks(r) / s(r);
          const double off = ks(r) - k_(r, r) * s(r);
          h(r, r) = -off / (2.0 * s(r) * s(r) * s(r));
          for (int q = 0; q < n; ++q) {
            if (q != r && !active[q]) h(r, q) = k_(r, q) / (2.0 * s(r) * s(q));
          }
        }
        const Eigen::VectorXd gz = z.transpose() * g;
        Eigen::MatrixXd hz = z.transpose() * h * z;
        hz = 0.5 * (hz + hz.transpose());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hz);
        const double lmax = es.eigenvalues().cwiseAbs().maxCoeff();
        const double floor = std::max(1e-12 * lmax, 1e-14 * scale_);
        Eigen::VectorXd coef = es.eigenvectors().transpose() * gz;
        for (int i = 0; i < coef.size(); ++i) coef(i) /= std::max(std::abs(es.eigenvalues()(i)), floor);
        const Eigen::VectorXd dx = -(z * (es.eigenvectors() * coef));
        const double slope = g.dot(dx);

        double alpha_max = std::numeric_limits<double>::infinity();
        int blocking = -1;
        for (int r = 0; r < n; ++r) {
          if (!active[r] && dx(r) < 0.0) {
            const double a = -x(r) / dx(r);
            if (a < alpha_max) {
              alpha_max = a;
              blocking = r;
            }
          }
        }
        if (dx.cwiseAbs().maxCoeff() < 1e-15 || slope > -1e-300) {
          stationary = true;
        } else {
          double alpha = std::min(1.0, alpha_max);
          bool accepted = false;
          Eigen::VectorXd xn;
          double fn = f;
          for (int ls = 0; ls < 80; ++ls) {
            xn = x + alpha * dx;
            if (alpha == alpha_max && blocking >= 0) xn(blocking) = 0.0;
            xn = xn.cwiseMax(0.0);
            fn = quad_energy(k_, xn);
            if (fn <= f + 1e-4 * alpha * slope || fn < f - 1e-15 * scale_) {
              accepted = true;
              break;
            }
            alpha *= 0.5;
          }
          if (!accepted) {
            stationary = true;
          } else {
            const double gain = f - fn;
            x = xn;
            f = fn;
            bool changed = false;
            for (int r = 0; r < n; ++r) {
              if (!active[r] && x(r) <= kZeroWeight) {
                x(r) = 0.0;
                active[r] = 1;
                changed = true;
              }
            }
            if (changed) z = free_null_space(b_, active);
            if (!changed && gain <= 1e-15 * scale_ && (alpha * dx).cwiseAbs().maxCoeff() < 1e-13) stationary = true;
          }
        }
      }
      if (stationary) {
        if (releases < 4 * n && release(x, f, active, z)) {
          ++releases;
          continue;
        }
        converged = true;
        break;
      }
    }
    restore_feasibility(b_, rhs_, active, x);
    return {x, quad_energy(k_, x), converged};
  }

 private:
  // Frees one zero weight whose coupling makes growth favorable, stepping off
  // the face so the Newton iteration can continue.
  bool release(Eigen::VectorXd& x, double& f, std::vector<char>& active, Eigen::MatrixXd& z) const {
    const int n = static_cast<int>(x.size());
    const Eigen::VectorXd s = x.cwiseSqrt();
    for (int r = 0; r < n; ++r) {
      if (!active[r] || forced_[r]) continue;
      const double coupling = k_.row(r).dot(s) - k_(r, r) * s(r);
      if (coupling >= -1e-13 * scale_) continue;
      std::vector<char> trial = active;
      trial[r] = 0;
      const Eigen::MatrixXd zt = free_null_space(b_, trial);
      const Eigen::VectorXd dir = zt * zt.row(r).transpose();
      if (dir(r) <= 1e-12) continue;
      double tmax = std::numeric_limits<double>::infinity();
      for (int q = 0; q < n; ++q) {
        if (!trial[q] && dir(q) < 0.0) tmax = std::min(tmax, -x(q) / dir(q));
      }
      if (tmax <= 0.0) continue;
      double best_t = 0.0, best_f = f;
      for (double frac : {0.5, 1e-1, 1e-2, 1e-4, 1e-6, 1e-8}) {
        const double t = std::min(tmax * frac, frac);
        const Eigen::VectorXd xt = (x + t * dir).cwiseMax(0.0);
        const double ft = quad_energy(k_, xt);
        if (ft < best_f) {
          best_f = ft;
          best_t = t;
        }
      }
      if (best_t == 0.0) continue;
      x = (x + best_t * dir).cwiseMax(0.0);
      f = best_f;
      active = trial;
      for (int q = 0; q < n; ++q) {
        if (!active[q] && x(q) <= kZeroWeight) {
          x(q) = 0.0;
          active[q] = 1;
        }
      }
      active[r] = x(r) <= kZeroWeight;
      z = free_null_space(b_, active);
      return true;
    }
    return false;
  }

  const Eigen::MatrixXd& k_;
  const Eigen::MatrixXd& b_;
  const Eigen::VectorXd& rhs_;
  const std::vector<char>& forced_;
  int max_iterations_;
  double scale_;
};

Eigen::MatrixXd signed_matrix(const Eigen::MatrixXd& v, const std::vector<int>& eta) {
  Eigen::MatrixXd k = v;
  for (int r = 0; r < k.rows(); ++r) {
    for (int q = 0; q < k.cols(); ++q) k(r, q) *= eta[r] * eta[q];
  }
  return k;
}

std::vector<int> pattern_from_bits(std::uint64_t bits, int n) {
  std::vector<int> eta(n, 1);
  for (int r = 1; r < n; ++r) eta[r] = (bits >> (r - 1)) & 1 ? -1 : 1;
  return eta;
}

Eigen::VectorXd random_feasible(const Eigen::VectorXd& start, const Eigen::MatrixXd& z, std::mt19937_64& rng) {
  Eigen::VectorXd x = start;
  if (z.cols() == 0) return x;
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  const int steps = 3 * static_cast<int>(z.cols()) + 10;
  for (int step = 0; step < steps; ++step) {
    Eigen::VectorXd c(z.cols());
    for (int i = 0; i < c.size(); ++i) c(i) = normal(rng);
    const Eigen::VectorXd d = z * c.normalized();
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (int r = 0; r < x.size(); ++r) {
      if (d(r) > 1e-14) lo = std::max(lo, -x(r) / d(r));
      if (d(r) < -1e-14) hi = std::min(hi, -x(r) / d(r));
    }
    if (!std::isfinite(lo) || !std::isfinite(hi) || hi <= lo) continue;
    x = (x + (lo + (hi - lo) * unit(rng)) * d).cwiseMax(0.0);
  }
  return x;
}

struct SearchContext {
  const ConstrainedSearchProblem& problem;
  const FunctionalOptions& options;
  Eigen::VectorXd rhs;
  std::vector<char> forced;
  Eigen::VectorXd x0;
};

void validate_chart(const RepresentabilityPolytope& polytope, std::span<const double> chart) {
  const auto m = contains(polytope, chart);
  if (!m.inside) {
    throw InfeasibleError("occupation vector lies outside the polytope (margin " + std::to_string(m.margin) + ")");
  }
}

SearchContext prepare(const ConstrainedSearchProblem& problem, std::span<const double> chart,
                      const FunctionalOptions& options) {
  validate_chart(problem.polytope, chart);
  SearchContext ctx{problem, options, problem.rhs(chart), std::vector<char>(problem.size(), 0), {}};
  const auto& poly = problem.polytope;
  for (int j = 0; j < poly.facet_count(); ++j) {
    if (poly.facets[j].value(chart) < options.snap_tol) {
      for (int r = 0; r < poly.vertex_count(); ++r) {
        if (poly.incidence[j][r].sign() > 0) ctx.forced[r] = 1;
      }
    }
  }
  // Snapped states leave a smaller cone; move rhs onto its span so the dual
  // problem stays bounded.
  if (std::find(ctx.forced.begin(), ctx.forced.end(), 1) != ctx.forced.end()) {
    const auto free = indices_where(ctx.forced, false);
    if (!free.empty()) {
      const Eigen::MatrixXd bf = columns(problem.constraint, free);
      ctx.rhs = bf * bf.completeOrthogonalDecomposition().solve(ctx.rhs);
    }
  }
  ctx.x0 = max_entropy_point(problem.constraint, ctx.rhs, ctx.forced);
  return ctx;
}

FunctionalEvaluation finish(const RepresentabilityPolytope& polytope, std::span<const double> chart,
                            FunctionalEvaluation ev) {
  ev.facet_margins = polytope.facet_values(chart);
  return ev;
}

struct Candidate {
  std::vector<int> eta;
  LocalResult result;
};

}  // namespace

Eigen::VectorXd ConstrainedSearchProblem::rhs(std::span<const double> chart) const {
  if (static_cast<int>(chart.size()) != polytope.dimension()) {
    throw DimensionMismatchError("point has " + std::to_string(chart.size()) + " chart coordinates, polytope has " +
                                 std::to_string(polytope.dimension()));
  }
  Eigen::VectorXd b(chart.size() + 1);
  for (std::size_t k = 0; k < chart.size(); ++k) b(k) = chart[k];
  b(chart.size()) = 1.0;
  return b;
}

ConstrainedSearchProblem make_problem(const RepresentabilityPolytope& polytope, const Eigen::MatrixXd& v) {
  const int r = polytope.vertex_count();
  if (v.rows() != r || v.cols() != r) {
    throw DimensionMismatchError("interaction matrix is " + std::to_string(v.rows()) + "x" + std::to_string(v.cols()) +
                                 ", polytope has " + std::to_string(r) + " states");
  }
  if (r == 0) throw PreconditionError("empty polytope");
  const double scale = std::max(1.0, v.cwiseAbs().maxCoeff());
  if ((v - v.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw PreconditionError("interaction matrix is not symmetric");
  }
  ConstrainedSearchProblem p;
  p.polytope = polytope;
  p.interaction = 0.5 * (v + v.transpose());
  const int k = polytope.dimension();
  p.constraint.resize(k + 1, r);
  for (int c = 0; c < r; ++c) {
    const auto y = polytope.chart_vertex(c);
    for (int i = 0; i < k; ++i) p.constraint(i, c) = y[i];
    p.constraint(k, c) = 1.0;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(p.constraint);
  p.singular_values = svd.singularValues();
  p.null_space = null_space_of(p.constraint);
  return p;
}

ConstrainedSearchProblem make_problem(const RepresentabilityPolytope& polytope, const Eigen::MatrixXcd& v) {
  if (v.size() && v.imag().cwiseAbs().maxCoeff() > 1e-14) {
    throw UnsupportedError("complex interaction matrices need complex phase minimization, which is not implemented");
  }
  return make_problem(polytope, Eigen::MatrixXd(v.real()));
}

std::optional<std::vector<int>> sign_structure(const Eigen::MatrixXd& v, double tol) {
  const int n = static_cast<int>(v.rows());
  const double cut = tol * std::max(1.0, v.cwiseAbs().maxCoeff());
  std::vector<int> eta(n, 0);
  for (int root = 0; root < n; ++root) {
    if (eta[root]) continue;
    eta[root] = 1;
    std::vector<int> stack{root};
    while (!stack.empty()) {
      const int r = stack.back();
      stack.pop_back();
      for (int q = 0; q < n; ++q) {
        if (q == r || std::abs(v(r, q)) <= cut) continue;
        const int want = v(r, q) > 0 ? -eta[r] : eta[r];
        if (!eta[q]) {
          eta[q] = want;
          stack.push_back(q);
        } else if (eta[q] != want) {
          return std::nullopt;
        }
      }
    }
  }
  return eta;
}

double levy_energy(const Eigen::MatrixXd& v, const Eigen::VectorXd& x, const std::vector<int>& signs) {
  Eigen::VectorXd s = x.cwiseMax(0.0).cwiseSqrt();
  for (int r = 0; r < s.size(); ++r) s(r) *= signs[r];
  return s.dot(v * s);
}

FunctionalEvaluation functional_simplex(const RepresentabilityPolytope& polytope, const Eigen::MatrixXd& v,
                                        std::span<const double> chart, const FunctionalOptions& options) {
  if (!polytope.simplex) throw NotSimplexError("closed-form functional needs a simplex polytope");
  const int n = polytope.vertex_count();
  if (v.rows() != n || v.cols() != n) throw DimensionMismatchError("interaction matrix size does not match polytope");
  validate_chart(polytope, chart);
  Eigen::VectorXd x(n);
  for (int r = 0; r < n; ++r) x(r) = std::max(0.0, polytope.simplex_coordinate(r, chart));
  // Same facet snapping as the general search.
  for (int j = 0; j < polytope.facet_count(); ++j) {
    if (polytope.facets[j].value(chart) < options.snap_tol) {
      for (int r = 0; r < n; ++r) {
        if (polytope.incidence[j][r].sign() > 0) x(r) = 0.0;
      }
    }
  }

  FunctionalEvaluation ev;
  ev.weights = x;
  if (auto eta = sign_structure(v)) {
    ev.signs = *eta;
    ev.value = levy_energy(v, x, ev.signs);
    ev.sign_patterns = 1;
    return finish(polytope, chart, ev);
  }
  ev.value = std::numeric_limits<double>::infinity();
  if (n <= options.exhaustive_sign_limit) {
    const std::uint64_t count = std::uint64_t{1} << (n - 1);
    for (std::uint64_t bits = 0; bits < count; ++bits) {
      auto eta = pattern_from_bits(bits, n);
      const double val = levy_energy(v, x, eta);
      if (val < ev.value) {
        ev.value = val;
        ev.signs = eta;
      }
    }
    ev.sign_patterns = static_cast<int>(count);
  } else {
    std::mt19937_64 rng(options.seed);
    for (int start = 0; start < options.greedy_starts; ++start) {
      std::vector<int> eta(n, 1);
      for (int r = 1; r < n; ++r) eta[r] = (rng() & 1) ? -1 : 1;
      double val = levy_energy(v, x, eta);
      for (bool improved = true; improved;) {
        improved = false;
        for (int r = 1; r < n; ++r) {
          eta[r] = -eta[r];
          const double t = levy_energy(v, x, eta);
          if (t < val - 1e-15) {
            val = t;
            improved = true;
          } else {
            eta[r] = -eta[r];
          }
          ++ev.sign_patterns;
        }
      }
      if (val < ev.value) {
        ev.value = val;
        ev.signs = eta;
      }
    }
  }
  return finish(polytope, chart, ev);
}

FunctionalEvaluation functional_general(const ConstrainedSearchProblem& problem, std::span<const double> chart,
                                        const FunctionalOptions& options) {
  const SearchContext ctx = prepare(problem, chart, options);
  const int n = problem.size();
  const Eigen::MatrixXd& v = problem.interaction;
  FunctionalEvaluation ev;
  std::mt19937_64 rng(options.seed);

  auto solve = [&](const std::vector<int>& eta, const Eigen::VectorXd& start) {
    const Eigen::MatrixXd k = signed_matrix(v, eta);
    LocalSolver solver(k, problem.constraint, ctx.rhs, ctx.forced, options.max_iterations);
    ++ev.local_solves;
    return solver.run(start);
  };

  std::vector<Candidate> sweep;
  const auto fixed_pattern = sign_structure(v);
  if (fixed_pattern) {
    // With the sign condition the objective is convex in x and this pattern is
    // optimal for every x, so one local solve is global.
    sweep.push_back({*fixed_pattern, solve(*fixed_pattern, ctx.x0)});
    ev.sign_patterns = 1;
  } else if (n <= options.exhaustive_sign_limit) {
    const std::uint64_t count = std::uint64_t{1} << (n - 1);
    for (std::uint64_t bits = 0; bits < count; ++bits) {
      auto eta = pattern_from_bits(bits, n);
      sweep.push_back({eta, solve(eta, ctx.x0)});
    }
    ev.sign_patterns = static_cast<int>(count);
  } else {
    for (int start = 0; start < options.greedy_starts; ++start) {
      std::vector<int> eta(n, 1);
      for (int r = 1; r < n; ++r) eta[r] = (rng() & 1) ? -1 : 1;
      Candidate cur{eta, solve(eta, ctx.x0)};
      for (bool improved = true; improved;) {
        improved = false;
        for (int r = 1; r < n; ++r) {
          auto trial = cur.eta;
          trial[r] = -trial[r];
          auto res = solve(trial, cur.result.x);
          ++ev.sign_patterns;
          if (res.value < cur.result.value - 1e-14) {
            cur = {trial, res};
            improved = true;
          }
        }
      }
      sweep.push_back(std::move(cur));
    }
  }

  std::sort(sweep.begin(), sweep.end(),
            [](const Candidate& a, const Candidate& b) { return a.result.value < b.result.value; });
  Candidate best = sweep.front();
  if (!fixed_pattern && problem.null_space.cols() > 0) {
    const Eigen::MatrixXd z = free_null_space(problem.constraint, ctx.forced);
    const int patterns = std::min<int>(options.restart_patterns, static_cast<int>(sweep.size()));
    for (int p = 0; p < patterns; ++p) {
      for (int rs = 0; rs < options.restarts; ++rs) {
        const Eigen::VectorXd start = random_feasible(ctx.x0, z, rng);
        auto res = solve(sweep[p].eta, start);
        ++ev.restarts;
        if (res.value < best.result.value) best = {sweep[p].eta, res};
      }
    }
  }
  ev.value = best.result.value;
  ev.weights = best.result.x;
  ev.signs = best.eta;
  ev.converged = best.result.converged;
  return finish(problem.polytope, chart, ev);
}

FunctionalEvaluation functional_general(const RepresentabilityPolytope& polytope, const Eigen::MatrixXd& v,
                                        std::span<const double> chart, const FunctionalOptions& options) {
  return functional_general(make_problem(polytope, v), chart, options);
}

FunctionalEvaluation functional_ensemble(const ConstrainedSearchProblem& problem, std::span<const double> chart,
                                         const FunctionalOptions& options) {
  const FunctionalEvaluation pure = functional_general(problem, chart, options);
  const SearchContext ctx = prepare(problem, chart, options);
  const int n = problem.size();
  const int rank = std::min(n, problem.polytope.dimension() + 2);
  const Eigen::MatrixXd& v = problem.interaction;
  const double scale = std::max(1e-300, v.cwiseAbs().maxCoeff());

  auto energy = [&](const Eigen::VectorXd& x, const Eigen::MatrixXd& u) {
    const Eigen::VectorXd s = x.cwiseMax(0.0).cwiseSqrt();
    const Eigen::MatrixXd y = s.asDiagonal() * u;
    return (y.transpose() * v * y).trace();
  };

  int solves = 0;
  auto descend = [&](Eigen::VectorXd x, Eigen::MatrixXd u, bool& converged) {
    double f = energy(x, u);
    converged = false;
    for (int outer = 0; outer < options.max_iterations; ++outer) {
      const Eigen::VectorXd s = x.cwiseSqrt();
      for (int sweep = 0; sweep < 3; ++sweep) {
        for (int r = 0; r < n; ++r) {
          Eigen::RowVectorXd g = Eigen::RowVectorXd::Zero(rank);
          for (int q = 0; q < n; ++q) {
            if (q != r) g += v(r, q) * s(q) * u.row(q);
          }
          const double norm = g.norm();
          if (norm > 1e-300) u.row(r) = -g / norm;
        }
      }
      const Eigen::MatrixXd k = v.cwiseProduct(u * u.transpose());
      LocalSolver solver(k, problem.constraint, ctx.rhs, ctx.forced, options.max_iterations);
      ++solves;
      const LocalResult res = solver.run(x);
      const double fn = energy(res.x, u);
      const double gain = f - fn;
      if (fn <= f) {
        x = res.x;
        f = fn;
      }
      if (gain <= 1e-14 * scale) {
        converged = true;
        break;
      }
    }
    return std::tuple{f, x, u};
  };

  Eigen::MatrixXd u0 = Eigen::MatrixXd::Zero(n, rank);
  for (int r = 0; r < n; ++r) u0(r, 0) = pure.signs[r];
  bool conv = false;
  auto [best_f, best_x, best_u] = descend(pure.weights, u0, conv);
  bool best_conv = conv;

  std::mt19937_64 rng(options.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal;
  const Eigen::MatrixXd z = free_null_space(problem.constraint, ctx.forced);
  for (int rs = 0; rs < options.ensemble_restarts && rank > 1; ++rs) {
    Eigen::MatrixXd u(n, rank);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < rank; ++c) u(r, c) = normal(rng);
      u.row(r).normalize();
    }
    auto [f, x, uu] = descend(random_feasible(ctx.x0, z, rng), u, conv);
    if (f < best_f) {
      best_f = f;
      best_x = x;
      best_u = uu;
      best_conv = conv;
    }
  }

  FunctionalEvaluation ev;
  ev.value = std::min(best_f, pure.value);
  ev.weights = best_f <= pure.value ? best_x : pure.weights;
  ev.directions = best_f <= pure.value ? best_u : u0;
  ev.signs = pure.signs;
  ev.converged = best_conv && pure.converged;
  ev.sign_patterns = pure.sign_patterns;
  ev.local_solves = pure.local_solves + solves;
  ev.restarts = pure.restarts + options.ensemble_restarts;
  return finish(problem.polytope, chart, ev);
}

std::vector<double> exchange_force(const ConstrainedSearchProblem& problem, std::span<const double> chart,
                                   double step, const FunctionalOptions& options) {
  const auto& poly = problem.polytope;
  if (step <= 0.0) step = 1e-5 * poly.diameter();
  if (!(step > 0.0)) throw PreconditionError("finite-difference step must be positive");
  const FunctionalEvaluation center = functional_general(problem, chart, options);
  const int k = poly.dimension();
  std::vector<double> grad(k);
  for (int i = 0; i < k; ++i) {
    double f[2];
    for (int side = 0; side < 2; ++side) {
      std::vector<double> p(chart.begin(), chart.end());
      p[i] += side == 0 ? step : -step;
      if (contains(poly, p).margin < 0.0) {
        throw StepTooLargeError("finite-difference step " + std::to_string(step) + " leaves the polytope");
      }
      double value = functional_general(problem, p, options).value;
      // Continue the branch of the minimizer at n from a nearby feasible start.
      const Eigen::VectorXd rhs = problem.rhs(p);
      std::vector<char> none(problem.size(), 0);
      Eigen::VectorXd start = center.weights;
      restore_feasibility(problem.constraint, rhs, none, start);
      if ((problem.constraint * start - rhs).cwiseAbs().maxCoeff() < 1e-12) {
        const Eigen::MatrixXd km = signed_matrix(problem.interaction, center.signs);
        LocalSolver solver(km, problem.constraint, rhs, none, options.max_iterations);
        value = std::min(value, solver.run(start).value);
      }
      f[side] = value;
    }
    grad[i] = (f[0] - f[1]) / (2.0 * step);
  }
  return grad;
}

std::vector<double> default_boundary_distances() {
  std::vector<double> d;
  for (int i = 0; i < 9; ++i) d.push_back(std::pow(10.0, -9.0 + 0.5 * i));
  return d;
}

BoundaryFit boundary_expansion(const ConstrainedSearchProblem& problem, int facet, const BoundaryPath& path,
                               const FunctionalOptions& options) {
  const auto& poly = problem.polytope;
  if (facet < 0 || facet >= poly.facet_count()) {
    throw PreconditionError("facet index " + std::to_string(facet) + " outside 0.." +
                            std::to_string(poly.facet_count() - 1));
  }
  const int k = poly.dimension();
  std::vector<double> target(k, 0.0);
  int on_facet = 0;
  for (int r = 0; r < poly.vertex_count(); ++r) {
    if (!poly.incidence[facet][r].is_zero()) continue;
    const auto y = poly.chart_vertex(r);
    for (int i = 0; i < k; ++i) target[i] += y[i];
    ++on_facet;
  }
  for (auto& t : target) t /= on_facet;
  const std::vector<double> origin = path.origin.empty() ? poly.centroid() : path.origin;
  if (static_cast<int>(origin.size()) != k) throw DimensionMismatchError("ray origin has wrong length");
  const double d_origin = poly.facets[facet].value(origin);
  if (!(d_origin > 0.0) || !contains(poly, origin).inside) {
    throw PreconditionError("ray origin must lie strictly inside the polytope on the facet's interior side");
  }
  const std::vector<double> distances = path.distances.empty() ? default_boundary_distances() : path.distances;
  if (distances.size() < 6) throw PreconditionError("boundary fit needs at least 6 sample distances");
  for (double d : distances) {
    if (!(d > 0.0) || d >= d_origin) throw PreconditionError("sample distances must lie in (0, D(origin))");
  }

  BoundaryFit fit;
  fit.facet_point = target;
  fit.distances = distances;
  fit.f0 = functional_general(problem, target, options).value;
  std::vector<double> diffs;
  for (double d : distances) {
    std::vector<double> p(k);
    for (int i = 0; i < k; ++i) p[i] = target[i] + (d / d_origin) * (origin[i] - target[i]);
    const double f = functional_general(problem, p, options).value;
    fit.values.push_back(f);
    diffs.push_back(f - fit.f0);
  }
  const double scale = std::max(1e-300, problem.interaction.cwiseAbs().maxCoeff());
  double largest = 0.0;
  int positive = 0, negative = 0;
  for (double df : diffs) {
    largest = std::max(largest, std::abs(df));
    positive += df > 0.0;
    negative += df < 0.0;
  }
  if (largest <= 1e-13 * scale || problem.interaction.cwiseAbs().maxCoeff() == 0.0) {
    fit.g = 0.0;
    fit.beta = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  if (positive && negative) {
    fit.poor_fit = true;
  }
  const int m = static_cast<int>(distances.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::vector<double> lx(m), ly(m);
  for (int i = 0; i < m; ++i) {
    lx[i] = std::log(distances[i]);
    ly[i] = std::log(std::max(std::abs(diffs[i]), 1e-300));
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  fit.beta = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  const double intercept = (sy - fit.beta * sx) / m;
  fit.g = (negative > positive ? -1.0 : 1.0) * std::exp(intercept);
  double ss = 0.0;
  for (int i = 0; i < m; ++i) {
    const double e = ly[i] - (intercept + fit.beta * lx[i]);
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / m);
  if (fit.residual > 0.05) fit.poor_fit = true;
  return fit;
}

}  // namespace rdmft
