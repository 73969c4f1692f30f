#include "stlt/outer.hpp"

#include <chrono>
#include <cmath>

namespace stlt {

namespace {

constexpr double kArmijoC = 1e-4;
constexpr double kBacktrack = 0.5;
constexpr int kMaxBacktracks = 40;
constexpr int kMaxLineSearchFailures = 30;
constexpr double kStagnationTol = 1e-12;
constexpr int kStagnationRuns = 5;
constexpr double kAcceptRho = 0.1;
constexpr double kExpandRho = 0.75;
constexpr double kInitRadius = 0.1;

std::uint64_t gap_seed(std::uint64_t seed, Index iter) {
  return seed ^ (0xd1b54a32d192ed03ULL * static_cast<std::uint64_t>(iter + 1));
}

OuterKind effective_solver(const ProblemCache& cache,
                           const SolverParams& params) {
  if (params.solver_explicit) return params.solver;
  return cache.hankel() ? OuterKind::rtr : OuterKind::rcg;
}

struct HessOperator {
  const ProblemCache& cache;
  const MatList& u;
  const InnerSolution& sol;
  const MatList& egrad;
  const SolverParams& params;
  Index* spent;

  MatList operator()(const MatList& v) const {
    const DirectionalSolution dsol =
        solve_directional(cache, u, v, sol, params);
    *spent += dsol.iterations;
    const MatList ehess = euclidean_hess_vec(cache, u, v, sol, dsol);
    return riemannian_hess_vec(u, egrad, ehess, v);
  }
};

}  // namespace

const char* to_string(OuterStatus status) {
  switch (status) {
    case OuterStatus::converged: return "converged";
    case OuterStatus::max_iters: return "max_iters";
    case OuterStatus::stagnated: return "stagnated";
    case OuterStatus::line_search_failed: return "line_search_failed";
  }
  return "unknown";
}

TcgResult truncated_cg(const MatList& grad,
                       const std::function<MatList(const MatList&)>& hess,
                       double radius, Index max_iter) {
  TcgResult out;
  out.step = zeros_like(grad);
  MatList hs = zeros_like(grad);  // running H s for the model value

  MatList r = grad;
  double rr = dot(r, r);
  const double r0 = std::sqrt(rr);
  if (r0 == 0.0) return out;
  const double tol = r0 * std::min(0.1, r0);
  MatList d = scaled(r, -1.0);

  auto to_boundary = [&](const MatList& s, const MatList& dir) {
    // positive root of ||s + tau dir|| = radius
    const double dd = dot(dir, dir);
    const double sd = dot(s, dir);
    const double ss = dot(s, s);
    const double disc = sd * sd + dd * (radius * radius - ss);
    return (-sd + std::sqrt(std::max(0.0, disc))) / dd;
  };

  for (Index j = 0; j < max_iter; ++j) {
    const MatList hd = hess(d);
    ++out.iterations;
    const double dhd = dot(d, hd);
    if (dhd <= 0.0) {
      const double tau = to_boundary(out.step, d);
      axpy(tau, d, out.step);
      axpy(tau, hd, hs);
      out.boundary = true;
      break;
    }
    const double alpha = rr / dhd;
    MatList trial = out.step;
    axpy(alpha, d, trial);
    if (std::sqrt(dot(trial, trial)) >= radius) {
      const double tau = to_boundary(out.step, d);
      axpy(tau, d, out.step);
      axpy(tau, hd, hs);
      out.boundary = true;
      break;
    }
    out.step = std::move(trial);
    axpy(alpha, hd, hs);
    axpy(alpha, hd, r);
    const double rr_new = dot(r, r);
    if (std::sqrt(rr_new) <= tol) break;
    const double beta = rr_new / rr;
    rr = rr_new;
    MatList d_new = scaled(r, -1.0);
    axpy(beta, d, d_new);
    d = std::move(d_new);
  }
  out.model_decrease = -(dot(grad, out.step) + 0.5 * dot(out.step, hs));
  return out;
}

OuterResult outer_solve(const ProblemCache& cache, const SolverParams& params) {
  params.validate();
  const OuterKind kind = effective_solver(cache, params);
  const double max_radius =
      2.0 * std::sqrt(static_cast<double>(cache.spec().order()));

  OuterResult out;
  out.solver_used = kind;
  out.u = random_point(cache.spec(), params.seed);
  out.inner = solve_inner(cache, out.u, params);
  Index spent = out.inner.iterations;

  MatList prev_dir;
  MatList prev_grad;
  double prev_step = 0.0;
  double radius = kInitRadius;
  int failures = 0;
  int stagnant = 0;
  double prev_g = 0.0;
  bool have_prev_g = false;

  auto clock_start = std::chrono::steady_clock::now();

  for (Index t = 0;; ++t) {
    const double g = out.inner.objective;
    const MatList egrad = euclidean_grad(cache, out.u, out.inner);
    const MatList rgrad = riemannian_grad(out.u, egrad);
    const double gn = norm(rgrad);
    out.final_gap =
        duality_gap(cache, out.u, out.inner, gap_seed(params.seed, t));

    IterationRecord rec;
    rec.iter = t;
    rec.g_value = g;
    rec.grad_norm = gn;
    rec.duality_gap = out.final_gap.gap;
    rec.rel_gap = out.final_gap.rel_gap;
    rec.inner_iters = spent;
    rec.feasibility = out.inner.feasibility;
    rec.z_norm = out.inner.z.norm();
    if (params.time_iters) {
      const auto now = std::chrono::steady_clock::now();
      rec.wall_ms =
          std::chrono::duration<double, std::milli>(now - clock_start).count();
      clock_start = now;
    }
    out.history.push_back(rec);
    spent = 0;

    if (have_prev_g && std::abs(prev_g - g) < kStagnationTol * (1.0 + std::abs(g)))
      ++stagnant;
    else
      stagnant = 0;
    prev_g = g;
    have_prev_g = true;

    if (gn <= params.eps) {
      out.status = OuterStatus::converged;
      break;
    }
    if (t >= params.max_iters) {
      out.status = OuterStatus::max_iters;
      break;
    }
    if (stagnant >= kStagnationRuns) {
      out.status = OuterStatus::stagnated;
      break;
    }

    if (kind == OuterKind::rcg) {
      MatList dir = scaled(rgrad, -1.0);
      if (!prev_dir.empty()) {
        // Polak-Ribiere+ with projection transport.
        const MatList old_grad_here = tangent_project(out.u, prev_grad);
        MatList diff = rgrad;
        axpy(-1.0, old_grad_here, diff);
        const double denom = dot(prev_grad, prev_grad);
        const double beta =
            denom > 0.0 ? std::max(0.0, dot(rgrad, diff) / denom) : 0.0;
        axpy(beta, tangent_project(out.u, prev_dir), dir);
        if (dot(dir, rgrad) >= 0.0) dir = scaled(rgrad, -1.0);
      }
      const double slope = dot(rgrad, dir);

      double alpha =
          prev_step > 0.0 ? 2.0 * prev_step : 1.0 / std::max(1.0, gn);
      bool accepted = false;
      for (int bt = 0; bt < kMaxBacktracks; ++bt) {
        const MatList u_trial = retract(out.u, scaled(dir, alpha));
        const InnerSolution trial =
            solve_inner(cache, u_trial, params, &out.inner);
        spent += trial.iterations;
        if (trial.objective <= g + kArmijoC * alpha * slope) {
          out.u = u_trial;
          out.inner = trial;
          prev_step = alpha;
          prev_dir = dir;
          prev_grad = rgrad;
          accepted = true;
          break;
        }
        alpha *= kBacktrack;
      }
      if (accepted) {
        failures = 0;
      } else {
        ++failures;
        prev_dir.clear();
        prev_grad.clear();
        prev_step = 0.0;
        if (failures >= kMaxLineSearchFailures) {
          out.status = OuterStatus::line_search_failed;
          break;
        }
      }
    } else {
      const HessOperator hess{cache, out.u, out.inner, egrad, params, &spent};
      const Index dim = [&] {
        Index n = 0;
        for (const Matrix& m : out.u) n += m.size();
        return n;
      }();
      TcgResult tcg = truncated_cg(
          rgrad, [&hess](const MatList& v) { return hess(v); }, radius,
          std::min<Index>(dim, 250));
      if (tcg.model_decrease <= 0.0) {
        // Cauchy fallback.
        const MatList hg = hess(rgrad);
        const double ghg = dot(rgrad, hg);
        const double tau =
            ghg <= 0.0 ? 1.0
                       : std::min(1.0, gn * gn * gn / (radius * ghg));
        tcg.step = scaled(rgrad, -tau * radius / gn);
        MatList hs = scaled(hg, -tau * radius / gn);
        tcg.model_decrease =
            -(dot(rgrad, tcg.step) + 0.5 * dot(tcg.step, hs));
        tcg.boundary = tau >= 1.0;
      }

      const MatList u_trial = retract(out.u, tcg.step);
      const InnerSolution trial =
          solve_inner(cache, u_trial, params, &out.inner);
      spent += trial.iterations;
      const double rho = tcg.model_decrease > 0.0
                             ? (g - trial.objective) / tcg.model_decrease
                             : -1.0;
      if (rho > kAcceptRho) {
        out.u = u_trial;
        out.inner = trial;
        if (rho > kExpandRho && tcg.boundary)
          radius = std::min(2.0 * radius, max_radius);
      } else {
        radius *= 0.25;
      }
    }
  }
  return out;
}

}  // namespace stlt
