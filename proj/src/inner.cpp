#include "stlt/inner.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>

namespace stlt {

namespace {

using ApplyFn = std::function<void(const Vector&, Vector&)>;
using ProjFn = std::function<void(Vector&)>;

struct CgResult {
  double residual = 0.0;
  Index iterations = 0;
  bool converged = false;
};

// Minimizes (1/2)x'Ax - b'x for SPD (or PSD with consistent b) A. When the
// operator is restricted to a subspace, `proj` re-projects residuals to kill
// numerical drift; apply must already map the subspace into itself.
CgResult conjugate_gradient(const ApplyFn& apply, const Vector& b, Vector& x,
                            double tol_abs, Index max_iter,
                            const ProjFn& proj = nullptr) {
  CgResult res;
  if (b.norm() == 0.0) {
    x.setZero();
    res.converged = true;
    return res;
  }
  Vector ax(b.size());
  apply(x, ax);
  Vector r = b - ax;
  if (proj) proj(r);
  double rr = r.squaredNorm();
  res.residual = std::sqrt(rr);
  if (res.residual <= tol_abs) {
    res.converged = true;
    return res;
  }
  Vector p = r, ap(b.size());
  double ray_max = 0.0;
  for (Index it = 0; it < max_iter; ++it) {
    apply(p, ap);
    const double pap = p.dot(ap);
    // Rayleigh floor: a direction with curvature this far below the largest
    // seen is numerically null; stepping along it only amplifies noise.
    if (!(pap > ray_max * 1e-14 * p.squaredNorm())) {
      if ((p - r).norm() == 0.0) break;  // steepest direction already null
      p = r;  // conjugacy lost; restart
      continue;
    }
    ray_max = std::max(ray_max, pap / p.squaredNorm());
    const double alpha = rr / pap;
    x += alpha * p;
    r -= alpha * ap;
    if (proj) proj(r);
    const double rr_new = r.squaredNorm();
    res.iterations = it + 1;
    res.residual = std::sqrt(rr_new);
    if (res.residual <= tol_abs) {
      res.converged = true;
      break;
    }
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  if (proj) proj(x);
  return res;
}

// Same arithmetic as ProblemCache::apply_gram, with the factors pre-transposed
// and the per-mode gather buffers reused across CG iterations. The generic
// path re-allocates and runs per-entry Eigen expressions, which dominates the
// flops at the small ranks these solves use.
class GramScratch {
 public:
  GramScratch(const ProblemCache& cache, const MatList& u) : cache_(cache) {
    n_ = static_cast<Eigen::Index>(cache.support_size());
    ut_.reserve(u.size());
    g_.reserve(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) {
      ut_.push_back(u[k].transpose());
      g_.push_back(Matrix(u[k].cols(), cache.views()[k].ncols));
    }
  }

  // out[0..n) = sum_k lambda_k fold_k(U_k U_k^T unfold_k(x)) on the support.
  void apply(const double* x, double* out) {
    std::fill(out, out + n_, 0.0);
    const auto& lambdas = cache_.spec().lambdas;
    for (std::size_t k = 0; k < ut_.size(); ++k) {
      if (lambdas[k] == 0.0) continue;
      const ModeView& view = cache_.views()[k];
      const Index* rows = view.row.data();
      const Index* cols = view.col.data();
      const Eigen::Index r = ut_[k].rows();
      const double* ut = ut_[k].data();
      double* g = g_[k].data();
      std::fill(g, g + g_[k].size(), 0.0);
      for (Eigen::Index e = 0; e < n_; ++e) {
        const double xe = x[e];
        const double* uc = ut + r * rows[e];
        double* gc = g + r * cols[e];
        for (Eigen::Index j = 0; j < r; ++j) gc[j] += xe * uc[j];
      }
      const double lam = lambdas[k];
      for (Eigen::Index e = 0; e < n_; ++e) {
        const double* uc = ut + r * rows[e];
        const double* gc = g + r * cols[e];
        double acc = 0.0;
        for (Eigen::Index j = 0; j < r; ++j) acc += uc[j] * gc[j];
        out[e] += lam * acc;
      }
    }
  }

 private:
  const ProblemCache& cache_;
  Eigen::Index n_ = 0;
  std::vector<Matrix> ut_;
  std::vector<Matrix> g_;
};

double sum_lambda(const ProblemSpec& spec) {
  double s = 0.0;
  for (double l : spec.lambdas) s += l;
  return s;
}

// (1/2) sum_k lambda_k ||U_k^T T_k||^2 for a dense tensor.
double dense_quad(const ProblemCache& cache, const MatList& u,
                  const DenseTensor& t) {
  const auto& spec = cache.spec();
  double q = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (spec.lambdas[k] == 0.0) continue;
    const DenseTensor projk =
        mode_product(t, Matrix(u[k].transpose()), static_cast<int>(k));
    q += spec.lambdas[k] * inner(projk, projk);
  }
  return 0.5 * q;
}

}  // namespace

DenseTensor dense_gram(const ProblemCache& cache, const MatList& u,
                       const DenseTensor& t) {
  const auto& spec = cache.spec();
  DenseTensor acc = DenseTensor::zeros(t.dims);
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (spec.lambdas[k] == 0.0) continue;
    const int mode = static_cast<int>(k);
    const DenseTensor term = mode_product(
        mode_product(t, Matrix(u[k].transpose()), mode), u[k], mode);
    acc = add_scaled(acc, term, spec.lambdas[k]);
  }
  return acc;
}

DenseTensor dense_gram_pair(const ProblemCache& cache, const MatList& u,
                            const MatList& v, const DenseTensor& t) {
  const auto& spec = cache.spec();
  DenseTensor acc = DenseTensor::zeros(t.dims);
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (spec.lambdas[k] == 0.0) continue;
    const int mode = static_cast<int>(k);
    const DenseTensor a = mode_product(
        mode_product(t, Matrix(u[k].transpose()), mode), v[k], mode);
    const DenseTensor b = mode_product(
        mode_product(t, Matrix(v[k].transpose()), mode), u[k], mode);
    acc = add_scaled(acc, a, spec.lambdas[k]);
    acc = add_scaled(acc, b, spec.lambdas[k]);
  }
  return acc;
}

double inner_objective(const ProblemCache& cache, const MatList& u,
                       const InnerSolution& sol) {
  const auto& spec = cache.spec();
  const double base =
      sol.z.dot(cache.y_values()) - sol.z.squaredNorm() / (4.0 * spec.cost);
  double quad = 0.0;
  switch (spec.constraint.kind) {
    case ConstraintKind::none:
      for (std::size_t k = 0; k < u.size(); ++k)
        quad += spec.lambdas[k] * cache.gather(k, u[k], sol.z).squaredNorm();
      quad *= 0.5;
      break;
    case ConstraintKind::hankel:
      for (std::size_t k = 0; k < u.size(); ++k)
        quad +=
            spec.lambdas[k] * cache.gather(k, u[k], sol.s_lift).squaredNorm();
      quad *= 0.5;
      break;
    case ConstraintKind::nonneg: {
      DenseTensor x = cache.embed_observed(sol.z);
      x = add_scaled(x, sol.s_dense, 1.0);
      quad = dense_quad(cache, u, x);
      break;
    }
  }
  return base - quad;
}

InnerSolution solve_inner_none(const ProblemCache& cache, const MatList& u,
                               const SolverParams& params,
                               const InnerSolution* warm) {
  const auto& spec = cache.spec();
  const Eigen::Index m = static_cast<Eigen::Index>(spec.y.nnz());
  const double inv2c = 1.0 / (2.0 * spec.cost);

  InnerSolution sol;
  sol.z = (warm && warm->z.size() == m) ? warm->z : Vector::Zero(m);

  GramScratch scratch(cache, u);
  auto apply = [&](const Vector& x, Vector& out) {
    out.resize(m);
    scratch.apply(x.data(), out.data());
    out += inv2c * x;
  };
  const double tol = params.cg_tol * cache.y_values().norm();
  const CgResult cg =
      conjugate_gradient(apply, cache.y_values(), sol.z, tol,
                         params.cg_max_iter);
  sol.residual = cg.residual;
  sol.iterations = cg.iterations;
  sol.converged = cg.converged;
  sol.objective = inner_objective(cache, u, sol);
  return sol;
}

InnerSolution solve_inner_nonneg(const ProblemCache& cache, const MatList& u,
                                 const SolverParams& params,
                                 const InnerSolution* warm) {
  const auto& spec = cache.spec();
  const Eigen::Index m = static_cast<Eigen::Index>(spec.y.nnz());
  const double inv2c = 1.0 / (2.0 * spec.cost);
  const double scale = 1.0 + cache.y_values().norm();

  InnerSolution sol;
  sol.z = (warm && warm->z.size() == m) ? warm->z : Vector::Zero(m);
  if (warm && warm->s_dense.dims == spec.y.dims)
    sol.s_dense = warm->s_dense;
  else
    sol.s_dense = DenseTensor::zeros(spec.y.dims);

  GramScratch scratch(cache, u);
  auto apply_m = [&](const Vector& x, Vector& out) {
    out.resize(m);
    scratch.apply(x.data(), out.data());
    out += inv2c * x;
  };

  const double lam_total = std::max(sum_lambda(spec), 1e-12);
  Index total_iters = 0;
  bool kkt_ok = false;

  for (Index round = 0; round < params.alternation_max_rounds; ++round) {
    // z block: unconstrained SPD solve with the multiplier held fixed.
    const Vector bs = cache.gather_observed(dense_gram(cache, u, sol.s_dense));
    const Vector rhs = cache.y_values() - bs;
    const CgResult cg = conjugate_gradient(
        apply_m, rhs, sol.z, params.cg_tol * std::max(rhs.norm(), 1e-30),
        params.cg_max_iter);
    total_iters += cg.iterations;

    // s block: projected-gradient NNLS with a Barzilai-Borwein step and a
    // non-monotone acceptance test.
    const DenseTensor zfull = cache.embed_observed(sol.z);
    auto objective_s = [&](const DenseTensor& s) {
      return dense_quad(cache, u, add_scaled(zfull, s, 1.0));
    };
    auto gradient_s = [&](const DenseTensor& s) {
      return dense_gram(cache, u, add_scaled(zfull, s, 1.0));
    };

    double alpha = 1.0 / lam_total;
    std::deque<double> recent{objective_s(sol.s_dense)};
    DenseTensor grad = gradient_s(sol.s_dense);
    DenseTensor s_prev = sol.s_dense, grad_prev = grad;
    for (Index it = 0; it < params.nnls_max_iter; ++it) {
      double rnorm2 = 0.0;
      for (std::size_t i = 0; i < grad.values.size(); ++i) {
        const double step = sol.s_dense.values[i] - grad.values[i];
        const double r = sol.s_dense.values[i] - std::max(0.0, step);
        rnorm2 += r * r;
      }
      if (std::sqrt(rnorm2) <= params.nnls_tol * scale) break;

      if (it > 0) {
        double ss = 0.0, sg = 0.0;
        for (std::size_t i = 0; i < grad.values.size(); ++i) {
          const double ds = sol.s_dense.values[i] - s_prev.values[i];
          const double dg = grad.values[i] - grad_prev.values[i];
          ss += ds * ds;
          sg += ds * dg;
        }
        alpha = sg > 0.0 ? ss / sg : 1e12;
        alpha = std::clamp(alpha, 1e-12, 1e12);
      }
      s_prev = sol.s_dense;
      grad_prev = grad;

      const double f_ref = *std::max_element(recent.begin(), recent.end());
      DenseTensor s_try = sol.s_dense;
      double f_try = 0.0;
      bool accepted = false;
      for (int bt = 0; bt < 40; ++bt) {
        double decrease = 0.0;
        for (std::size_t i = 0; i < s_try.values.size(); ++i) {
          s_try.values[i] = std::max(
              0.0, sol.s_dense.values[i] - alpha * grad.values[i]);
          decrease +=
              grad.values[i] * (sol.s_dense.values[i] - s_try.values[i]);
        }
        f_try = objective_s(s_try);
        if (f_try <= f_ref - 1e-4 * decrease) {
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      ++total_iters;
      if (!accepted) break;
      sol.s_dense = std::move(s_try);
      grad = gradient_s(sol.s_dense);
      recent.push_back(f_try);
      if (recent.size() > 10) recent.pop_front();
    }

    // Joint KKT: z stationarity plus the projected residual in s.
    DenseTensor x = add_scaled(cache.embed_observed(sol.z), sol.s_dense, 1.0);
    const DenseTensor gfull = dense_gram(cache, u, x);
    const Vector rz =
        cache.y_values() - inv2c * sol.z - cache.gather_observed(gfull);
    double rs2 = 0.0;
    for (std::size_t i = 0; i < gfull.values.size(); ++i) {
      const double r = sol.s_dense.values[i] -
                       std::max(0.0, sol.s_dense.values[i] - gfull.values[i]);
      rs2 += r * r;
    }
    sol.residual = std::sqrt(rz.squaredNorm() + rs2);
    if (sol.residual <= params.alternation_tol * scale) {
      kkt_ok = true;
      break;
    }
  }

  sol.iterations = total_iters;
  sol.converged = kkt_ok;
  sol.objective = inner_objective(cache, u, sol);
  return sol;
}

InnerSolution solve_inner_hankel(const ProblemCache& cache, const MatList& u,
                                 const SolverParams& params,
                                 const InnerSolution* warm) {
  const auto& spec = cache.spec();
  const Eigen::Index m = static_cast<Eigen::Index>(spec.y.nnz());
  const Eigen::Index l = static_cast<Eigen::Index>(cache.lift().nnz());
  const double inv2c = 1.0 / (2.0 * spec.cost);

  auto proj = [&](Vector& x) {
    project_coupling_values(
        cache.lift(), std::span<double>(x.data(), static_cast<std::size_t>(m)),
        std::span<double>(x.data() + m, static_cast<std::size_t>(l)));
  };
  GramScratch scratch(cache, u);
  auto apply = [&](const Vector& x, Vector& out) {
    out.resize(m + l);
    out.head(m) = inv2c * x.head(m);
    scratch.apply(x.data() + m, out.data() + m);
    proj(out);
  };

  Vector b = Vector::Zero(m + l);
  b.head(m) = cache.y_values();
  proj(b);

  Vector x = Vector::Zero(m + l);
  if (warm && warm->z.size() == m && warm->s_lift.size() == l) {
    x.head(m) = warm->z;
    x.tail(l) = warm->s_lift;
    proj(x);
  }

  const CgResult cg = conjugate_gradient(
      apply, b, x, params.cg_tol * std::max(b.norm(), 1e-30),
      params.cg_max_iter, proj);

  InnerSolution sol;
  sol.z = x.head(m);
  sol.s_lift = x.tail(l);
  sol.residual = cg.residual;
  sol.iterations = cg.iterations;
  sol.converged = cg.converged;

  double feas2 = 0.0;
  const auto& lift = cache.lift();
  for (Eigen::Index e = 0; e < m; ++e) {
    double sum = 0.0;
    for (Index t = lift.entry_offset[static_cast<std::size_t>(e)];
         t < lift.entry_offset[static_cast<std::size_t>(e) + 1]; ++t)
      sum += sol.s_lift[static_cast<Eigen::Index>(t)];
    const double d = sum - sol.z[e];
    feas2 += d * d;
  }
  sol.feasibility = std::sqrt(feas2);
  sol.objective = inner_objective(cache, u, sol);
  return sol;
}

InnerSolution solve_inner(const ProblemCache& cache, const MatList& u,
                          const SolverParams& params,
                          const InnerSolution* warm) {
  switch (cache.spec().constraint.kind) {
    case ConstraintKind::none:
      return solve_inner_none(cache, u, params, warm);
    case ConstraintKind::nonneg:
      return solve_inner_nonneg(cache, u, params, warm);
    case ConstraintKind::hankel:
      return solve_inner_hankel(cache, u, params, warm);
  }
  throw std::invalid_argument("unknown constraint kind");
}

namespace {

DirectionalSolution directional_none(const ProblemCache& cache,
                                     const MatList& u, const MatList& v,
                                     const InnerSolution& sol,
                                     const SolverParams& params) {
  const auto& spec = cache.spec();
  const double inv2c = 1.0 / (2.0 * spec.cost);
  Vector rhs(sol.z.size());
  cache.apply_gram_sym(u, v, sol.z, rhs);
  rhs = -rhs;

  GramScratch scratch(cache, u);
  auto apply = [&](const Vector& x, Vector& out) {
    out.resize(x.size());
    scratch.apply(x.data(), out.data());
    out += inv2c * x;
  };
  DirectionalSolution d;
  d.z_dot = Vector::Zero(sol.z.size());
  const CgResult cg = conjugate_gradient(
      apply, rhs, d.z_dot, params.cg_tol * std::max(rhs.norm(), 1e-30),
      params.cg_max_iter);
  d.iterations = cg.iterations;
  d.converged = cg.converged;
  return d;
}

DirectionalSolution directional_nonneg(const ProblemCache& cache,
                                       const MatList& u, const MatList& v,
                                       const InnerSolution& sol,
                                       const SolverParams& params) {
  const auto& spec = cache.spec();
  const double inv2c = 1.0 / (2.0 * spec.cost);
  const Eigen::Index m = static_cast<Eigen::Index>(spec.y.nnz());

  DenseTensor xhat = add_scaled(cache.embed_observed(sol.z), sol.s_dense, 1.0);
  const DenseTensor ghat = dense_gram(cache, u, xhat);

  double smax = 0.0, gmax = 0.0;
  for (std::size_t i = 0; i < ghat.values.size(); ++i) {
    smax = std::max(smax, std::abs(sol.s_dense.values[i]));
    gmax = std::max(gmax, std::abs(ghat.values[i]));
  }
  const double eps_s = 1e-10 * (1.0 + smax);
  const double eps_g = 1e-8 * (1.0 + gmax);

  DirectionalSolution d;
  std::vector<std::size_t> free_set;
  for (std::size_t i = 0; i < ghat.values.size(); ++i) {
    if (sol.s_dense.values[i] > eps_s) {
      free_set.push_back(i);
    } else if (ghat.values[i] <= eps_g) {
      // Value and gradient both vanish: strict complementarity fails. The
      // closed-face convention clamps the coordinate, which also keeps the
      // reduced system away from the gram operator's null space.
      d.degenerate = true;
    }
  }
  const Eigen::Index f = static_cast<Eigen::Index>(free_set.size());

  const DenseTensor dpair = dense_gram_pair(cache, u, v, xhat);
  Vector rhs(m + f);
  rhs.head(m) = -cache.gather_observed(dpair);
  for (Eigen::Index j = 0; j < f; ++j)
    rhs[m + j] = -dpair.values[free_set[static_cast<std::size_t>(j)]];

  auto apply = [&](const Vector& q, Vector& out) {
    DenseTensor t = cache.embed_observed(q.head(m));
    for (Eigen::Index j = 0; j < f; ++j)
      t.values[free_set[static_cast<std::size_t>(j)]] += q[m + j];
    const DenseTensor bt = dense_gram(cache, u, t);
    out.resize(m + f);
    out.head(m) = inv2c * q.head(m) + cache.gather_observed(bt);
    for (Eigen::Index j = 0; j < f; ++j)
      out[m + j] = bt.values[free_set[static_cast<std::size_t>(j)]];
  };

  Vector q = Vector::Zero(m + f);
  const CgResult cg = conjugate_gradient(
      apply, rhs, q, params.cg_tol * std::max(rhs.norm(), 1e-30),
      params.cg_max_iter);
  d.z_dot = q.head(m);
  d.s_dense_dot = DenseTensor::zeros(spec.y.dims);
  for (Eigen::Index j = 0; j < f; ++j)
    d.s_dense_dot.values[free_set[static_cast<std::size_t>(j)]] = q[m + j];
  d.iterations = cg.iterations;
  d.converged = cg.converged;
  return d;
}

DirectionalSolution directional_hankel(const ProblemCache& cache,
                                       const MatList& u, const MatList& v,
                                       const InnerSolution& sol,
                                       const SolverParams& params) {
  const auto& spec = cache.spec();
  const double inv2c = 1.0 / (2.0 * spec.cost);
  const Eigen::Index m = static_cast<Eigen::Index>(spec.y.nnz());
  const Eigen::Index l = static_cast<Eigen::Index>(cache.lift().nnz());

  auto proj = [&](Vector& x) {
    project_coupling_values(
        cache.lift(), std::span<double>(x.data(), static_cast<std::size_t>(m)),
        std::span<double>(x.data() + m, static_cast<std::size_t>(l)));
  };
  GramScratch scratch(cache, u);
  auto apply = [&](const Vector& x, Vector& out) {
    out.resize(m + l);
    out.head(m) = inv2c * x.head(m);
    scratch.apply(x.data() + m, out.data() + m);
    proj(out);
  };

  Vector rhs_s(l);
  cache.apply_gram_sym(u, v, sol.s_lift, rhs_s);
  Vector rhs = Vector::Zero(m + l);
  rhs.tail(l) = -rhs_s;
  proj(rhs);

  Vector x = Vector::Zero(m + l);
  const CgResult cg = conjugate_gradient(
      apply, rhs, x, params.cg_tol * std::max(rhs.norm(), 1e-30),
      params.cg_max_iter, proj);

  DirectionalSolution d;
  d.z_dot = x.head(m);
  d.s_lift_dot = x.tail(l);
  d.iterations = cg.iterations;
  d.converged = cg.converged;
  return d;
}

}  // namespace

DirectionalSolution solve_directional(const ProblemCache& cache,
                                      const MatList& u, const MatList& v,
                                      const InnerSolution& sol,
                                      const SolverParams& params) {
  switch (cache.spec().constraint.kind) {
    case ConstraintKind::none:
      return directional_none(cache, u, v, sol, params);
    case ConstraintKind::nonneg:
      return directional_nonneg(cache, u, v, sol, params);
    case ConstraintKind::hankel:
      return directional_hankel(cache, u, v, sol, params);
  }
  throw std::invalid_argument("unknown constraint kind");
}

}  // namespace stlt
