// Acceptance gate: ten numbered checks, one PASS/FAIL line each, exit code =
// number of failures. Reference values come from the naive oracle layer or
// from the installed CLI binary, never from the code path under test.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "stlt/constraints.hpp"
#include "stlt/dual.hpp"
#include "stlt/manifold.hpp"
#include "stlt/outer.hpp"
#include "stlt/run.hpp"

#ifndef STLT_CLI_PATH
#define STLT_CLI_PATH "stlt"
#endif

namespace fs = std::filesystem;
using namespace stlt;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

struct Line {
  int id = 0;
  bool pass = false;
  double seconds = 0.0;
  double budget = 0.0;
  std::string detail;
};

__attribute__((format(printf, 1, 2))) std::string strf(const char* format,
                                                       ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

double loglog_slope(const std::vector<double>& h,
                    const std::vector<double>& err) {
  const std::size_t n = h.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(h[i]);
    const double y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (static_cast<double>(n) * sxy - sx * sy) /
         (static_cast<double>(n) * sxx - sx * sx);
}

MatList unit_ambient_direction(const MatList& u, std::uint64_t seed) {
  MatList v = fixture::random_directions(u, seed);
  const double n = norm(v);
  for (auto& m : v) m /= n;
  return v;
}

// Every outer run is remembered so the gap floor can be checked across all of
// them at the end.
std::vector<std::pair<std::string, std::vector<IterationRecord>>> g_histories;

void remember_history(std::string label, std::vector<IterationRecord> hist) {
  g_histories.emplace_back(std::move(label), std::move(hist));
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return in ? buf.str() : std::string();
}

std::vector<IterationRecord> parse_history_csv(const std::string& text) {
  std::vector<IterationRecord> rows;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::istringstream cells(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(cells, cell, ',')) v.push_back(std::stod(cell));
    if (v.size() != 7) return {};
    IterationRecord r;
    r.iter = static_cast<Index>(v[0]);
    r.g_value = v[1];
    r.grad_norm = v[2];
    r.duality_gap = v[3];
    r.rel_gap = v[4];
    r.inner_iters = static_cast<Index>(v[5]);
    r.wall_ms = v[6];
    rows.push_back(r);
  }
  return rows;
}

// --- 1: certificate attains the squared nuclear norm ---------------------

Outcome c1_certificate() {
  Rng rng(101);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Index rows = 1 + static_cast<Index>(rng.below(50));
    const Index cols = 1 + static_cast<Index>(rng.below(80));
    Matrix x(rows, cols);
    for (Eigen::Index c = 0; c < x.cols(); ++c)
      for (Eigen::Index r = 0; r < x.rows(); ++r) x(r, c) = rng.normal();
    const CertificateResult cert = nuclear_certificate(x);
    const double nuc = Eigen::JacobiSVD<Matrix>(x).singularValues().sum();
    worst = std::max(worst, std::abs(cert.value - nuc * nuc) / (nuc * nuc));
  }
  return {worst <= 1e-10,
          strf("nuclear norm certificate on 100 matrices up to 50x80, "
               "max rel err %.1e",
               worst)};
}

// --- 2: dual gradient against central finite differences -----------------

Outcome c2_gradient() {
  const SolverParams params = fixture::tight_params();
  Rng shape(202);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    ProblemSpec spec;
    if (i % 3 < 2) {
      const std::size_t order = 2 + static_cast<std::size_t>(i % 2);
      std::vector<Index> dims(order), ranks(order);
      std::vector<double> lambdas(order);
      Index size = 1;
      for (std::size_t k = 0; k < order; ++k) {
        dims[k] = 3 + static_cast<Index>(shape.below(3));
        size *= dims[k];
      }
      for (std::size_t k = 0; k < order; ++k) {
        ranks[k] = std::min<Index>(2, dims[k]);
        lambdas[k] = shape.uniform(0.3, 1.0);
      }
      Constraint constraint;
      if (i % 3 == 1) constraint.kind = ConstraintKind::nonneg;
      spec = fixture::make_spec(dims, std::max<Index>(4, size / 3), ranks,
                                lambdas, 1.0 + 0.5 * shape.uniform(),
                                constraint, 1000 + i);
    } else {
      const std::size_t order = 1 + static_cast<std::size_t>(i % 2);
      std::vector<Index> dims(order), tau(order), ranks(order);
      std::vector<double> lambdas(order);
      Index size = 1;
      for (std::size_t k = 0; k < order; ++k) {
        dims[k] = 6 + static_cast<Index>(shape.below(4));
        tau[k] = 2 + static_cast<Index>(shape.below(2));
        ranks[k] = 1 + static_cast<Index>(shape.below(2));
        lambdas[k] = shape.uniform(0.3, 1.0);
        size *= dims[k];
      }
      spec = fixture::make_spec(dims, std::max<Index>(4, size / 3), ranks,
                                lambdas, 1.0,
                                Constraint{ConstraintKind::hankel, tau},
                                1000 + i);
    }
    const ProblemCache cache(spec);
    const MatList u = fixture::random_factors(spec, 2000 + i);
    const MatList v = unit_ambient_direction(u, 3000 + i);

    const InnerSolution sol = solve_inner(cache, u, params);
    const double an = dot(euclidean_grad(cache, u, sol), v);
    const double t = 1e-5;
    MatList up = u, um = u;
    axpy(t, v, up);
    axpy(-t, v, um);
    const InnerSolution sp = solve_inner(cache, up, params, &sol);
    const InnerSolution sm = solve_inner(cache, um, params, &sol);
    const double fd = (sp.objective - sm.objective) / (2.0 * t);
    worst = std::max(worst, std::abs(fd - an) / (1.0 + std::abs(an)));
  }
  return {worst <= 1e-4,
          strf("dual gradient fd on 20 seeded triples over all three kinds, "
               "max rel err %.1e",
               worst)};
}

// --- 3: hessian products and second order model quality ------------------

Outcome c3_hessian() {
  const SolverParams params = fixture::tight_params();
  std::vector<ProblemSpec> specs;
  specs.push_back(fixture::make_spec({4, 3, 2}, 10, {2, 2, 1},
                                     {0.8, 0.5, 0.3}, 1.5, Constraint{}, 301));
  specs.push_back(fixture::make_spec({5, 4}, 8, {2, 2}, {0.6, 0.7}, 1.0,
                                     Constraint{}, 302));
  specs.push_back(fixture::make_spec({6, 3}, 9, {2, 2}, {0.5, 0.9}, 1.2,
                                     Constraint{}, 303));
  specs.push_back(fixture::make_spec(
      {8}, 5, {2}, {0.7}, 1.0, Constraint{ConstraintKind::hankel, {3}}, 304));
  specs.push_back(fixture::make_spec({6, 5}, 8, {2, 2}, {0.5, 0.6}, 1.0,
                                     Constraint{ConstraintKind::hankel, {2, 2}},
                                     305));
  specs.push_back(fixture::make_spec(
      {10}, 6, {3}, {0.8}, 1.0, Constraint{ConstraintKind::hankel, {4}}, 306));

  double worst = 0.0;
  for (std::size_t s = 0; s < specs.size(); ++s) {
    const ProblemCache cache(specs[s]);
    const MatList u =
        fixture::random_factors(specs[s], 310 + static_cast<std::uint64_t>(s));
    const InnerSolution sol = solve_inner(cache, u, params);
    for (int d = 0; d < 2; ++d) {
      const MatList v = unit_ambient_direction(
          u, 3200 + 10 * static_cast<std::uint64_t>(s) +
                 static_cast<std::uint64_t>(d));
      const DirectionalSolution ds = solve_directional(cache, u, v, sol, params);
      const MatList hv = euclidean_hess_vec(cache, u, v, sol, ds);
      const double t = 1e-5;
      MatList up = u, um = u;
      axpy(t, v, up);
      axpy(-t, v, um);
      const InnerSolution sp = solve_inner(cache, up, params, &sol);
      const InnerSolution sm = solve_inner(cache, um, params, &sol);
      MatList fdh = euclidean_grad(cache, up, sp);
      axpy(-1.0, euclidean_grad(cache, um, sm), fdh);
      for (auto& m : fdh) m /= 2.0 * t;
      MatList diff = fdh;
      axpy(-1.0, hv, diff);
      worst = std::max(worst, norm(diff) / (1.0 + norm(hv)));
    }
  }

  double slope_min = 1e100;
  for (const std::size_t s : {std::size_t{0}, std::size_t{3}}) {
    const ProblemCache cache(specs[s]);
    const MatList u =
        fixture::random_factors(specs[s], 330 + static_cast<std::uint64_t>(s));
    const InnerSolution sol = solve_inner(cache, u, params);
    const double g0 = eval_g(cache, u, sol);
    const MatList egrad = euclidean_grad(cache, u, sol);
    const MatList rgrad = riemannian_grad(u, egrad);
    const MatList v = tangent_project(
        u, fixture::random_directions(u, 340 + static_cast<std::uint64_t>(s)));
    const DirectionalSolution ds = solve_directional(cache, u, v, sol, params);
    const MatList rhess =
        riemannian_hess_vec(u, egrad, euclidean_hess_vec(cache, u, v, sol, ds),
                            v);
    const double slope1 = dot(rgrad, v);
    const double curv = dot(rhess, v);
    const std::vector<double> hs = {5e-2, 2.5e-2, 1.25e-2, 6.25e-3};
    std::vector<double> errs;
    for (double h : hs) {
      const MatList uh = retract(u, scaled(v, h));
      const InnerSolution sh = solve_inner(cache, uh, params, &sol);
      errs.push_back(
          std::abs(eval_g(cache, uh, sh) - (g0 + h * slope1 + 0.5 * h * h * curv)));
    }
    slope_min = std::min(slope_min, loglog_slope(hs, errs));
  }

  return {worst <= 1e-3 && slope_min >= 2.9,
          strf("hessian fd on none+hankel max rel err %.1e, taylor slope "
               ">= %.2f",
               worst, slope_min)};
}

// --- 4: inner solvers against brute-force oracles -------------------------

double ascend_nonneg_objective(const ProblemCache& cache, const MatList& u,
                               Index iterations) {
  const ProblemSpec& spec = cache.spec();
  double lam_sum = 0.0;
  for (double l : spec.lambdas) lam_sum += l;
  const double step = 1.0 / (0.5 / spec.cost + 2.0 * lam_sum + 1.0);

  Vector z = Vector::Zero(cache.support_size());
  DenseTensor s = DenseTensor::zeros(spec.y.dims);
  for (Index it = 0; it < iterations; ++it) {
    const DenseTensor x = add_scaled(cache.embed_observed(z), s, 1.0);
    DenseTensor b = DenseTensor::zeros(spec.y.dims);
    for (std::size_t k = 0; k < spec.order(); ++k)
      b = add_scaled(b,
                     oracle::mode_product_loops(
                         x, Matrix(u[k] * u[k].transpose()),
                         static_cast<int>(k)),
                     spec.lambdas[k]);
    const Vector gz =
        cache.y_values() - z / (2.0 * spec.cost) - cache.gather_observed(b);
    z += step * gz;
    for (std::size_t i = 0; i < s.values.size(); ++i)
      s.values[i] = std::max(0.0, s.values[i] - step * b.values[i]);
  }
  InnerSolution probe;
  probe.z = z;
  probe.s_dense = s;
  return fixture::objective_loops(cache, u, probe);
}

Outcome c4_inner_oracles() {
  const SolverParams params = fixture::tight_params();
  double worst = 0.0;

  {
    const ProblemSpec spec = fixture::make_spec(
        {3, 3, 2}, 5, {2, 2, 1}, {0.7, 0.5, 0.4}, 1.0, Constraint{}, 401);
    const ProblemCache cache(spec);
    const MatList u = fixture::random_factors(spec, 402);
    const Matrix a = oracle::materialize(
        cache.support_size(), [&](const Vector& x, Vector& out) {
          const DenseTensor t = cache.embed_observed(x);
          DenseTensor b = DenseTensor::zeros(spec.y.dims);
          for (std::size_t k = 0; k < spec.order(); ++k)
            b = add_scaled(b,
                           oracle::mode_product_loops(
                               t, Matrix(u[k] * u[k].transpose()),
                               static_cast<int>(k)),
                           spec.lambdas[k]);
          out = cache.gather_observed(b) + x / (2.0 * spec.cost);
        });
    InnerSolution ref;
    ref.z = Eigen::LDLT<Matrix>(a).solve(cache.y_values());
    const double f_ref = fixture::objective_loops(cache, u, ref);
    const InnerSolution sol = solve_inner_none(cache, u, params);
    worst = std::max(worst,
                     std::abs(sol.objective - f_ref) / (1.0 + std::abs(f_ref)));
  }
  {
    const ProblemSpec spec = fixture::make_spec(
        {3, 3, 2}, 5, {2, 2, 1}, {0.7, 0.5, 0.4}, 1.0,
        Constraint{ConstraintKind::nonneg, {}}, 411);
    const ProblemCache cache(spec);
    const MatList u = fixture::random_factors(spec, 412);
    const double f_ref = ascend_nonneg_objective(cache, u, 2000000);
    const InnerSolution sol = solve_inner_nonneg(cache, u, params);
    worst = std::max(worst,
                     std::abs(sol.objective - f_ref) / (1.0 + std::abs(f_ref)));
  }
  {
    const ProblemSpec spec = fixture::make_spec(
        {3, 3, 2}, 5, {2, 2, 1}, {0.7, 0.5, 0.4}, 1.0,
        Constraint{ConstraintKind::hankel, {2, 2, 1}}, 421);
    const ProblemCache cache(spec);
    const MatList u = fixture::random_factors(spec, 422);
    const Index m = spec.y.nnz();
    const Index lifted = cache.lift().nnz();
    const Matrix qs = oracle::materialize(
        lifted, [&](const Vector& x, Vector& out) {
          const DenseTensor lift_full = embed(cache.lift_to_sparse(x));
          DenseTensor acc = DenseTensor::zeros(cache.lift().dims);
          for (std::size_t k = 0; k < spec.order(); ++k)
            acc = add_scaled(acc,
                             oracle::mode_product_loops(
                                 lift_full, Matrix(u[k] * u[k].transpose()),
                                 static_cast<int>(2 * k + 1)),
                             spec.lambdas[k]);
          out = fixture::gather_lift(acc, cache.lift());
        });
    Matrix kkt = Matrix::Zero(m + lifted + m, m + lifted + m);
    kkt.topLeftCorner(m, m) = Matrix::Identity(m, m) / (2.0 * spec.cost);
    kkt.block(m, m, lifted, lifted) = qs;
    for (Index e = 0; e < m; ++e) {
      kkt(m + lifted + e, e) = -1.0;
      kkt(e, m + lifted + e) = -1.0;
      for (Index t = cache.lift().entry_offset[static_cast<std::size_t>(e)];
           t < cache.lift().entry_offset[static_cast<std::size_t>(e) + 1];
           ++t) {
        kkt(m + lifted + e, m + t) = 1.0;
        kkt(m + t, m + lifted + e) = 1.0;
      }
    }
    Vector rhs = Vector::Zero(m + lifted + m);
    rhs.head(m) = cache.y_values();
    const Vector xr =
        Eigen::CompleteOrthogonalDecomposition<Matrix>(kkt).solve(rhs);
    InnerSolution ref;
    ref.z = xr.head(m);
    ref.s_lift = xr.segment(m, lifted);
    const double f_ref = fixture::objective_loops(cache, u, ref);
    const InnerSolution sol = solve_inner_hankel(cache, u, params);
    worst = std::max(worst,
                     std::abs(sol.objective - f_ref) / (1.0 + std::abs(f_ref)));
  }
  return {worst <= 1e-8,
          strf("inner objectives on 3x3x2 |omega|=5 vs dense solve, long-run "
               "ascent and dense kkt, max rel err %.1e",
               worst)};
}

// --- 5: adjoint identities -------------------------------------------------

Outcome c5_adjoints() {
  Rng rng(505);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t order = 2 + static_cast<std::size_t>(i % 2);
    std::vector<Index> dims(order);
    for (auto& d : dims) d = 2 + static_cast<Index>(rng.below(4));
    const DenseTensor w = oracle::random_dense(dims, rng);
    const int mode = static_cast<int>(rng.below(order));
    const Index q = 1 + static_cast<Index>(rng.below(4));
    Matrix a(q, dims[static_cast<std::size_t>(mode)]);
    for (Eigen::Index c = 0; c < a.cols(); ++c)
      for (Eigen::Index r = 0; r < a.rows(); ++r) a(r, c) = rng.normal();
    std::vector<Index> tdims = dims;
    tdims[static_cast<std::size_t>(mode)] = q;
    const DenseTensor t = oracle::random_dense(tdims, rng);
    const double lhs = inner(mode_product(w, a, mode), t);
    const double rhs = inner(w, mode_product(t, Matrix(a.transpose()), mode));
    worst = std::max(worst,
                     std::abs(lhs - rhs) / (1.0 + std::abs(lhs) + std::abs(rhs)));
  }
  for (int i = 0; i < 50; ++i) {
    const std::size_t order = 1 + static_cast<std::size_t>(i % 2);
    std::vector<Index> dims(order), tau(order);
    for (std::size_t k = 0; k < order; ++k) {
      dims[k] = 4 + static_cast<Index>(rng.below(6));
      tau[k] = 2 + static_cast<Index>(
                       rng.below(static_cast<std::uint64_t>(dims[k] - 1)));
    }
    const DenseTensor w = oracle::random_dense(dims, rng);
    const DenseTensor lift = oracle::random_dense(lifted_dims(dims, tau), rng);
    const double lhs = inner(hankelize(w, tau), lift);
    const double rhs = inner(w, hankel_adjoint(lift, tau, dims));
    worst = std::max(worst,
                     std::abs(lhs - rhs) / (1.0 + std::abs(lhs) + std::abs(rhs)));
  }
  return {worst <= 1e-12,
          strf("mode product and hankel adjoints on 50+50 instances, "
               "max rel err %.1e",
               worst)};
}

// --- 6: gap floor everywhere plus desk-scale convergence -------------------

Outcome c6_gap_certificate() {
  SynthResult syn = generate_synthetic(ConstraintKind::nonneg, {30, 30, 3},
                                       {5, 5, 2}, 0.10, 606);
  ProblemSpec spec;
  spec.y = std::move(syn.observed);
  spec.ranks = {5, 5, 2};
  const double lam = 3.0 / norm(spec.y);
  spec.lambdas = {lam / 3.0, lam / 3.0, lam / 3.0};
  spec.constraint.kind = ConstraintKind::nonneg;
  const ProblemCache cache(spec);

  SolverParams p;
  p.eps = 1e-8;
  p.max_iters = 200;
  p.seed = 6;
  const OuterResult res = outer_solve(cache, p);
  remember_history("desk nonneg", res.history);

  long long checked = 0;
  double worst_margin = 1e300;
  for (const auto& entry : g_histories)
    for (const IterationRecord& r : entry.second) {
      ++checked;
      worst_margin = std::min(
          worst_margin, r.duality_gap + 1e-8 * (1.0 + std::abs(r.g_value)));
    }

  bool drop_ok = res.history.size() >= 2;
  double early = 0.0, last = 0.0;
  if (drop_ok) {
    early = res.history[1].rel_gap;
    last = res.history.back().rel_gap;
    drop_ok = last <= 1e-2 * early;
  }
  return {worst_margin >= 0.0 && drop_ok,
          strf("gap floor on %lld iterates over %zu runs (margin %.1e); "
               "desk nonneg rel_gap %.1e -> %.1e",
               checked, g_histories.size(), worst_margin, early, last)};
}

// --- 7: hankel desk-scale run ----------------------------------------------

Outcome c7_hankel_desk() {
  SynthResult syn =
      generate_synthetic(ConstraintKind::hankel, {40, 40}, {4, 4}, 0.20, 707);
  ProblemSpec spec;
  spec.y = std::move(syn.observed);
  spec.ranks = {4, 4};
  spec.constraint = Constraint{ConstraintKind::hankel, {5, 5}};
  const double lam = 2.0 / norm(spec.y);
  spec.lambdas = {lam / 2.0, lam / 2.0};
  const ProblemCache cache(spec);

  SolverParams p;
  p.solver = OuterKind::rtr;
  p.solver_explicit = true;
  p.max_iters = 200;
  p.seed = 7;

  // The target is relative to the gradient at the seeded start point, so
  // measure that first and let the solver stop exactly there.
  const MatList u0 = random_point(spec, p.seed);
  const InnerSolution s0 = solve_inner(cache, u0, p);
  const double g0 = norm(riemannian_grad(u0, euclidean_grad(cache, u0, s0)));
  p.eps = 1e-5 * g0;

  const OuterResult res = outer_solve(cache, p);
  remember_history("desk hankel", res.history);

  double best = 1e300;
  double feas_ratio = 0.0;
  for (const IterationRecord& r : res.history) {
    best = std::min(best, r.grad_norm);
    if (r.z_norm > 0.0)
      feas_ratio = std::max(feas_ratio, r.feasibility / r.z_norm);
    else if (r.feasibility > 0.0)
      feas_ratio = 1e300;
  }
  const bool grad_ok = best <= 1e-5 * g0;
  const bool feas_ok = feas_ratio <= 1e-10;
  return {grad_ok && feas_ok,
          strf("rtr grad %.1e -> %.1e (target %.1e) in %zu iterates; max "
               "coupling residual ratio %.1e",
               g0, best, 1e-5 * g0, res.history.size(), feas_ratio)};
}

// --- 8: recovery sanity ------------------------------------------------------

// Separable truth, half the entries observed, and full rank on the short
// mode. The last point matters: when every Theta_k is rank-deficient the
// multiplier can dodge the penalty entirely, the dual goes flat, and the
// recovered tensor collapses toward zero regardless of the data.
Outcome c8_recovery() {
  const SynthResult syn = generate_synthetic(ConstraintKind::nonneg,
                                             {20, 20, 3}, {1, 1, 1}, 0.5, 808);
  ProblemSpec spec;
  spec.y = syn.observed;
  spec.ranks = {1, 1, 3};
  spec.lambdas = {100.0 / 3.0, 100.0 / 3.0, 100.0 / 3.0};
  spec.constraint.kind = ConstraintKind::nonneg;
  const ProblemCache cache(spec);

  SolverParams p;
  p.eps = 1e-9;
  p.max_iters = 300;
  p.seed = 8;
  const OuterResult res = outer_solve(cache, p);
  remember_history("recovery nonneg", res.history);

  const DenseTensor w = recover_primal(cache, res.u, res.inner);
  const EvalReport er = eval_recovery(w, syn.truth, syn.observed);

  std::vector<char> seen(syn.truth.values.size(), 0);
  const std::vector<Index> strides = layout_strides(syn.truth.dims);
  for (Index e = 0; e < syn.observed.nnz(); ++e) {
    Index off = 0;
    const auto idx = syn.observed.coord(e);
    for (std::size_t k = 0; k < idx.size(); ++k) off += strides[k] * idx[k];
    seen[static_cast<std::size_t>(off)] = 1;
  }
  double acc = 0.0;
  Index held = 0;
  for (std::size_t i = 0; i < syn.truth.values.size(); ++i)
    if (!seen[i]) {
      acc += syn.truth.values[i] * syn.truth.values[i];
      ++held;
    }
  const double rms = held > 0 ? std::sqrt(acc / static_cast<double>(held)) : 0.0;
  double wmax = 0.0;
  for (double value : w.values) wmax = std::max(wmax, std::abs(value));

  const bool rmse_ok = er.rmse_test <= 0.1 * rms;
  const bool sign_ok = er.min_entry >= -1e-6 * wmax;
  return {rmse_ok && sign_ok,
          strf("held-out rmse %.2e vs limit %.2e; min entry %.1e vs floor "
               "%.1e",
               er.rmse_test, 0.1 * rms, er.min_entry, -1e-6 * wmax)};
}

// --- 9: per-iteration cost under support doubling ---------------------------

Outcome c9_scaling() {
  auto per_iter_ms = [](double fraction, std::vector<IterationRecord>* hist) {
    SynthResult syn = generate_synthetic(ConstraintKind::none, {40, 40, 4},
                                         {3, 3, 2}, fraction, 909);
    ProblemSpec spec;
    spec.y = std::move(syn.observed);
    spec.ranks = {3, 3, 2};
    spec.lambdas = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    const ProblemCache cache(spec);
    SolverParams p;
    p.eps = 1e-14;
    p.max_iters = 10;
    p.seed = 9;
    double best = 1e300;
    for (int rep = 0; rep < 3; ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      const OuterResult res = outer_solve(cache, p);
      const auto t1 = std::chrono::steady_clock::now();
      const double ms =
          std::chrono::duration<double, std::milli>(t1 - t0).count();
      best = std::min(best, ms / static_cast<double>(res.history.size()));
      if (rep == 0 && hist) *hist = res.history;
    }
    return best;
  };
  std::vector<IterationRecord> h1, h2;
  const double small = per_iter_ms(0.25, &h1);
  const double big = per_iter_ms(0.50, &h2);
  remember_history("scaling 1600", std::move(h1));
  remember_history("scaling 3200", std::move(h2));
  const double ratio = big / small;
  return {ratio <= 2.5,
          strf("per-iteration %.2fms -> %.2fms while |omega| 1600 -> 3200, "
               "ratio %.2f",
               small, big, ratio)};
}

// --- 10: byte-identical reruns through the cli ------------------------------

Outcome c10_determinism(const std::string& cli, const fs::path& root) {
  const fs::path dir = root / "determinism";
  fs::create_directories(dir);
  const auto sh = [](const std::string& cmd) {
    return std::system((cmd + " > /dev/null 2>&1").c_str());
  };
  const auto q = [](const fs::path& p) { return "\"" + p.string() + "\""; };

  const fs::path data = dir / "data";
  if (sh(q(cli) + " synth --constraint nonneg --dims 12,10,3 --rank 2,2,1"
                  " --fraction 0.35 --seed 808 --out " +
         q(data)) != 0)
    return {false, "synth run failed"};
  const std::string complete =
      q(cli) + " complete --input " + q(data / "observed.tns") +
      " --constraint nonneg --rank 2,2,1 --max-iters 25 --eps 1e-9 --seed 5"
      " --out ";
  if (sh(complete + q(dir / "run1")) != 0)
    return {false, "first completion run failed"};
  if (sh(complete + q(dir / "run2")) != 0)
    return {false, "second completion run failed"};

  const std::string a = slurp(dir / "run1" / "history.csv");
  const std::string b = slurp(dir / "run2" / "history.csv");
  if (a.empty()) return {false, "history.csv missing or empty"};
  if (a != b) return {false, "history.csv bytes differ between identical runs"};

  std::vector<IterationRecord> rows = parse_history_csv(a);
  if (rows.empty()) return {false, "history.csv rows failed to parse"};
  const std::size_t bytes = a.size();
  const std::size_t count = rows.size();
  remember_history("cli determinism", std::move(rows));
  return {true, strf("two cli completions wrote byte-identical history.csv "
                     "(%zu bytes, %zu rows)",
                     bytes, count)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : STLT_CLI_PATH;
  const fs::path root = fs::temp_directory_path() / "stlt_acceptance";
  std::error_code ec;
  fs::remove_all(root, ec);
  fs::create_directories(root, ec);

  // Dev filter: STLT_ACCEPT_ONLY="3,7" runs a subset (exit code still counts
  // the skipped ones as failures, so only the full run can accept).
  std::vector<int> only;
  if (const char* env = std::getenv("STLT_ACCEPT_ONLY")) {
    std::stringstream ss(env);
    std::string tok;
    while (std::getline(ss, tok, ',')) only.push_back(std::atoi(tok.c_str()));
  }

  std::vector<Line> lines;
  const auto run = [&lines, &only](int id, double budget,
                                   const std::function<Outcome()>& body) {
    if (!only.empty() &&
        std::find(only.begin(), only.end(), id) == only.end()) {
      lines.push_back({id, false, 0.0, budget, "skipped by STLT_ACCEPT_ONLY"});
      return;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Outcome oc;
    try {
      oc = body();
    } catch (const std::exception& e) {
      oc = {false, strf("exception: %s", e.what())};
    }
    const double sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    const bool in_budget = budget <= 0.0 || sec <= budget;
    lines.push_back({id, oc.ok && in_budget, sec, budget,
                     oc.detail + (in_budget ? "" : " [over budget]")});
  };

  run(1, 5.0, c1_certificate);
  run(2, 60.0, c2_gradient);
  run(3, 120.0, c3_hessian);
  run(4, 30.0, c4_inner_oracles);
  run(5, 5.0, c5_adjoints);
  run(7, 300.0, c7_hankel_desk);
  run(8, 300.0, c8_recovery);
  run(9, 600.0, c9_scaling);
  run(10, 0.0, [&] { return c10_determinism(cli, root); });
  // Runs last so the gap floor sees the history of every run above.
  run(6, 300.0, c6_gap_certificate);

  std::sort(lines.begin(), lines.end(),
            [](const Line& a, const Line& b) { return a.id < b.id; });
  int fails = 0;
  for (const Line& l : lines) {
    if (!l.pass) ++fails;
    if (l.budget > 0.0)
      std::printf("%s criterion %2d: %s [%.1fs/%.0fs]\n",
                  l.pass ? "PASS" : "FAIL", l.id, l.detail.c_str(), l.seconds,
                  l.budget);
    else
      std::printf("%s criterion %2d: %s [%.1fs]\n", l.pass ? "PASS" : "FAIL",
                  l.id, l.detail.c_str(), l.seconds);
  }
  std::printf("accepted %d of 10\n", 10 - fails);
  return fails;
}
