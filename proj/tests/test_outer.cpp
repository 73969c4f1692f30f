#include <catch2/catch.hpp>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "stlt/outer.hpp"

using namespace stlt;

namespace {

// Symmetric operator on flattened factor tuples, for exercising the
// trust-region subproblem in isolation.
struct QuadOp {
  Matrix a;  // symmetric
  MatList shape;

  MatList operator()(const MatList& v) const {
    Vector x(a.rows());
    Index pos = 0;
    for (const Matrix& m : v) {
      x.segment(pos, m.size()) =
          Eigen::Map<const Vector>(m.data(), m.size());
      pos += m.size();
    }
    const Vector y = a * x;
    MatList out = shape;
    pos = 0;
    for (Matrix& m : out) {
      m = Eigen::Map<const Matrix>(y.data() + pos, m.rows(), m.cols());
      pos += m.size();
    }
    return out;
  }
};

double cauchy_decrease(const MatList& grad, const QuadOp& op, double radius) {
  const double gn = norm(grad);
  const double ghg = dot(grad, op(grad));
  const double tau =
      ghg <= 0.0 ? 1.0 : std::min(1.0, gn * gn * gn / (radius * ghg));
  const double t = tau * radius / gn;
  return t * gn * gn - 0.5 * t * t * ghg;
}

}  // namespace

TEST_CASE("truncated cg solves an identity model exactly") {
  MatList grad = {Matrix::Ones(2, 2), 2.0 * Matrix::Ones(1, 3)};
  QuadOp op{Matrix::Identity(7, 7), zeros_like(grad)};

  SECTION("interior solution") {
    const TcgResult r = truncated_cg(
        grad, [&op](const MatList& v) { return op(v); }, 100.0, 50);
    REQUIRE_FALSE(r.boundary);
    MatList diff = r.step;
    axpy(1.0, grad, diff);
    REQUIRE(norm(diff) <= 1e-10);
    REQUIRE(r.model_decrease == Approx(0.5 * dot(grad, grad)).epsilon(1e-10));
  }
  SECTION("radius-limited solution hits the boundary") {
    const TcgResult r = truncated_cg(
        grad, [&op](const MatList& v) { return op(v); }, 0.5, 50);
    REQUIRE(r.boundary);
    REQUIRE(norm(r.step) == Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("truncated cg walks to the boundary under negative curvature") {
  MatList grad = {Matrix::Ones(2, 2)};
  QuadOp op{-Matrix::Identity(4, 4), zeros_like(grad)};
  const double radius = 0.7;
  const TcgResult r = truncated_cg(
      grad, [&op](const MatList& v) { return op(v); }, radius, 50);
  REQUIRE(r.boundary);
  REQUIRE(norm(r.step) == Approx(radius).epsilon(1e-12));
  // Steepest direction, so the decrease equals the Cauchy decrease.
  REQUIRE(r.model_decrease ==
          Approx(cauchy_decrease(grad, op, radius)).epsilon(1e-10));
}

TEST_CASE("truncated cg never does worse than the Cauchy point") {
  Rng rng(451);
  for (int rep = 0; rep < 10; ++rep) {
    Matrix b(6, 6);
    for (Eigen::Index j = 0; j < 6; ++j)
      for (Eigen::Index i = 0; i < 6; ++i) b(i, j) = rng.normal();
    Matrix a = 0.5 * (b + b.transpose());
    if (rep % 2 == 0) a += 6.0 * Matrix::Identity(6, 6);  // mix SPD and not
    MatList grad = {Matrix::Zero(2, 3)};
    for (Eigen::Index j = 0; j < 3; ++j)
      for (Eigen::Index i = 0; i < 2; ++i) grad[0](i, j) = rng.normal();
    QuadOp op{a, zeros_like(grad)};
    const double radius = 0.3 + rng.uniform();
    const TcgResult r = truncated_cg(
        grad, [&op](const MatList& v) { return op(v); }, radius, 80);
    REQUIRE(norm(r.step) <= radius * (1.0 + 1e-12));
    REQUIRE(r.model_decrease >=
            cauchy_decrease(grad, op, radius) - 1e-10);
  }
}

TEST_CASE("outer solve logs a well formed monotone history") {
  const ProblemSpec spec = fixture::make_spec({3, 3, 2}, 6, {2, 2, 1},
                                              {0.6, 0.5, 0.4}, 1.0,
                                              Constraint{}, 461);
  const ProblemCache cache(spec);
  SolverParams params;
  params.max_iters = 50;
  params.eps = 1e-14;  // force the full iteration budget unless stagnant
  params.seed = 5;

  const OuterResult res = outer_solve(cache, params);
  REQUIRE(res.solver_used == OuterKind::rcg);
  REQUIRE(res.history.size() >= 2);
  REQUIRE(res.history.front().iter == 0);
  for (std::size_t i = 0; i < res.history.size(); ++i) {
    const IterationRecord& rec = res.history[i];
    REQUIRE(rec.iter == static_cast<Index>(i));
    REQUIRE(rec.grad_norm >= 0.0);
    REQUIRE(rec.duality_gap >= 0.0);
    REQUIRE(rec.rel_gap >= 0.0);
    REQUIRE(rec.wall_ms == 0.0);
    if (i > 0) REQUIRE(rec.g_value <= res.history[i - 1].g_value + 1e-15);
  }
  for (const Matrix& m : res.u)
    REQUIRE(std::abs(m.norm() - 1.0) <= 1e-12);

  // Deterministic replay.
  const OuterResult again = outer_solve(cache, params);
  REQUIRE(again.history.size() == res.history.size());
  for (std::size_t i = 0; i < res.history.size(); ++i) {
    REQUIRE(again.history[i].g_value == res.history[i].g_value);
    REQUIRE(again.history[i].grad_norm == res.history[i].grad_norm);
    REQUIRE(again.history[i].duality_gap == res.history[i].duality_gap);
  }
}

TEST_CASE("outer solve honors trivial termination modes") {
  const ProblemSpec spec = fixture::make_spec({3, 3}, 4, {1, 1}, {0.5, 0.5},
                                              1.0, Constraint{}, 471);
  const ProblemCache cache(spec);

  SECTION("immediately converged when eps dominates") {
    SolverParams params;
    params.eps = 1e9;
    const OuterResult res = outer_solve(cache, params);
    REQUIRE(res.status == OuterStatus::converged);
    REQUIRE(res.history.size() == 1);
  }
  SECTION("max_iters = 0 returns the initial diagnostics") {
    SolverParams params;
    params.max_iters = 0;
    const OuterResult res = outer_solve(cache, params);
    REQUIRE(res.status == OuterStatus::max_iters);
    REQUIRE(res.history.size() == 1);
    REQUIRE(res.history.front().inner_iters > 0);
  }
}

TEST_CASE("trust region solves the one dimensional hankel toy") {
  // Hankel-structured ground truth: two decaying sinusoids sampled on a line.
  const Index n = 12;
  DenseTensor truth = DenseTensor::zeros({n});
  for (Index i = 0; i < n; ++i) {
    const double t = static_cast<double>(i);
    truth.values[static_cast<std::size_t>(i)] =
        std::exp(-0.05 * t) * std::cos(0.9 * t) +
        0.5 * std::exp(-0.02 * t) * std::sin(0.4 * t);
  }
  Rng rng(481);
  std::vector<Index> all(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
  rng.shuffle(all);

  ProblemSpec spec;
  spec.y.dims = {n};
  for (Index e = 0; e < 9; ++e) {
    const Index i = all[static_cast<std::size_t>(e)];
    spec.y.coords.push_back(i);
    spec.y.values.push_back(truth.values[static_cast<std::size_t>(i)]);
  }
  spec.y.canonicalize();
  spec.ranks = {4};
  spec.lambdas = {1.0 / norm(spec.y)};
  spec.cost = 1.0;
  spec.constraint = Constraint{ConstraintKind::hankel, {5}};

  const ProblemCache cache(spec);
  SolverParams params;
  params.eps = 1e-6;
  params.max_iters = 200;
  params.seed = 3;

  const OuterResult res = outer_solve(cache, params);
  REQUIRE(res.solver_used == OuterKind::rtr);
  REQUIRE(res.status == OuterStatus::converged);
  REQUIRE(res.history.back().grad_norm <= 1e-6);
  REQUIRE(res.inner.feasibility <=
          1e-10 * (1.0 + res.inner.z.norm()));

  // Explicit solver override wins over the constraint default.
  SolverParams forced = params;
  forced.solver = OuterKind::rcg;
  forced.solver_explicit = true;
  forced.max_iters = 3;
  const OuterResult forced_res = outer_solve(cache, forced);
  REQUIRE(forced_res.solver_used == OuterKind::rcg);
}
