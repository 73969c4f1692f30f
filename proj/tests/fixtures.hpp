#pragma once

// Shared construction helpers for solver-level tests.

#include "oracles.hpp"
#include "stlt/dual.hpp"
#include "stlt/inner.hpp"
#include "stlt/problem.hpp"

namespace stlt::fixture {

inline ProblemSpec make_spec(std::vector<Index> dims, Index nnz,
                             std::vector<Index> ranks,
                             std::vector<double> lambdas, double cost,
                             Constraint constraint, std::uint64_t seed) {
  Rng rng(seed);
  ProblemSpec spec;
  spec.y = oracle::random_sparse(std::move(dims), nnz, rng);
  spec.ranks = std::move(ranks);
  spec.lambdas = std::move(lambdas);
  spec.cost = cost;
  spec.constraint = std::move(constraint);
  return spec;
}

/// Unit-Frobenius factors of the shape the spec demands.
inline MatList random_factors(const ProblemSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  MatList u(spec.order());
  for (std::size_t k = 0; k < u.size(); ++k) {
    Matrix m(spec.factor_rows(k), spec.ranks[k]);
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.normal();
    u[k] = m / m.norm();
  }
  return u;
}

inline MatList random_directions(const MatList& u, std::uint64_t seed) {
  Rng rng(seed);
  MatList v(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    Matrix m(u[k].rows(), u[k].cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.normal();
    v[k] = m;
  }
  return v;
}

inline SolverParams tight_params() {
  SolverParams p;
  p.cg_tol = 1e-13;
  p.cg_max_iter = 5000;
  p.nnls_tol = 1e-12;
  p.nnls_max_iter = 20000;
  p.alternation_tol = 1e-11;
  p.alternation_max_rounds = 400;
  return p;
}

/// Dense tensor holding X = Z + A*(s) for whichever kind solved `sol`; for
/// hankel this is the lifted multiplier itself.
inline DenseTensor dense_multiplier(const ProblemCache& cache,
                                    const InnerSolution& sol) {
  if (cache.hankel()) return embed(cache.lift_to_sparse(sol.s_lift));
  DenseTensor x = cache.embed_observed(sol.z);
  if (cache.spec().constraint.kind == ConstraintKind::nonneg)
    x = add_scaled(x, sol.s_dense, 1.0);
  return x;
}

/// Inner objective recomputed by dense enumeration only.
inline double objective_loops(const ProblemCache& cache, const MatList& u,
                              const InnerSolution& sol) {
  const ProblemSpec& spec = cache.spec();
  double value = sol.z.dot(cache.y_values()) -
                 sol.z.squaredNorm() / (4.0 * spec.cost);
  const DenseTensor x = dense_multiplier(cache, sol);
  for (std::size_t k = 0; k < u.size(); ++k) {
    const int axis = cache.hankel() ? static_cast<int>(2 * k + 1)
                                    : static_cast<int>(k);
    const Matrix xk = oracle::unfold_loops(x, axis);
    value -= 0.5 * spec.lambdas[k] * (u[k].transpose() * xk).squaredNorm();
  }
  return value;
}

/// Values of a dense tensor at the lift coordinates, in lift entry order.
inline Vector gather_lift(const DenseTensor& t, const LiftSupport& lift) {
  const std::vector<Index> strides = layout_strides(lift.dims);
  Vector out(lift.nnz());
  const Index order = lift.order();
  for (Index e = 0; e < lift.nnz(); ++e) {
    Index off = 0;
    for (Index m = 0; m < order; ++m)
      off += strides[static_cast<std::size_t>(m)] * lift.coords[e * order + m];
    out[e] = t.values[static_cast<std::size_t>(off)];
  }
  return out;
}

}  // namespace stlt::fixture
