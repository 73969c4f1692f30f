#pragma once

// Solvers for the strongly concave inner maximization at a fixed factor
// point, one per constraint kind, plus the linearized system that yields the
// directional derivatives (z_dot, s_dot) used by Hessian-vector products.

#include "stlt/problem.hpp"

namespace stlt {

struct InnerSolution {
  Vector z;             // values on the observed set
  Vector s_lift;        // hankel multiplier on the lifted set
  DenseTensor s_dense;  // nonneg multiplier, entrywise >= 0
  double objective = 0.0;
  double residual = 0.0;     // stationarity / joint KKT residual at exit
  double feasibility = 0.0;  // hankel coupling residual after projection
  Index iterations = 0;      // total inner iterations (CG + NNLS)
  bool converged = true;
};

struct DirectionalSolution {
  Vector z_dot;
  Vector s_lift_dot;
  DenseTensor s_dense_dot;
  Index iterations = 0;
  bool converged = true;
  bool degenerate = false;  // nonneg entries with value 0 and gradient 0
};

InnerSolution solve_inner_none(const ProblemCache& cache, const MatList& u,
                               const SolverParams& params,
                               const InnerSolution* warm = nullptr);
InnerSolution solve_inner_nonneg(const ProblemCache& cache, const MatList& u,
                                 const SolverParams& params,
                                 const InnerSolution* warm = nullptr);
InnerSolution solve_inner_hankel(const ProblemCache& cache, const MatList& u,
                                 const SolverParams& params,
                                 const InnerSolution* warm = nullptr);
/// Dispatch on the problem's constraint kind.
InnerSolution solve_inner(const ProblemCache& cache, const MatList& u,
                          const SolverParams& params,
                          const InnerSolution* warm = nullptr);

DirectionalSolution solve_directional(const ProblemCache& cache,
                                      const MatList& u, const MatList& v,
                                      const InnerSolution& sol,
                                      const SolverParams& params);

/// Inner objective <z, y> - ||z||^2/(4C) - (1/2) sum_k lambda_k ||U_k^T X_k||^2
/// evaluated at the (possibly inexact) solution.
double inner_objective(const ProblemCache& cache, const MatList& u,
                       const InnerSolution& sol);

/// sum_k lambda_k T x_k (U_k U_k^T), dense path used by the nonneg solver.
DenseTensor dense_gram(const ProblemCache& cache, const MatList& u,
                       const DenseTensor& t);
/// sum_k lambda_k T x_k (V_k U_k^T + U_k V_k^T).
DenseTensor dense_gram_pair(const ProblemCache& cache, const MatList& u,
                            const MatList& v, const DenseTensor& t);

}  // namespace stlt
