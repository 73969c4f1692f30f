#pragma once

// Outer Riemannian solvers over the sphere product: conjugate gradient with
// Armijo backtracking and a Steihaug-Toint trust region, plus the shared
// iteration loop that logs the certificate trail.

#include <functional>

#include "stlt/dual.hpp"
#include "stlt/manifold.hpp"

namespace stlt {

enum class OuterStatus { converged, max_iters, stagnated, line_search_failed };

const char* to_string(OuterStatus status);

struct IterationRecord {
  Index iter = 0;
  double g_value = 0.0;
  double grad_norm = 0.0;
  double duality_gap = 0.0;
  double rel_gap = 0.0;
  Index inner_iters = 0;  // inner-system iterations spent reaching this row
  double wall_ms = 0.0;   // 0 unless SolverParams::time_iters
  double feasibility = 0.0;  // hankel coupling residual ||H*(s) - z||, else 0
  double z_norm = 0.0;
};

struct TcgResult {
  MatList step;
  double model_decrease = 0.0;
  bool boundary = false;
  Index iterations = 0;
};

/// min <grad, s> + (1/2)<s, H s> over ||s|| <= radius; exits on the boundary
/// along negative-curvature or overlong directions.
TcgResult truncated_cg(const MatList& grad,
                       const std::function<MatList(const MatList&)>& hess,
                       double radius, Index max_iter);

struct OuterResult {
  MatList u;
  InnerSolution inner;
  OuterStatus status = OuterStatus::max_iters;
  OuterKind solver_used = OuterKind::rcg;
  std::vector<IterationRecord> history;
  GapReport final_gap;
};

/// Algorithm: repeat { solve inner problem, evaluate g / gradient / gap,
/// check termination, take an RCG or RTR step }. The solver defaults to RCG,
/// or to RTR under the Hankel constraint, unless the choice was pinned.
OuterResult outer_solve(const ProblemCache& cache, const SolverParams& params);

}  // namespace stlt
