#pragma once

// Problem definition plus the per-mode sparse access structure shared by the
// inner solvers, gradient assembly, and the gap certificate.

#include <cstdint>

#include "stlt/constraints.hpp"
#include "stlt/tensor.hpp"

namespace stlt {

struct ProblemSpec {
  SparseTensor y;  // observed entries, canonical (sorted) coordinate order
  std::vector<Index> ranks;    // r_k per mode
  std::vector<double> lambdas; // lambda_k per mode
  double cost = 1.0;           // data-fit weight C
  Constraint constraint;

  std::size_t order() const { return y.dims.size(); }
  std::span<const Index> dims() const { return y.dims; }
  /// Rows of factor U_k: n_k, or n_k - tau_k + 1 under the Hankel lift.
  Index factor_rows(std::size_t k) const;
  void validate() const;
};

enum class OuterKind { rcg, rtr };

struct SolverParams {
  double cg_tol = 1e-10;
  Index cg_max_iter = 1000;
  double nnls_tol = 1e-8;
  Index nnls_max_iter = 2000;
  Index alternation_max_rounds = 50;
  double alternation_tol = 1e-8;  // scaled by (1 + ||y||) internally
  double eps = 1e-6;
  Index max_iters = 200;
  OuterKind solver = OuterKind::rcg;
  bool solver_explicit = false;  // user pinned --solver; skip constraint default
  std::uint64_t seed = 0;
  bool time_iters = false;  // wall_ms stays 0 unless enabled (reproducible logs)

  void validate() const;
};

// Factor tuples and tangent tuples are plain lists of per-mode matrices.
using MatList = std::vector<Matrix>;

double dot(const MatList& a, const MatList& b);
double norm(const MatList& a);
MatList zeros_like(const MatList& a);
/// y += alpha * x
void axpy(double alpha, const MatList& x, MatList& y);
MatList scaled(const MatList& a, double alpha);

/// One mode's view of a fixed sparse support: per entry the mode index (row
/// of the unfolding) and a compact id for its unfolding column. Compact ids
/// are assigned in first-occurrence order over entries, so they are
/// deterministic for a canonical support.
struct ModeView {
  std::vector<Index> row;
  std::vector<Index> col;
  /// Per compact column: base offset into the dense value layout (the sum of
  /// stride * coordinate over all axes except the view's row axis).
  std::vector<Index> col_base;
  Index row_stride = 0;
  Index nrows = 0;
  Index ncols = 0;
};

/// Precomputed structure for one ProblemSpec. All value vectors below are
/// aligned with the cached support: the observed entries for none/nonneg, the
/// lifted entries for hankel (where the factors act on the lifted unfoldings).
class ProblemCache {
 public:
  explicit ProblemCache(ProblemSpec spec);

  const ProblemSpec& spec() const { return spec_; }
  bool hankel() const {
    return spec_.constraint.kind == ConstraintKind::hankel;
  }
  const LiftSupport& lift() const { return lift_; }
  const std::vector<ModeView>& views() const { return views_; }
  const Vector& y_values() const { return y_; }
  Index support_size() const { return support_size_; }

  /// G = U_k^T X_k over the compact columns; r_k x ncols_k.
  Matrix gather(std::size_t k, const Matrix& u, const Vector& x) const;
  /// out_e += alpha * u.row(row_e) . g.col(col_e)
  void scatter(std::size_t k, const Matrix& u, const Matrix& g, double alpha,
               Vector& out) const;
  /// X_k G^T: nrows_k x cols(g); the gradient building block X_k X_k^T U_k
  /// is row_outer(k, gather(k, u, x), x).
  Matrix row_outer(std::size_t k, const Matrix& g, const Vector& x) const;
  /// w -> X_k X_k^T w for the power iteration.
  Vector gram_vec(std::size_t k, const Vector& x, const Vector& w) const;

  /// sum_k lambda_k fold_k(U_k U_k^T unfold_k(.)) restricted to the support.
  void apply_gram(const MatList& u, const Vector& x, Vector& out) const;
  /// sum_k lambda_k fold_k((V_k U_k^T + U_k V_k^T) unfold_k(.)) restricted.
  void apply_gram_sym(const MatList& u, const MatList& v, const Vector& x,
                      Vector& out) const;

  /// Values of a dense tensor at the observed coordinates.
  Vector gather_observed(const DenseTensor& w) const;
  /// Dense tensor that is z on the observed set and zero elsewhere.
  DenseTensor embed_observed(const Vector& z) const;
  /// Observed-support values -> sparse tensor (coords shared with spec().y).
  SparseTensor observed_to_sparse(const Vector& z) const;
  /// Lift-support values -> sparse order-2K tensor.
  SparseTensor lift_to_sparse(const Vector& s) const;

 private:
  ProblemSpec spec_;
  LiftSupport lift_;  // empty unless hankel
  std::vector<ModeView> views_;
  Vector y_;
  std::vector<Index> observed_offsets_;  // dense layout offsets of omega
  Index support_size_ = 0;
};

}  // namespace stlt
