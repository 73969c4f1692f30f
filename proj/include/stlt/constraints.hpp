#pragma once

// Structural constraint maps: the nonnegativity (identity) multiplier and the
// multiway Hankel transform with its adjoint and coupling projection.
//
// The Hankel transform lifts an order-K tensor to order 2K by anti-diagonal
// duplication with per-mode window sizes tau_k:
//   H(W)[j_1, l_1, ..., j_K, l_K] = W[j_1 + l_1, ..., j_K + l_K]   (0-based)
// with j_k in [0, tau_k) and l_k in [0, n_k - tau_k + 1). Its adjoint H* is
// the scatter-add over each anti-diagonal block.

#include <utility>

#include "stlt/tensor.hpp"

namespace stlt {

enum class ConstraintKind { none, nonneg, hankel };

struct Constraint {
  ConstraintKind kind = ConstraintKind::none;
  std::vector<Index> tau;  // hankel only, one window per mode

  /// Throws std::invalid_argument unless 1 <= tau_k <= n_k for all modes.
  void validate(std::span<const Index> dims) const;
};

/// Dims of the lifted order-2K tensor: (tau_1, n_1-tau_1+1, ...).
std::vector<Index> lifted_dims(std::span<const Index> dims,
                               std::span<const Index> tau);

/// Multiplier of the structural constraint. For nonneg the multiplier is an
/// entrywise-nonnegative tensor of the problem shape; for hankel it is an
/// order-2K tensor supported on the lift of the observed set.
struct DualMultiplier {
  ConstraintKind kind = ConstraintKind::none;
  DenseTensor dense;    // nonneg
  SparseTensor lifted;  // hankel
};

DenseTensor hankelize(const DenseTensor& w, std::span<const Index> tau);

DenseTensor hankel_adjoint(const DenseTensor& lifted,
                           std::span<const Index> tau,
                           std::vector<Index> dims);
DenseTensor hankel_adjoint(const SparseTensor& lifted,
                           std::span<const Index> tau,
                           std::vector<Index> dims);

/// Entrywise count of lifted tuples per index: the diagonal of H* o H.
DenseTensor hankel_multiplicities(std::span<const Index> dims,
                                  std::span<const Index> tau);

/// Lift of an observed support: all order-2K tuples whose image index lies in
/// the support, grouped per observed entry (CSR layout, deterministic order).
struct LiftSupport {
  std::vector<Index> dims;          // order-2K lifted dims
  std::vector<Index> coords;        // nnz * 2K
  std::vector<Index> entry_offset;  // size |omega|+1
  std::vector<Index> multiplicity;  // per observed entry

  Index nnz() const {
    return entry_offset.empty() ? 0 : static_cast<Index>(entry_offset.back());
  }
  Index order() const { return static_cast<Index>(dims.size()); }
};

LiftSupport lift_support(const SparseTensor& omega, std::span<const Index> tau);

/// Euclidean projection onto {(z, s): H*(s) = z on omega, supp(s) in lift}.
/// Acts on value vectors aligned with omega / lift entry order; closed form
/// per observed index since the constraint decouples across anti-diagonals.
void project_coupling_values(const LiftSupport& lift, std::span<double> z,
                             std::span<double> s);

/// Tensor-level wrapper: throws std::invalid_argument when s has support
/// outside the lift of z's support.
std::pair<SparseTensor, DenseTensor> project_coupling(const SparseTensor& z,
                                                      const DenseTensor& s,
                                                      const LiftSupport& lift);

/// A*(s): identity embedding for nonneg, Hankel scatter-add for hankel,
/// zero tensor for none.
DenseTensor apply_adjoint(const Constraint& constraint,
                          const DualMultiplier& s,
                          std::span<const Index> dims);

}  // namespace stlt
