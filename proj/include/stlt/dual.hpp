#pragma once

// Dual objective, its Euclidean derivatives, the duality-gap certificate,
// and primal recovery.

#include <cstdint>

#include "stlt/inner.hpp"

namespace stlt {

struct GapReport {
  std::vector<double> sigma;     // per-mode top singular value of X_k
  std::vector<double> captured;  // per-mode ||U_k^T X_k||_F^2
  double gap = 0.0;
  double rel_gap = 0.0;  // gap / (1 + |g|)
  bool confident = true;  // false when a power iteration failed to settle
};

double eval_g(const ProblemCache& cache, const MatList& u,
              const InnerSolution& sol);

/// -(lambda_1 P_1, ..., lambda_K P_K), P_k = X_k X_k^T U_k with
/// X = Z + A*(s) (the lifted multiplier under the Hankel constraint).
MatList euclidean_grad(const ProblemCache& cache, const MatList& u,
                       const InnerSolution& sol);

/// -(lambda_k Q_k), Q_k = X_k X_k^T V_k + (Xd_k X_k^T + X_k Xd_k^T) U_k
/// where Xd is the directional derivative of X along V.
MatList euclidean_hess_vec(const ProblemCache& cache, const MatList& u,
                           const MatList& v, const InnerSolution& sol,
                           const DirectionalSolution& dsol);

/// gap = sum_k (lambda_k/2)(sigma_k^2 - ||U_k^T X_k||^2), sigma_k estimated
/// by seeded power iteration and floored by Rayleigh bounds from U itself so
/// roundoff cannot drive the reported gap negative.
GapReport duality_gap(const ProblemCache& cache, const MatList& u,
                      const InnerSolution& sol, std::uint64_t seed = 0);

/// W = sum_k lambda_k X x_k (U_k U_k^T); under the Hankel constraint the
/// products apply in the lifted space and the result is pushed back through
/// the adjoint and normalized by the duplication multiplicities.
DenseTensor recover_primal(const ProblemCache& cache, const MatList& u,
                           const InnerSolution& sol);

struct CertificateResult {
  Matrix theta;  // sqrt(XX^T)/tr(sqrt(XX^T))
  double value;  // <theta^+ X, X>, equals the squared nuclear norm
};
CertificateResult nuclear_certificate(const Matrix& x);

/// C ||W_omega - Y||^2 plus, when a latent decomposition is supplied,
/// sum_k ||unfold(parts_k)||_*^2 / (2 lambda_k). Parts of order 2K are
/// treated as lifted and unfolded at the k-th pair's second axis.
double primal_objective(const ProblemCache& cache, const DenseTensor& w,
                        const std::vector<DenseTensor>* parts = nullptr);

}  // namespace stlt
