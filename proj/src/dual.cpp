#include "stlt/dual.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "stlt/rng.hpp"

namespace stlt {

namespace {

bool sparse_kind(const ProblemCache& cache) {
  return cache.spec().constraint.kind != ConstraintKind::nonneg;
}

// Values of X = Z + A*(s) on the cached support (observed or lifted).
const Vector& support_values(const ProblemCache& cache,
                             const InnerSolution& sol) {
  return cache.hankel() ? sol.s_lift : sol.z;
}

DenseTensor dense_x(const ProblemCache& cache, const InnerSolution& sol) {
  return add_scaled(cache.embed_observed(sol.z), sol.s_dense, 1.0);
}

struct PowerResult {
  double sigma2 = 0.0;
  bool converged = false;
};

// Largest eigenvalue of the PSD operator `apply` (x -> X X^T x).
PowerResult power_iteration(const std::function<Vector(const Vector&)>& apply,
                            Eigen::Index n, std::uint64_t seed) {
  PowerResult best;
  for (int attempt = 0; attempt < 4; ++attempt) {
    Rng rng(seed + 0x9e3779b9u * static_cast<std::uint64_t>(attempt + 1));
    Vector w(n);
    for (Eigen::Index i = 0; i < n; ++i) w[i] = rng.normal();
    const double wn = w.norm();
    if (wn == 0.0) continue;
    w /= wn;
    double lam = 0.0;
    for (int it = 0; it < 1000; ++it) {
      Vector v = apply(w);
      const double lam_new = w.dot(v);
      const double vn = v.norm();
      if (vn == 0.0) return {0.0, true};  // operator is zero on this start
      w = v / vn;
      if (std::abs(lam_new - lam) <= 1e-10 * std::max(1.0, lam_new)) {
        return {lam_new, true};
      }
      lam = lam_new;
    }
    best.sigma2 = std::max(best.sigma2, lam);
  }
  return best;
}

}  // namespace

double eval_g(const ProblemCache& cache, const MatList& u,
              const InnerSolution& sol) {
  return inner_objective(cache, u, sol);
}

MatList euclidean_grad(const ProblemCache& cache, const MatList& u,
                       const InnerSolution& sol) {
  const auto& spec = cache.spec();
  MatList g(u.size());
  if (sparse_kind(cache)) {
    const Vector& x = support_values(cache, sol);
    for (std::size_t k = 0; k < u.size(); ++k) {
      const Matrix gk = cache.gather(k, u[k], x);
      g[k] = -spec.lambdas[k] * cache.row_outer(k, gk, x);
    }
  } else {
    const DenseTensor xt = dense_x(cache, sol);
    for (std::size_t k = 0; k < u.size(); ++k) {
      const Matrix xk = unfold(xt, static_cast<int>(k));
      g[k] = -spec.lambdas[k] * (xk * (xk.transpose() * u[k]));
    }
  }
  return g;
}

MatList euclidean_hess_vec(const ProblemCache& cache, const MatList& u,
                           const MatList& v, const InnerSolution& sol,
                           const DirectionalSolution& dsol) {
  const auto& spec = cache.spec();
  MatList h(u.size());
  if (sparse_kind(cache)) {
    const Vector& x = support_values(cache, sol);
    const Vector& xd = cache.hankel() ? dsol.s_lift_dot : dsol.z_dot;
    for (std::size_t k = 0; k < u.size(); ++k) {
      const Matrix gxv = cache.gather(k, v[k], x);   // V^T X
      const Matrix gxu = cache.gather(k, u[k], x);   // U^T X
      const Matrix gdu = cache.gather(k, u[k], xd);  // U^T Xd
      Matrix q = cache.row_outer(k, gxv, x);         // X X^T V
      q += cache.row_outer(k, gxu, xd);              // Xd X^T U
      q += cache.row_outer(k, gdu, x);               // X Xd^T U
      h[k] = -spec.lambdas[k] * q;
    }
  } else {
    const DenseTensor xt = dense_x(cache, sol);
    DenseTensor xdt = cache.embed_observed(dsol.z_dot);
    if (dsol.s_dense_dot.dims == xt.dims)
      xdt = add_scaled(xdt, dsol.s_dense_dot, 1.0);
    for (std::size_t k = 0; k < u.size(); ++k) {
      const Matrix xk = unfold(xt, static_cast<int>(k));
      const Matrix xdk = unfold(xdt, static_cast<int>(k));
      Matrix q = xk * (xk.transpose() * v[k]);
      q += xdk * (xk.transpose() * u[k]);
      q += xk * (xdk.transpose() * u[k]);
      h[k] = -spec.lambdas[k] * q;
    }
  }
  return h;
}

GapReport duality_gap(const ProblemCache& cache, const MatList& u,
                      const InnerSolution& sol, std::uint64_t seed) {
  const auto& spec = cache.spec();
  GapReport report;
  report.sigma.resize(u.size());
  report.captured.resize(u.size());

  const bool sparse = sparse_kind(cache);
  DenseTensor xt;
  if (!sparse) xt = dense_x(cache, sol);

  for (std::size_t k = 0; k < u.size(); ++k) {
    Matrix g;  // U_k^T X_k
    std::function<Vector(const Vector&)> apply;
    Matrix xk;
    if (sparse) {
      const Vector* x = &support_values(cache, sol);
      g = cache.gather(k, u[k], *x);
      apply = [&cache, k, x](const Vector& w) {
        return cache.gram_vec(k, *x, w);
      };
    } else {
      xk = unfold(xt, static_cast<int>(k));
      g = u[k].transpose() * xk;
      apply = [&xk](const Vector& w) { return Vector(xk * (xk.transpose() * w)); };
    }
    const double captured = g.squaredNorm();

    const Eigen::Index nrows = u[k].rows();
    const PowerResult pi = power_iteration(
        apply, nrows, seed + 1000003u * static_cast<std::uint64_t>(k + 1));
    if (!pi.converged) report.confident = false;

    // sigma^2 is floored by Rayleigh quotients of U's columns; together with
    // ||U_k||_F = 1 this keeps each per-mode term nonnegative.
    double sigma2 = pi.sigma2;
    sigma2 = std::max(sigma2, captured);
    for (Eigen::Index j = 0; j < u[k].cols(); ++j) {
      const double cn2 = u[k].col(j).squaredNorm();
      if (cn2 > 0.0) sigma2 = std::max(sigma2, g.row(j).squaredNorm() / cn2);
    }

    report.sigma[k] = std::sqrt(sigma2);
    report.captured[k] = captured;
    report.gap += 0.5 * spec.lambdas[k] * (sigma2 - captured);
  }
  report.rel_gap = report.gap / (1.0 + std::abs(eval_g(cache, u, sol)));
  return report;
}

DenseTensor recover_primal(const ProblemCache& cache, const MatList& u,
                           const InnerSolution& sol) {
  const auto& spec = cache.spec();
  switch (spec.constraint.kind) {
    case ConstraintKind::none: {
      DenseTensor acc = DenseTensor::zeros(spec.y.dims);
      for (std::size_t k = 0; k < u.size(); ++k) {
        if (spec.lambdas[k] == 0.0) continue;
        const Matrix g = cache.gather(k, u[k], sol.z);
        const ModeView& view = cache.views()[k];
        for (Index c = 0; c < view.ncols; ++c) {
          const Vector fiber = u[k] * g.col(c);
          const Index base = view.col_base[static_cast<std::size_t>(c)];
          for (Eigen::Index i = 0; i < fiber.size(); ++i)
            acc.values[static_cast<std::size_t>(base + i * view.row_stride)] +=
                spec.lambdas[k] * fiber[i];
        }
      }
      return acc;
    }
    case ConstraintKind::nonneg: {
      const DenseTensor xt = dense_x(cache, sol);
      DenseTensor acc = DenseTensor::zeros(spec.y.dims);
      for (std::size_t k = 0; k < u.size(); ++k) {
        if (spec.lambdas[k] == 0.0) continue;
        const int mode = static_cast<int>(k);
        const DenseTensor term = mode_product(
            mode_product(xt, Matrix(u[k].transpose()), mode), u[k], mode);
        acc = add_scaled(acc, term, spec.lambdas[k]);
      }
      return acc;
    }
    case ConstraintKind::hankel: {
      DenseTensor lifted = DenseTensor::zeros(cache.lift().dims);
      for (std::size_t k = 0; k < u.size(); ++k) {
        if (spec.lambdas[k] == 0.0) continue;
        const Matrix g = cache.gather(k, u[k], sol.s_lift);
        const ModeView& view = cache.views()[k];
        for (Index c = 0; c < view.ncols; ++c) {
          const Vector fiber = u[k] * g.col(c);
          const Index base = view.col_base[static_cast<std::size_t>(c)];
          for (Eigen::Index i = 0; i < fiber.size(); ++i)
            lifted
                .values[static_cast<std::size_t>(base + i * view.row_stride)] +=
                spec.lambdas[k] * fiber[i];
        }
      }
      DenseTensor w =
          hankel_adjoint(lifted, spec.constraint.tau, spec.y.dims);
      const DenseTensor mult =
          hankel_multiplicities(spec.y.dims, spec.constraint.tau);
      for (std::size_t i = 0; i < w.values.size(); ++i)
        w.values[i] /= mult.values[i];
      return w;
    }
  }
  throw std::invalid_argument("unknown constraint kind");
}

CertificateResult nuclear_certificate(const Matrix& x) {
  if (x.norm() == 0.0)
    throw std::invalid_argument("certificate undefined for the zero matrix");
  // Work from the singular values of x itself; forming x x^T first squares
  // the condition number and the small values come back garbage.
  const Eigen::JacobiSVD<Matrix> svd(x, Eigen::ComputeThinU);
  const Vector roots = svd.singularValues();
  const double trace = roots.sum();

  CertificateResult out;
  out.theta = svd.matrixU() * (roots / trace).asDiagonal() *
              svd.matrixU().transpose();

  // <theta^+ x, x> via the spectral pseudo-inverse.
  const double cutoff = 1e-14 * roots.maxCoeff();
  Vector inv = Vector::Zero(roots.size());
  for (Eigen::Index i = 0; i < roots.size(); ++i)
    if (roots[i] > cutoff) inv[i] = trace / roots[i];
  const Matrix theta_pinv =
      svd.matrixU() * inv.asDiagonal() * svd.matrixU().transpose();
  out.value = (theta_pinv * x).cwiseProduct(x).sum();
  return out;
}

double primal_objective(const ProblemCache& cache, const DenseTensor& w,
                        const std::vector<DenseTensor>* parts) {
  const auto& spec = cache.spec();
  if (w.dims != spec.y.dims)
    throw std::invalid_argument("tensor dims do not match problem dims");
  const Vector w_obs = cache.gather_observed(w);
  double value = spec.cost * (w_obs - cache.y_values()).squaredNorm();
  if (!parts) return value;

  if (parts->size() != spec.order())
    throw std::invalid_argument("decomposition must have one part per mode");
  for (std::size_t k = 0; k < parts->size(); ++k) {
    if (spec.lambdas[k] == 0.0)
      throw std::invalid_argument("latent term undefined for lambda = 0");
    const DenseTensor& part = (*parts)[k];
    const int axis = part.dims.size() == 2 * spec.order()
                         ? static_cast<int>(2 * k + 1)
                         : static_cast<int>(k);
    const Matrix m = unfold(part, axis);
    const double nuc =
        Eigen::JacobiSVD<Matrix>(m).singularValues().sum();
    value += nuc * nuc / (2.0 * spec.lambdas[k]);
  }
  return value;
}

}  // namespace stlt
