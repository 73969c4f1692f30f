#include "stlt/manifold.hpp"

#include <Eigen/QR>
#include <stdexcept>

#include "stlt/rng.hpp"

namespace stlt {

MatList tangent_project(const MatList& u, const MatList& v) {
  MatList out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k)
    out[k] = v[k] - u[k].cwiseProduct(v[k]).sum() * u[k];
  return out;
}

MatList retract(const MatList& u, const MatList& xi) {
  MatList out(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    Matrix m = u[k] + xi[k];
    const double n = m.norm();
    if (n == 0.0)
      throw std::invalid_argument("retraction denominator vanished");
    out[k] = m / n;
  }
  return out;
}

MatList random_point(const ProblemSpec& spec, std::uint64_t seed) {
  MatList u(spec.order());
  for (std::size_t k = 0; k < u.size(); ++k) {
    Rng rng(seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(k + 1));
    Matrix a(spec.factor_rows(k), spec.ranks[k]);
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, j) = rng.normal();
    const Matrix q = Eigen::HouseholderQR<Matrix>(a).householderQ() *
                     Matrix::Identity(a.rows(), a.cols());
    u[k] = q / q.norm();
  }
  return u;
}

MatList riemannian_grad(const MatList& u, const MatList& egrad) {
  return tangent_project(u, egrad);
}

MatList riemannian_hess_vec(const MatList& u, const MatList& egrad,
                            const MatList& ehess, const MatList& v) {
  MatList out(u.size());
  for (std::size_t k = 0; k < u.size(); ++k)
    out[k] = ehess[k] - u[k].cwiseProduct(egrad[k]).sum() * v[k];
  return tangent_project(u, out);
}

}  // namespace stlt
