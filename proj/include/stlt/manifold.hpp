#pragma once

// Geometry of the product of unit-Frobenius spheres: tangent projection,
// normalization retraction, and the curvature-corrected Hessian product.

#include <cstdint>

#include "stlt/problem.hpp"

namespace stlt {

/// Per mode: V_k - <U_k, V_k> U_k.
MatList tangent_project(const MatList& u, const MatList& v);

/// Per mode: (U_k + xi_k)/||U_k + xi_k||. Throws std::invalid_argument when a
/// renormalization denominator vanishes (impossible for genuine tangents).
MatList retract(const MatList& u, const MatList& xi);

/// Seeded start point: U_k = Q/||Q||_F with Q an orthonormal basis of a
/// Gaussian matrix, one decorrelated draw per mode.
MatList random_point(const ProblemSpec& spec, std::uint64_t seed);

/// Riemannian gradient: tangent projection of the Euclidean gradient.
MatList riemannian_grad(const MatList& u, const MatList& egrad);

/// Riemannian Hessian product on the sphere product:
/// P_U(ehess_k) - <U_k, egrad_k> V_k per mode, projected back to the tangent.
MatList riemannian_hess_vec(const MatList& u, const MatList& egrad,
                            const MatList& ehess, const MatList& v);

}  // namespace stlt
