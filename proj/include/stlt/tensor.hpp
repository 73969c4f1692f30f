#pragma once

// Dense and sparse K-way tensors with the unfold/fold, mode-product and
// inner-product primitives used throughout the library.
//
// Conventions:
//  - dense storage is a flat column-major array (first index fastest);
//  - mode-k unfolding maps element (i_0,...,i_{K-1}) to row i_k and column
//    sum_{m != k} i_m * J_m with J_m = prod_{l < m, l != k} n_l (all 0-based
//    internally; file formats are 1-based);
//  - sparse tensors keep a sorted coordinate list so iteration order is
//    deterministic for identical inputs.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace stlt {

using Index = std::int64_t;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

Index tensor_size(std::span<const Index> dims);

/// Column-major strides: stride[m] = prod_{l<m} n_l.
std::vector<Index> layout_strides(std::span<const Index> dims);

struct DenseTensor {
  std::vector<Index> dims;
  std::vector<double> values;  // length prod(dims), column-major

  static DenseTensor zeros(std::vector<Index> dims);

  Index order() const { return static_cast<Index>(dims.size()); }
  Index size() const { return static_cast<Index>(values.size()); }

  /// Throws std::invalid_argument when dims/values are inconsistent.
  void validate() const;
};

struct SparseTensor {
  std::vector<Index> dims;
  std::vector<Index> coords;   // nnz * order, entry-major, 0-based
  std::vector<double> values;  // nnz

  Index order() const { return static_cast<Index>(dims.size()); }
  Index nnz() const { return static_cast<Index>(values.size()); }

  std::span<const Index> coord(Index entry) const {
    return std::span<const Index>(coords.data() + entry * order(), order());
  }

  /// Sorts entries lexicographically by index tuple; throws on duplicate or
  /// out-of-range coordinates.
  void canonicalize();
  void validate() const;
};

// --- unfolding ---------------------------------------------------------

Matrix unfold(const DenseTensor& w, int mode);
DenseTensor fold(const Matrix& m, int mode, std::vector<Index> dims);

/// Unfolding column of a coordinate tuple for the given mode.
Index unfold_column(std::span<const Index> dims, std::span<const Index> idx,
                    int mode);

// --- algebra -----------------------------------------------------------

/// Tensor-times-matrix along `mode`: result has dims with n_mode replaced by
/// u.rows(); unfold_mode(result) == u * unfold_mode(w).
DenseTensor mode_product(const DenseTensor& w, const Matrix& u, int mode);

double inner(const DenseTensor& a, const DenseTensor& b);
double inner(const SparseTensor& a, const DenseTensor& b);
double inner(const SparseTensor& a, const SparseTensor& b);

double norm(const DenseTensor& a);
double norm(const SparseTensor& a);

// --- support operations -------------------------------------------------

/// Restriction to the support of `omega` (values of `omega` are ignored).
SparseTensor project_omega(const DenseTensor& w, const SparseTensor& omega);

DenseTensor embed(const SparseTensor& a);

/// a + alpha * b elementwise, matching dims required.
DenseTensor add_scaled(const DenseTensor& a, const DenseTensor& b,
                       double alpha);

}  // namespace stlt
