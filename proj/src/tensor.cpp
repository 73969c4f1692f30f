#include "stlt/tensor.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace stlt {

namespace {

void check_mode(int mode, Index order) {
  if (mode < 0 || mode >= order)
    throw std::invalid_argument("mode " + std::to_string(mode) +
                                " out of range for order " +
                                std::to_string(order));
}

// P = prod of dims before `mode`, Q = prod of dims after. The column-major
// array is then a stack of Q contiguous P x n_mode blocks, and the unfolding
// column of block q, offset p is p + q*P.
std::pair<Index, Index> split_sizes(std::span<const Index> dims, int mode) {
  Index p = 1, q = 1;
  for (int m = 0; m < mode; ++m) p *= dims[m];
  for (int m = mode + 1; m < static_cast<int>(dims.size()); ++m) q *= dims[m];
  return {p, q};
}

}  // namespace

Index tensor_size(std::span<const Index> dims) {
  Index n = 1;
  for (Index d : dims) n *= d;
  return n;
}

std::vector<Index> layout_strides(std::span<const Index> dims) {
  std::vector<Index> strides(dims.size());
  Index s = 1;
  for (std::size_t m = 0; m < dims.size(); ++m) {
    strides[m] = s;
    s *= dims[m];
  }
  return strides;
}

DenseTensor DenseTensor::zeros(std::vector<Index> dims) {
  DenseTensor t;
  t.values.assign(static_cast<std::size_t>(tensor_size(dims)), 0.0);
  t.dims = std::move(dims);
  t.validate();
  return t;
}

void DenseTensor::validate() const {
  if (dims.empty()) throw std::invalid_argument("tensor order must be >= 1");
  for (Index d : dims)
    if (d < 1) throw std::invalid_argument("tensor dims must be >= 1");
  if (static_cast<Index>(values.size()) != tensor_size(dims))
    throw std::invalid_argument("tensor value count does not match dims");
}

void SparseTensor::validate() const {
  if (dims.empty()) throw std::invalid_argument("tensor order must be >= 1");
  for (Index d : dims)
    if (d < 1) throw std::invalid_argument("tensor dims must be >= 1");
  const Index k = order();
  if (static_cast<Index>(coords.size()) != nnz() * k)
    throw std::invalid_argument("sparse coord count does not match values");
  for (Index e = 0; e < nnz(); ++e) {
    auto c = coord(e);
    for (Index m = 0; m < k; ++m)
      if (c[m] < 0 || c[m] >= dims[m])
        throw std::invalid_argument("sparse index out of range");
  }
}

void SparseTensor::canonicalize() {
  validate();
  const Index k = order();
  const Index n = nnz();
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  auto less = [&](Index a, Index b) {
    auto ca = coord(a);
    auto cb = coord(b);
    return std::lexicographical_compare(ca.begin(), ca.end(), cb.begin(),
                                        cb.end());
  };
  std::sort(perm.begin(), perm.end(), less);
  std::vector<Index> new_coords(coords.size());
  std::vector<double> new_values(values.size());
  for (Index e = 0; e < n; ++e) {
    auto c = coord(perm[e]);
    std::copy(c.begin(), c.end(), new_coords.begin() + e * k);
    new_values[e] = values[perm[e]];
  }
  for (Index e = 1; e < n; ++e) {
    if (std::equal(new_coords.begin() + (e - 1) * k, new_coords.begin() + e * k,
                   new_coords.begin() + e * k))
      throw std::invalid_argument("duplicate sparse index tuple");
  }
  coords = std::move(new_coords);
  values = std::move(new_values);
}

Matrix unfold(const DenseTensor& w, int mode) {
  w.validate();
  check_mode(mode, w.order());
  const Index nk = w.dims[mode];
  const auto [p, q] = split_sizes(w.dims, mode);
  Matrix out(nk, p * q);
  for (Index iq = 0; iq < q; ++iq) {
    Eigen::Map<const Matrix> block(w.values.data() + iq * p * nk, p, nk);
    out.block(0, iq * p, nk, p) = block.transpose();
  }
  return out;
}

DenseTensor fold(const Matrix& m, int mode, std::vector<Index> dims) {
  check_mode(mode, static_cast<Index>(dims.size()));
  const Index nk = dims[mode];
  const auto [p, q] = split_sizes(dims, mode);
  if (m.rows() != nk || m.cols() != p * q)
    throw std::invalid_argument("matrix shape does not match fold dims");
  DenseTensor out = DenseTensor::zeros(std::move(dims));
  for (Index iq = 0; iq < q; ++iq) {
    Eigen::Map<Matrix> block(out.values.data() + iq * p * nk, p, nk);
    block = m.block(0, iq * p, nk, p).transpose();
  }
  return out;
}

Index unfold_column(std::span<const Index> dims, std::span<const Index> idx,
                    int mode) {
  const auto [p, q] = split_sizes(dims, mode);
  (void)q;
  Index col = 0, stride = 1;
  for (int m = 0; m < mode; ++m) {
    col += idx[m] * stride;
    stride *= dims[m];
  }
  Index after = 0;
  stride = 1;
  for (int m = mode + 1; m < static_cast<int>(dims.size()); ++m) {
    after += idx[m] * stride;
    stride *= dims[m];
  }
  return col + after * p;
}

DenseTensor mode_product(const DenseTensor& w, const Matrix& u, int mode) {
  w.validate();
  check_mode(mode, w.order());
  const Index nk = w.dims[mode];
  if (u.cols() != nk)
    throw std::invalid_argument("matrix columns do not match mode dimension");
  const auto [p, q] = split_sizes(w.dims, mode);
  std::vector<Index> out_dims = w.dims;
  out_dims[mode] = u.rows();
  DenseTensor out = DenseTensor::zeros(std::move(out_dims));
  const Index m_rows = u.rows();
  for (Index iq = 0; iq < q; ++iq) {
    Eigen::Map<const Matrix> block(w.values.data() + iq * p * nk, p, nk);
    Eigen::Map<Matrix> out_block(out.values.data() + iq * p * m_rows, p,
                                 m_rows);
    out_block.noalias() = block * u.transpose();
  }
  return out;
}

namespace {
void check_same_dims(std::span<const Index> a, std::span<const Index> b) {
  if (!std::equal(a.begin(), a.end(), b.begin(), b.end()))
    throw std::invalid_argument("tensor dims mismatch");
}
}  // namespace

double inner(const DenseTensor& a, const DenseTensor& b) {
  check_same_dims(a.dims, b.dims);
  double s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) s += a.values[i] * b.values[i];
  return s;
}

double inner(const SparseTensor& a, const DenseTensor& b) {
  check_same_dims(a.dims, b.dims);
  const auto strides = layout_strides(a.dims);
  double s = 0.0;
  for (Index e = 0; e < a.nnz(); ++e) {
    auto c = a.coord(e);
    Index lin = 0;
    for (Index m = 0; m < a.order(); ++m) lin += c[m] * strides[m];
    s += a.values[e] * b.values[lin];
  }
  return s;
}

double inner(const SparseTensor& a, const SparseTensor& b) {
  check_same_dims(a.dims, b.dims);
  // Merge over the two sorted supports; the sum runs over the intersection.
  const Index k = a.order();
  double s = 0.0;
  Index ia = 0, ib = 0;
  auto cmp = [k](std::span<const Index> x, std::span<const Index> y) {
    for (Index m = 0; m < k; ++m) {
      if (x[m] < y[m]) return -1;
      if (x[m] > y[m]) return 1;
    }
    return 0;
  };
  while (ia < a.nnz() && ib < b.nnz()) {
    const int c = cmp(a.coord(ia), b.coord(ib));
    if (c == 0) {
      s += a.values[ia] * b.values[ib];
      ++ia;
      ++ib;
    } else if (c < 0) {
      ++ia;
    } else {
      ++ib;
    }
  }
  return s;
}

double norm(const DenseTensor& a) {
  return Eigen::Map<const Vector>(a.values.data(),
                                  static_cast<Eigen::Index>(a.values.size()))
      .norm();
}

double norm(const SparseTensor& a) {
  return Eigen::Map<const Vector>(a.values.data(),
                                  static_cast<Eigen::Index>(a.values.size()))
      .norm();
}

SparseTensor project_omega(const DenseTensor& w, const SparseTensor& omega) {
  w.validate();
  check_same_dims(w.dims, omega.dims);
  const auto strides = layout_strides(w.dims);
  SparseTensor out;
  out.dims = w.dims;
  out.coords = omega.coords;
  out.values.resize(static_cast<std::size_t>(omega.nnz()));
  for (Index e = 0; e < omega.nnz(); ++e) {
    auto c = omega.coord(e);
    Index lin = 0;
    for (Index m = 0; m < w.order(); ++m) lin += c[m] * strides[m];
    out.values[e] = w.values[lin];
  }
  return out;
}

DenseTensor embed(const SparseTensor& a) {
  a.validate();
  DenseTensor out = DenseTensor::zeros(a.dims);
  const auto strides = layout_strides(a.dims);
  for (Index e = 0; e < a.nnz(); ++e) {
    auto c = a.coord(e);
    Index lin = 0;
    for (Index m = 0; m < a.order(); ++m) lin += c[m] * strides[m];
    out.values[lin] = a.values[e];
  }
  return out;
}

DenseTensor add_scaled(const DenseTensor& a, const DenseTensor& b,
                       double alpha) {
  check_same_dims(a.dims, b.dims);
  DenseTensor out = a;
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] += alpha * b.values[i];
  return out;
}

}  // namespace stlt
