#include "stlt/problem.hpp"

#include <stdexcept>
#include <string>
#include <unordered_map>

namespace stlt {

Index ProblemSpec::factor_rows(std::size_t k) const {
  if (constraint.kind == ConstraintKind::hankel)
    return y.dims[k] - constraint.tau[k] + 1;
  return y.dims[k];
}

void ProblemSpec::validate() const {
  y.validate();
  if (y.nnz() == 0) throw std::invalid_argument("observed set is empty");
  const std::size_t k = order();
  if (ranks.size() != k)
    throw std::invalid_argument("ranks must have one entry per mode");
  if (lambdas.size() != k)
    throw std::invalid_argument("lambdas must have one entry per mode");
  if (!(cost > 0.0)) throw std::invalid_argument("cost C must be positive");
  constraint.validate(y.dims);
  for (std::size_t m = 0; m < k; ++m) {
    if (ranks[m] < 1)
      throw std::invalid_argument("rank[" + std::to_string(m) +
                                  "] must be at least 1");
    if (ranks[m] > factor_rows(m))
      throw std::invalid_argument("rank[" + std::to_string(m) +
                                  "] exceeds factor rows");
    if (!(lambdas[m] >= 0.0))
      throw std::invalid_argument("lambda[" + std::to_string(m) +
                                  "] must be nonnegative");
  }
}

void SolverParams::validate() const {
  if (!(cg_tol > 0.0) || !(nnls_tol > 0.0) || !(alternation_tol > 0.0) ||
      !(eps > 0.0))
    throw std::invalid_argument("tolerances must be positive");
  if (cg_max_iter < 1 || nnls_max_iter < 1 || alternation_max_rounds < 1)
    throw std::invalid_argument("iteration caps must be at least 1");
  if (max_iters < 0) throw std::invalid_argument("max_iters must be >= 0");
}

double dot(const MatList& a, const MatList& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    s += (a[k].array() * b[k].array()).sum();
  return s;
}

double norm(const MatList& a) { return std::sqrt(dot(a, a)); }

MatList zeros_like(const MatList& a) {
  MatList out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k)
    out[k] = Matrix::Zero(a[k].rows(), a[k].cols());
  return out;
}

void axpy(double alpha, const MatList& x, MatList& y) {
  for (std::size_t k = 0; k < x.size(); ++k) y[k] += alpha * x[k];
}

MatList scaled(const MatList& a, double alpha) {
  MatList out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = alpha * a[k];
  return out;
}

namespace {

// Builds the per-mode view of a support given as (coords, order) with the
// row taken from axis `row_axis`. Compact column ids follow first occurrence.
ModeView build_view(const std::vector<Index>& coords, std::size_t order,
                    std::size_t row_axis, std::span<const Index> dims) {
  ModeView view;
  const std::size_t nnz = coords.size() / order;
  view.row.resize(nnz);
  view.col.resize(nnz);
  view.nrows = dims[row_axis];

  const auto full = layout_strides(dims);
  view.row_stride = full[row_axis];

  std::unordered_map<Index, Index> ids;
  ids.reserve(nnz * 2);
  for (std::size_t e = 0; e < nnz; ++e) {
    const Index* c = coords.data() + e * order;
    view.row[e] = c[row_axis];
    Index base = 0;
    for (std::size_t m = 0; m < order; ++m)
      if (m != row_axis) base += c[m] * full[m];
    auto [it, fresh] = ids.try_emplace(base, static_cast<Index>(ids.size()));
    if (fresh) view.col_base.push_back(base);
    view.col[e] = it->second;
  }
  view.ncols = static_cast<Index>(ids.size());
  return view;
}

}  // namespace

ProblemCache::ProblemCache(ProblemSpec spec) : spec_(std::move(spec)) {
  spec_.y.canonicalize();
  spec_.validate();
  const std::size_t order = spec_.order();
  y_ = Eigen::Map<const Vector>(spec_.y.values.data(),
                                static_cast<Eigen::Index>(spec_.y.nnz()));

  const auto strides = layout_strides(spec_.y.dims);
  observed_offsets_.resize(static_cast<std::size_t>(spec_.y.nnz()));
  for (Index e = 0; e < spec_.y.nnz(); ++e) {
    const auto c = spec_.y.coord(e);
    Index off = 0;
    for (std::size_t m = 0; m < order; ++m) off += c[m] * strides[m];
    observed_offsets_[static_cast<std::size_t>(e)] = off;
  }

  views_.reserve(order);
  if (hankel()) {
    lift_ = lift_support(spec_.y, spec_.constraint.tau);
    support_size_ = lift_.nnz();
    for (std::size_t k = 0; k < order; ++k)
      views_.push_back(
          build_view(lift_.coords, 2 * order, 2 * k + 1, lift_.dims));
  } else {
    support_size_ = spec_.y.nnz();
    for (std::size_t k = 0; k < order; ++k)
      views_.push_back(build_view(spec_.y.coords, order, k, spec_.y.dims));
  }
}

Matrix ProblemCache::gather(std::size_t k, const Matrix& u,
                            const Vector& x) const {
  const ModeView& v = views_[k];
  Matrix g = Matrix::Zero(u.cols(), v.ncols);
  for (std::size_t e = 0; e < v.row.size(); ++e)
    g.col(v.col[e]) += x[static_cast<Eigen::Index>(e)] *
                       u.row(v.row[e]).transpose();
  return g;
}

void ProblemCache::scatter(std::size_t k, const Matrix& u, const Matrix& g,
                           double alpha, Vector& out) const {
  const ModeView& v = views_[k];
  for (std::size_t e = 0; e < v.row.size(); ++e)
    out[static_cast<Eigen::Index>(e)] +=
        alpha * u.row(v.row[e]).dot(g.col(v.col[e]));
}

Matrix ProblemCache::row_outer(std::size_t k, const Matrix& g,
                               const Vector& x) const {
  const ModeView& v = views_[k];
  Matrix p = Matrix::Zero(v.nrows, g.rows());
  for (std::size_t e = 0; e < v.row.size(); ++e)
    p.row(v.row[e]) += x[static_cast<Eigen::Index>(e)] *
                       g.col(v.col[e]).transpose();
  return p;
}

Vector ProblemCache::gram_vec(std::size_t k, const Vector& x,
                              const Vector& w) const {
  const ModeView& v = views_[k];
  Vector t = Vector::Zero(v.ncols);
  for (std::size_t e = 0; e < v.row.size(); ++e)
    t[v.col[e]] += x[static_cast<Eigen::Index>(e)] * w[v.row[e]];
  Vector out = Vector::Zero(v.nrows);
  for (std::size_t e = 0; e < v.row.size(); ++e)
    out[v.row[e]] += x[static_cast<Eigen::Index>(e)] * t[v.col[e]];
  return out;
}

void ProblemCache::apply_gram(const MatList& u, const Vector& x,
                              Vector& out) const {
  out.setZero(static_cast<Eigen::Index>(support_size_));
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (spec_.lambdas[k] == 0.0) continue;
    const Matrix g = gather(k, u[k], x);
    scatter(k, u[k], g, spec_.lambdas[k], out);
  }
}

void ProblemCache::apply_gram_sym(const MatList& u, const MatList& v,
                                  const Vector& x, Vector& out) const {
  out.setZero(static_cast<Eigen::Index>(support_size_));
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (spec_.lambdas[k] == 0.0) continue;
    const Matrix gu = gather(k, u[k], x);
    const Matrix gv = gather(k, v[k], x);
    scatter(k, v[k], gu, spec_.lambdas[k], out);
    scatter(k, u[k], gv, spec_.lambdas[k], out);
  }
}

Vector ProblemCache::gather_observed(const DenseTensor& w) const {
  if (w.dims != spec_.y.dims)
    throw std::invalid_argument("dense tensor dims do not match problem dims");
  Vector out(static_cast<Eigen::Index>(spec_.y.nnz()));
  for (std::size_t e = 0; e < observed_offsets_.size(); ++e)
    out[static_cast<Eigen::Index>(e)] =
        w.values[static_cast<std::size_t>(observed_offsets_[e])];
  return out;
}

DenseTensor ProblemCache::embed_observed(const Vector& z) const {
  if (z.size() != static_cast<Eigen::Index>(spec_.y.nnz()))
    throw std::invalid_argument("value count does not match observed set");
  DenseTensor out = DenseTensor::zeros(spec_.y.dims);
  for (std::size_t e = 0; e < observed_offsets_.size(); ++e)
    out.values[static_cast<std::size_t>(observed_offsets_[e])] =
        z[static_cast<Eigen::Index>(e)];
  return out;
}

SparseTensor ProblemCache::observed_to_sparse(const Vector& z) const {
  if (z.size() != static_cast<Eigen::Index>(spec_.y.nnz()))
    throw std::invalid_argument("value count does not match observed set");
  SparseTensor out;
  out.dims = spec_.y.dims;
  out.coords = spec_.y.coords;
  out.values.assign(z.data(), z.data() + z.size());
  return out;
}

SparseTensor ProblemCache::lift_to_sparse(const Vector& s) const {
  if (s.size() != static_cast<Eigen::Index>(lift_.nnz()))
    throw std::invalid_argument("value count does not match lifted set");
  SparseTensor out;
  out.dims = lift_.dims;
  out.coords = lift_.coords;
  out.values.assign(s.data(), s.data() + s.size());
  return out;
}

}  // namespace stlt
