#include "stlt/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace stlt {

namespace {

void check_tau(std::span<const Index> dims, std::span<const Index> tau) {
  if (tau.size() != dims.size())
    throw std::invalid_argument("tau must have one window per mode");
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (tau[k] < 1 || tau[k] > dims[k])
      throw std::invalid_argument("tau[" + std::to_string(k) +
                                  "] out of range [1, n_k]");
  }
}

// Advances a mixed-radix counter with the first index fastest, matching the
// column-major value layout. Returns false once the counter wraps to zero.
bool next_index(std::vector<Index>& idx, std::span<const Index> dims) {
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (++idx[k] < dims[k]) return true;
    idx[k] = 0;
  }
  return false;
}

}  // namespace

void Constraint::validate(std::span<const Index> dims) const {
  if (kind == ConstraintKind::hankel) check_tau(dims, tau);
}

std::vector<Index> lifted_dims(std::span<const Index> dims,
                               std::span<const Index> tau) {
  check_tau(dims, tau);
  std::vector<Index> out(2 * dims.size());
  for (std::size_t k = 0; k < dims.size(); ++k) {
    out[2 * k] = tau[k];
    out[2 * k + 1] = dims[k] - tau[k] + 1;
  }
  return out;
}

DenseTensor hankelize(const DenseTensor& w, std::span<const Index> tau) {
  w.validate();
  check_tau(w.dims, tau);
  const std::size_t order = w.dims.size();
  DenseTensor out = DenseTensor::zeros(lifted_dims(w.dims, tau));
  const auto in_strides = layout_strides(w.dims);

  std::vector<Index> idx(2 * order, 0);
  std::size_t pos = 0;
  do {
    Index src = 0;
    for (std::size_t k = 0; k < order; ++k)
      src += (idx[2 * k] + idx[2 * k + 1]) * in_strides[k];
    out.values[pos++] = w.values[static_cast<std::size_t>(src)];
  } while (next_index(idx, out.dims));
  return out;
}

DenseTensor hankel_adjoint(const DenseTensor& lifted,
                           std::span<const Index> tau,
                           std::vector<Index> dims) {
  lifted.validate();
  check_tau(dims, tau);
  const auto want = lifted_dims(dims, tau);
  if (lifted.dims != want)
    throw std::invalid_argument("lifted tensor dims do not match (dims, tau)");
  const std::size_t order = dims.size();
  DenseTensor out = DenseTensor::zeros(dims);
  const auto out_strides = layout_strides(out.dims);

  std::vector<Index> idx(2 * order, 0);
  std::size_t pos = 0;
  do {
    Index dst = 0;
    for (std::size_t k = 0; k < order; ++k)
      dst += (idx[2 * k] + idx[2 * k + 1]) * out_strides[k];
    out.values[static_cast<std::size_t>(dst)] += lifted.values[pos++];
  } while (next_index(idx, lifted.dims));
  return out;
}

DenseTensor hankel_adjoint(const SparseTensor& lifted,
                           std::span<const Index> tau,
                           std::vector<Index> dims) {
  lifted.validate();
  check_tau(dims, tau);
  const auto want = lifted_dims(dims, tau);
  if (lifted.dims != want)
    throw std::invalid_argument("lifted tensor dims do not match (dims, tau)");
  const std::size_t order = dims.size();
  DenseTensor out = DenseTensor::zeros(dims);
  const auto out_strides = layout_strides(out.dims);
  for (Index e = 0; e < lifted.nnz(); ++e) {
    const auto c = lifted.coord(e);
    Index dst = 0;
    for (std::size_t k = 0; k < order; ++k)
      dst += (c[2 * k] + c[2 * k + 1]) * out_strides[k];
    out.values[static_cast<std::size_t>(dst)] +=
        lifted.values[static_cast<std::size_t>(e)];
  }
  return out;
}

DenseTensor hankel_multiplicities(std::span<const Index> dims,
                                  std::span<const Index> tau) {
  check_tau(dims, tau);
  const std::size_t order = dims.size();
  DenseTensor out =
      DenseTensor::zeros(std::vector<Index>(dims.begin(), dims.end()));
  std::vector<Index> idx(order, 0);
  std::size_t pos = 0;
  do {
    double m = 1.0;
    for (std::size_t k = 0; k < order; ++k) {
      const Index n = dims[k], t = tau[k], i = idx[k];
      m *= static_cast<double>(
          std::min({t, n - t + 1, i + 1, n - i}));
    }
    out.values[pos++] = m;
  } while (next_index(idx, std::span<const Index>(dims)));
  return out;
}

LiftSupport lift_support(const SparseTensor& omega,
                         std::span<const Index> tau) {
  omega.validate();
  check_tau(omega.dims, tau);
  const std::size_t order = omega.dims.size();

  LiftSupport lift;
  lift.dims = lifted_dims(omega.dims, tau);
  lift.entry_offset.assign(1, 0);
  lift.multiplicity.reserve(static_cast<std::size_t>(omega.nnz()));

  std::vector<Index> j_lo(order), j_hi(order), j(order);
  for (Index e = 0; e < omega.nnz(); ++e) {
    const auto c = omega.coord(e);
    Index count = 1;
    for (std::size_t k = 0; k < order; ++k) {
      const Index n = omega.dims[k], t = tau[k], i = c[k];
      j_lo[k] = std::max<Index>(0, i - (n - t));
      j_hi[k] = std::min<Index>(t - 1, i);
      count *= j_hi[k] - j_lo[k] + 1;
      j[k] = j_lo[k];
    }
    // Enumerate window offsets in lexicographic order of (j_1, ..., j_K).
    for (Index t = 0; t < count; ++t) {
      for (std::size_t k = 0; k < order; ++k) {
        lift.coords.push_back(j[k]);
        lift.coords.push_back(c[k] - j[k]);
      }
      for (std::size_t k = order; k-- > 0;) {
        if (++j[k] <= j_hi[k]) break;
        j[k] = j_lo[k];
      }
    }
    lift.entry_offset.push_back(lift.entry_offset.back() + count);
    lift.multiplicity.push_back(count);
  }
  return lift;
}

void project_coupling_values(const LiftSupport& lift, std::span<double> z,
                             std::span<double> s) {
  const std::size_t m = lift.multiplicity.size();
  if (z.size() != m)
    throw std::invalid_argument("z length does not match lift entry count");
  if (s.size() != static_cast<std::size_t>(lift.nnz()))
    throw std::invalid_argument("s length does not match lift nnz");
  for (std::size_t e = 0; e < m; ++e) {
    const Index lo = lift.entry_offset[e], hi = lift.entry_offset[e + 1];
    double sum = 0.0;
    for (Index t = lo; t < hi; ++t) sum += s[static_cast<std::size_t>(t)];
    const double delta =
        (sum - z[e]) / (1.0 + static_cast<double>(lift.multiplicity[e]));
    z[e] += delta;
    for (Index t = lo; t < hi; ++t) s[static_cast<std::size_t>(t)] -= delta;
  }
}

std::pair<SparseTensor, DenseTensor> project_coupling(const SparseTensor& z,
                                                      const DenseTensor& s,
                                                      const LiftSupport& lift) {
  z.validate();
  s.validate();
  if (s.dims != lift.dims)
    throw std::invalid_argument("s dims do not match lifted dims");
  if (static_cast<std::size_t>(z.nnz()) != lift.multiplicity.size())
    throw std::invalid_argument("z support does not match lift");

  const auto strides = layout_strides(lift.dims);
  const std::size_t order2 = lift.dims.size();
  std::vector<double> sv(static_cast<std::size_t>(lift.nnz()));
  std::vector<Index> offs(sv.size());
  for (std::size_t t = 0; t < sv.size(); ++t) {
    Index off = 0;
    for (std::size_t k = 0; k < order2; ++k)
      off += lift.coords[t * order2 + k] * strides[k];
    offs[t] = off;
    sv[t] = s.values[static_cast<std::size_t>(off)];
  }
  {
    DenseTensor rest = s;
    for (Index off : offs) rest.values[static_cast<std::size_t>(off)] = 0.0;
    for (double v : rest.values)
      if (v != 0.0)
        throw std::invalid_argument(
            "multiplier supported outside the lifted observed set");
  }

  SparseTensor z_out = z;
  project_coupling_values(lift, z_out.values, sv);
  DenseTensor s_out = DenseTensor::zeros(s.dims);
  for (std::size_t t = 0; t < sv.size(); ++t)
    s_out.values[static_cast<std::size_t>(offs[t])] = sv[t];
  return {std::move(z_out), std::move(s_out)};
}

DenseTensor apply_adjoint(const Constraint& constraint, const DualMultiplier& s,
                          std::span<const Index> dims) {
  switch (constraint.kind) {
    case ConstraintKind::none:
      return DenseTensor::zeros(std::vector<Index>(dims.begin(), dims.end()));
    case ConstraintKind::nonneg: {
      s.dense.validate();
      if (!std::equal(s.dense.dims.begin(), s.dense.dims.end(), dims.begin(),
                      dims.end()))
        throw std::invalid_argument("multiplier dims do not match tensor dims");
      return s.dense;
    }
    case ConstraintKind::hankel:
      return hankel_adjoint(s.lifted, constraint.tau,
                            std::vector<Index>(dims.begin(), dims.end()));
  }
  throw std::invalid_argument("unknown constraint kind");
}

}  // namespace stlt
