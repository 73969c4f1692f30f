#include "stlt/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "stlt/rng.hpp"

namespace stlt {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

DenseTensor lowrank_truth(const std::vector<Index>& dims,
                          const std::vector<Index>& ranks, Rng& rng) {
  DenseTensor out = DenseTensor::zeros(ranks);
  for (auto& v : out.values) v = rng.uniform();
  for (std::size_t k = 0; k < dims.size(); ++k) {
    Matrix a(dims[k], ranks[k]);
    for (Index j = 0; j < a.cols(); ++j)
      for (Index i = 0; i < a.rows(); ++i) a(i, j) = rng.uniform();
    out = mode_product(out, a, static_cast<int>(k));
  }
  return out;
}

// Sum of rank floor(r/2) damped cosines plus, for odd r, one plain decaying
// exponential; the Hankel matrix of the result has rank <= r.
std::vector<double> mode_signal(Index n, Index rank, Rng& rng) {
  std::vector<double> f(static_cast<std::size_t>(n), 0.0);
  const Index pairs = rank / 2;
  for (Index m = 0; m < pairs; ++m) {
    const double amp = rng.uniform(0.5, 1.5);
    const double decay = rng.uniform(-0.08, -0.01);
    const double omega = rng.uniform(0.2, 2.8);
    const double phase = rng.uniform(0.0, kTwoPi);
    for (Index t = 0; t < n; ++t)
      f[static_cast<std::size_t>(t)] +=
          amp * std::exp(decay * static_cast<double>(t)) *
          std::cos(omega * static_cast<double>(t) + phase);
  }
  if (rank % 2 != 0) {
    const double amp = rng.uniform(0.5, 1.5);
    const double decay = rng.uniform(-0.08, -0.01);
    for (Index t = 0; t < n; ++t)
      f[static_cast<std::size_t>(t)] +=
          amp * std::exp(decay * static_cast<double>(t));
  }
  return f;
}

DenseTensor hankel_truth(const std::vector<Index>& dims,
                         const std::vector<Index>& ranks, Rng& rng) {
  std::vector<std::vector<double>> sig;
  sig.reserve(dims.size());
  for (std::size_t k = 0; k < dims.size(); ++k)
    sig.push_back(mode_signal(dims[k], ranks[k], rng));
  DenseTensor out = DenseTensor::zeros(dims);
  std::vector<Index> idx(dims.size(), 0);
  for (Index e = 0; e < out.size(); ++e) {
    double v = 1.0;
    for (std::size_t k = 0; k < dims.size(); ++k)
      v *= sig[k][static_cast<std::size_t>(idx[k])];
    out.values[static_cast<std::size_t>(e)] = v;
    for (std::size_t k = 0; k < dims.size(); ++k) {
      if (++idx[k] < dims[k]) break;
      idx[k] = 0;
    }
  }
  return out;
}

SparseTensor sample_observed(const DenseTensor& truth, double fraction,
                             Rng& rng) {
  const Index total = truth.size();
  const Index m = static_cast<Index>(
      std::llround(fraction * static_cast<double>(total)));
  if (m < 1)
    throw std::invalid_argument("observation fraction covers no entry");

  std::vector<Index> pool(static_cast<std::size_t>(total));
  std::iota(pool.begin(), pool.end(), Index{0});
  for (Index i = 0; i < m; ++i) {
    const Index j =
        i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(total - i)));
    std::swap(pool[static_cast<std::size_t>(i)],
              pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(m));
  std::sort(pool.begin(), pool.end());

  SparseTensor y;
  y.dims = truth.dims;
  y.coords.reserve(static_cast<std::size_t>(m) * truth.dims.size());
  y.values.reserve(static_cast<std::size_t>(m));
  for (Index e : pool) {
    Index rem = e;
    for (std::size_t k = 0; k < truth.dims.size(); ++k) {
      y.coords.push_back(rem % truth.dims[k]);
      rem /= truth.dims[k];
    }
    y.values.push_back(truth.values[static_cast<std::size_t>(e)]);
  }
  y.canonicalize();
  return y;
}

}  // namespace

SynthResult generate_synthetic(ConstraintKind kind, std::vector<Index> dims,
                               std::vector<Index> true_ranks, double fraction,
                               std::uint64_t seed) {
  if (dims.empty()) throw std::invalid_argument("dims must be nonempty");
  for (Index n : dims)
    if (n < 1) throw std::invalid_argument("dims must be positive");
  if (true_ranks.size() != dims.size())
    throw std::invalid_argument("true_ranks must match tensor order");
  for (Index r : true_ranks)
    if (r < 1) throw std::invalid_argument("true_ranks must be positive");
  if (!(fraction > 0.0) || fraction > 1.0)
    throw std::invalid_argument("fraction must lie in (0,1]");

  Rng rng(seed);
  SynthResult out;
  out.truth = kind == ConstraintKind::hankel
                  ? hankel_truth(dims, true_ranks, rng)
                  : lowrank_truth(dims, true_ranks, rng);
  out.observed = sample_observed(out.truth, fraction, rng);
  return out;
}

}  // namespace stlt
