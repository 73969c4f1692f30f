#pragma once

// Seeded synthetic completion instances: structured ground truth plus a
// uniformly sampled observation set.

#include <cstdint>
#include <vector>

#include "stlt/constraints.hpp"
#include "stlt/tensor.hpp"

namespace stlt {

struct SynthResult {
  SparseTensor observed;
  DenseTensor truth;
};

/// none/nonneg: truth = core x_1 A_1 ... x_K A_K with entrywise-nonnegative
/// seeded factors, so unfold_k(truth) = A_k * (nonnegative matrix) has rank
/// <= true_ranks[k] for every mode. hankel: truth is an outer product of
/// per-mode sums of damped sinusoids, so the mode-k Hankel lift of any window
/// length has rank <= true_ranks[k]. Observations are drawn uniformly without
/// replacement; fraction must lie in (0,1] and round to at least one entry.
SynthResult generate_synthetic(ConstraintKind kind, std::vector<Index> dims,
                               std::vector<Index> true_ranks, double fraction,
                               std::uint64_t seed);

}  // namespace stlt
