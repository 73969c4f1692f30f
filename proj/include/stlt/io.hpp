#pragma once

// Text artifacts: .tns coordinate files, the iteration-history CSV, and
// minimal self-contained SVG line plots.
//
// .tns format (UTF-8): line 1 `dims n_1 ... n_K`, then one entry per
// non-empty line `i_1 ... i_K value` with 1-based indices. A dense tensor is
// the same format carrying all prod(n_k) entries. Unreadable or malformed
// input throws std::invalid_argument; write failures throw std::runtime_error.

#include <string>
#include <vector>

#include "stlt/outer.hpp"
#include "stlt/tensor.hpp"

namespace stlt {

SparseTensor read_tns(const std::string& path);

void write_tns(const std::string& path, const SparseTensor& t);

/// Writes every entry in lexicographic index order.
void write_tns(const std::string& path, const DenseTensor& t);

/// Header `iter,g_value,grad_norm,duality_gap,rel_gap,inner_iters,wall_ms`,
/// one row per record, doubles rendered with round-trip precision.
void write_history_csv(const std::string& path,
                       const std::vector<IterationRecord>& rows);

/// Log-scale y polyline of y[i] against x[i]; nonpositive values are dropped
/// from the curve.
void write_svg_log_plot(const std::string& path, const std::string& title,
                        const std::string& y_label,
                        const std::vector<double>& x,
                        const std::vector<double>& y);

}  // namespace stlt
