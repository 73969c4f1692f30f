#pragma once

// Run orchestration shared by the CLI and the acceptance harness: a flat
// config, completion runs that emit history/manifest/tensor/plot artifacts,
// synthetic-instance emission, derivative checking, and recovery metrics.

#include <cstdint>
#include <string>
#include <vector>

#include "stlt/outer.hpp"
#include "stlt/problem.hpp"
#include "stlt/synth.hpp"
#include "stlt/tensor.hpp"

namespace stlt {

struct RunConfig {
  std::string input;   // observed-entry .tns (complete/check-derivs), or the
                       // recovered .tns for eval
  std::string truth;   // ground-truth .tns (eval)
  std::string omega;   // observed-entry .tns giving the train split (eval)
  std::string out;     // artifact directory; empty skips file emission

  ConstraintKind kind = ConstraintKind::none;
  std::vector<Index> tau;
  std::vector<Index> ranks;
  double lambda = -1.0;  // total weight split evenly; negative -> K/||Y||
  double cost = 1.0;

  std::vector<Index> dims;   // synth only
  double fraction = 0.1;     // synth only

  std::string solver;  // "", "rcg", "rtr"
  double cg_tol = 1e-10;
  Index cg_iters = 1000;
  double nnls_tol = 1e-8;
  Index inner_rounds = 50;
  double eps = 1e-6;
  Index max_iters = 200;
  std::uint64_t seed = 0;
  bool time_iters = false;
};

/// Sets one field from its flag/JSON key and string form, e.g. ("rank",
/// "4,4") or ("eps", "1e-6"). Throws std::invalid_argument on unknown keys or
/// unparseable values.
void set_config_value(RunConfig& cfg, const std::string& key,
                      const std::string& value);

/// Merges the recognised keys of a JSON object file into cfg; unknown keys
/// are ignored, so a run manifest is itself a valid config.
void apply_json_config(RunConfig& cfg, const std::string& path);

/// Resolved per-mode problem built from config + data; lambda and solver are
/// made explicit so echoing them reproduces the run.
struct PreparedRun {
  ProblemSpec spec;
  SolverParams params;
  double lambda_total = 0.0;
};

PreparedRun prepare_run(SparseTensor y, const RunConfig& cfg);

struct RunOutcome {
  OuterResult result;
  DenseTensor recovered;
  double lambda_total = 0.0;
  std::vector<double> lambdas;
};

/// Reads cfg.input, solves, recovers, and (when cfg.out is set) writes
/// history.csv, manifest.json, W_hat.tns and plots/*.svg.
RunOutcome run_completion(const RunConfig& cfg);

/// Generates the instance and (when cfg.out is set) writes observed.tns,
/// truth.tns and manifest.json.
SynthResult run_synth(const RunConfig& cfg);

struct DerivReport {
  double max_grad_rel = 0.0;
  double max_hess_rel = 0.0;
  bool grad_ok = false;  // max_grad_rel <= 1e-4
  bool hess_ok = false;  // max_hess_rel <= 1e-3
};

/// Finite-difference check of the dual gradient and Hessian-vector product at
/// a seeded random manifold point of the configured problem.
DerivReport check_derivatives(const RunConfig& cfg);

struct EvalReport {
  double rmse_train = 0.0;
  double rmse_test = 0.0;
  double min_entry = 0.0;
  Index n_train = 0;
  Index n_test = 0;
};

/// RMSE of w against truth on the omega support (train) and its complement
/// (test), plus the minimum entry of w.
EvalReport eval_recovery(const DenseTensor& w, const DenseTensor& truth,
                         const SparseTensor& omega);

/// File-based wrapper over eval_recovery using cfg.input/truth/omega.
EvalReport run_eval(const RunConfig& cfg);

}  // namespace stlt
