#include "stlt/stlt.h"

#include <memory>
#include <stdexcept>
#include <string>

#include "stlt/outer.hpp"
#include "stlt/run.hpp"
#include "stlt/version.hpp"

namespace {

thread_local std::string g_error;

void set_error(const char* msg) { g_error = msg; }

template <typename Fn>
stlt_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const std::invalid_argument& e) {
    g_error = e.what();
    return STLT_INVALID_ARG;
  } catch (const std::exception& e) {
    g_error = e.what();
    return STLT_INTERNAL;
  } catch (...) {
    g_error = "unknown error";
    return STLT_INTERNAL;
  }
}

}  // namespace

struct stlt_config {
  stlt::RunConfig cfg;
};

struct stlt_result {
  stlt::RunOutcome out;
};

extern "C" {

const char* stlt_version(void) { return stlt::kVersion; }

const char* stlt_last_error(void) { return g_error.c_str(); }

stlt_config* stlt_config_new(void) {
  try {
    return new stlt_config;
  } catch (...) {
    return nullptr;
  }
}

void stlt_config_free(stlt_config* cfg) { delete cfg; }

stlt_status stlt_config_set(stlt_config* cfg, const char* key,
                            const char* value) {
  if (!cfg || !key || !value) {
    set_error("null argument");
    return STLT_INVALID_ARG;
  }
  return guarded([&] {
    stlt::set_config_value(cfg->cfg, key, value);
    return STLT_OK;
  });
}

stlt_status stlt_config_load_json(stlt_config* cfg, const char* path) {
  if (!cfg || !path) {
    set_error("null argument");
    return STLT_INVALID_ARG;
  }
  return guarded([&] {
    stlt::apply_json_config(cfg->cfg, path);
    return STLT_OK;
  });
}

stlt_status stlt_complete(const stlt_config* cfg, stlt_result** out) {
  if (!cfg || !out) {
    set_error("null argument");
    return STLT_INVALID_ARG;
  }
  *out = nullptr;
  return guarded([&] {
    auto res = std::make_unique<stlt_result>();
    res->out = stlt::run_completion(cfg->cfg);
    const bool failed =
        res->out.result.status == stlt::OuterStatus::line_search_failed;
    *out = res.release();
    if (failed) {
      set_error("line search failed before reaching the tolerance");
      return STLT_NO_CONVERGENCE;
    }
    return STLT_OK;
  });
}

void stlt_result_free(stlt_result* res) { delete res; }

int64_t stlt_result_history_len(const stlt_result* res) {
  return res ? static_cast<int64_t>(res->out.result.history.size()) : 0;
}

stlt_status stlt_result_history_row(const stlt_result* res, int64_t i,
                                    stlt_iter_row* row) {
  if (!res || !row || i < 0 ||
      i >= static_cast<int64_t>(res->out.result.history.size())) {
    set_error("bad history row request");
    return STLT_INVALID_ARG;
  }
  const auto& r = res->out.result.history[static_cast<std::size_t>(i)];
  row->iter = r.iter;
  row->g_value = r.g_value;
  row->grad_norm = r.grad_norm;
  row->duality_gap = r.duality_gap;
  row->rel_gap = r.rel_gap;
  row->inner_iters = r.inner_iters;
  row->wall_ms = r.wall_ms;
  return STLT_OK;
}

const char* stlt_result_status(const stlt_result* res) {
  return res ? stlt::to_string(res->out.result.status) : "";
}

const char* stlt_result_solver(const stlt_result* res) {
  if (!res) return "";
  return res->out.result.solver_used == stlt::OuterKind::rtr ? "rtr" : "rcg";
}

double stlt_result_lambda(const stlt_result* res) {
  return res ? res->out.lambda_total : 0.0;
}

int64_t stlt_result_order(const stlt_result* res) {
  return res ? static_cast<int64_t>(res->out.recovered.dims.size()) : 0;
}

int64_t stlt_result_dim(const stlt_result* res, int64_t k) {
  if (!res || k < 0 ||
      k >= static_cast<int64_t>(res->out.recovered.dims.size()))
    return 0;
  return res->out.recovered.dims[static_cast<std::size_t>(k)];
}

int64_t stlt_result_size(const stlt_result* res) {
  return res ? static_cast<int64_t>(res->out.recovered.values.size()) : 0;
}

const double* stlt_result_values(const stlt_result* res) {
  return res ? res->out.recovered.values.data() : nullptr;
}

stlt_status stlt_synth(const stlt_config* cfg) {
  if (!cfg) {
    set_error("null argument");
    return STLT_INVALID_ARG;
  }
  return guarded([&] {
    if (cfg->cfg.out.empty())
      throw std::invalid_argument("synth requires an output directory");
    stlt::run_synth(cfg->cfg);
    return STLT_OK;
  });
}

stlt_status stlt_check_derivs(const stlt_config* cfg,
                              stlt_deriv_report* report) {
  if (!cfg || !report) {
    set_error("null argument");
    return STLT_INVALID_ARG;
  }
  return guarded([&] {
    const stlt::DerivReport rep = stlt::check_derivatives(cfg->cfg);
    report->max_grad_rel = rep.max_grad_rel;
    report->max_hess_rel = rep.max_hess_rel;
    report->grad_ok = rep.grad_ok ? 1 : 0;
    report->hess_ok = rep.hess_ok ? 1 : 0;
    if (!rep.grad_ok || !rep.hess_ok) {
      set_error("derivative check exceeded its threshold");
      return STLT_NO_CONVERGENCE;
    }
    return STLT_OK;
  });
}

stlt_status stlt_eval(const stlt_config* cfg, stlt_eval_report* report) {
  if (!cfg || !report) {
    set_error("null argument");
    return STLT_INVALID_ARG;
  }
  return guarded([&] {
    const stlt::EvalReport rep = stlt::run_eval(cfg->cfg);
    report->rmse_train = rep.rmse_train;
    report->rmse_test = rep.rmse_test;
    report->min_entry = rep.min_entry;
    report->n_train = rep.n_train;
    report->n_test = rep.n_test;
    return STLT_OK;
  });
}

}  // extern "C"
