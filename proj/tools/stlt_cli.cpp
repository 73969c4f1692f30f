#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "stlt/stlt.h"

namespace {

const char* kUsage =
    "usage: stlt <command> [flags]\n"
    "\n"
    "commands:\n"
    "  complete      solve a completion problem from an observed .tns file\n"
    "  synth         generate a synthetic instance under --out\n"
    "  check-derivs  finite-difference check of the dual derivatives\n"
    "  eval          recovery metrics of a recovered .tns vs ground truth\n"
    "\n"
    "flags (each takes a value; --config files apply first, flags override):\n"
    "  --input FILE --truth FILE --omega FILE --out DIR --config FILE.json\n"
    "  --constraint none|nonneg|hankel --tau T1,..,TK --rank R1,..,RK\n"
    "  --dims N1,..,NK --fraction F --lambda L --cost-C C --solver rcg|rtr\n"
    "  --cg-tol X --cg-iters N --nnls-tol X --inner-rounds N --eps X\n"
    "  --max-iters N --seed S --time-iters\n";

int fail(stlt_status status) {
  std::fprintf(stderr, "error: %s\n", stlt_last_error());
  return static_cast<int>(status);
}

std::string key_of(const std::string& flag) {
  std::string key = flag.substr(2);
  for (auto& c : key)
    if (c == '-') c = '_';
  return key;
}

int run_complete(stlt_config* cfg, const std::string& out_dir) {
  stlt_result* res = nullptr;
  const stlt_status status = stlt_complete(cfg, &res);
  if (!res) return fail(status);

  const int64_t rows = stlt_result_history_len(res);
  stlt_iter_row last = {};
  stlt_result_history_row(res, rows - 1, &last);
  std::printf("status %s after %lld iterations (solver %s, lambda %.17g)\n",
              stlt_result_status(res), static_cast<long long>(last.iter),
              stlt_result_solver(res), stlt_result_lambda(res));
  std::printf("g %.17g grad_norm %.17g duality_gap %.17g rel_gap %.17g\n",
              last.g_value, last.grad_norm, last.duality_gap, last.rel_gap);
  if (!out_dir.empty()) std::printf("artifacts in %s\n", out_dir.c_str());
  if (status == STLT_NO_CONVERGENCE)
    std::fprintf(stderr, "error: %s\n", stlt_last_error());
  stlt_result_free(res);
  return static_cast<int>(status);
}

int run_synth(stlt_config* cfg, const std::string& out_dir) {
  const stlt_status status = stlt_synth(cfg);
  if (status != STLT_OK) return fail(status);
  if (out_dir.empty())
    std::printf("wrote observed.tns, truth.tns and manifest.json\n");
  else
    std::printf("wrote observed.tns, truth.tns and manifest.json in %s\n",
                out_dir.c_str());
  return 0;
}

int run_check_derivs(stlt_config* cfg) {
  stlt_deriv_report rep = {};
  const stlt_status status = stlt_check_derivs(cfg, &rep);
  if (status != STLT_OK && status != STLT_NO_CONVERGENCE) return fail(status);
  std::printf("max gradient rel err %.3e (%s at 1e-4)\n", rep.max_grad_rel,
              rep.grad_ok ? "pass" : "FAIL");
  std::printf("max hessian rel err %.3e (%s at 1e-3)\n", rep.max_hess_rel,
              rep.hess_ok ? "pass" : "FAIL");
  return static_cast<int>(status);
}

int run_eval(stlt_config* cfg) {
  stlt_eval_report rep = {};
  const stlt_status status = stlt_eval(cfg, &rep);
  if (status != STLT_OK) return fail(status);
  std::printf("rmse_train %.17g\n", rep.rmse_train);
  std::printf("rmse_test %.17g\n", rep.rmse_test);
  std::printf("min_entry %.17g\n", rep.min_entry);
  std::printf("n_train %lld\n", static_cast<long long>(rep.n_train));
  std::printf("n_test %lld\n", static_cast<long long>(rep.n_test));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fputs(kUsage, stderr);
    return 1;
  }
  const std::string command = argv[1];
  if (command == "--help" || command == "-h" || command == "help") {
    std::fputs(kUsage, stdout);
    return 0;
  }
  if (command != "complete" && command != "synth" &&
      command != "check-derivs" && command != "eval") {
    std::fprintf(stderr, "error: unknown command `%s`\n\n%s", command.c_str(),
                 kUsage);
    return 1;
  }

  std::vector<std::string> configs;
  std::vector<std::pair<std::string, std::string>> settings;
  for (int i = 2; i < argc; ++i) {
    const std::string flag = argv[i];
    if (flag.rfind("--", 0) != 0) {
      std::fprintf(stderr, "error: expected a flag, got `%s`\n", flag.c_str());
      return 1;
    }
    if (flag == "--time-iters") {
      settings.emplace_back("time_iters", "true");
      continue;
    }
    if (i + 1 >= argc) {
      std::fprintf(stderr, "error: flag %s needs a value\n", flag.c_str());
      return 1;
    }
    const std::string value = argv[++i];
    if (flag == "--config")
      configs.push_back(value);
    else
      settings.emplace_back(key_of(flag), value);
  }

  stlt_config* cfg = stlt_config_new();
  if (!cfg) {
    std::fprintf(stderr, "error: out of memory\n");
    return 3;
  }
  std::string out_dir;
  int rc = 0;
  for (const auto& path : configs) {
    const stlt_status status = stlt_config_load_json(cfg, path.c_str());
    if (status != STLT_OK) {
      rc = fail(status);
      break;
    }
  }
  if (rc == 0) {
    for (const auto& [key, value] : settings) {
      const stlt_status status =
          stlt_config_set(cfg, key.c_str(), value.c_str());
      if (status != STLT_OK) {
        rc = fail(status);
        break;
      }
      if (key == "out") out_dir = value;
    }
  }
  if (rc == 0) {
    if (command == "complete")
      rc = run_complete(cfg, out_dir);
    else if (command == "synth")
      rc = run_synth(cfg, out_dir);
    else if (command == "check-derivs")
      rc = run_check_derivs(cfg);
    else
      rc = run_eval(cfg);
  }
  stlt_config_free(cfg);
  return rc;
}
