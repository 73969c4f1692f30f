#include "stlt/run.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "stlt/dual.hpp"
#include "stlt/io.hpp"
#include "stlt/manifold.hpp"
#include "stlt/rng.hpp"
#include "stlt/version.hpp"

namespace stlt {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const char* kind_name(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::none: return "none";
    case ConstraintKind::nonneg: return "nonneg";
    case ConstraintKind::hankel: return "hankel";
  }
  return "none";
}

OuterKind solver_from(const std::string& name) {
  if (name == "rcg") return OuterKind::rcg;
  if (name == "rtr") return OuterKind::rtr;
  throw std::invalid_argument("unknown solver `" + name + "`");
}

const char* solver_name(OuterKind kind) {
  return kind == OuterKind::rtr ? "rtr" : "rcg";
}

std::string eigen_version() {
  return std::to_string(EIGEN_WORLD_VERSION) + "." +
         std::to_string(EIGEN_MAJOR_VERSION) + "." +
         std::to_string(EIGEN_MINOR_VERSION);
}

json versions_json() {
  return json{{"stlt", kVersion}, {"eigen", eigen_version()}};
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

json solver_config_json(const RunConfig& cfg, double lambda_total,
                        OuterKind solver_used) {
  return json{{"input", cfg.input},
              {"out", cfg.out},
              {"constraint", kind_name(cfg.kind)},
              {"tau", cfg.tau},
              {"rank", cfg.ranks},
              {"lambda", lambda_total},
              {"cost_C", cfg.cost},
              {"solver", solver_name(solver_used)},
              {"cg_tol", cfg.cg_tol},
              {"cg_iters", cfg.cg_iters},
              {"nnls_tol", cfg.nnls_tol},
              {"inner_rounds", cfg.inner_rounds},
              {"eps", cfg.eps},
              {"max_iters", cfg.max_iters},
              {"seed", cfg.seed},
              {"time_iters", cfg.time_iters}};
}

void write_completion_artifacts(const RunConfig& cfg, const RunOutcome& out) {
  const fs::path dir(cfg.out);
  fs::create_directories(dir / "plots");
  write_history_csv((dir / "history.csv").string(), out.result.history);
  write_tns((dir / "W_hat.tns").string(), out.recovered);

  std::vector<double> xs, grad, gap;
  for (const auto& r : out.result.history) {
    xs.push_back(static_cast<double>(r.iter));
    grad.push_back(r.grad_norm);
    gap.push_back(r.rel_gap);
  }
  write_svg_log_plot((dir / "plots" / "grad_norm.svg").string(),
                     "Gradient norm vs iteration", "grad_norm", xs, grad);
  write_svg_log_plot((dir / "plots" / "rel_gap.svg").string(),
                     "Relative duality gap vs iteration", "rel_gap", xs, gap);

  json m = solver_config_json(cfg, out.lambda_total, out.result.solver_used);
  m["command"] = "complete";
  m["lambda_mode"] = out.lambdas;
  m["data"] = json{{"dims", out.recovered.dims},
                   {"nnz", static_cast<Index>(out.result.inner.z.size())}};
  const auto& last = out.result.history.back();
  m["run"] = json{{"status", to_string(out.result.status)},
                  {"solver_used", solver_name(out.result.solver_used)},
                  {"iterations", last.iter},
                  {"g_value", last.g_value},
                  {"grad_norm", last.grad_norm},
                  {"duality_gap", last.duality_gap},
                  {"rel_gap", last.rel_gap},
                  {"gap_confident", out.result.final_gap.confident}};
  m["versions"] = versions_json();
  write_json(dir / "manifest.json", m);
}

ConstraintKind kind_from(const std::string& name) {
  if (name == "none") return ConstraintKind::none;
  if (name == "nonneg") return ConstraintKind::nonneg;
  if (name == "hankel") return ConstraintKind::hankel;
  throw std::invalid_argument("unknown constraint `" + name + "`");
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad value for " + key + ": `" + value + "`");
  }
  if (used != value.size())
    throw std::invalid_argument("bad value for " + key + ": `" + value + "`");
  return v;
}

Index parse_index(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(value, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad value for " + key + ": `" + value + "`");
  }
  if (used != value.size())
    throw std::invalid_argument("bad value for " + key + ": `" + value + "`");
  return static_cast<Index>(v);
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(value, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad value for " + key + ": `" + value + "`");
  }
  if (used != value.size())
    throw std::invalid_argument("bad value for " + key + ": `" + value + "`");
  return v;
}

std::vector<Index> parse_index_list(const std::string& key,
                                    const std::string& value) {
  std::vector<Index> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    const std::size_t comma = value.find(',', start);
    const std::string item = value.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    out.push_back(parse_index(key, item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::invalid_argument("bad value for " + key + ": `" + value + "`");
}

}  // namespace

void set_config_value(RunConfig& cfg, const std::string& key,
                      const std::string& value) {
  if (key == "input") cfg.input = value;
  else if (key == "truth") cfg.truth = value;
  else if (key == "omega") cfg.omega = value;
  else if (key == "out") cfg.out = value;
  else if (key == "constraint") cfg.kind = kind_from(value);
  else if (key == "tau") cfg.tau = parse_index_list(key, value);
  else if (key == "rank") cfg.ranks = parse_index_list(key, value);
  else if (key == "lambda") cfg.lambda = parse_double(key, value);
  else if (key == "cost_C") cfg.cost = parse_double(key, value);
  else if (key == "dims") cfg.dims = parse_index_list(key, value);
  else if (key == "fraction") cfg.fraction = parse_double(key, value);
  else if (key == "solver") cfg.solver = solver_name(solver_from(value));
  else if (key == "cg_tol") cfg.cg_tol = parse_double(key, value);
  else if (key == "cg_iters") cfg.cg_iters = parse_index(key, value);
  else if (key == "nnls_tol") cfg.nnls_tol = parse_double(key, value);
  else if (key == "inner_rounds") cfg.inner_rounds = parse_index(key, value);
  else if (key == "eps") cfg.eps = parse_double(key, value);
  else if (key == "max_iters") cfg.max_iters = parse_index(key, value);
  else if (key == "seed") cfg.seed = parse_u64(key, value);
  else if (key == "time_iters") cfg.time_iters = parse_bool(key, value);
  else throw std::invalid_argument("unknown config key `" + key + "`");
}

void apply_json_config(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  json j;
  try {
    in >> j;
    if (!j.is_object())
      throw std::invalid_argument(path + ": config must be a JSON object");
    if (j.contains("input")) cfg.input = j["input"].get<std::string>();
    if (j.contains("truth")) cfg.truth = j["truth"].get<std::string>();
    if (j.contains("omega")) cfg.omega = j["omega"].get<std::string>();
    if (j.contains("out")) cfg.out = j["out"].get<std::string>();
    if (j.contains("constraint"))
      cfg.kind = kind_from(j["constraint"].get<std::string>());
    if (j.contains("tau")) cfg.tau = j["tau"].get<std::vector<Index>>();
    if (j.contains("rank")) cfg.ranks = j["rank"].get<std::vector<Index>>();
    if (j.contains("lambda")) cfg.lambda = j["lambda"].get<double>();
    if (j.contains("cost_C")) cfg.cost = j["cost_C"].get<double>();
    if (j.contains("dims")) cfg.dims = j["dims"].get<std::vector<Index>>();
    if (j.contains("fraction")) cfg.fraction = j["fraction"].get<double>();
    if (j.contains("solver"))
      cfg.solver = solver_name(solver_from(j["solver"].get<std::string>()));
    if (j.contains("cg_tol")) cfg.cg_tol = j["cg_tol"].get<double>();
    if (j.contains("cg_iters")) cfg.cg_iters = j["cg_iters"].get<Index>();
    if (j.contains("nnls_tol")) cfg.nnls_tol = j["nnls_tol"].get<double>();
    if (j.contains("inner_rounds"))
      cfg.inner_rounds = j["inner_rounds"].get<Index>();
    if (j.contains("eps")) cfg.eps = j["eps"].get<double>();
    if (j.contains("max_iters")) cfg.max_iters = j["max_iters"].get<Index>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("time_iters"))
      cfg.time_iters = j["time_iters"].get<bool>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

PreparedRun prepare_run(SparseTensor y, const RunConfig& cfg) {
  PreparedRun out;
  out.spec.y = std::move(y);
  out.spec.ranks = cfg.ranks;
  out.spec.cost = cfg.cost;
  out.spec.constraint.kind = cfg.kind;
  out.spec.constraint.tau = cfg.tau;

  const Index k = out.spec.y.order();
  double total = cfg.lambda;
  if (total < 0.0) {
    const double ynorm = norm(out.spec.y);
    if (!(ynorm > 0.0))
      throw std::invalid_argument(
          "default lambda needs nonzero data; pass lambda explicitly");
    total = static_cast<double>(k) / ynorm;
  }
  out.lambda_total = total;
  out.spec.lambdas.assign(static_cast<std::size_t>(k),
                          total / static_cast<double>(k));

  SolverParams& p = out.params;
  p.cg_tol = cfg.cg_tol;
  p.cg_max_iter = cfg.cg_iters;
  p.nnls_tol = cfg.nnls_tol;
  p.alternation_max_rounds = cfg.inner_rounds;
  p.eps = cfg.eps;
  p.max_iters = cfg.max_iters;
  p.seed = cfg.seed;
  p.time_iters = cfg.time_iters;
  if (!cfg.solver.empty()) {
    p.solver = solver_from(cfg.solver);
    p.solver_explicit = true;
  }
  out.spec.validate();
  p.validate();
  return out;
}

RunOutcome run_completion(const RunConfig& cfg) {
  if (cfg.input.empty())
    throw std::invalid_argument("complete requires an input .tns path");
  PreparedRun prep = prepare_run(read_tns(cfg.input), cfg);
  const ProblemCache cache(prep.spec);

  RunOutcome out;
  out.result = outer_solve(cache, prep.params);
  out.recovered = recover_primal(cache, out.result.u, out.result.inner);
  out.lambda_total = prep.lambda_total;
  out.lambdas = prep.spec.lambdas;
  if (!cfg.out.empty()) write_completion_artifacts(cfg, out);
  return out;
}

SynthResult run_synth(const RunConfig& cfg) {
  if (cfg.dims.empty())
    throw std::invalid_argument("synth requires target dims");
  SynthResult s =
      generate_synthetic(cfg.kind, cfg.dims, cfg.ranks, cfg.fraction, cfg.seed);
  if (!cfg.out.empty()) {
    const fs::path dir(cfg.out);
    fs::create_directories(dir);
    write_tns((dir / "observed.tns").string(), s.observed);
    write_tns((dir / "truth.tns").string(), s.truth);
    json m{{"command", "synth"},
           {"dims", cfg.dims},
           {"rank", cfg.ranks},
           {"constraint", kind_name(cfg.kind)},
           {"fraction", cfg.fraction},
           {"seed", cfg.seed},
           {"out", cfg.out},
           {"data", json{{"nnz", s.observed.nnz()}}},
           {"versions", versions_json()}};
    write_json(dir / "manifest.json", m);
  }
  return s;
}

DerivReport check_derivatives(const RunConfig& cfg) {
  if (cfg.input.empty())
    throw std::invalid_argument("check-derivs requires an input .tns path");
  PreparedRun prep = prepare_run(read_tns(cfg.input), cfg);

  SolverParams p = prep.params;
  p.cg_tol = std::min(p.cg_tol, 1e-12);
  p.cg_max_iter = std::max<Index>(p.cg_max_iter, 4000);
  p.nnls_tol = std::min(p.nnls_tol, 1e-11);
  p.nnls_max_iter = std::max<Index>(p.nnls_max_iter, 20000);
  p.alternation_tol = std::min(p.alternation_tol, 1e-11);
  p.alternation_max_rounds = std::max<Index>(p.alternation_max_rounds, 300);

  const ProblemCache cache(prep.spec);
  const MatList u = random_point(prep.spec, cfg.seed + 1);
  const InnerSolution sol = solve_inner(cache, u, p);
  const MatList egrad = euclidean_grad(cache, u, sol);

  DerivReport rep;
  Rng rng(cfg.seed + 2);
  const double t = 1e-5;
  for (int trial = 0; trial < 6; ++trial) {
    MatList v = zeros_like(u);
    for (auto& m : v)
      for (Index j = 0; j < m.cols(); ++j)
        for (Index i = 0; i < m.rows(); ++i) m(i, j) = rng.normal();
    const double vnorm = norm(v);
    for (auto& m : v) m /= vnorm;

    MatList up = u, um = u;
    axpy(t, v, up);
    axpy(-t, v, um);
    const InnerSolution solp = solve_inner(cache, up, p);
    const InnerSolution solm = solve_inner(cache, um, p);

    const double fd =
        (eval_g(cache, up, solp) - eval_g(cache, um, solm)) / (2.0 * t);
    const double an = dot(egrad, v);
    rep.max_grad_rel =
        std::max(rep.max_grad_rel, std::abs(fd - an) / (1.0 + std::abs(an)));

    const DirectionalSolution dsol = solve_directional(cache, u, v, sol, p);
    const MatList hv = euclidean_hess_vec(cache, u, v, sol, dsol);
    MatList fdh = euclidean_grad(cache, up, solp);
    axpy(-1.0, euclidean_grad(cache, um, solm), fdh);
    for (auto& m : fdh) m /= 2.0 * t;
    axpy(-1.0, hv, fdh);
    rep.max_hess_rel =
        std::max(rep.max_hess_rel, norm(fdh) / (1.0 + norm(hv)));
  }
  rep.grad_ok = rep.max_grad_rel <= 1e-4;
  rep.hess_ok = rep.max_hess_rel <= 1e-3;
  return rep;
}

EvalReport eval_recovery(const DenseTensor& w, const DenseTensor& truth,
                         const SparseTensor& omega) {
  w.validate();
  truth.validate();
  omega.validate();
  if (w.dims != truth.dims || w.dims != omega.dims)
    throw std::invalid_argument("eval tensors must share dims");

  const auto strides = layout_strides(w.dims);
  std::vector<char> train(w.values.size(), 0);
  for (Index e = 0; e < omega.nnz(); ++e) {
    const auto c = omega.coord(e);
    Index flat = 0;
    for (std::size_t k = 0; k < strides.size(); ++k) flat += c[k] * strides[k];
    train[static_cast<std::size_t>(flat)] = 1;
  }

  EvalReport rep;
  rep.min_entry = w.values.empty() ? 0.0 : w.values[0];
  double se_train = 0.0, se_test = 0.0;
  for (std::size_t i = 0; i < w.values.size(); ++i) {
    rep.min_entry = std::min(rep.min_entry, w.values[i]);
    const double d = w.values[i] - truth.values[i];
    if (train[i]) {
      se_train += d * d;
      ++rep.n_train;
    } else {
      se_test += d * d;
      ++rep.n_test;
    }
  }
  rep.rmse_train =
      rep.n_train ? std::sqrt(se_train / static_cast<double>(rep.n_train)) : 0.0;
  rep.rmse_test =
      rep.n_test ? std::sqrt(se_test / static_cast<double>(rep.n_test)) : 0.0;
  return rep;
}

EvalReport run_eval(const RunConfig& cfg) {
  if (cfg.input.empty() || cfg.truth.empty() || cfg.omega.empty())
    throw std::invalid_argument(
        "eval requires input, truth and omega .tns paths");
  const DenseTensor w = embed(read_tns(cfg.input));
  const DenseTensor truth = embed(read_tns(cfg.truth));
  const SparseTensor omega = read_tns(cfg.omega);
  return eval_recovery(w, truth, omega);
}

}  // namespace stlt
