// Copyright 2026 The rmfc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rmfc/cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <ostream>
#include <stdexcept>

#include "CLI11.hpp"
#include "rmfc/experiments.hpp"
#include "rmfc/forward.hpp"
#include "rmfc/io.hpp"
#include "rmfc/parallel.hpp"
#include "rmfc/particle.hpp"
#include "rmfc/sensitivity.hpp"

namespace rmfc {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

// Raised for bad user input discovered after parsing; maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::string config;
  std::vector<std::string> sets;
  std::vector<std::string> grids;
  std::string out = ".";
  std::uint64_t seed = 1;
  std::size_t workers = default_workers();
};

struct Context {
  std::string command;
  ModelParams params;
  std::map<std::string, std::vector<double>> grids;
  CommonOptions opts;
  fs::path out_dir;
  std::chrono::steady_clock::time_point start;
  std::ostream& out;

  [[nodiscard]] std::vector<double> grid(const std::string& name, std::vector<double> fallback) const {
    const auto it = grids.find(name);
    return it == grids.end() ? std::move(fallback) : it->second;
  }

  [[nodiscard]] json provenance(json extra = json::object()) const {
    json j;
    j["command"] = command;
    j["version"] = kVersion;
    j["params"] = params_to_json(params);
    j["seed"] = opts.seed;
    j["workers"] = opts.workers;
    j["wall_time_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (auto& [k, v] : extra.items()) j[k] = v;
    return j;
  }

  template <class Fn>
  void write_csv(const std::string& stem, Fn&& fn, json extra = json::object()) const {
    const fs::path csv = out_dir / (stem + ".csv");
    write_file(csv, std::forward<Fn>(fn));
    write_json_file(out_dir / (stem + ".meta.json"), provenance(std::move(extra)));
    out << "wrote " << csv.string() << '\n';
  }

  void write_json(const std::string& stem, json body) const {
    body["provenance"] = provenance();
    const fs::path path = out_dir / (stem + ".json");
    write_json_file(path, body);
    out << "wrote " << path.string() << '\n';
  }
};

double parse_double(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(text, &used);
  } catch (const std::exception&) {
    throw UsageError("cannot parse " + what + " '" + text + "' as a number");
  }
  if (used != text.size() || !std::isfinite(x)) throw UsageError("cannot parse " + what + " '" + text + "' as a number");
  return x;
}

std::pair<std::string, std::string> split_assignment(const std::string& text, const std::string& flag) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError(flag + " expects name=value, got '" + text + "'");
  return {text.substr(0, eq), text.substr(eq + 1)};
}

std::map<std::string, std::vector<double>> parse_grids(const std::vector<std::string>& specs) {
  std::map<std::string, std::vector<double>> grids;
  for (const auto& spec : specs) {
    const auto [name, range] = split_assignment(spec, "--grid");
    const auto c1 = range.find(':');
    const auto c2 = c1 == std::string::npos ? std::string::npos : range.find(':', c1 + 1);
    if (c2 == std::string::npos) throw UsageError("--grid expects name=start:stop:count, got '" + spec + "'");
    const double start = parse_double(range.substr(0, c1), "grid start");
    const double stop = parse_double(range.substr(c1 + 1, c2 - c1 - 1), "grid stop");
    const double count = parse_double(range.substr(c2 + 1), "grid count");
    if (count < 1 || count != std::floor(count)) throw UsageError("grid count must be a positive integer");
    if (count > 1 && !(stop > start)) throw UsageError("grid '" + name + "' must be increasing");
    grids[name] = linspace(start, stop, static_cast<std::size_t>(count));
  }
  return grids;
}

ModelParams resolve_params(const CommonOptions& opts) {
  ModelParams p = baseline_params();
  if (!opts.config.empty()) {
    try {
      p = load_params(opts.config);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  for (const auto& s : opts.sets) {
    const auto [name, value] = split_assignment(s, "--set");
    if (!is_param_name(name)) throw UsageError("unknown parameter '" + name + "' in --set");
    set_param(p, name, parse_double(value, "value of " + name));
  }
  return p;
}

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "flat JSON parameter file; missing keys use the baseline");
  cmd->add_option("--set", o.sets, "override one parameter, name=value (repeatable)");
  cmd->add_option("--grid", o.grids, "sweep grid, name=start:stop:count (repeatable)");
  cmd->add_option("--out", o.out, "output directory")->capture_default_str();
  cmd->add_option("--seed", o.seed, "random seed")->capture_default_str();
  cmd->add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
}

void cmd_simulate(const Context& ctx) {
  const RiccatiSolution sol = solve_backward(ctx.params);
  ctx.write_csv("riccati", [&](std::ostream& os) { write_riccati_csv(os, sol); });
  if (!sol.bounded()) {
    ctx.write_json("metrics", {{"status", "blowup"}, {"t_star", sol.t_star}});
    return;
  }
  const Trajectory traj = simulate(ctx.params, sol);
  ctx.write_csv("trajectory", [&](std::ostream& os) { write_trajectory_csv(os, traj); });
  json body = metrics_to_json(traj.metrics);
  body["status"] = "bounded";
  ctx.write_json("metrics", body);
}

void emit_sweep(const Context& ctx, const std::string& stem, const SweepResult& sweep) {
  ctx.write_csv(stem, [&](std::ostream& os) { write_sweep_csv(os, sweep); }, sweep_provenance(sweep));
}

void cmd_sweep_adversary(const Context& ctx) {
  emit_sweep(ctx, "adversary_sweep",
             adversary_sweep(ctx.params, ctx.grid("lambda", linspace(0.0, 0.2, 25)), ctx.opts.workers));
}

void cmd_asymmetric(const Context& ctx) {
  const auto cases = asymmetric_cases(ctx.params, ctx.opts.workers);
  ctx.write_csv("asymmetric", [&](std::ostream& os) { write_asymmetric_csv(os, cases); });
}

void cmd_tradeoff(const Context& ctx, double fixed) {
  const auto lm = ctx.grid("lambda_m", linspace(0.005, 0.2, 40));
  const auto lv = ctx.grid("lambda_v", linspace(0.005, 0.2, 40));
  emit_sweep(ctx, "tradeoff", tradeoff_grid(ctx.params, lm, lv, ctx.opts.workers));
  const TradeoffSections sections = tradeoff_cross_sections(ctx.params, lm, lv, fixed, ctx.opts.workers);
  emit_sweep(ctx, "tradeoff_lambda_m", sections.along_lambda_m);
  emit_sweep(ctx, "tradeoff_lambda_v", sections.along_lambda_v);
}

void cmd_sensitivity(const Context& ctx, std::vector<std::string> names) {
  if (names.empty()) names.assign(kSensitivityParams.begin(), kSensitivityParams.end());
  for (const auto& name : names) {
    if (std::find(kSensitivityParams.begin(), kSensitivityParams.end(), name) == kSensitivityParams.end()) {
      throw UsageError("--param must be one of eta, chi, beta, kappa, R_u, R");
    }
    const auto grid = ctx.grid(name, default_sensitivity_grid(ctx.params, name));
    emit_sweep(ctx, "sensitivity_" + name, parameter_sensitivity(ctx.params, name, grid, ctx.opts.workers));
  }
}

void cmd_loss_map(const Context& ctx) {
  const auto chi = ctx.grid("chi", default_loss_map_chi_grid());
  const auto beta = ctx.grid("beta", default_loss_map_beta_grid());
  emit_sweep(ctx, "loss_map", loss_map(ctx.params, chi, beta, ctx.opts.workers));
}

void cmd_particles(const Context& ctx, std::size_t N) {
  const Trajectory det = run_closed_loop(ctx.params);
  const ParticleEnsemble ens = simulate_nbank(ctx.params, N, ctx.opts.seed, det.u, det.theta, true);
  const CoupledLimit& lim = *ens.coupled_limit;
  ctx.write_csv(
      "particles",
      [&](std::ostream& os) {
        os << "t,m_emp,v_emp,common_noise,m_cond,v_cond,max_gap,m_closed_loop,v_closed_loop\n";
        for (std::size_t k = 0; k < ens.times.size(); ++k) {
          os << format_number(ens.times[k]) << ',' << format_number(ens.m_emp[k]) << ','
             << format_number(ens.v_emp[k]) << ',' << format_number(ens.common_noise[k]) << ','
             << format_number(lim.m_cond[k]) << ',' << format_number(lim.v_cond[k]) << ','
             << format_number(lim.max_gap[k]) << ',' << format_number(det.m[k]) << ',' << format_number(det.v[k])
             << '\n';
        }
      },
      {{"N", N}});
}

void cmd_poc(const Context& ctx, std::vector<std::size_t> N_list, std::size_t reps) {
  if (N_list.empty()) N_list = {64, 256, 1024, 4096};
  const PocResult poc = poc_experiment(ctx.params, N_list, reps, ctx.opts.seed, ctx.opts.workers);
  ctx.write_csv("poc", [&](std::ostream& os) { write_poc_csv(os, poc); }, {{"replications", reps}});
  ctx.write_json("poc_summary", poc_summary_json(poc));
}

void cmd_gradcheck(const Context& ctx, const std::string& direction, std::vector<double> deltas) {
  const auto rows = gradient_check(ctx.params, 1e-5, 1e-4, ctx.opts.workers);
  ctx.write_csv("gradcheck", [&](std::ostream& os) { write_gradcheck_csv(os, rows); });
  if (deltas.empty()) deltas = {0.0, 1e-3, 1e-2, 1e-1};
  SensitivityDirection dir;
  try {
    dir = SensitivityDirection::unit(direction);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto lip = lipschitz_check(ctx.params, dir, deltas);
  ctx.write_csv(
      "lipschitz", [&](std::ostream& os) { write_lipschitz_csv(os, direction, lip); },
      {{"sample_m", lip.sample_m}, {"sample_v", lip.sample_v}, {"sample_t", lip.sample_t}});
  std::size_t failed = 0;
  for (const auto& r : rows) failed += r.passed ? 0 : 1;
  ctx.out << failed << " of " << rows.size() << " directions failed the finite-difference check\n";
}

void cmd_loss_bound(const Context& ctx, std::vector<std::string> directions, std::vector<double> eps) {
  if (directions.empty()) directions = {"beta", "eta"};
  if (eps.empty()) eps = {0.02, 0.04, 0.08, 0.16};
  json summary = json::object();
  for (const auto& d : directions) {
    if (d != "beta" && d != "eta") throw UsageError("--direction must be beta or eta");
    const auto res = robustness_loss_experiment(ctx.params, d, eps);
    ctx.write_csv("loss_bound_" + d, [&](std::ostream& os) { write_loss_bound_csv(os, res); });
    summary[d] = {{"slope", res.fit.slope},
                  {"ci95_half_width", res.fit.ci_half_width},
                  {"fitted_points", res.fitted_points}};
  }
  summary["adversary_protocol"] = "distortions from the optimal feedback of the true model";
  ctx.write_json("loss_bound_summary", summary);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust mean-field liquidity control: solver and experiment harness", "rmfc"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  CommonOptions opts;
  double fixed = 0.02;
  std::vector<std::string> sens_params;
  std::size_t n_banks = 1024;
  std::vector<std::size_t> n_list;
  std::size_t reps = 8;
  std::string grad_direction = "eta";
  std::vector<double> deltas;
  std::vector<std::string> loss_dirs;
  std::vector<double> eps;

  std::function<void(const Context&)> action;
  auto sub = [&](const std::string& name, const std::string& help, std::function<void(const Context&)> fn) {
    CLI::App* cmd = app.add_subcommand(name, help);
    add_common(cmd, opts);
    cmd->callback([&action, fn] { action = fn; });
    return cmd;
  };

  sub("simulate", "backward Riccati solve and closed-loop forward simulation", cmd_simulate);
  sub("sweep-adversary", "symmetric adversary sweep, lambda_m = lambda_v", cmd_sweep_adversary);
  sub("asymmetric", "four asymmetric adversary cases", cmd_asymmetric);
  sub("tradeoff", "(lambda_m, lambda_v) grid and cross-sections", [&](const Context& c) { cmd_tradeoff(c, fixed); })
      ->add_option("--fixed", fixed, "lambda held fixed in the cross-sections")
      ->capture_default_str();
  sub("sensitivity", "one-parameter sweeps with saturation", [&](const Context& c) { cmd_sensitivity(c, sens_params); })
      ->add_option("--param", sens_params, "parameter to sweep (repeatable; default all)");
  sub("loss-map", "(chi, beta) loss-of-control map", cmd_loss_map);
  sub("particles", "N-bank simulation with coupled mean-field copies",
      [&](const Context& c) { cmd_particles(c, n_banks); })
      ->add_option("--N", n_banks, "number of banks")
      ->check(CLI::Range(std::size_t{2}, std::size_t{1} << 24))
      ->capture_default_str();
  CLI::App* poc = sub("poc", "propagation-of-chaos convergence experiment",
                      [&](const Context& c) { cmd_poc(c, n_list, reps); });
  poc->add_option("--N", n_list, "bank counts (default 64 256 1024 4096)");
  poc->add_option("--replications", reps, "replications per N")->check(CLI::PositiveNumber)->capture_default_str();
  CLI::App* grad = sub("gradcheck", "sensitivity ODE against finite differences, Lipschitz ratios",
                       [&](const Context& c) { cmd_gradcheck(c, grad_direction, deltas); });
  grad->add_option("--direction", grad_direction, "direction for the Lipschitz check")->capture_default_str();
  grad->add_option("--deltas", deltas, "perturbation sizes for the Lipschitz check");
  CLI::App* loss = sub("loss-bound", "robustness loss under model mismatch",
                       [&](const Context& c) { cmd_loss_bound(c, loss_dirs, eps); });
  loss->add_option("--direction", loss_dirs, "beta and/or eta (default both)");
  loss->add_option("--eps", eps, "mismatch sizes");

  std::vector<const char*> argv{"rmfc"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const ModelParams params = resolve_params(opts);
    const ValidationReport report = validate(params);
    if (!report.ok()) {
      err << "invalid configuration:\n" << report.to_string();
      return kExitUsage;
    }
    Context ctx{command, params, parse_grids(opts.grids), opts, fs::path(opts.out),
                std::chrono::steady_clock::now(), out};
    std::error_code ec;
    fs::create_directories(ctx.out_dir, ec);
    if (ec || !fs::is_directory(ctx.out_dir)) {
      throw UsageError("output directory '" + opts.out + "' is not writable");
    }
    action(ctx);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitFault;
  }
  return kExitOk;
}

}  // namespace rmfc
