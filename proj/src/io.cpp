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

#include "rmfc/io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

namespace rmfc {

namespace {

constexpr const char* kMetricColumns[] = {"J",      "J_pen",      "v_T",     "m_T", "u_bar",
                                          "pi_bar", "theta_peak", "xi_peak", "S_u", "S_pi"};

std::vector<double> metric_values(const Metrics& m) {
  return {m.J, m.J_pen, m.v_T, m.m_T, m.u_bar, m.pi_bar, m.theta_peak, m.xi_peak, m.S_u, m.S_pi};
}

// Comma-joined row writer.
class Row {
 public:
  explicit Row(std::ostream& os) : os_(os) {}
  ~Row() { os_ << '\n'; }

  Row& operator<<(double x) { return cell(format_number(x)); }
  Row& operator<<(const std::string& s) { return cell(s); }
  Row& operator<<(const char* s) { return cell(s); }
  Row& operator<<(std::size_t x) { return cell(std::to_string(x)); }
  Row& operator<<(bool b) { return cell(b ? "1" : "0"); }

 private:
  Row& cell(const std::string& s) {
    if (!first_) os_ << ',';
    os_ << s;
    first_ = false;
    return *this;
  }

  std::ostream& os_;
  bool first_ = true;
};

void metrics_cells(Row& row, const SweepCell& cell) {
  if (cell.metrics) {
    for (double x : metric_values(*cell.metrics)) row << x;
    row << cell.metrics->S_u + cell.metrics->S_pi;
  } else {
    for (std::size_t i = 0; i < std::size(kMetricColumns) + 1; ++i) row << kBreakdownSentinel;
  }
  row << cell.breakdown() << std::string(to_string(cell.reason));
}

void metrics_header(Row& row) {
  for (const char* c : kMetricColumns) row << c;
  row << "S_total" << "breakdown" << "mask_reason";
}

}  // namespace

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

nlohmann::json params_to_json(const ModelParams& params) {
  nlohmann::json j = nlohmann::json::object();
  for (std::string_view name : kParamNames) j[std::string(name)] = get_param(params, name);
  return j;
}

ModelParams params_from_json(const nlohmann::json& j, const ModelParams& base) {
  if (!j.is_object()) throw std::invalid_argument("configuration must be a JSON object");
  ModelParams out = base;
  for (const auto& [key, val] : j.items()) {
    if (!is_param_name(key)) throw std::invalid_argument("unknown configuration key '" + key + "'");
    if (!val.is_number()) throw std::invalid_argument("configuration key '" + key + "' must be a number");
    set_param(out, key, val.get<double>());
  }
  return out;
}

ModelParams load_params(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot read configuration '" + path.string() + "'");
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("malformed configuration '" + path.string() + "': " + e.what());
  }
  return params_from_json(j);
}

nlohmann::json metrics_to_json(const Metrics& metrics) {
  nlohmann::json j = nlohmann::json::object();
  const auto values = metric_values(metrics);
  for (std::size_t i = 0; i < values.size(); ++i) j[kMetricColumns[i]] = values[i];
  return j;
}

void write_riccati_csv(std::ostream& os, const RiccatiSolution& sol) {
  Row(os) << "t" << "a0" << "a1" << "a2" << "a11" << "a12" << "a22" << "status";
  const char* status = sol.bounded() ? "bounded" : "blowup";
  for (std::size_t k = 0; k < sol.times.size(); ++k) {
    const RiccatiCoeffs& a = sol.coeffs[k];
    Row(os) << sol.times[k] << a.a0 << a.a1 << a.a2 << a.a11 << a.a12 << a.a22 << status;
  }
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  Row(os) << "t" << "m" << "v" << "u" << "pi" << "theta" << "xi" << "u_saturated" << "pi_saturated";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    Row(os) << traj.times[k] << traj.m[k] << traj.v[k] << traj.u[k] << traj.pi[k] << traj.theta[k] << traj.xi[k]
            << static_cast<bool>(traj.u_saturated[k]) << static_cast<bool>(traj.pi_saturated[k]);
  }
}

void write_sweep_csv(std::ostream& os, const SweepResult& sweep) {
  {
    Row header(os);
    for (const auto& axis : sweep.axes) header << axis.name;
    metrics_header(header);
  }
  if (sweep.axes.size() == 1) {
    for (std::size_t i = 0; i < sweep.size(); ++i) {
      Row row(os);
      row << sweep.axes[0].values[i];
      metrics_cells(row, sweep.at(i));
    }
  } else {
    const auto& outer = sweep.axes[0].values;
    const auto& inner = sweep.axes[1].values;
    for (std::size_t i = 0; i < outer.size(); ++i) {
      for (std::size_t j = 0; j < inner.size(); ++j) {
        Row row(os);
        row << outer[i] << inner[j];
        metrics_cells(row, sweep.at(i, j));
      }
    }
  }
}

void write_asymmetric_csv(std::ostream& os, const std::vector<AsymmetricCase>& cases) {
  {
    Row header(os);
    header << "label" << "lambda_m" << "lambda_v";
    metrics_header(header);
  }
  for (const auto& c : cases) {
    Row row(os);
    row << c.label << c.lambda_m << c.lambda_v;
    metrics_cells(row, c.cell);
  }
}

void write_poc_csv(std::ostream& os, const PocResult& poc) {
  Row(os) << "N" << "replication" << "coupling_error" << "mean_error" << "var_error" << "mean_error_det"
          << "var_error_det";
  for (const auto& r : poc.rows) {
    Row(os) << r.N << r.replication << r.coupling_error << r.mean_error << r.var_error << r.mean_error_det
            << r.var_error_det;
  }
}

nlohmann::json poc_summary_json(const PocResult& poc) {
  auto fit = [](const LogLogFit& f) {
    return nlohmann::json{{"slope", f.slope}, {"intercept", f.intercept}, {"ci95_half_width", f.ci_half_width}};
  };
  nlohmann::json j;
  j["N_list"] = poc.N_list;
  j["mean_coupling_error"] = poc.mean_coupling;
  j["mean_mean_error"] = poc.mean_mean_error;
  j["mean_var_error"] = poc.mean_var_error;
  j["coupling_fit"] = fit(poc.coupling_fit);
  j["mean_fit"] = fit(poc.mean_fit);
  j["var_fit"] = fit(poc.var_fit);
  j["reference"] = "conditional moments given the common noise";
  j["deterministic_reference_note"] =
      "mean_error_det and var_error_det compare against the deterministic closed-loop moments; they include "
      "the common-noise displacement and the monitoring and distortion terms of the aggregate variance "
      "equation, and do not vanish as N grows";
  return j;
}

void write_gradcheck_csv(std::ostream& os, const std::vector<GradCheckRow>& rows) {
  Row(os) << "direction" << "max_rel_error" << "passed";
  for (const auto& r : rows) Row(os) << r.param << r.max_rel_error << r.passed;
}

void write_lipschitz_csv(std::ostream& os, const std::string& direction, const LipschitzResult& result) {
  Row(os) << "direction" << "delta" << "ratio" << "masked" << "mask_reason";
  for (const auto& r : result.rows) {
    Row row(os);
    row << direction << r.delta;
    if (r.masked()) {
      row << kBreakdownSentinel << true << (r.invalid ? std::string("invalid") : std::string(to_string(r.reason)));
    } else {
      row << r.ratio << false << "none";
    }
  }
}

void write_loss_bound_csv(std::ostream& os, const RobustnessLossResult& result) {
  Row(os) << "direction" << "eps" << "realized" << "value_true" << "gap" << "masked" << "mask_reason";
  for (const auto& r : result.rows) {
    Row(os) << result.direction << r.eps << r.realized << r.value_true << r.gap << r.masked
            << (r.masked ? r.mask_reason : std::string("none"));
  }
}

nlohmann::json sweep_provenance(const SweepResult& sweep) {
  nlohmann::json j;
  j["sweep"] = sweep.name;
  j["base_params"] = params_to_json(sweep.base);
  nlohmann::json axes = nlohmann::json::array();
  for (const auto& axis : sweep.axes) axes.push_back({{"name", axis.name}, {"values", axis.values}});
  j["axes"] = axes;
  nlohmann::json fixed = nlohmann::json::object();
  for (const auto& [name, value] : sweep.fixed) fixed[name] = value;
  j["fixed"] = fixed;
  std::size_t masked = 0;
  for (const auto& c : sweep.cells) masked += c.breakdown() ? 1 : 0;
  j["cells"] = sweep.size();
  j["masked_cells"] = masked;
  return j;
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  write_file(path, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

}  // namespace rmfc
