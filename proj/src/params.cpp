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

#include "rmfc/params.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace rmfc {

namespace {

double ModelParams::*member_for(std::string_view name) {
  struct Entry {
    std::string_view name;
    double ModelParams::*member;
  };
  static constexpr Entry kTable[] = {
      {"beta", &ModelParams::beta},         {"eta", &ModelParams::eta},
      {"chi", &ModelParams::chi},           {"sigma_L", &ModelParams::sigma_L},
      {"sigma_c", &ModelParams::sigma_c},   {"w1", &ModelParams::w1},
      {"w2_bar", &ModelParams::w2_bar},     {"kappa", &ModelParams::kappa},
      {"R_u", &ModelParams::R_u},           {"R", &ModelParams::R},
      {"G_m", &ModelParams::G_m},           {"G_v", &ModelParams::G_v},
      {"lambda_m", &ModelParams::lambda_m}, {"lambda_v", &ModelParams::lambda_v},
      {"u_min", &ModelParams::u_min},       {"u_max", &ModelParams::u_max},
      {"pi_max", &ModelParams::pi_max},     {"T", &ModelParams::T},
      {"dt", &ModelParams::dt},             {"m0", &ModelParams::m0},
      {"v0", &ModelParams::v0},
  };
  for (const auto& e : kTable) {
    if (e.name == name) return e.member;
  }
  return nullptr;
}

}  // namespace

std::size_t ModelParams::n_steps() const {
  return static_cast<std::size_t>(std::llround(T / dt));
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& v : violations) os << v.field << ": " << v.message << '\n';
  return os.str();
}

ValidationReport validate(const ModelParams& p) {
  ValidationReport report;
  auto require = [&](bool cond, std::string field, std::string message) {
    if (!cond) report.violations.push_back({std::move(field), std::move(message)});
  };

  for (std::string_view name : kParamNames) {
    require(std::isfinite(get_param(p, name)), std::string(name), "must be finite");
  }
  if (!report.ok()) return report;

  require(p.beta > 0, "beta", "beta must be positive");
  require(p.eta > 0, "eta", "eta must be positive");
  require(p.chi > 0, "chi", "chi must be positive");
  require(p.sigma_L >= 0, "sigma_L", "sigma_L must be non-negative");
  require(p.sigma_c >= 0, "sigma_c", "sigma_c must be non-negative");
  require(p.w1 > 0, "w1", "w1 must be positive");
  require(p.w2_bar > 0, "w2_bar", "w2_bar must be positive");
  require(p.kappa >= 0, "kappa", "kappa must be non-negative");
  require(p.R_u > 0, "R_u", "R_u must be positive");
  require(p.R > 0, "R", "R must be positive");
  require(p.G_m >= 0, "G_m", "G_m must be non-negative");
  require(p.G_v >= 0, "G_v", "G_v must be non-negative");
  require(p.lambda_m >= 0, "lambda_m", "lambda_m must be non-negative");
  require(p.lambda_v >= 0, "lambda_v", "lambda_v must be non-negative");
  require(p.u_min < p.u_max, "u_min", "u_min must be below u_max");
  require(p.pi_max > 0, "pi_max", "pi_max must be positive");
  require(p.T > 0, "T", "T must be positive");
  require(p.dt > 0, "dt", "dt must be positive");
  require(!(p.dt > 0 && p.T > 0) || p.dt < p.T, "dt", "dt must be below T");
  require(p.v0 >= 0, "v0", "v0 must be non-negative");
  require(p.w2_bar + p.kappa * p.u_min > 0, "w2_bar",
          "variance weight not uniformly positive (w2_bar + kappa * u_min <= 0)");
  return report;
}

StabilityReport stability_report(const ModelParams& p) {
  StabilityReport r;
  const double mean_effect = p.eta * p.eta / p.R_u;
  const double var_effect = p.chi * p.chi / p.R;
  r.margin_m = mean_effect - 4.0 * p.lambda_m;
  r.margin_v = var_effect - 4.0 * p.lambda_v;
  r.lambda_m_star = mean_effect / 4.0;
  r.lambda_v_star = var_effect / 4.0;
  r.sigma_sq = p.sigma_sq();
  r.stable = r.margin_m > 0 && r.margin_v > 0;
  return r;
}

bool is_param_name(std::string_view name) { return member_for(name) != nullptr; }

double get_param(const ModelParams& params, std::string_view name) {
  auto member = member_for(name);
  if (member == nullptr) throw std::invalid_argument("unknown parameter '" + std::string(name) + "'");
  return params.*member;
}

void set_param(ModelParams& params, std::string_view name, double value) {
  auto member = member_for(name);
  if (member == nullptr) throw std::invalid_argument("unknown parameter '" + std::string(name) + "'");
  params.*member = value;
}

ModelParams with_param(ModelParams params, std::string_view name, double value) {
  set_param(params, name, value);
  return params;
}

}  // namespace rmfc
