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

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rmfc {

// Parameter vector of the robust mean-field control model. Field names are
// the canonical configuration keys.
struct ModelParams {
  // liquidity dynamics
  double beta = 0.25;     // mean reversion
  double eta = 0.8;       // policy-rate pass-through
  double chi = 0.5;       // monitoring effectiveness
  double sigma_L = 0.4;   // idiosyncratic volatility
  double sigma_c = 0.3;   // common volatility
  // running and terminal cost
  double w1 = 0.1;
  double w2_bar = 0.5;
  double kappa = 0.05;
  double R_u = 0.5;
  double R = 0.25;
  double G_m = 0.5;
  double G_v = 0.5;
  // adversary
  double lambda_m = 0.02;
  double lambda_v = 0.02;
  // admissible controls
  double u_min = -1.0;
  double u_max = 1.0;
  double pi_max = 10.0;
  // time grid and initial moments
  double T = 10.0;
  double dt = 0.001;
  double m0 = 0.5;
  double v0 = 1.0;

  // Effective variance forcing sigma_L^2 + sigma_c^2.
  [[nodiscard]] double sigma_sq() const { return sigma_L * sigma_L + sigma_c * sigma_c; }

  // Number of forward Euler steps, round(T / dt).
  [[nodiscard]] std::size_t n_steps() const;

  bool operator==(const ModelParams&) const = default;
};

// Baseline calibration used throughout the experiments.
[[nodiscard]] inline ModelParams baseline_params() { return ModelParams{}; }

struct Violation {
  std::string field;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  [[nodiscard]] bool ok() const { return violations.empty(); }
  [[nodiscard]] std::string to_string() const;
};

[[nodiscard]] ValidationReport validate(const ModelParams& params);

struct StabilityReport {
  double margin_m = 0.0;       // eta^2/R_u - 4 lambda_m
  double margin_v = 0.0;       // chi^2/R - 4 lambda_v
  double lambda_m_star = 0.0;  // eta^2/(4 R_u)
  double lambda_v_star = 0.0;  // chi^2/(4 R)
  double sigma_sq = 0.0;
  bool stable = false;
};

[[nodiscard]] StabilityReport stability_report(const ModelParams& params);

// Name-based access, used by configuration overrides and parameter sweeps.
inline constexpr std::array<std::string_view, 21> kParamNames = {
    "beta", "eta",      "chi",      "sigma_L", "sigma_c", "w1",    "w2_bar",
    "kappa", "R_u",     "R",        "G_m",     "G_v",     "lambda_m", "lambda_v",
    "u_min", "u_max",   "pi_max",   "T",       "dt",      "m0",    "v0"};

[[nodiscard]] bool is_param_name(std::string_view name);
[[nodiscard]] double get_param(const ModelParams& params, std::string_view name);
// Throws std::invalid_argument for unknown names.
void set_param(ModelParams& params, std::string_view name, double value);
[[nodiscard]] ModelParams with_param(ModelParams params, std::string_view name, double value);

}  // namespace rmfc
