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

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "rmfc/experiments.hpp"
#include "rmfc/params.hpp"
#include "rmfc/particle.hpp"
#include "rmfc/riccati.hpp"

namespace rmfc {

inline constexpr std::size_t kNumModelParams = 14;

// Model parameters that the coefficients depend on. Bounds, grid and initial
// state fields are excluded.
inline constexpr std::array<std::string_view, kNumModelParams> kModelParamNames = {
    "beta", "eta", "chi",   "sigma_L", "sigma_c",  "w1",       "w2_bar",
    "kappa", "R_u", "R",    "lambda_m", "lambda_v", "G_m",     "G_v"};

using ParamVector = Eigen::Matrix<double, kNumModelParams, 1>;
using ParamJacobian = Eigen::Matrix<double, 6, kNumModelParams>;

struct SensitivityDirection {
  ParamVector delta = ParamVector::Zero();

  // Unit vector on one named parameter. Throws std::invalid_argument for
  // names outside kModelParamNames.
  [[nodiscard]] static SensitivityDirection unit(std::string_view name);

  [[nodiscard]] double norm() const { return delta.norm(); }
};

// params + step * dir, applied field by field.
[[nodiscard]] ModelParams perturbed(const ModelParams& params, const SensitivityDirection& dir, double step);

// d(riccati_rhs) / d(parameters), columns in kModelParamNames order.
[[nodiscard]] ParamJacobian param_jacobian(const RiccatiCoeffs& a, const ModelParams& params);

// Derivative of the terminal coefficients along dir.
[[nodiscard]] RiccatiCoeffs::Vector terminal_sensitivity(const SensitivityDirection& dir);

struct SensitivityPath {
  std::vector<double> times;                    // the Riccati grid, increasing
  std::vector<RiccatiCoeffs::Vector> delta_a;   // directional derivative per node

  [[nodiscard]] RiccatiCoeffs::Vector at(double t) const;
};

// Integrates the linear variational equation along the stored coefficients
// with classical RK4 on the solution grid. Throws std::invalid_argument for a
// blow-up solution.
[[nodiscard]] SensitivityPath solve_sensitivity(const ModelParams& params, const RiccatiSolution& sol,
                                                const SensitivityDirection& dir);

// Delta a(t) contracted with (1, m, v, m^2, m v, v^2).
[[nodiscard]] double value_sensitivity(const SensitivityPath& path, double t, double m, double v);

struct GradCheckRow {
  std::string param;
  double max_rel_error = 0.0;  // max over nodes and components
  bool passed = false;
};

// Central finite differences of solve_backward against solve_sensitivity for
// every direction in kModelParamNames.
[[nodiscard]] std::vector<GradCheckRow> gradient_check(const ModelParams& params, double h = 1e-5,
                                                       double tolerance = 1e-4, std::size_t workers = 1);

struct LipschitzRow {
  double delta = 0.0;
  double ratio = 0.0;  // max |dV| / (|dTheta| (1 + m^2 + v^2)) over the sample
  MaskReason reason = MaskReason::kNone;
  bool invalid = false;  // perturbed parameters failed validation

  [[nodiscard]] bool masked() const { return invalid || reason != MaskReason::kNone; }
};

struct LipschitzResult {
  std::vector<LipschitzRow> rows;
  std::vector<double> sample_m;
  std::vector<double> sample_v;
  std::vector<double> sample_t;
};

[[nodiscard]] LipschitzResult lipschitz_check(const ModelParams& params, const SensitivityDirection& dir,
                                              const std::vector<double>& deltas);

struct RobustnessLossRow {
  double eps = 0.0;
  double realized = 0.0;      // penalized cost under the true model
  double value_true = 0.0;    // V(0, x0) of the true model
  double gap = 0.0;
  bool masked = false;
  std::string mask_reason;    // empty when unmasked
};

struct RobustnessLossResult {
  std::string direction;
  std::vector<RobustnessLossRow> rows;
  LogLogFit fit;              // over unmasked rows with eps > 0 and gap > 0
  std::size_t fitted_points = 0;
};

// Controls from the value function of `params`, distortions and dynamics from
// params + eps * e_direction, without projection or variance floor.
// direction must be "beta" or "eta".
[[nodiscard]] RobustnessLossResult robustness_loss_experiment(const ModelParams& params,
                                                              std::string_view direction,
                                                              const std::vector<double>& eps_list);

}  // namespace rmfc
