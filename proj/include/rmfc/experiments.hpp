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

// Parameter sweeps over the closed-loop model: adversary strength, the
// (lambda_m, lambda_v) trade-off grid, single-parameter sensitivity and the
// (chi, beta) loss-of-control map. Every cell is an independent backward
// solve plus forward simulation; cells whose stability margins are not
// positive or whose Riccati solve blows up are masked as breakdown.

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rmfc/forward.hpp"
#include "rmfc/params.hpp"

namespace rmfc {

enum class MaskReason { kNone, kMargin, kBlowUp };

[[nodiscard]] std::string_view to_string(MaskReason reason);

struct SweepCell {
  std::optional<Metrics> metrics;  // empty iff breakdown
  MaskReason reason = MaskReason::kNone;

  [[nodiscard]] bool breakdown() const { return reason != MaskReason::kNone; }
};

struct SweepAxis {
  std::string name;
  std::vector<double> values;
};

struct SweepResult {
  std::string name;
  std::vector<SweepAxis> axes;    // one or two; the first axis is the outer index
  std::vector<SweepCell> cells;   // row-major over axes
  ModelParams base;
  std::vector<std::pair<std::string, double>> fixed;  // overrides applied to every cell

  [[nodiscard]] std::size_t size() const { return cells.size(); }
  [[nodiscard]] const SweepCell& at(std::size_t i) const { return cells.at(i); }
  [[nodiscard]] const SweepCell& at(std::size_t i, std::size_t j) const;
  [[nodiscard]] std::vector<bool> breakdown_mask() const;
};

// n evenly spaced values from start to stop inclusive.
[[nodiscard]] std::vector<double> linspace(double start, double stop, std::size_t n);

// Backward solve + forward simulation of one parameter set, with masking.
[[nodiscard]] SweepCell evaluate_cell(const ModelParams& params);

// lambda_m = lambda_v = lambda for each grid value.
[[nodiscard]] SweepResult adversary_sweep(const ModelParams& base, const std::vector<double>& lambdas,
                                          std::size_t workers = 1);

struct AsymmetricCase {
  std::string label;
  double lambda_m = 0.0;
  double lambda_v = 0.0;
  SweepCell cell;
};

inline constexpr std::array<std::pair<double, double>, 4> kAsymmetricPairs = {
    std::pair{0.001, 0.1}, std::pair{0.001, 0.2}, std::pair{0.1, 0.001}, std::pair{0.2, 0.001}};

[[nodiscard]] std::vector<AsymmetricCase> asymmetric_cases(const ModelParams& base, std::size_t workers = 1);

// Axes (lambda_m, lambda_v).
[[nodiscard]] SweepResult tradeoff_grid(const ModelParams& base, const std::vector<double>& lm_grid,
                                        const std::vector<double>& lv_grid, std::size_t workers = 1);

struct TradeoffSections {
  SweepResult along_lambda_m;  // lambda_v fixed
  SweepResult along_lambda_v;  // lambda_m fixed
};

[[nodiscard]] TradeoffSections tradeoff_cross_sections(const ModelParams& base, const std::vector<double>& lm_grid,
                                                       const std::vector<double>& lv_grid, double fixed = 0.02,
                                                       std::size_t workers = 1);

inline constexpr std::array<std::string_view, 6> kSensitivityParams = {"eta", "chi", "beta", "kappa", "R_u", "R"};

// 25 points spanning +-60% around the base value, with the base value itself
// at the centre.
[[nodiscard]] std::vector<double> default_sensitivity_grid(const ModelParams& base, std::string_view name,
                                                           std::size_t n = 25);

[[nodiscard]] SweepResult parameter_sensitivity(const ModelParams& base, std::string_view name,
                                                const std::vector<double>& grid, std::size_t workers = 1);

// Axes (chi, beta). Total time at bounds is S_u + S_pi of each cell.
[[nodiscard]] SweepResult loss_map(const ModelParams& base, const std::vector<double>& chi_grid,
                                   const std::vector<double>& beta_grid, std::size_t workers = 1);

[[nodiscard]] std::vector<double> default_loss_map_chi_grid(std::size_t n = 40);
[[nodiscard]] std::vector<double> default_loss_map_beta_grid(std::size_t n = 40);

}  // namespace rmfc
