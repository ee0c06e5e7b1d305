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

#include "rmfc/experiments.hpp"

#include <algorithm>
#include <stdexcept>

#include "rmfc/parallel.hpp"
#include "rmfc/riccati.hpp"

namespace rmfc {

namespace {

void require_increasing(const std::vector<double>& grid, std::string_view what) {
  if (grid.empty()) throw std::invalid_argument(std::string(what) + " grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw std::invalid_argument(std::string(what) + " grid must be strictly increasing");
  }
}

SweepResult sweep_1d(std::string name, const ModelParams& base, std::string_view field,
                     const std::vector<double>& grid, std::size_t workers) {
  require_increasing(grid, field);
  SweepResult out;
  out.name = std::move(name);
  out.base = base;
  out.axes = {{std::string(field), grid}};
  out.cells = parallel_map(grid.size(), workers,
                           [&](std::size_t i) { return evaluate_cell(with_param(base, field, grid[i])); });
  return out;
}

SweepResult sweep_2d(std::string name, const ModelParams& base, std::string_view outer,
                     const std::vector<double>& outer_grid, std::string_view inner,
                     const std::vector<double>& inner_grid, std::size_t workers) {
  require_increasing(outer_grid, outer);
  require_increasing(inner_grid, inner);
  SweepResult out;
  out.name = std::move(name);
  out.base = base;
  out.axes = {{std::string(outer), outer_grid}, {std::string(inner), inner_grid}};
  const std::size_t n_inner = inner_grid.size();
  out.cells = parallel_map(outer_grid.size() * n_inner, workers, [&](std::size_t idx) {
    ModelParams p = with_param(base, outer, outer_grid[idx / n_inner]);
    set_param(p, inner, inner_grid[idx % n_inner]);
    return evaluate_cell(p);
  });
  return out;
}

}  // namespace

std::string_view to_string(MaskReason reason) {
  switch (reason) {
    case MaskReason::kNone: return "none";
    case MaskReason::kMargin: return "margin";
    case MaskReason::kBlowUp: return "blowup";
  }
  return "none";
}

const SweepCell& SweepResult::at(std::size_t i, std::size_t j) const {
  if (axes.size() != 2) throw std::logic_error("SweepResult::at(i, j) on a one-dimensional sweep");
  return cells.at(i * axes[1].values.size() + j);
}

std::vector<bool> SweepResult::breakdown_mask() const {
  std::vector<bool> mask(cells.size());
  std::transform(cells.begin(), cells.end(), mask.begin(), [](const SweepCell& c) { return c.breakdown(); });
  return mask;
}

std::vector<double> linspace(double start, double stop, std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {start};
  std::vector<double> out(n);
  const double span = stop - start;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = start + span * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  out.back() = stop;
  return out;
}

SweepCell evaluate_cell(const ModelParams& params) {
  const ValidationReport report = validate(params);
  if (!report.ok()) throw std::invalid_argument("sweep cell has invalid parameters:\n" + report.to_string());

  SweepCell cell;
  if (!stability_report(params).stable) {
    cell.reason = MaskReason::kMargin;
    return cell;
  }
  const RiccatiSolution sol = solve_backward(params);
  if (!sol.bounded()) {
    cell.reason = MaskReason::kBlowUp;
    return cell;
  }
  cell.metrics = simulate(params, sol).metrics;
  return cell;
}

SweepResult adversary_sweep(const ModelParams& base, const std::vector<double>& lambdas, std::size_t workers) {
  require_increasing(lambdas, "lambda");
  SweepResult out;
  out.name = "adversary_sweep";
  out.base = base;
  out.axes = {{"lambda", lambdas}};
  out.cells = parallel_map(lambdas.size(), workers, [&](std::size_t i) {
    ModelParams p = base;
    p.lambda_m = lambdas[i];
    p.lambda_v = lambdas[i];
    return evaluate_cell(p);
  });
  return out;
}

std::vector<AsymmetricCase> asymmetric_cases(const ModelParams& base, std::size_t workers) {
  return parallel_map(kAsymmetricPairs.size(), workers, [&](std::size_t i) {
    const auto [lm, lv] = kAsymmetricPairs[i];
    ModelParams p = base;
    p.lambda_m = lm;
    p.lambda_v = lv;
    AsymmetricCase c;
    c.label = lm < lv ? "variance_adversary" : "mean_adversary";
    c.lambda_m = lm;
    c.lambda_v = lv;
    c.cell = evaluate_cell(p);
    return c;
  });
}

SweepResult tradeoff_grid(const ModelParams& base, const std::vector<double>& lm_grid,
                          const std::vector<double>& lv_grid, std::size_t workers) {
  return sweep_2d("tradeoff", base, "lambda_m", lm_grid, "lambda_v", lv_grid, workers);
}

TradeoffSections tradeoff_cross_sections(const ModelParams& base, const std::vector<double>& lm_grid,
                                         const std::vector<double>& lv_grid, double fixed, std::size_t workers) {
  TradeoffSections out;
  out.along_lambda_m = sweep_1d("tradeoff_lambda_m", with_param(base, "lambda_v", fixed), "lambda_m", lm_grid, workers);
  out.along_lambda_m.fixed = {{"lambda_v", fixed}};
  out.along_lambda_v = sweep_1d("tradeoff_lambda_v", with_param(base, "lambda_m", fixed), "lambda_v", lv_grid, workers);
  out.along_lambda_v.fixed = {{"lambda_m", fixed}};
  return out;
}

std::vector<double> default_sensitivity_grid(const ModelParams& base, std::string_view name, std::size_t n) {
  const double centre = get_param(base, name);
  std::vector<double> grid = linspace(0.4 * centre, 1.6 * centre, n);
  if (n % 2 == 1) grid[n / 2] = centre;
  return grid;
}

SweepResult parameter_sensitivity(const ModelParams& base, std::string_view name, const std::vector<double>& grid,
                                  std::size_t workers) {
  if (std::find(kSensitivityParams.begin(), kSensitivityParams.end(), name) == kSensitivityParams.end()) {
    throw std::invalid_argument("parameter_sensitivity: unsupported parameter '" + std::string(name) + "'");
  }
  return sweep_1d("sensitivity_" + std::string(name), base, name, grid, workers);
}

SweepResult loss_map(const ModelParams& base, const std::vector<double>& chi_grid,
                     const std::vector<double>& beta_grid, std::size_t workers) {
  for (double x : chi_grid) {
    if (!(x > 0)) throw std::invalid_argument("loss_map: chi grid must be strictly positive");
  }
  for (double x : beta_grid) {
    if (!(x > 0)) throw std::invalid_argument("loss_map: beta grid must be strictly positive");
  }
  return sweep_2d("loss_map", base, "chi", chi_grid, "beta", beta_grid, workers);
}

std::vector<double> default_loss_map_chi_grid(std::size_t n) { return linspace(0.1, 4.0, n); }

std::vector<double> default_loss_map_beta_grid(std::size_t n) { return linspace(0.0125, 0.5, n); }

}  // namespace rmfc
