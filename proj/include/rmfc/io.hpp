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

// CSV and JSON serialization. Numbers are written with 17 significant digits
// so that files round-trip exactly and identical runs give identical bytes.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "rmfc/experiments.hpp"
#include "rmfc/forward.hpp"
#include "rmfc/params.hpp"
#include "rmfc/particle.hpp"
#include "rmfc/riccati.hpp"
#include "rmfc/sensitivity.hpp"

namespace rmfc {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kBreakdownSentinel = "breakdown";

[[nodiscard]] std::string format_number(double x);

[[nodiscard]] nlohmann::json params_to_json(const ModelParams& params);

// Overlays the keys of a flat JSON object on `base`. Throws
// std::invalid_argument for unknown keys or non-numeric values.
[[nodiscard]] ModelParams params_from_json(const nlohmann::json& j, const ModelParams& base = baseline_params());

[[nodiscard]] ModelParams load_params(const std::filesystem::path& path);

[[nodiscard]] nlohmann::json metrics_to_json(const Metrics& metrics);

void write_riccati_csv(std::ostream& os, const RiccatiSolution& sol);
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

// Long format, one row per cell: axis values, metrics, S_total, breakdown
// flag and mask reason. Masked metrics carry the breakdown sentinel.
void write_sweep_csv(std::ostream& os, const SweepResult& sweep);
void write_asymmetric_csv(std::ostream& os, const std::vector<AsymmetricCase>& cases);

void write_poc_csv(std::ostream& os, const PocResult& poc);
[[nodiscard]] nlohmann::json poc_summary_json(const PocResult& poc);

void write_gradcheck_csv(std::ostream& os, const std::vector<GradCheckRow>& rows);
void write_lipschitz_csv(std::ostream& os, const std::string& direction, const LipschitzResult& result);
void write_loss_bound_csv(std::ostream& os, const RobustnessLossResult& result);

[[nodiscard]] nlohmann::json sweep_provenance(const SweepResult& sweep);

// Writes `contents` to `path` through a callback, throwing std::runtime_error
// when the file cannot be opened or written.
template <class Fn>
void write_file(const std::filesystem::path& path, Fn&& fn);

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace rmfc

#include <fstream>
#include <stdexcept>

template <class Fn>
void rmfc::write_file(const std::filesystem::path& path, Fn&& fn) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  fn(os);
  os.flush();
  if (!os) throw std::runtime_error("failed writing '" + path.string() + "'");
}
