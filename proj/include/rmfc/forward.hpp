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

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "rmfc/params.hpp"
#include "rmfc/riccati.hpp"

namespace rmfc {

struct Metrics {
  double J = 0.0;      // unpenalized objective
  double J_pen = 0.0;  // J minus the adversary's KL penalty
  double v_T = 0.0;
  double m_T = 0.0;
  double u_bar = 0.0;
  double pi_bar = 0.0;
  double theta_peak = 0.0;
  double xi_peak = 0.0;
  double S_u = 0.0;
  double S_pi = 0.0;

  bool operator==(const Metrics&) const = default;
};

// Closed-loop (or open-loop) moment paths on the uniform forward grid.
// All arrays have n_steps + 1 entries. Inputs at node n act over
// [t_n, t_{n+1}); the entries at the final node are reported but not applied.
struct Trajectory {
  std::vector<double> times;
  std::vector<double> m;
  std::vector<double> v;
  std::vector<double> u;
  std::vector<double> pi;
  std::vector<double> theta;
  std::vector<double> xi;
  std::vector<char> u_saturated;
  std::vector<char> pi_saturated;
  Metrics metrics;

  [[nodiscard]] std::size_t size() const { return times.size(); }
};

// Explicit Euler propagation of the closed loop with projected feedback,
// worst-case distortions and the variance floored at zero.
[[nodiscard]] Trajectory simulate(const ModelParams& params, const RiccatiSolution& sol);

// Same updates with prescribed inputs, each of length n_steps + 1.
// Throws std::invalid_argument for controls outside the admissible sets.
[[nodiscard]] Trajectory simulate_open_loop(const ModelParams& params, std::span<const double> u_path,
                                            std::span<const double> pi_path,
                                            std::span<const double> theta_path,
                                            std::span<const double> xi_path);

// Left-endpoint rectangle quadrature of the running cost plus terminal cost.
// Returns (J, J_pen).
[[nodiscard]] std::pair<double, double> cost(const Trajectory& traj, const ModelParams& params);

// Fills traj.metrics from the realized paths.
void compute_metrics(Trajectory& traj, const ModelParams& params);

// Riccati solve on the aligned grid followed by simulate().
// Throws std::invalid_argument if the solve blows up.
[[nodiscard]] Trajectory run_closed_loop(const ModelParams& params);

}  // namespace rmfc
