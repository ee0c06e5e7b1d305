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

#include "rmfc/forward.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

#include "rmfc/policy.hpp"

namespace rmfc {

namespace {

Trajectory make_grid(const ModelParams& p) {
  const std::size_t n = p.n_steps();
  if (n == 0) throw std::invalid_argument("forward grid has no steps");
  const double h = p.T / static_cast<double>(n);
  Trajectory traj;
  traj.times.resize(n + 1);
  for (std::size_t k = 0; k <= n; ++k) traj.times[k] = k == n ? p.T : static_cast<double>(k) * h;
  for (auto* path : {&traj.m, &traj.v, &traj.u, &traj.pi, &traj.theta, &traj.xi}) path->assign(n + 1, 0.0);
  traj.u_saturated.assign(n + 1, 0);
  traj.pi_saturated.assign(n + 1, 0);
  traj.m[0] = p.m0;
  traj.v[0] = p.v0;
  return traj;
}

// One Euler step from node k using the inputs stored at node k.
void advance(Trajectory& traj, std::size_t k, double h, const ModelParams& p) {
  traj.m[k + 1] = traj.m[k] + (p.eta * traj.u[k] + traj.theta[k]) * h;
  const double drift = -2.0 * p.beta * traj.v[k] + p.sigma_sq() + traj.xi[k] - p.chi * traj.pi[k];
  traj.v[k + 1] = std::max(0.0, traj.v[k] + drift * h);
}

}  // namespace

Trajectory simulate(const ModelParams& params, const RiccatiSolution& sol) {
  if (!sol.bounded()) throw std::invalid_argument("simulate: Riccati solution blew up");
  Trajectory traj = make_grid(params);
  const std::size_t n = traj.size() - 1;
  const double h = params.T / static_cast<double>(n);

  for (std::size_t k = 0; k <= n; ++k) {
    const RiccatiCoeffs a = coeffs_at(sol, traj.times[k]);
    const ValueGradient grad = gradient(a, traj.m[k], traj.v[k]);
    const DistortionPair d = worst_case(grad, params);
    const ControlPair c = feedback(grad, traj.v[k], params);
    traj.theta[k] = d.theta;
    traj.xi[k] = d.xi;
    traj.u[k] = c.u;
    traj.pi[k] = c.pi;
    traj.u_saturated[k] = c.u_saturated;
    traj.pi_saturated[k] = c.pi_saturated;
    if (k < n) advance(traj, k, h, params);
  }
  compute_metrics(traj, params);
  return traj;
}

Trajectory simulate_open_loop(const ModelParams& params, std::span<const double> u_path,
                              std::span<const double> pi_path, std::span<const double> theta_path,
                              std::span<const double> xi_path) {
  Trajectory traj = make_grid(params);
  const std::size_t n = traj.size() - 1;
  for (auto path : {u_path, pi_path, theta_path, xi_path}) {
    if (path.size() != n + 1) throw std::invalid_argument("simulate_open_loop: input path length must be n_steps + 1");
  }
  const double h = params.T / static_cast<double>(n);
  for (std::size_t k = 0; k <= n; ++k) {
    if (u_path[k] < params.u_min || u_path[k] > params.u_max) {
      throw std::invalid_argument("simulate_open_loop: u outside [u_min, u_max]");
    }
    if (pi_path[k] < 0.0 || pi_path[k] > params.pi_max) {
      throw std::invalid_argument("simulate_open_loop: pi outside [0, pi_max]");
    }
    traj.u[k] = u_path[k];
    traj.pi[k] = pi_path[k];
    traj.theta[k] = theta_path[k];
    traj.xi[k] = xi_path[k];
    if (k < n) advance(traj, k, h, params);
  }
  compute_metrics(traj, params);
  return traj;
}

std::pair<double, double> cost(const Trajectory& traj, const ModelParams& p) {
  const std::size_t n = traj.size() - 1;
  const double h = (traj.times[n] - traj.times[0]) / static_cast<double>(n);
  double running = 0.0;
  double penalty = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double m = traj.m[k], v = traj.v[k], u = traj.u[k], pi = traj.pi[k];
    running += (p.w1 * m * m + (p.w2_bar + p.kappa * u) * v + p.R * pi * pi + p.R_u * u * u) * h;
    if (p.lambda_m > 0.0) penalty += traj.theta[k] * traj.theta[k] / (4.0 * p.lambda_m) * h;
    if (p.lambda_v > 0.0) penalty += traj.xi[k] * traj.xi[k] / (4.0 * p.lambda_v) * h;
  }
  const double terminal = p.G_m * traj.m[n] * traj.m[n] + p.G_v * traj.v[n];
  const double J = running + terminal;
  return {J, J - penalty};
}

void compute_metrics(Trajectory& traj, const ModelParams& params) {
  Metrics& out = traj.metrics;
  const std::size_t n = traj.size() - 1;
  std::tie(out.J, out.J_pen) = cost(traj, params);
  out.m_T = traj.m[n];
  out.v_T = traj.v[n];
  double u_sum = 0.0, pi_sum = 0.0;
  std::size_t u_sat = 0, pi_sat = 0;
  for (std::size_t k = 0; k < n; ++k) {
    u_sum += traj.u[k];
    pi_sum += traj.pi[k];
    u_sat += traj.u_saturated[k] ? 1 : 0;
    pi_sat += traj.pi_saturated[k] ? 1 : 0;
  }
  out.u_bar = u_sum / static_cast<double>(n);
  out.pi_bar = pi_sum / static_cast<double>(n);
  out.S_u = static_cast<double>(u_sat) / static_cast<double>(n);
  out.S_pi = static_cast<double>(pi_sat) / static_cast<double>(n);
  out.theta_peak = 0.0;
  out.xi_peak = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    out.theta_peak = std::max(out.theta_peak, std::abs(traj.theta[k]));
    out.xi_peak = std::max(out.xi_peak, std::abs(traj.xi[k]));
  }
}

Trajectory run_closed_loop(const ModelParams& params) {
  const RiccatiSolution sol = solve_backward(params);
  if (!sol.bounded()) throw std::invalid_argument("run_closed_loop: Riccati solution blew up");
  return simulate(params, sol);
}

}  // namespace rmfc
