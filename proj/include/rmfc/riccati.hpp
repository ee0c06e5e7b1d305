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

// Backward integration of the six coupled Riccati equations for the quadratic
// value function
//
//   V(t, m, v) = a0 + a1 m + a2 v + a11 m^2 + a12 m v + a22 v^2.
//
// Derivatives are taken with respect to time-to-go s = T - t, so the terminal
// value problem at t = T becomes an initial value problem at s = 0 and the
// stable regime corresponds to bounded forward integration in s.

#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmfc/params.hpp"

namespace rmfc {

struct RiccatiCoeffs {
  double a0 = 0.0;
  double a1 = 0.0;
  double a2 = 0.0;
  double a11 = 0.0;
  double a12 = 0.0;
  double a22 = 0.0;

  using Vector = Eigen::Matrix<double, 6, 1>;

  // Component order is (a0, a1, a2, a11, a12, a22) everywhere.
  [[nodiscard]] Vector to_vector() const;
  [[nodiscard]] static RiccatiCoeffs from_vector(const Vector& x);
  [[nodiscard]] double max_abs() const;
  [[nodiscard]] bool all_finite() const;

  bool operator==(const RiccatiCoeffs&) const = default;
};

// a(T): (a2, a11) = (G_v, G_m), all other coefficients zero.
[[nodiscard]] RiccatiCoeffs terminal_coeffs(const ModelParams& params);

// d a / d s of the six Riccati equations, evaluated at `a`.
[[nodiscard]] RiccatiCoeffs riccati_rhs(const RiccatiCoeffs& a, const ModelParams& params);

using Matrix6 = Eigen::Matrix<double, 6, 6>;

// Analytic Jacobian of riccati_rhs with respect to the coefficients.
[[nodiscard]] Matrix6 riccati_jacobian(const RiccatiCoeffs& a, const ModelParams& params);

struct RadauOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double max_step = 0.05;
  double min_step = 1e-12;
  double blowup_guard = 1e8;
  int max_newton_iterations = 12;
};

enum class RiccatiStatus { kBounded, kBlowUp };

class RiccatiSolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Coefficient trajectory on a uniform grid over [0, T], times increasing.
// For a blow-up, only the nodes with t >= t_star are populated.
struct RiccatiSolution {
  double T = 0.0;
  std::size_t n_nodes = 0;  // size of the full uniform grid
  std::vector<double> times;
  std::vector<RiccatiCoeffs> coeffs;
  RiccatiStatus status = RiccatiStatus::kBounded;
  double t_star = 0.0;  // meaningful for kBlowUp only
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;

  [[nodiscard]] bool bounded() const { return status == RiccatiStatus::kBounded; }
  [[nodiscard]] double spacing() const { return T / static_cast<double>(n_nodes - 1); }
};

// Integrates backward from t = T to t = 0 with the three-stage Radau IIA
// method (order 5), step-doubling error control and collocation dense output
// sampled on `n_nodes` uniform nodes. Throws RiccatiSolveError when the stage
// solver fails while the coefficients are still of moderate size.
[[nodiscard]] RiccatiSolution solve_backward(const ModelParams& params, std::size_t n_nodes,
                                             const RadauOptions& options = {});

// Grid aligned with the forward Euler grid: n_steps() + 1 nodes.
[[nodiscard]] RiccatiSolution solve_backward(const ModelParams& params);

// Linear interpolation between bracketing nodes; exact at nodes.
// Throws std::invalid_argument for a blow-up solution or t outside [0, T].
[[nodiscard]] RiccatiCoeffs coeffs_at(const RiccatiSolution& sol, double t);

// Closed-form blow-up distance (in time-to-go) of the scalar comparison
// equation y' = w1 + C y^2, y(0) = G_m, C = 4 lambda_m - eta^2 / R_u.
[[nodiscard]] std::optional<double> scalar_comparison_horizon(const ModelParams& params);

}  // namespace rmfc
