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

#include "rmfc/params.hpp"
#include "rmfc/riccati.hpp"

namespace rmfc {

// (dV/dm, dV/dv) of the quadratic value function.
struct ValueGradient {
  double q_m = 0.0;
  double q_v = 0.0;
};

struct ControlPair {
  double u = 0.0;
  double pi = 0.0;
  bool u_saturated = false;
  bool pi_saturated = false;
};

struct DistortionPair {
  double theta = 0.0;
  double xi = 0.0;
};

[[nodiscard]] double value(const RiccatiCoeffs& a, double m, double v);

[[nodiscard]] ValueGradient gradient(const RiccatiCoeffs& a, double m, double v);

// Unprojected first-order conditions of the control minimization.
[[nodiscard]] double unconstrained_rate(const ValueGradient& grad, double v, const ModelParams& params);
[[nodiscard]] double unconstrained_monitoring(const ValueGradient& grad, const ModelParams& params);

// Projected feedback. A value exactly on a bound is not flagged as saturated.
[[nodiscard]] ControlPair feedback(const ValueGradient& grad, double v, const ModelParams& params);

// Maximizers of the KL-penalized adversary: theta = 2 lambda_m q_m, xi = 2 lambda_v q_v.
[[nodiscard]] DistortionPair worst_case(const ValueGradient& grad, const ModelParams& params);

}  // namespace rmfc
