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

#include "rmfc/policy.hpp"

#include <algorithm>

namespace rmfc {

double value(const RiccatiCoeffs& a, double m, double v) {
  return a.a0 + a.a1 * m + a.a2 * v + a.a11 * m * m + a.a12 * m * v + a.a22 * v * v;
}

ValueGradient gradient(const RiccatiCoeffs& a, double m, double v) {
  return {a.a1 + 2.0 * a.a11 * m + a.a12 * v, a.a2 + a.a12 * m + 2.0 * a.a22 * v};
}

double unconstrained_rate(const ValueGradient& grad, double v, const ModelParams& p) {
  return -(p.eta * grad.q_m + p.kappa * v) / (2.0 * p.R_u);
}

double unconstrained_monitoring(const ValueGradient& grad, const ModelParams& p) {
  return p.chi * grad.q_v / (2.0 * p.R);
}

ControlPair feedback(const ValueGradient& grad, double v, const ModelParams& p) {
  const double u_fb = unconstrained_rate(grad, v, p);
  const double pi_fb = unconstrained_monitoring(grad, p);
  ControlPair c;
  c.u = std::clamp(u_fb, p.u_min, p.u_max);
  c.pi = std::clamp(pi_fb, 0.0, p.pi_max);
  c.u_saturated = u_fb < p.u_min || u_fb > p.u_max;
  c.pi_saturated = pi_fb < 0.0 || pi_fb > p.pi_max;
  return c;
}

DistortionPair worst_case(const ValueGradient& grad, const ModelParams& p) {
  return {2.0 * p.lambda_m * grad.q_m, 2.0 * p.lambda_v * grad.q_v};
}

}  // namespace rmfc
