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


#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rmfc/policy.hpp"
#include "rmfc/sensitivity.hpp"

using namespace rmfc;

namespace {

using Vec6 = RiccatiCoeffs::Vector;

RadauOptions tight() {
  RadauOptions o;
  o.rtol = 1e-12;
  o.atol = 1e-14;
  return o;
}

}  // namespace

TEST_CASE("parameter Jacobian matches differences of the right-hand side") {
  const ModelParams p = baseline_params();
  const RiccatiCoeffs a{0.3, -0.2, 0.9, 0.4, -0.15, 0.07};
  const ParamJacobian J = param_jacobian(a, p);
  const double h = 1e-6;
  for (std::size_t j = 0; j < kNumModelParams; ++j) {
    const std::string_view name = kModelParamNames[j];
    CAPTURE(name);
    const double x = get_param(p, name);
    const Vec6 fd = (riccati_rhs(a, with_param(p, name, x + h)).to_vector() -
                     riccati_rhs(a, with_param(p, name, x - h)).to_vector()) /
                    (2 * h);
    for (int i = 0; i < 6; ++i) CHECK(std::abs(J(i, static_cast<Eigen::Index>(j)) - fd(i)) <= 1e-7);
  }
}

TEST_CASE("terminal sensitivities") {
  const ModelParams p = baseline_params();
  const RiccatiSolution sol = solve_backward(p, 2001);
  const SensitivityPath gm = solve_sensitivity(p, sol, SensitivityDirection::unit("G_m"));
  Vec6 e11 = Vec6::Zero();
  e11(3) = 1.0;
  CHECK(gm.delta_a.back() == e11);
  CHECK(gm.at(p.T) == e11);
  for (std::string_view name : {"beta", "eta", "lambda_v", "w1"}) {
    CHECK(solve_sensitivity(p, sol, SensitivityDirection::unit(name)).delta_a.back() == Vec6::Zero());
  }
}

TEST_CASE("zero direction gives zero sensitivity") {
  const ModelParams p = baseline_params();
  const RiccatiSolution sol = solve_backward(p, 2001);
  const SensitivityPath path = solve_sensitivity(p, sol, SensitivityDirection{});
  for (const auto& d : path.delta_a) CHECK(d == Vec6::Zero());
  CHECK(value_sensitivity(path, 3.0, 1.0, 2.0) == 0.0);
}

TEST_CASE("eta direction matches central differences") {
  const ModelParams p = baseline_params();
  const std::size_t n = p.n_steps() + 1;
  const RiccatiSolution sol = solve_backward(p, n, tight());
  const SensitivityDirection dir = SensitivityDirection::unit("eta");
  const SensitivityPath path = solve_sensitivity(p, sol, dir);
  const double h = 1e-5;
  const RiccatiSolution plus = solve_backward(perturbed(p, dir, h), n, tight());
  const RiccatiSolution minus = solve_backward(perturbed(p, dir, -h), n, tight());
  double worst = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const Vec6 fd = (plus.coeffs[k].to_vector() - minus.coeffs[k].to_vector()) / (2 * h);
    for (int c = 0; c < 6; ++c) {
      worst = std::max(worst, std::abs(path.delta_a[k](c) - fd(c)) / (1.0 + std::abs(path.delta_a[k](c))));
    }
  }
  CHECK(worst <= 1e-4);

  // Value sensitivity at (t, m, v) = (0, 0.5, 1.0).
  const double dV = value_sensitivity(path, 0.0, 0.5, 1.0);
  const double fdV = (value(plus.coeffs.front(), 0.5, 1.0) - value(minus.coeffs.front(), 0.5, 1.0)) / (2 * h);
  CHECK(std::abs(dV - fdV) <= 1e-4 * std::max(1.0, std::abs(fdV)));
}

TEST_CASE("terminal variance weight direction at the horizon") {
  const ModelParams p = baseline_params();
  const RiccatiSolution sol = solve_backward(p, 1001);
  const SensitivityPath path = solve_sensitivity(p, sol, SensitivityDirection::unit("G_v"));
  for (double m : {-1.0, 0.0, 2.0}) {
    for (double v : {0.0, 0.7, 3.0}) CHECK(value_sensitivity(path, p.T, m, v) == v);
  }
}

TEST_CASE("sensitivity is linear in the direction") {
  const ModelParams p = baseline_params();
  const RiccatiSolution sol = solve_backward(p, 2001);
  SensitivityDirection dir;
  dir.delta << 0.3, -0.2, 0.5, 0.1, 0.0, 0.7, -0.4, 0.2, 0.1, -0.3, 0.6, 0.2, 0.5, -0.1;
  SensitivityDirection scaled = dir;
  scaled.delta *= -2.5;
  const SensitivityPath a = solve_sensitivity(p, sol, dir);
  const SensitivityPath b = solve_sensitivity(p, sol, scaled);
  double worst = 0.0;
  for (std::size_t k = 0; k < a.delta_a.size(); ++k) {
    worst = std::max(worst, (b.delta_a[k] + 2.5 * a.delta_a[k]).cwiseAbs().maxCoeff());
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("every parameter direction passes the finite-difference check") {
  const auto rows = gradient_check(baseline_params());
  REQUIRE(rows.size() == kNumModelParams);
  for (const auto& r : rows) {
    CAPTURE(r.param);
    CAPTURE(r.max_rel_error);
    CHECK(r.passed);
  }
}

TEST_CASE("Lipschitz ratios stay bounded as the perturbation shrinks") {
  const ModelParams p = baseline_params();
  for (std::string_view name : {"eta", "beta", "chi", "lambda_m"}) {
    CAPTURE(name);
    const LipschitzResult r = lipschitz_check(p, SensitivityDirection::unit(name), {1e-3, 1e-2, 1e-1});
    REQUIRE(r.rows.size() == 3);
    double lo = INFINITY, hi = 0.0;
    for (const auto& row : r.rows) {
      REQUIRE_FALSE(row.masked());
      lo = std::min(lo, row.ratio);
      hi = std::max(hi, row.ratio);
    }
    CHECK(lo > 0.0);
    CHECK(hi < 3.0 * lo);
  }
}

TEST_CASE("Lipschitz check masks and handles zero") {
  const ModelParams p = baseline_params();
  const LipschitzResult r = lipschitz_check(p, SensitivityDirection::unit("lambda_v"), {0.0, 0.3, -1.0});
  CHECK(r.rows[0].ratio == 0.0);
  CHECK_FALSE(r.rows[0].masked());
  CHECK(r.rows[1].masked());
  CHECK(r.rows[1].reason == MaskReason::kMargin);
  CHECK(r.rows[2].masked());
  CHECK(r.rows[2].invalid);
  CHECK(r.sample_m.size() == 5);
  CHECK(r.sample_v.size() == 5);
}

TEST_CASE("robustness loss is non-negative and quadratic") {
  const ModelParams p = baseline_params();
  for (std::string_view dir : {"beta", "eta"}) {
    CAPTURE(dir);
    const RobustnessLossResult r = robustness_loss_experiment(p, dir, {0.0, 0.02, 0.04, 0.08, 0.16});
    REQUIRE(r.rows.size() == 5);
    for (const auto& row : r.rows) {
      CHECK_FALSE(row.masked);
      CHECK(row.gap >= -1e-8);
    }
    CHECK(std::abs(r.rows[0].gap) <= 1e-9);
    CHECK(r.fitted_points == 4);
    CHECK(r.fit.slope >= 1.6);
    CHECK(r.fit.slope <= 2.4);
  }
}

TEST_CASE("robustness loss masks unstable and saturated mismatches") {
  const ModelParams p = baseline_params();
  const RobustnessLossResult r = robustness_loss_experiment(p, "eta", {-0.7, -0.79});
  // eta = 0.1: margin 0.02 - 0.08 < 0; eta = 0.01 likewise.
  for (const auto& row : r.rows) {
    CHECK(row.masked);
    CHECK(row.mask_reason == "margin");
  }
  const RobustnessLossResult big = robustness_loss_experiment(p, "beta", {-0.25});
  CHECK(big.rows[0].masked);
  CHECK_THROWS_AS((void)robustness_loss_experiment(p, "chi", {0.1}), std::invalid_argument);
}

TEST_CASE("unknown direction names are rejected") {
  CHECK_THROWS_AS((void)SensitivityDirection::unit("u_min"), std::invalid_argument);
  CHECK_THROWS_AS((void)SensitivityDirection::unit("T"), std::invalid_argument);
}
