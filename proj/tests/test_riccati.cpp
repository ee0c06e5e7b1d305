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

#include <cmath>
#include <stdexcept>

#include "rmfc/riccati.hpp"

using namespace rmfc;

namespace {

// Classical RK4 on the scalar a11 equation in time-to-go, sampled every
// `stride` steps. Independent of the library solver.
std::vector<double> scalar_reference(const ModelParams& p, double h, std::size_t steps, std::size_t stride) {
  const double C = 4.0 * p.lambda_m - p.eta * p.eta / p.R_u;
  auto f = [&](double y) { return p.w1 + C * y * y; };
  std::vector<double> out{p.G_m};
  double y = p.G_m;
  for (std::size_t i = 1; i <= steps; ++i) {
    const double k1 = f(y), k2 = f(y + 0.5 * h * k1), k3 = f(y + 0.5 * h * k2), k4 = f(y + h * k3);
    y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    if (i % stride == 0) out.push_back(y);
  }
  return out;
}

// Backward distance at which the scalar equation exceeds `limit`, by RK4 with
// step h.
double scalar_escape_distance(const ModelParams& p, double h, double limit) {
  const double C = 4.0 * p.lambda_m - p.eta * p.eta / p.R_u;
  auto f = [&](double y) { return p.w1 + C * y * y; };
  double y = p.G_m, s = 0.0;
  while (y < limit) {
    const double k1 = f(y), k2 = f(y + 0.5 * h * k1), k3 = f(y + 0.5 * h * k2), k4 = f(y + h * k3);
    y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    s += h;
  }
  return s;
}

}  // namespace

TEST_CASE("right-hand side at the terminal coefficients") {
  const ModelParams p = baseline_params();
  const RiccatiCoeffs a = terminal_coeffs(p);
  const RiccatiCoeffs d = riccati_rhs(a, p);
  CHECK(d.a11 == doctest::Approx(-0.2).epsilon(1e-14));    // 0.1 + (0.08 - 1.28) * 0.25
  CHECK(d.a2 == doctest::Approx(0.25).epsilon(1e-14));     // 0.5 - 2 * 0.25 * 0.5
  CHECK(d.a0 == doctest::Approx(0.0675).epsilon(1e-14));   // 0.25 * 0.5 + (0.02 - 0.25) * 0.25
  CHECK(d.a1 == 0.0);
  CHECK(d.a12 == doctest::Approx(-0.04).epsilon(1e-14));   // -(0.8 * 0.05 / 0.5) * 0.5
  CHECK(d.a22 == doctest::Approx(-0.00125).epsilon(1e-14));  // -0.05^2 / 2
}

TEST_CASE("right-hand side vanishes without forcing") {
  ModelParams p = baseline_params();
  p.kappa = 0.0;
  p.w1 = 0.0;
  p.w2_bar = 0.0;
  const RiccatiCoeffs d = riccati_rhs(RiccatiCoeffs{}, p);
  CHECK(d.max_abs() == 0.0);
}

TEST_CASE("analytic Jacobian matches central differences") {
  const ModelParams p = baseline_params();
  const RiccatiCoeffs a{0.3, -0.2, 0.9, 0.4, -0.15, 0.07};
  const Matrix6 J = riccati_jacobian(a, p);
  const double h = 1e-6;
  for (int j = 0; j < 6; ++j) {
    RiccatiCoeffs::Vector e = RiccatiCoeffs::Vector::Zero();
    e(j) = h;
    const RiccatiCoeffs::Vector fd = (riccati_rhs(RiccatiCoeffs::from_vector(a.to_vector() + e), p).to_vector() -
                                      riccati_rhs(RiccatiCoeffs::from_vector(a.to_vector() - e), p).to_vector()) /
                                     (2 * h);
    for (int i = 0; i < 6; ++i) {
      CAPTURE(i);
      CAPTURE(j);
      CHECK(std::abs(J(i, j) - fd(i)) <= 1e-7);
    }
  }
}

TEST_CASE("coefficient vector round trip") {
  const RiccatiCoeffs a{1, 2, 3, 4, 5, 6};
  CHECK(RiccatiCoeffs::from_vector(a.to_vector()) == a);
  CHECK(a.max_abs() == 6.0);
  CHECK(a.all_finite());
  CHECK_FALSE(RiccatiCoeffs{0, 0, INFINITY, 0, 0, 0}.all_finite());
}

TEST_CASE("baseline solve is bounded with exact terminal data") {
  const ModelParams p = baseline_params();
  const RiccatiSolution sol = solve_backward(p);
  REQUIRE(sol.bounded());
  CHECK(sol.n_nodes == p.n_steps() + 1);
  CHECK(sol.times.size() == sol.n_nodes);
  CHECK(sol.times.front() == 0.0);
  CHECK(sol.times.back() == p.T);
  CHECK(sol.coeffs.back() == terminal_coeffs(p));
  CHECK(sol.coeffs.back().a2 == p.G_v);
  CHECK(sol.coeffs.back().a11 == p.G_m);
  for (const auto& a : sol.coeffs) {
    REQUIRE(a.all_finite());
    CHECK(a.max_abs() < 10.0);
  }
}

TEST_CASE("zero coupling keeps the cross coefficients at zero") {
  ModelParams p = baseline_params();
  p.kappa = 0.0;
  const RiccatiSolution sol = solve_backward(p);
  REQUIRE(sol.bounded());
  double worst = 0.0;
  for (const auto& a : sol.coeffs) worst = std::max({worst, std::abs(a.a12), std::abs(a.a22)});
  CHECK(worst <= 1e-10);
}

TEST_CASE("a11 matches a fine explicit integration of the scalar equation") {
  ModelParams p = baseline_params();
  p.kappa = 0.0;
  const RiccatiSolution sol = solve_backward(p);
  REQUIRE(sol.bounded());
  const std::size_t n = sol.n_nodes - 1;
  const auto ref = scalar_reference(p, p.dt / 100.0, n * 100, 100);
  REQUIRE(ref.size() == sol.n_nodes);
  double worst = 0.0;
  for (std::size_t k = 0; k <= n; ++k) worst = std::max(worst, std::abs(sol.coeffs[n - k].a11 - ref[k]));
  CHECK(worst <= 1e-6);
}

TEST_CASE("scalar comparison horizon") {
  CHECK_FALSE(scalar_comparison_horizon(baseline_params()).has_value());

  ModelParams p = with_param(baseline_params(), "lambda_m", 0.5);
  const auto h = scalar_comparison_horizon(p);
  REQUIRE(h.has_value());
  CHECK(*h == doctest::Approx(2.387).epsilon(5e-4));
  CHECK(*h == doctest::Approx(scalar_escape_distance(p, 1e-5, 1e12)).epsilon(1e-4));

  p.w1 = 0.0;
  const auto h0 = scalar_comparison_horizon(p);
  REQUIRE(h0.has_value());
  CHECK(*h0 == doctest::Approx(1.0 / (0.72 * 0.5)).epsilon(1e-12));
}

TEST_CASE("strong mean adversary blows up within the comparison horizon") {
  const ModelParams p = with_param(baseline_params(), "lambda_m", 0.5);
  const RiccatiSolution sol = solve_backward(p);
  REQUIRE_FALSE(sol.bounded());
  const double horizon = *scalar_comparison_horizon(p);
  CHECK(p.T - sol.t_star <= 2.42);
  CHECK(p.T - sol.t_star <= horizon * 1.02);
  REQUIRE_FALSE(sol.times.empty());
  for (double t : sol.times) CHECK(t >= sol.t_star - 1e-12);
  CHECK_THROWS_AS((void)coeffs_at(sol, p.T), std::invalid_argument);
}

TEST_CASE("blow-up dominance across adversary strengths") {
  for (double lm : {0.4, 0.6, 0.8, 1.2}) {
    CAPTURE(lm);
    const ModelParams p = with_param(baseline_params(), "lambda_m", lm);
    const auto h = scalar_comparison_horizon(p);
    REQUIRE(h.has_value());
    if (*h >= p.T) continue;
    const RiccatiSolution sol = solve_backward(p, 2001);
    REQUIRE_FALSE(sol.bounded());
    CHECK(p.T - sol.t_star <= *h * 1.02);
  }
}

TEST_CASE("dense access") {
  const ModelParams p = baseline_params();
  const RiccatiSolution sol = solve_backward(p, 101);
  REQUIRE(sol.bounded());
  CHECK(coeffs_at(sol, p.T) == terminal_coeffs(p));
  CHECK(coeffs_at(sol, sol.times[37]) == sol.coeffs[37]);
  const double mid = 0.5 * (sol.times[10] + sol.times[11]);
  const auto expect = 0.5 * (sol.coeffs[10].to_vector() + sol.coeffs[11].to_vector());
  CHECK((coeffs_at(sol, mid).to_vector() - expect).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK_THROWS_AS((void)coeffs_at(sol, -0.1), std::invalid_argument);
  CHECK_THROWS_AS((void)coeffs_at(sol, p.T + 0.1), std::invalid_argument);
}

TEST_CASE("grid refinement leaves shared nodes unchanged") {
  const ModelParams p = baseline_params();
  const RiccatiSolution coarse = solve_backward(p, 10001);
  const RiccatiSolution fine = solve_backward(p, 20001);
  REQUIRE(coarse.bounded());
  REQUIRE(fine.bounded());
  double worst = 0.0;
  for (std::size_t k = 0; k < coarse.n_nodes; ++k) {
    worst = std::max(worst, (coarse.coeffs[k].to_vector() - fine.coeffs[2 * k].to_vector()).cwiseAbs().maxCoeff());
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("solver input checks") {
  CHECK_THROWS_AS((void)solve_backward(baseline_params(), 1), std::invalid_argument);
}
