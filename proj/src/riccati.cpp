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

#include "rmfc/riccati.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

namespace rmfc {

RiccatiCoeffs::Vector RiccatiCoeffs::to_vector() const {
  Vector x;
  x << a0, a1, a2, a11, a12, a22;
  return x;
}

RiccatiCoeffs RiccatiCoeffs::from_vector(const Vector& x) {
  return {x(0), x(1), x(2), x(3), x(4), x(5)};
}

double RiccatiCoeffs::max_abs() const { return to_vector().cwiseAbs().maxCoeff(); }

bool RiccatiCoeffs::all_finite() const { return to_vector().allFinite(); }

RiccatiCoeffs terminal_coeffs(const ModelParams& p) {
  RiccatiCoeffs a;
  a.a2 = p.G_v;
  a.a11 = p.G_m;
  return a;
}

RiccatiCoeffs riccati_rhs(const RiccatiCoeffs& a, const ModelParams& p) {
  const double sig2 = p.sigma_sq();
  const double mean_gain = p.eta * p.eta / p.R_u;  // eta^2 / R_u
  const double var_gain = p.chi * p.chi / p.R;     // chi^2 / R
  const double cross = p.eta * p.kappa / p.R_u;    // eta kappa / R_u

  RiccatiCoeffs d;
  d.a0 = sig2 * a.a2 + (p.lambda_m - mean_gain / 4.0) * a.a1 * a.a1 +
         (p.lambda_v - var_gain / 4.0) * a.a2 * a.a2;
  d.a1 = sig2 * a.a12 + (4.0 * p.lambda_m - mean_gain) * a.a1 * a.a11 +
         (2.0 * p.lambda_v - var_gain / 2.0) * a.a2 * a.a12;
  d.a2 = p.w2_bar - 2.0 * p.beta * a.a2 + 2.0 * sig2 * a.a22 +
         (2.0 * p.lambda_m - mean_gain / 2.0) * a.a1 * a.a12 +
         (4.0 * p.lambda_v - var_gain) * a.a2 * a.a22 - cross / 2.0 * a.a1;
  d.a11 = p.w1 + (4.0 * p.lambda_m - mean_gain) * a.a11 * a.a11 +
          (p.lambda_v - var_gain / 4.0) * a.a12 * a.a12;
  d.a12 = -2.0 * p.beta * a.a12 - cross * a.a11 + (4.0 * p.lambda_m - mean_gain) * a.a11 * a.a12 +
          (4.0 * p.lambda_v - var_gain) * a.a12 * a.a22;
  d.a22 = -4.0 * p.beta * a.a22 - p.kappa * p.kappa / (4.0 * p.R_u) - cross / 2.0 * a.a12 +
          (p.lambda_m - mean_gain / 4.0) * a.a12 * a.a12 +
          (4.0 * p.lambda_v - var_gain) * a.a22 * a.a22;
  return d;
}

Matrix6 riccati_jacobian(const RiccatiCoeffs& a, const ModelParams& p) {
  const double sig2 = p.sigma_sq();
  const double cm = p.lambda_m - p.eta * p.eta / (4.0 * p.R_u);
  const double cv = p.lambda_v - p.chi * p.chi / (4.0 * p.R);
  const double half_cross = p.eta * p.kappa / (2.0 * p.R_u);

  Matrix6 J = Matrix6::Zero();
  // a0
  J(0, 1) = 2.0 * cm * a.a1;
  J(0, 2) = sig2 + 2.0 * cv * a.a2;
  // a1
  J(1, 1) = 4.0 * cm * a.a11;
  J(1, 2) = 2.0 * cv * a.a12;
  J(1, 3) = 4.0 * cm * a.a1;
  J(1, 4) = sig2 + 2.0 * cv * a.a2;
  // a2
  J(2, 1) = 2.0 * cm * a.a12 - half_cross;
  J(2, 2) = -2.0 * p.beta + 4.0 * cv * a.a22;
  J(2, 4) = 2.0 * cm * a.a1;
  J(2, 5) = 2.0 * sig2 + 4.0 * cv * a.a2;
  // a11
  J(3, 3) = 8.0 * cm * a.a11;
  J(3, 4) = 2.0 * cv * a.a12;
  // a12
  J(4, 3) = -2.0 * half_cross + 4.0 * cm * a.a12;
  J(4, 4) = -2.0 * p.beta + 4.0 * cm * a.a11 + 4.0 * cv * a.a22;
  J(4, 5) = 4.0 * cv * a.a12;
  // a22
  J(5, 4) = -half_cross + 2.0 * cm * a.a12;
  J(5, 5) = -4.0 * p.beta + 8.0 * cv * a.a22;
  return J;
}

namespace {

using Vec6 = RiccatiCoeffs::Vector;
using Vec18 = Eigen::Matrix<double, 18, 1>;
using Mat18 = Eigen::Matrix<double, 18, 18>;

// Three-stage Radau IIA tableau.
struct RadauTableau {
  std::array<double, 3> c;
  Eigen::Matrix3d A;

  RadauTableau() {
    const double s6 = std::sqrt(6.0);
    c = {(4.0 - s6) / 10.0, (4.0 + s6) / 10.0, 1.0};
    A << (88.0 - 7.0 * s6) / 360.0, (296.0 - 169.0 * s6) / 1800.0, (-2.0 + 3.0 * s6) / 225.0,
        (296.0 + 169.0 * s6) / 1800.0, (88.0 + 7.0 * s6) / 360.0, (-2.0 - 3.0 * s6) / 225.0,
        (16.0 - s6) / 36.0, (16.0 + s6) / 36.0, 1.0 / 9.0;
  }
};

const RadauTableau& tableau() {
  static const RadauTableau t;
  return t;
}

// One collocation step: stage increments Z_i = y(s0 + c_i h) - y0.
struct StageStep {
  Vec6 y0;
  std::array<Vec6, 3> z;
  [[nodiscard]] Vec6 end() const { return y0 + z[2]; }

  // Collocation polynomial through (0, y0), (c_i, y0 + z_i).
  [[nodiscard]] Vec6 dense(double tau) const {
    const auto& c = tableau().c;
    const std::array<double, 4> nodes = {0.0, c[0], c[1], c[2]};
    Vec6 out = Vec6::Zero();
    for (int i = 1; i < 4; ++i) {
      double w = 1.0;
      for (int j = 0; j < 4; ++j) {
        if (j != i) w *= (tau - nodes[j]) / (nodes[i] - nodes[j]);
      }
      out += w * z[i - 1];
    }
    return y0 + out;
  }
};

enum class StepFailure { kNone, kNewton };

class RadauIntegrator {
 public:
  RadauIntegrator(const ModelParams& params, const RadauOptions& options)
      : params_(params), options_(options) {}

  std::optional<StageStep> step(const Vec6& y0, double h) const {
    const auto& A = tableau().A;
    Vec6 scale = (options_.atol + options_.rtol * y0.cwiseAbs().array()).matrix();

    Vec18 z = Vec18::Zero();
    Vec18 g = residual(y0, z, h);
    if (!g.allFinite()) return std::nullopt;
    for (int iter = 0; iter < options_.max_newton_iterations; ++iter) {
      Mat18 jac = Mat18::Identity();
      for (int j = 0; j < 3; ++j) {
        const Matrix6 Jj = riccati_jacobian(RiccatiCoeffs::from_vector(y0 + z.segment<6>(6 * j)), params_);
        for (int i = 0; i < 3; ++i) jac.block<6, 6>(6 * i, 6 * j) -= h * A(i, j) * Jj;
      }
      const Vec18 dz = jac.partialPivLu().solve(-g);
      if (!dz.allFinite()) return std::nullopt;

      // Damped update: backtrack while the residual grows.
      double lambda = 1.0;
      Vec18 z_try = z + dz;
      Vec18 g_try = residual(y0, z_try, h);
      for (int k = 0; k < 6 && !(g_try.allFinite() && g_try.norm() <= g.norm() * (1.0 - 1e-4 * lambda) + 1e-300); ++k) {
        if (g.norm() < 1e-14 * (1.0 + y0.norm())) break;
        lambda *= 0.5;
        z_try = z + lambda * dz;
        g_try = residual(y0, z_try, h);
      }
      if (!g_try.allFinite()) return std::nullopt;
      z = z_try;
      g = g_try;

      double dz_norm = 0.0;
      for (int i = 0; i < 18; ++i) dz_norm = std::max(dz_norm, std::abs(lambda * dz(i)) / scale(i % 6));
      if (lambda == 1.0 && dz_norm < 1e-3) {
        StageStep out;
        out.y0 = y0;
        for (int i = 0; i < 3; ++i) out.z[i] = z.segment<6>(6 * i);
        return out;
      }
    }
    return std::nullopt;
  }

 private:
  Vec18 residual(const Vec6& y0, const Vec18& z, double h) const {
    const auto& A = tableau().A;
    std::array<Vec6, 3> f;
    for (int j = 0; j < 3; ++j) {
      f[j] = riccati_rhs(RiccatiCoeffs::from_vector(y0 + z.segment<6>(6 * j)), params_).to_vector();
    }
    Vec18 g = z;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) g.segment<6>(6 * i) -= h * A(i, j) * f[j];
    }
    return g;
  }

  const ModelParams& params_;
  const RadauOptions& options_;
};

}  // namespace

RiccatiSolution solve_backward(const ModelParams& params, std::size_t n_nodes,
                               const RadauOptions& options) {
  if (n_nodes < 2) throw std::invalid_argument("solve_backward: n_nodes must be at least 2");
  if (!(params.T > 0)) throw std::invalid_argument("solve_backward: T must be positive");

  const double T = params.T;
  const double spacing = T / static_cast<double>(n_nodes - 1);
  const std::size_t last = n_nodes - 1;

  // Nodes indexed by time-to-go: node j sits at s = j * spacing, t = T - s.
  std::vector<Vec6> by_togo;
  by_togo.reserve(n_nodes);
  auto togo = [&](std::size_t j) { return j == last ? T : static_cast<double>(j) * spacing; };

  RadauIntegrator integrator(params, options);
  Vec6 y = terminal_coeffs(params).to_vector();
  by_togo.push_back(y);

  RiccatiSolution sol;
  sol.T = T;
  sol.n_nodes = n_nodes;

  double s = 0.0;
  double h = std::min(options.max_step, 0.01 * T);
  bool blew_up = false;
  StepFailure last_failure = StepFailure::kNone;

  auto emit_nodes = [&](const StageStep& st, double s_begin, double s_end, bool final_piece) {
    while (by_togo.size() < n_nodes) {
      const std::size_t j = by_togo.size();
      const double sj = togo(j);
      if (j == last && final_piece) {
        by_togo.push_back(st.end());
        continue;
      }
      if (sj > s_end) break;
      const double tau = (sj - s_begin) / (s_end - s_begin);
      by_togo.push_back(tau >= 1.0 ? st.end() : st.dense(tau));
    }
  };

  while (s < T) {
    if (h < options.min_step) {
      const double magnitude = y.cwiseAbs().maxCoeff();
      if (last_failure == StepFailure::kNewton && magnitude < std::sqrt(options.blowup_guard)) {
        std::ostringstream os;
        os << "Radau stage solver failed to converge at t = " << (T - s) << " with step " << h
           << " while max |a| = " << magnitude;
        throw RiccatiSolveError(os.str());
      }
      blew_up = true;
      break;
    }
    const bool reaches_end = s + h >= T * (1.0 - 1e-14);
    const double h_eff = reaches_end ? T - s : h;

    auto full = integrator.step(y, h_eff);
    std::optional<StageStep> first, second;
    if (full) first = integrator.step(y, h_eff / 2.0);
    if (first) second = integrator.step(first->end(), h_eff / 2.0);
    if (!full || !first || !second) {
      last_failure = StepFailure::kNewton;
      ++sol.rejected_steps;
      h = h_eff / 4.0;
      continue;
    }

    const Vec6 y_new = second->end();
    const Vec6 err = (y_new - full->end()) / 31.0;
    double err_norm = 0.0;
    for (int i = 0; i < 6; ++i) {
      const double sc = options.atol + options.rtol * std::max(std::abs(y(i)), std::abs(y_new(i)));
      err_norm += (err(i) / sc) * (err(i) / sc);
    }
    err_norm = std::sqrt(err_norm / 6.0);

    const double factor = err_norm == 0.0 ? 4.0 : std::clamp(0.9 * std::pow(err_norm, -1.0 / 6.0), 0.2, 4.0);
    if (!(err_norm <= 1.0) || !y_new.allFinite()) {
      last_failure = StepFailure::kNone;
      ++sol.rejected_steps;
      h = h_eff * (std::isfinite(factor) ? std::min(factor, 0.5) : 0.2);
      continue;
    }

    ++sol.accepted_steps;
    const double s_mid = s + h_eff / 2.0;
    const double s_new = reaches_end ? T : s + h_eff;
    emit_nodes(*first, s, s_mid, false);
    emit_nodes(*second, s_mid, s_new, reaches_end);
    s = s_new;
    y = y_new;

    if (y.cwiseAbs().maxCoeff() > options.blowup_guard) {
      blew_up = true;
      break;
    }
    h = std::min(h_eff * factor, options.max_step);
  }

  if (blew_up) {
    sol.status = RiccatiStatus::kBlowUp;
    sol.t_star = T - s;
  }

  // Reverse into increasing time.
  const std::size_t filled = by_togo.size();
  sol.times.reserve(filled);
  sol.coeffs.reserve(filled);
  for (std::size_t k = n_nodes - filled; k < n_nodes; ++k) {
    const std::size_t j = last - k;
    sol.times.push_back(k == last ? T : static_cast<double>(k) * spacing);
    sol.coeffs.push_back(RiccatiCoeffs::from_vector(by_togo[j]));
  }
  return sol;
}

RiccatiSolution solve_backward(const ModelParams& params) {
  return solve_backward(params, params.n_steps() + 1);
}

RiccatiCoeffs coeffs_at(const RiccatiSolution& sol, double t) {
  if (!sol.bounded()) throw std::invalid_argument("coeffs_at: Riccati solution blew up");
  if (!(t >= 0.0 && t <= sol.T)) throw std::invalid_argument("coeffs_at: time outside [0, T]");
  const std::size_t last = sol.n_nodes - 1;
  const double pos = t / sol.spacing();
  const double nearest = std::round(pos);
  if (std::abs(pos - nearest) < 1e-9) {
    return sol.coeffs[std::min(static_cast<std::size_t>(nearest), last)];
  }
  const std::size_t k = std::min(static_cast<std::size_t>(pos), last - 1);
  const double frac = pos - static_cast<double>(k);
  const Vec6 lo = sol.coeffs[k].to_vector();
  const Vec6 hi = sol.coeffs[k + 1].to_vector();
  return RiccatiCoeffs::from_vector(lo + frac * (hi - lo));
}

std::optional<double> scalar_comparison_horizon(const ModelParams& p) {
  const double C = 4.0 * p.lambda_m - p.eta * p.eta / p.R_u;
  if (C <= 0.0) return std::nullopt;
  if (p.w1 > 0.0) {
    return (std::numbers::pi / 2.0 - std::atan(p.G_m * std::sqrt(C / p.w1))) / std::sqrt(p.w1 * C);
  }
  if (p.G_m > 0.0) return 1.0 / (C * p.G_m);
  return std::nullopt;
}

}  // namespace rmfc
