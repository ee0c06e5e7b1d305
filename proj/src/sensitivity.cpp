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

#include "rmfc/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rmfc/parallel.hpp"
#include "rmfc/policy.hpp"

namespace rmfc {

namespace {

using Vec6 = RiccatiCoeffs::Vector;

std::size_t param_index(std::string_view name) {
  const auto it = std::find(kModelParamNames.begin(), kModelParamNames.end(), name);
  if (it == kModelParamNames.end()) {
    throw std::invalid_argument("'" + std::string(name) + "' is not a sensitivity parameter");
  }
  return static_cast<std::size_t>(it - kModelParamNames.begin());
}

// Tolerances for the reference solves of the finite-difference oracle.
RadauOptions oracle_options() {
  RadauOptions o;
  o.rtol = 1e-12;
  o.atol = 1e-14;
  return o;
}

double monomial_contract(const Vec6& d, double m, double v) {
  return d(0) + d(1) * m + d(2) * v + d(3) * m * m + d(4) * m * v + d(5) * v * v;
}

}  // namespace

SensitivityDirection SensitivityDirection::unit(std::string_view name) {
  SensitivityDirection dir;
  dir.delta(static_cast<Eigen::Index>(param_index(name))) = 1.0;
  return dir;
}

ModelParams perturbed(const ModelParams& params, const SensitivityDirection& dir, double step) {
  ModelParams out = params;
  for (std::size_t j = 0; j < kNumModelParams; ++j) {
    const double d = dir.delta(static_cast<Eigen::Index>(j));
    if (d != 0.0) set_param(out, kModelParamNames[j], get_param(params, kModelParamNames[j]) + step * d);
  }
  return out;
}

// The right-hand side depends on the parameters through eight compounds:
//   S = sigma_L^2 + sigma_c^2, cm = lambda_m - eta^2/(4 R_u),
//   cv = lambda_v - chi^2/(4 R), k = eta kappa/(2 R_u), q = kappa^2/(4 R_u),
//   beta, w1, w2_bar.
// Partials with respect to the compounds are assembled first and then mapped
// through the chain rule.
ParamJacobian param_jacobian(const RiccatiCoeffs& a, const ModelParams& p) {
  Vec6 dS, dcm, dcv, dk, dq, dbeta, dw1, dw2;
  dS << a.a2, a.a12, 2.0 * a.a22, 0.0, 0.0, 0.0;
  dcm << a.a1 * a.a1, 4.0 * a.a1 * a.a11, 2.0 * a.a1 * a.a12, 4.0 * a.a11 * a.a11, 4.0 * a.a11 * a.a12,
      a.a12 * a.a12;
  dcv << a.a2 * a.a2, 2.0 * a.a2 * a.a12, 4.0 * a.a2 * a.a22, a.a12 * a.a12, 4.0 * a.a12 * a.a22,
      4.0 * a.a22 * a.a22;
  dk << 0.0, 0.0, -a.a1, 0.0, -2.0 * a.a11, -a.a12;
  dq << 0.0, 0.0, 0.0, 0.0, 0.0, -1.0;
  dbeta << 0.0, 0.0, -2.0 * a.a2, 0.0, -2.0 * a.a12, -4.0 * a.a22;
  dw1 << 0.0, 0.0, 0.0, 1.0, 0.0, 0.0;
  dw2 << 0.0, 0.0, 1.0, 0.0, 0.0, 0.0;

  const double Ru = p.R_u, R = p.R;
  ParamJacobian J = ParamJacobian::Zero();
  auto col = [&](std::string_view name) { return J.col(static_cast<Eigen::Index>(param_index(name))); };
  col("beta") = dbeta;
  col("eta") = dcm * (-p.eta / (2.0 * Ru)) + dk * (p.kappa / (2.0 * Ru));
  col("chi") = dcv * (-p.chi / (2.0 * R));
  col("sigma_L") = dS * (2.0 * p.sigma_L);
  col("sigma_c") = dS * (2.0 * p.sigma_c);
  col("w1") = dw1;
  col("w2_bar") = dw2;
  col("kappa") = dk * (p.eta / (2.0 * Ru)) + dq * (p.kappa / (2.0 * Ru));
  col("R_u") = dcm * (p.eta * p.eta / (4.0 * Ru * Ru)) + dk * (-p.eta * p.kappa / (2.0 * Ru * Ru)) +
               dq * (-p.kappa * p.kappa / (4.0 * Ru * Ru));
  col("R") = dcv * (p.chi * p.chi / (4.0 * R * R));
  col("lambda_m") = dcm;
  col("lambda_v") = dcv;
  return J;
}

Vec6 terminal_sensitivity(const SensitivityDirection& dir) {
  Vec6 d = Vec6::Zero();
  d(2) = dir.delta(static_cast<Eigen::Index>(param_index("G_v")));
  d(3) = dir.delta(static_cast<Eigen::Index>(param_index("G_m")));
  return d;
}

Vec6 SensitivityPath::at(double t) const {
  if (times.empty()) throw std::invalid_argument("SensitivityPath::at on an empty path");
  if (t < times.front() || t > times.back()) throw std::invalid_argument("SensitivityPath::at: t outside the grid");
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.end()) return delta_a.back();
  const std::size_t k = static_cast<std::size_t>(it - times.begin()) - 1;
  const double w = (t - times[k]) / (times[k + 1] - times[k]);
  if (w < 1e-9) return delta_a[k];
  return (1.0 - w) * delta_a[k] + w * delta_a[k + 1];
}

SensitivityPath solve_sensitivity(const ModelParams& params, const RiccatiSolution& sol,
                                  const SensitivityDirection& dir) {
  if (!sol.bounded()) throw std::invalid_argument("solve_sensitivity: Riccati solution blew up");
  const std::size_t n = sol.times.size();
  const ParamVector& dtheta = dir.delta;

  // Variational field in time-to-go s: dD/ds = J_a(a) D + J_theta(a) dtheta.
  auto field = [&](const RiccatiCoeffs& a, const Vec6& D) -> Vec6 {
    return riccati_jacobian(a, params) * D + param_jacobian(a, params) * dtheta;
  };

  SensitivityPath path;
  path.times = sol.times;
  path.delta_a.assign(n, Vec6::Zero());
  path.delta_a[n - 1] = terminal_sensitivity(dir);

  for (std::size_t k = n - 1; k > 0; --k) {
    const double h = sol.times[k] - sol.times[k - 1];
    const RiccatiCoeffs& a0 = sol.coeffs[k];
    const RiccatiCoeffs& a1 = sol.coeffs[k - 1];
    // Cubic Hermite midpoint in s, with da/ds = F(a) at both ends.
    const Vec6 y0 = a0.to_vector(), y1 = a1.to_vector();
    const Vec6 f0 = riccati_rhs(a0, params).to_vector(), f1 = riccati_rhs(a1, params).to_vector();
    const RiccatiCoeffs amid = RiccatiCoeffs::from_vector(0.5 * (y0 + y1) + h / 8.0 * (f0 - f1));

    const Vec6& D = path.delta_a[k];
    const Vec6 k1 = field(a0, D);
    const Vec6 k2 = field(amid, D + 0.5 * h * k1);
    const Vec6 k3 = field(amid, D + 0.5 * h * k2);
    const Vec6 k4 = field(a1, D + h * k3);
    path.delta_a[k - 1] = D + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return path;
}

double value_sensitivity(const SensitivityPath& path, double t, double m, double v) {
  return monomial_contract(path.at(t), m, v);
}

std::vector<GradCheckRow> gradient_check(const ModelParams& params, double h, double tolerance,
                                         std::size_t workers) {
  const std::size_t n_nodes = params.n_steps() + 1;
  const RadauOptions opts = oracle_options();
  const RiccatiSolution base = solve_backward(params, n_nodes, opts);
  if (!base.bounded()) throw std::invalid_argument("gradient_check: baseline Riccati solution blew up");

  return parallel_map(kNumModelParams, workers, [&](std::size_t j) {
    const SensitivityDirection dir = SensitivityDirection::unit(kModelParamNames[j]);
    const SensitivityPath path = solve_sensitivity(params, base, dir);
    const RiccatiSolution plus = solve_backward(perturbed(params, dir, h), n_nodes, opts);
    const RiccatiSolution minus = solve_backward(perturbed(params, dir, -h), n_nodes, opts);
    GradCheckRow row;
    row.param = std::string(kModelParamNames[j]);
    if (!plus.bounded() || !minus.bounded()) {
      row.max_rel_error = INFINITY;
      return row;
    }
    for (std::size_t k = 0; k < n_nodes; ++k) {
      const Vec6 fd = (plus.coeffs[k].to_vector() - minus.coeffs[k].to_vector()) / (2.0 * h);
      const Vec6& an = path.delta_a[k];
      for (int c = 0; c < 6; ++c) {
        row.max_rel_error = std::max(row.max_rel_error, std::abs(an(c) - fd(c)) / (1.0 + std::abs(an(c))));
      }
    }
    row.passed = row.max_rel_error <= tolerance;
    return row;
  });
}

LipschitzResult lipschitz_check(const ModelParams& params, const SensitivityDirection& dir,
                                const std::vector<double>& deltas) {
  LipschitzResult out;
  out.sample_m = linspace(-2.0, 2.0, 5);
  out.sample_v = linspace(0.0, 2.0, 5);
  out.sample_t = linspace(0.0, params.T, 11);

  const RiccatiSolution base = solve_backward(params);
  if (!base.bounded()) throw std::invalid_argument("lipschitz_check: baseline Riccati solution blew up");

  for (double delta : deltas) {
    LipschitzRow row;
    row.delta = delta;
    const double step = std::abs(delta) * dir.norm();
    if (step == 0.0) {
      out.rows.push_back(row);
      continue;
    }
    const ModelParams q = perturbed(params, dir, delta);
    if (!validate(q).ok()) {
      row.invalid = true;
      out.rows.push_back(row);
      continue;
    }
    if (!stability_report(q).stable) {
      row.reason = MaskReason::kMargin;
      out.rows.push_back(row);
      continue;
    }
    const RiccatiSolution sol = solve_backward(q, base.n_nodes);
    if (!sol.bounded()) {
      row.reason = MaskReason::kBlowUp;
      out.rows.push_back(row);
      continue;
    }
    for (double t : out.sample_t) {
      const RiccatiCoeffs a0 = coeffs_at(base, t), a1 = coeffs_at(sol, t);
      for (double m : out.sample_m) {
        for (double v : out.sample_v) {
          const double dV = value(a1, m, v) - value(a0, m, v);
          row.ratio = std::max(row.ratio, std::abs(dV) / (step * (1.0 + m * m + v * v)));
        }
      }
    }
    out.rows.push_back(row);
  }
  return out;
}

namespace {

struct LossState {
  double m, v, cost;
};

}  // namespace

RobustnessLossResult robustness_loss_experiment(const ModelParams& params, std::string_view direction,
                                                const std::vector<double>& eps_list) {
  if (direction != "beta" && direction != "eta") {
    throw std::invalid_argument("robustness_loss_experiment: direction must be beta or eta");
  }
  RobustnessLossResult out;
  out.direction = std::string(direction);

  const RiccatiSolution design = solve_backward(params);
  if (!design.bounded()) throw std::invalid_argument("robustness_loss_experiment: design model blew up");

  for (double eps : eps_list) {
    RobustnessLossRow row;
    row.eps = eps;
    const ModelParams truth = with_param(params, direction, get_param(params, direction) + eps);
    if (!validate(truth).ok()) {
      row.masked = true;
      row.mask_reason = "invalid";
      out.rows.push_back(row);
      continue;
    }
    if (!stability_report(truth).stable) {
      row.masked = true;
      row.mask_reason = "margin";
      out.rows.push_back(row);
      continue;
    }
    const RiccatiSolution worst = solve_backward(truth, design.n_nodes);
    if (!worst.bounded()) {
      row.masked = true;
      row.mask_reason = "blowup";
      out.rows.push_back(row);
      continue;
    }

    bool interior = true;
    // Time derivative of (m, v, accumulated penalized cost) at (t, s).
    auto deriv = [&](double t, const LossState& s) -> LossState {
      const ValueGradient g_design = gradient(coeffs_at(design, t), s.m, s.v);
      const ValueGradient g_true = gradient(coeffs_at(worst, t), s.m, s.v);
      const double u = unconstrained_rate(g_design, s.v, params);
      const double pi = unconstrained_monitoring(g_design, params);
      if (u < params.u_min || u > params.u_max || pi < 0.0 || pi > params.pi_max) interior = false;
      const DistortionPair d = worst_case(g_true, truth);
      const ModelParams& p = truth;
      double running = p.w1 * s.m * s.m + (p.w2_bar + p.kappa * u) * s.v + p.R * pi * pi + p.R_u * u * u;
      if (p.lambda_m > 0.0) running -= d.theta * d.theta / (4.0 * p.lambda_m);
      if (p.lambda_v > 0.0) running -= d.xi * d.xi / (4.0 * p.lambda_v);
      return {p.eta * u + d.theta, -2.0 * p.beta * s.v + p.sigma_sq() + d.xi - p.chi * pi, running};
    };

    // Step of two grid spacings, so the midpoint stages land on grid nodes.
    const std::size_t n_int = (design.n_nodes - 1) / 2;
    const double H = params.T / static_cast<double>(std::max<std::size_t>(n_int, 1));
    LossState s{params.m0, params.v0, 0.0};
    auto axpy = [](const LossState& x, double c, const LossState& k) {
      return LossState{x.m + c * k.m, x.v + c * k.v, x.cost + c * k.cost};
    };
    for (std::size_t k = 0; k < std::max<std::size_t>(n_int, 1); ++k) {
      const double t = static_cast<double>(k) * H;
      const double t_mid = std::min(t + 0.5 * H, params.T);
      const double t_end = k + 1 == n_int ? params.T : std::min(t + H, params.T);
      const LossState k1 = deriv(t, s);
      const LossState k2 = deriv(t_mid, axpy(s, 0.5 * H, k1));
      const LossState k3 = deriv(t_mid, axpy(s, 0.5 * H, k2));
      const LossState k4 = deriv(t_end, axpy(s, H, k3));
      s.m += H / 6.0 * (k1.m + 2.0 * k2.m + 2.0 * k3.m + k4.m);
      s.v += H / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
      s.cost += H / 6.0 * (k1.cost + 2.0 * k2.cost + 2.0 * k3.cost + k4.cost);
    }
    row.realized = s.cost + truth.G_m * s.m * s.m + truth.G_v * s.v;
    row.value_true = value(worst.coeffs.front(), params.m0, params.v0);
    row.gap = row.realized - row.value_true;
    if (!interior) {
      row.masked = true;
      row.mask_reason = "saturation";
    }
    out.rows.push_back(row);
  }

  std::vector<double> xs, ys;
  for (const auto& row : out.rows) {
    if (!row.masked && row.eps > 0.0 && row.gap > 0.0) {
      xs.push_back(row.eps);
      ys.push_back(row.gap);
    }
  }
  out.fitted_points = xs.size();
  if (xs.size() >= 2) out.fit = fit_loglog(xs, ys);
  return out;
}

}  // namespace rmfc
