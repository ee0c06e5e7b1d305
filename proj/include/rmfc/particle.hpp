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

// Finite-population simulation of N interacting banks with idiosyncratic and
// common noise, and the synchronous-coupling convergence experiment against
// independent mean-field copies.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rmfc/params.hpp"

namespace rmfc {

// Paths of N mean-field copies driven by the same increments as the banks.
// Each copy reverts towards the conditional mean given the common noise.
struct CoupledLimit {
  std::vector<double> m_cond;    // conditional mean m0 + int (eta u + theta) dt + sigma_c B
  std::vector<double> v_cond;    // conditional variance, v' = -2 beta v + sigma_L^2
  std::vector<double> max_gap;   // max over banks of |L^i - copy^i| per node
  std::vector<double> L_final;   // copies at T
};

struct ParticleEnsemble {
  std::size_t N = 0;
  std::uint64_t seed = 0;
  std::vector<double> times;
  std::vector<double> m_emp;
  std::vector<double> v_emp;        // unbiased, divisor N - 1
  std::vector<double> common_noise; // B at each node, B(0) = 0
  std::vector<double> L_final;      // bank liquidity at T
  std::optional<CoupledLimit> coupled_limit;
};

// Euler-Maruyama on the forward grid with inputs of length n_steps + 1.
// Initial banks are i.i.d. Normal(m0, v0). Throws std::invalid_argument for
// N < 2 or mismatched path lengths.
[[nodiscard]] ParticleEnsemble simulate_nbank(const ModelParams& params, std::size_t N, std::uint64_t seed,
                                              std::span<const double> u_path, std::span<const double> theta_path,
                                              bool with_coupled_limit = false, std::uint64_t replication = 0);

struct PocRow {
  std::size_t N = 0;
  std::size_t replication = 0;
  double coupling_error = 0.0;  // RMS over time of max_i |L^i - copy^i|
  double mean_error = 0.0;      // RMS over time of |m^N - m_cond|
  double var_error = 0.0;       // RMS over time of |v^N - v_cond|
  double mean_error_det = 0.0;  // against the deterministic closed-loop mean
  double var_error_det = 0.0;   // against the deterministic closed-loop variance
};

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double ci_half_width = 0.0;  // 95% Student-t
};

struct PocResult {
  std::vector<PocRow> rows;              // ordered by (N, replication)
  std::vector<std::size_t> N_list;
  std::vector<double> mean_coupling;     // per N, averaged over replications
  std::vector<double> mean_mean_error;
  std::vector<double> mean_var_error;
  LogLogFit coupling_fit;
  LogLogFit mean_fit;
  LogLogFit var_fit;
};

// Least squares of log(y) on log(x). Needs at least two points.
[[nodiscard]] LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y);

// Drives the banks with the deterministic closed-loop u and theta paths.
[[nodiscard]] PocResult poc_experiment(const ModelParams& params, const std::vector<std::size_t>& N_list,
                                       std::size_t replications, std::uint64_t seed, std::size_t workers = 1);

}  // namespace rmfc
