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

#include "rmfc/particle.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <random>
#include <stdexcept>

#include "rmfc/forward.hpp"
#include "rmfc/parallel.hpp"

namespace rmfc {

namespace {

constexpr std::uint32_t kBankTag = 0x62616e6b;    // "bank"
constexpr std::uint32_t kCommonTag = 0x636f6d6d;  // "comm"

// One generator per (seed, replication, stream). Streams never share state,
// so each bank's increments are fixed by its index alone.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t replication, std::uint64_t stream, std::uint32_t tag) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(replication), static_cast<std::uint32_t>(replication >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), tag};
    engine_.seed(seq);
  }

  double operator()() { return dist_(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> dist_;
};

// Mean and unbiased variance, shifted by the first element so that identical
// values give exactly (x, 0).
std::pair<double, double> moments(const std::vector<double>& x) {
  const double shift = x.front();
  double s = 0.0, ss = 0.0;
  for (double xi : x) {
    const double d = xi - shift;
    s += d;
    ss += d * d;
  }
  const double n = static_cast<double>(x.size());
  const double mean_d = s / n;
  const double var = std::max(0.0, (ss - n * mean_d * mean_d) / (n - 1.0));
  return {shift + mean_d, var};
}

double rms(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(acc / static_cast<double>(a.size()));
}

double rms(const std::vector<double>& a) {
  double acc = 0.0;
  for (double x : a) acc += x * x;
  return std::sqrt(acc / static_cast<double>(a.size()));
}

}  // namespace

ParticleEnsemble simulate_nbank(const ModelParams& params, std::size_t N, std::uint64_t seed,
                                std::span<const double> u_path, std::span<const double> theta_path,
                                bool with_coupled_limit, std::uint64_t replication) {
  if (N < 2) throw std::invalid_argument("simulate_nbank: N must be at least 2");
  const std::size_t n = params.n_steps();
  if (n == 0) throw std::invalid_argument("simulate_nbank: forward grid has no steps");
  if (u_path.size() != n + 1 || theta_path.size() != n + 1) {
    throw std::invalid_argument("simulate_nbank: input path length must be n_steps + 1");
  }
  const double h = params.T / static_cast<double>(n);
  const double sqrt_h = std::sqrt(h);
  const double sd0 = std::sqrt(params.v0);

  std::vector<NormalStream> banks;
  banks.reserve(N);
  for (std::size_t i = 0; i < N; ++i) banks.emplace_back(seed, replication, i, kBankTag);
  NormalStream common(seed, replication, 0, kCommonTag);

  ParticleEnsemble out;
  out.N = N;
  out.seed = seed;
  out.times.resize(n + 1);
  for (std::size_t k = 0; k <= n; ++k) out.times[k] = k == n ? params.T : static_cast<double>(k) * h;
  out.m_emp.resize(n + 1);
  out.v_emp.resize(n + 1);
  out.common_noise.assign(n + 1, 0.0);

  std::vector<double> L(N);
  for (std::size_t i = 0; i < N; ++i) L[i] = params.m0 + sd0 * banks[i]();
  std::vector<double> copy;
  CoupledLimit limit;
  if (with_coupled_limit) {
    copy = L;
    limit.m_cond.resize(n + 1);
    limit.v_cond.resize(n + 1);
    limit.max_gap.assign(n + 1, 0.0);
    limit.m_cond[0] = params.m0;
    limit.v_cond[0] = params.v0;
  }

  for (std::size_t k = 0;; ++k) {
    std::tie(out.m_emp[k], out.v_emp[k]) = moments(L);
    if (with_coupled_limit && k > 0) {
      double gap = 0.0;
      for (std::size_t i = 0; i < N; ++i) gap = std::max(gap, std::abs(L[i] - copy[i]));
      limit.max_gap[k] = gap;
    }
    if (k == n) break;

    const double m_N = out.m_emp[k];
    const double push = params.eta * u_path[k] + theta_path[k];
    const double dB = sqrt_h * common();
    out.common_noise[k + 1] = out.common_noise[k] + dB;
    const double common_shock = params.sigma_c * dB;
    if (with_coupled_limit) {
      const double m_c = limit.m_cond[k];
      for (std::size_t i = 0; i < N; ++i) {
        const double idio = params.sigma_L * sqrt_h * banks[i]();
        L[i] += (-params.beta * (L[i] - m_N) + push) * h + idio + common_shock;
        copy[i] += (-params.beta * (copy[i] - m_c) + push) * h + idio + common_shock;
      }
      limit.m_cond[k + 1] = m_c + push * h + common_shock;
      limit.v_cond[k + 1] =
          limit.v_cond[k] + (-2.0 * params.beta * limit.v_cond[k] + params.sigma_L * params.sigma_L) * h;
    } else {
      for (std::size_t i = 0; i < N; ++i) {
        const double idio = params.sigma_L * sqrt_h * banks[i]();
        L[i] += (-params.beta * (L[i] - m_N) + push) * h + idio + common_shock;
      }
    }
  }

  out.L_final = std::move(L);
  if (with_coupled_limit) {
    limit.L_final = std::move(copy);
    out.coupled_limit = std::move(limit);
  }
  return out;
}

LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_loglog: need at least two points");
  const std::size_t n = x.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) throw std::invalid_argument("fit_loglog: values must be positive");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  LogLogFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (n > 2) {
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = ly[i] - fit.intercept - fit.slope * lx[i];
      sse += r * r;
    }
    const double se = std::sqrt(sse / static_cast<double>(n - 2) / sxx);
    const boost::math::students_t dist(static_cast<double>(n - 2));
    fit.ci_half_width = boost::math::quantile(boost::math::complement(dist, 0.025)) * se;
  }
  return fit;
}

PocResult poc_experiment(const ModelParams& params, const std::vector<std::size_t>& N_list,
                         std::size_t replications, std::uint64_t seed, std::size_t workers) {
  if (N_list.empty()) throw std::invalid_argument("poc_experiment: N_list is empty");
  for (std::size_t i = 0; i < N_list.size(); ++i) {
    if (N_list[i] < 2) throw std::invalid_argument("poc_experiment: every N must be at least 2");
    if (i > 0 && N_list[i] <= N_list[i - 1]) throw std::invalid_argument("poc_experiment: N_list must be increasing");
  }
  if (replications == 0) throw std::invalid_argument("poc_experiment: replications must be at least 1");

  const Trajectory det = run_closed_loop(params);
  const std::size_t n_rows = N_list.size() * replications;

  PocResult out;
  out.N_list = N_list;
  out.rows = parallel_map(n_rows, workers, [&](std::size_t idx) {
    const std::size_t N = N_list[idx / replications];
    const std::size_t rep = idx % replications;
    const ParticleEnsemble ens = simulate_nbank(params, N, seed, det.u, det.theta, true, rep);
    const CoupledLimit& lim = *ens.coupled_limit;
    PocRow row;
    row.N = N;
    row.replication = rep;
    row.coupling_error = rms(lim.max_gap);
    row.mean_error = rms(ens.m_emp, lim.m_cond);
    row.var_error = rms(ens.v_emp, lim.v_cond);
    row.mean_error_det = rms(ens.m_emp, det.m);
    row.var_error_det = rms(ens.v_emp, det.v);
    return row;
  });

  const double reps = static_cast<double>(replications);
  std::vector<double> xs;
  for (std::size_t j = 0; j < N_list.size(); ++j) {
    double c = 0.0, m = 0.0, v = 0.0;
    for (std::size_t r = 0; r < replications; ++r) {
      const PocRow& row = out.rows[j * replications + r];
      c += row.coupling_error;
      m += row.mean_error;
      v += row.var_error;
    }
    out.mean_coupling.push_back(c / reps);
    out.mean_mean_error.push_back(m / reps);
    out.mean_var_error.push_back(v / reps);
    xs.push_back(static_cast<double>(N_list[j]));
  }
  if (N_list.size() >= 2) {
    auto positive = [](const std::vector<double>& y) {
      return std::all_of(y.begin(), y.end(), [](double e) { return e > 0; });
    };
    if (positive(out.mean_coupling)) out.coupling_fit = fit_loglog(xs, out.mean_coupling);
    if (positive(out.mean_mean_error)) out.mean_fit = fit_loglog(xs, out.mean_mean_error);
    if (positive(out.mean_var_error)) out.var_fit = fit_loglog(xs, out.mean_var_error);
  }
  return out;
}

}  // namespace rmfc
