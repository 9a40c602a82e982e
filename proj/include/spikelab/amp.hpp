#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <tuple>
#include <utility>
#include <vector>

#include "spikelab/model.hpp"
#include "spikelab/prior.hpp"
#include "spikelab/spatial_coupling.hpp"
#include "spikelab/state_evolution.hpp"

namespace spikelab {

using rng_engine = std::mt19937_64;

/// i.i.d. draws from the prior.
inline std::vector<double> sample_signal(const DiscretePrior& prior, std::size_t n, rng_engine& rng) {
  std::vector<double> weights;
  for (const atom& a : prior.atoms()) weights.push_back(a.prob);
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  std::vector<double> s(n);
  for (double& x : s) x = prior.atoms()[pick(rng)].value;
  return s;
}

/// W = s s^T / sqrt(n) + sqrt(delta) Z, Z_ij ~ N(0, 1) for i <= j, stored dense row-major.
struct Instance {
  std::size_t n = 0;
  std::vector<double> s;
  std::vector<double> W;
  double delta = 0.0;
  std::uint64_t seed = 0;

  [[nodiscard]] double w(std::size_t i, std::size_t j) const noexcept { return W[i * n + j]; }
};

inline Instance sample_instance(const DiscretePrior& prior, std::size_t n, double delta, std::uint64_t seed) {
  if (n < 2) throw error(errc::domain_error, "instance size must be at least 2");
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw error(errc::domain_error, "noise variance must be non-negative");
  Instance inst;
  inst.n = n;
  inst.delta = delta;
  inst.seed = seed;
  rng_engine rng(seed);
  inst.s = sample_signal(prior, n, rng);
  inst.W.resize(n * n);
  std::normal_distribution<double> normal;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n)), noise = std::sqrt(delta);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double z = normal(rng);
      const double value = inst.s[i] * inst.s[j] * scale + (delta > 0.0 ? noise * z : 0.0);
      inst.W[i * n + j] = value;
      inst.W[j * n + i] = value;
    }
  }
  return inst;
}

struct AmpState {
  std::vector<double> current;
  std::vector<double> previous;
  double onsager = 0.0;
  std::size_t t = 0;
  double snr = 0.0;
};

struct AmpIterate {
  std::size_t t;
  double vmse;
  double mmse;
  double snr;
  double onsager;
};

struct amp_options {
  /// Last iteration index; the initial estimate is iteration 1, aligned with E^(1) = Var(S).
  std::size_t t_max = 20;
  /// Use (v - E^(t-1)) / delta from state evolution instead of the empirical overlap.
  bool se_driven = false;
  double init_perturbation = 1e-3;
  double divergence_factor = 10.0;
  std::uint64_t init_seed_salt = 0x9e3779b97f4a7c15ULL;
};

struct AmpRun {
  std::vector<AmpIterate> history;
  AmpState state;
  bool diverged = false;
};

/// ||x - s||^2 / n and ||x x^T - s s^T||_F^2 / n^2.
inline std::pair<double, double> estimate_errors(const std::vector<double>& x, const std::vector<double>& s) {
  double diff = 0.0, xx = 0.0, ss = 0.0, xs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    diff += (x[i] - s[i]) * (x[i] - s[i]);
    xx += x[i] * x[i];
    ss += s[i] * s[i];
    xs += x[i] * s[i];
  }
  const double n = static_cast<double>(s.size());
  return {diff / n, std::max(0.0, (xx * xx + ss * ss - 2.0 * xs * xs) / (n * n))};
}

inline AmpRun run_amp(const Instance& inst, const DiscretePrior& prior, const amp_options& opts = {}) {
  if (!(inst.delta > 0.0)) throw error(errc::domain_error, "AMP needs a positive noise variance");
  const std::size_t n = inst.n;
  const double nd = static_cast<double>(n);
  const double v = prior.second_moment();
  AmpRun run;
  AmpState& st = run.state;

  rng_engine rng(inst.seed ^ opts.init_seed_salt);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  st.current.resize(n);
  for (double& x : st.current)
    x = std::clamp(prior.mean() + opts.init_perturbation * jitter(rng), prior.min_value(), prior.max_value());
  st.previous.assign(n, 0.0);
  st.t = 1;

  std::vector<double> se_values;
  if (opts.se_driven) se_values = run_se(ScalarModel(prior, inst.delta), v, {opts.t_max, 0.0, {}}).values;

  auto push = [&] {
    const auto [vmse, mmse_value] = estimate_errors(st.current, inst.s);
    run.history.push_back({st.t, vmse, mmse_value, st.snr, st.onsager});
    if (!(vmse <= opts.divergence_factor * v)) run.diverged = true;
  };
  push();

  const double field_scale = 1.0 / (std::sqrt(nd) * inst.delta);
  std::vector<double> field(n);
  while (st.t < opts.t_max && !run.diverged) {
    double norm2 = 0.0;
    for (double x : st.current) norm2 += x * x;
    const double snr = opts.se_driven ? std::max(0.0, (v - se_values[std::min(st.t, se_values.size() - 1)]) / inst.delta)
                                      : norm2 / (nd * inst.delta);
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = &inst.W[i * n];
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += row[j] * st.current[j];
      field[i] = acc * field_scale - st.onsager * st.previous[i];
    }
    double var_sum = 0.0;
    st.previous.swap(st.current);
    for (std::size_t i = 0; i < n; ++i) {
      const posterior_moments pm = posterior(prior, field[i], snr);
      st.current[i] = pm.mean;
      var_sum += pm.var;
    }
    st.onsager = var_sum / (nd * inst.delta);
    st.snr = snr;
    ++st.t;
    push();
  }
  return run;
}

/// Block observations w_{i_mu j_nu} = s s sqrt(Lambda_{mu nu} / n) + sqrt(delta) z on the ring.
/// Only noise inside the coupling window is stored; the signal part is rank one per block pair.
struct CoupledInstance {
  std::size_t n = 0;  // block size
  CouplingMatrix coupling;
  double delta = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::vector<double>> s;  // per block
  /// noise[mu][d] is the n x n block between mu and (mu + d) mod (L+1), d = 0..w, row-major.
  std::vector<std::vector<std::vector<float>>> noise;
};

inline CoupledInstance sample_coupled_instance(const DiscretePrior& prior, const CouplingMatrix& coupling,
                                               std::size_t n, double delta, std::uint64_t seed) {
  if (n < 2) throw error(errc::domain_error, "block size must be at least 2");
  if (!(delta > 0.0)) throw error(errc::domain_error, "noise variance must be positive");
  CoupledInstance inst{n, coupling, delta, seed, {}, {}};
  rng_engine rng(seed);
  const std::size_t blocks = coupling.size(), w = coupling.window();
  for (std::size_t mu = 0; mu < blocks; ++mu) inst.s.push_back(sample_signal(prior, n, rng));
  std::normal_distribution<double> normal;
  inst.noise.resize(blocks);
  for (std::size_t mu = 0; mu < blocks; ++mu) {
    inst.noise[mu].resize(w + 1);
    for (std::size_t d = 0; d <= w; ++d) {
      std::vector<float>& block = inst.noise[mu][d];
      block.resize(n * n);
      if (d == 0) {
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = i; j < n; ++j) block[i * n + j] = block[j * n + i] = static_cast<float>(normal(rng));
      } else {
        for (float& z : block) z = static_cast<float>(normal(rng));
      }
    }
  }
  return inst;
}

struct CoupledAmpRun {
  /// vmse[t][mu]; row 0 is the initial estimate.
  std::vector<std::vector<double>> vmse;
  /// mmse[t][mu] = ||x_mu x_mu^T - s_mu s_mu^T||_F^2 / n^2.
  std::vector<std::vector<double>> mmse;
  bool diverged = false;
};

/// AMP on the coupled ring; seed blocks are clamped to the truth at every iteration.
/// Iteration 0 starts free blocks at zero (plus jitter), matching E^(0) = v in coupled SE.
inline CoupledAmpRun run_coupled_amp(const CoupledInstance& inst, const DiscretePrior& prior, std::size_t t_max,
                                     const amp_options& opts = {}) {
  const std::size_t n = inst.n, blocks = inst.coupling.size(), w = inst.coupling.window();
  const double nd = static_cast<double>(n), delta = inst.delta, v = prior.second_moment();
  const std::vector<char> pinned = seed_blocks(inst.coupling);

  rng_engine rng(inst.seed ^ opts.init_seed_salt);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  std::vector<std::vector<double>> cur(blocks, std::vector<double>(n)), prev(blocks, std::vector<double>(n, 0.0));
  for (std::size_t mu = 0; mu < blocks; ++mu)
    for (std::size_t i = 0; i < n; ++i) cur[mu][i] = pinned[mu] ? inst.s[mu][i] : opts.init_perturbation * jitter(rng);

  CoupledAmpRun run;
  auto record = [&] {
    std::vector<double> row(blocks), mrow(blocks);
    for (std::size_t mu = 0; mu < blocks; ++mu) {
      std::tie(row[mu], mrow[mu]) = estimate_errors(cur[mu], inst.s[mu]);
      if (!(row[mu] <= opts.divergence_factor * v)) run.diverged = true;
    }
    run.vmse.push_back(std::move(row));
    run.mmse.push_back(std::move(mrow));
  };
  record();

  std::vector<double> onsager_block(blocks, 0.0);  // (1/(n delta)) sum_j Var_j per block, previous step
  std::vector<std::vector<double>> field(blocks, std::vector<double>(n));
  for (std::size_t t = 1; t <= t_max && !run.diverged; ++t) {
    std::vector<double> norm2(blocks, 0.0), overlap(blocks, 0.0);
    for (std::size_t mu = 0; mu < blocks; ++mu)
      for (std::size_t i = 0; i < n; ++i) {
        norm2[mu] += cur[mu][i] * cur[mu][i];
        overlap[mu] += inst.s[mu][i] * cur[mu][i];
      }
    for (auto& f : field) std::fill(f.begin(), f.end(), 0.0);
    for (std::size_t mu = 0; mu < blocks; ++mu) {
      for (std::size_t d = 0; d <= w; ++d) {
        const std::size_t nu = (mu + d) % blocks;
        const double lam = inst.coupling(mu, nu);
        const double zscale = std::sqrt(lam * delta / nd) / delta;
        const std::vector<float>& z = inst.noise[mu][d];
        // Rows of block (mu, nu) feed mu; its transpose feeds nu.
        for (std::size_t i = 0; i < n; ++i) {
          const float* row = &z[i * n];
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += row[j] * cur[nu][j];
          field[mu][i] += zscale * acc;
        }
        if (d != 0) {
          for (std::size_t i = 0; i < n; ++i) {
            const float* row = &z[i * n];
            const double xi = cur[mu][i];
            double* out = field[nu].data();
            for (std::size_t j = 0; j < n; ++j) out[j] += zscale * row[j] * xi;
          }
        }
      }
    }
    std::vector<double> next_onsager(blocks, 0.0);
    for (std::size_t mu = 0; mu < blocks; ++mu) {
      double snr = 0.0, signal = 0.0, memory = 0.0;
      for (std::size_t d = 0; d < 2 * w + 1; ++d) {
        const std::size_t nu = (mu + blocks + d - w) % blocks;
        const double lam = inst.coupling(mu, nu);
        snr += lam * norm2[nu] / (nd * delta);
        signal += lam * overlap[nu] / (nd * delta);
        memory += lam * onsager_block[nu];
      }
      if (pinned[mu]) continue;
      double var_sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        field[mu][i] += signal * inst.s[mu][i] - memory * prev[mu][i];
      }
      prev[mu] = cur[mu];
      for (std::size_t i = 0; i < n; ++i) {
        const posterior_moments pm = posterior(prior, field[mu][i], snr);
        cur[mu][i] = pm.mean;
        var_sum += pm.var;
      }
      next_onsager[mu] = var_sum / (nd * delta);
    }
    onsager_block.swap(next_onsager);
    record();
  }
  return run;
}

}  // namespace spikelab
