#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <thread>
#include <vector>

#include "dcons/analysis.hpp"
#include "dcons/dynamics.hpp"
#include "dcons/rng.hpp"
#include "dcons/switching.hpp"
#include "dcons/types.hpp"

namespace dcons {

inline constexpr double kDefaultTerminalGap = 1e-6;
inline constexpr double kMonotoneSlack = 1e-12;

struct MonteCarloSpec {
  std::size_t n_runs = 1000;
  std::size_t horizon = 200;  // dwell intervals
  std::uint64_t seed = 0;     // master seed; run r uses rng::run_stream(seed, r)
  std::vector<double> epsilons;
  std::size_t checkpoint_stride = 0;  // 0: horizon / 10 (at least 1)
  double terminal_gap_threshold = kDefaultTerminalGap;
  unsigned threads = 0;  // 0: hardware concurrency
};

// Quantiles of the max-min gap across runs at one checkpoint.
struct GapQuantiles {
  double min = 0.0, q25 = 0.0, median = 0.0, q75 = 0.0, max = 0.0;
};

struct EnsembleStats {
  std::size_t n_runs = 0;
  std::size_t horizon = 0;
  std::uint64_t seed = 0;
  bool continuous_limit = false;

  Vector mean_state;  // empirical mean of terminal states
  Vector std_error;   // per agent, runs as i.i.d. samples
  std::optional<double> predicted_value;  // pi^T x0
  Vector expected_state;                  // W^horizon x0 (exact finite-horizon mean)
  double max_abs_deviation = 0.0;         // max_i |mean_state_i - pi^T x0|
  double max_z = 0.0;                     // max_i deviation_i / SE_i

  std::vector<std::size_t> checkpoints;  // dwell-interval indices, 0 and horizon included
  std::vector<GapQuantiles> gap_quantiles;
  std::vector<double> epsilons;
  std::vector<std::vector<double>> prob_exceed;  // [checkpoint][epsilon]

  std::vector<bool> per_run_monotone;
  bool all_monotone = true;
  double worst_gap_increase = 0.0;  // largest gap_{k+1} - gap_k observed
  double terminal_gap_threshold = kDefaultTerminalGap;
  double terminal_below_fraction = 0.0;

  std::vector<std::uint64_t> switch_counts;  // draws per graph across all runs
};

namespace detail {

struct RunResult {
  Vector terminal;
  std::vector<double> checkpoint_gaps;
  bool monotone = true;
  double worst_increase = 0.0;
  std::vector<std::uint64_t> counts;
};

inline double gap(const Vector& x) { return x.maxCoeff() - x.minCoeff(); }

// Quantile with linear interpolation between order statistics.
inline double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline std::vector<std::size_t> make_checkpoints(std::size_t horizon, std::size_t stride) {
  if (stride == 0) stride = std::max<std::size_t>(1, horizon / 10);
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < horizon; k += stride) out.push_back(k);
  out.push_back(horizon);
  return out;
}

// One run, propagated one dwell matrix per interval.
inline RunResult run_once(const std::vector<Matrix>& dwell, const std::vector<double>& probs,
                          const Vector& x0, std::size_t horizon,
                          const std::vector<std::size_t>& checkpoints, std::uint64_t stream) {
  RunResult r;
  r.counts.assign(dwell.size(), 0);
  r.checkpoint_gaps.reserve(checkpoints.size());
  // Propagate deviations from the initial mean: W 1 = 1 makes this exact in
  // exact arithmetic, and a constant x0 then stays exactly constant.
  const double shift = x0.mean();
  Vector x = x0.array() - shift, y(x0.size());
  double prev_gap = gap(x);
  std::size_t next_cp = 0;
  if (checkpoints[next_cp] == 0) {
    r.checkpoint_gaps.push_back(prev_gap);
    ++next_cp;
  }
  for (std::size_t k = 0; k < horizon; ++k) {
    const std::size_t g = categorical(probs, rng::uniform(stream, k));
    ++r.counts[g];
    y.noalias() = dwell[g] * x;
    x.swap(y);
    const double cur = gap(x);
    if (cur > prev_gap + kMonotoneSlack) r.monotone = false;
    r.worst_increase = std::max(r.worst_increase, cur - prev_gap);
    prev_gap = cur;
    if (next_cp < checkpoints.size() && checkpoints[next_cp] == k + 1) {
      r.checkpoint_gaps.push_back(cur);
      ++next_cp;
    }
  }
  r.terminal = x.array() + shift;
  return r;
}

}  // namespace detail

// Runs spec.n_runs independent simulations of the switching system and
// aggregates them in run-index order, so the result does not depend on the
// thread count.
inline EnsembleStats run_monte_carlo(const SwitchingEnsemble& e, const SamplingScheme& s,
                                     const StateVector& x0, const MonteCarloSpec& spec) {
  if (x0.n() != e.n()) throw DimensionError("monte carlo: x0 length differs from ensemble n");
  if (spec.n_runs == 0) throw Error("monte carlo: n_runs must be positive");
  for (double eps : spec.epsilons) {
    if (!(eps > 0.0)) throw Error("monte carlo: epsilons must be positive");
  }
  const ExpectedTransition w = expected_transition(e, s);
  const std::vector<std::size_t> checkpoints = detail::make_checkpoints(spec.horizon, spec.checkpoint_stride);

  std::vector<detail::RunResult> runs(spec.n_runs);
  unsigned threads = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, spec.n_runs));
  const auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      runs[r] = detail::run_once(w.components, e.probs(), x0.x, spec.horizon, checkpoints,
                                 rng::run_stream(spec.seed, r));
    }
  };
  if (threads <= 1) {
    work(0, spec.n_runs);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (spec.n_runs + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t b = std::min(spec.n_runs, t * chunk), en = std::min(spec.n_runs, b + chunk);
      pool.emplace_back(work, b, en);
    }
    for (auto& th : pool) th.join();
  }

  EnsembleStats st;
  st.n_runs = spec.n_runs;
  st.horizon = spec.horizon;
  st.seed = spec.seed;
  st.continuous_limit = s.continuous_limit;
  st.checkpoints = checkpoints;
  st.epsilons = spec.epsilons;
  st.terminal_gap_threshold = spec.terminal_gap_threshold;

  const Index n = e.n();
  const double runs_d = static_cast<double>(spec.n_runs);
  st.mean_state = Vector::Zero(n);
  for (const auto& r : runs) st.mean_state += r.terminal;
  st.mean_state /= runs_d;
  Vector var = Vector::Zero(n);
  for (const auto& r : runs) var += (r.terminal - st.mean_state).cwiseAbs2();
  st.std_error = spec.n_runs > 1 ? Vector((var / (runs_d - 1.0)).cwiseSqrt() / std::sqrt(runs_d))
                                 : Vector(Vector::Zero(n));

  st.switch_counts.assign(e.size(), 0);
  std::size_t below = 0;
  st.per_run_monotone.reserve(spec.n_runs);
  for (const auto& r : runs) {
    for (std::size_t g = 0; g < e.size(); ++g) st.switch_counts[g] += r.counts[g];
    st.per_run_monotone.push_back(r.monotone);
    st.all_monotone = st.all_monotone && r.monotone;
    st.worst_gap_increase = std::max(st.worst_gap_increase, r.worst_increase);
    if (r.checkpoint_gaps.back() < spec.terminal_gap_threshold) ++below;
  }
  st.terminal_below_fraction = static_cast<double>(below) / runs_d;

  std::vector<double> column(spec.n_runs);
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    for (std::size_t r = 0; r < spec.n_runs; ++r) column[r] = runs[r].checkpoint_gaps[c];
    std::vector<double> probs(spec.epsilons.size(), 0.0);
    for (std::size_t k = 0; k < spec.epsilons.size(); ++k) {
      const auto hits = std::count_if(column.begin(), column.end(),
                                      [&](double g) { return g >= spec.epsilons[k]; });
      probs[k] = static_cast<double>(hits) / runs_d;
    }
    st.prob_exceed.push_back(std::move(probs));
    std::sort(column.begin(), column.end());
    st.gap_quantiles.push_back({column.front(), detail::quantile(column, 0.25),
                                detail::quantile(column, 0.5), detail::quantile(column, 0.75),
                                column.back()});
  }

  st.expected_state = matrix_power(w.w, spec.horizon) * x0.x;
  if (is_strongly_connected(expected_graph(e))) {
    const double predicted = consensus_value(stationary_vector(w), x0);
    st.predicted_value = predicted;
    for (Index i = 0; i < n; ++i) {
      const double dev = std::abs(st.mean_state(i) - predicted);
      st.max_abs_deviation = std::max(st.max_abs_deviation, dev);
      if (st.std_error(i) > 0.0) st.max_z = std::max(st.max_z, dev / st.std_error(i));
      else if (dev > 0.0) st.max_z = INFINITY;
    }
  }
  return st;
}

// Consensus in mean: E[x(t_k)] against 1 pi^T x0.
inline EnsembleStats estimate_mean_consensus(const SwitchingEnsemble& e, const SamplingScheme& s,
                                             const StateVector& x0, std::size_t n_runs,
                                             std::size_t horizon, std::uint64_t seed,
                                             unsigned threads = 0) {
  MonteCarloSpec spec;
  spec.n_runs = n_runs;
  spec.horizon = horizon;
  spec.seed = seed;
  spec.threads = threads;
  return run_monte_carlo(e, s, x0, spec);
}

// Consensus in probability: P{H - h >= eps} per checkpoint.
inline EnsembleStats estimate_probability_consensus(const SwitchingEnsemble& e,
                                                    const SamplingScheme& s, const StateVector& x0,
                                                    std::size_t n_runs, std::size_t horizon,
                                                    std::uint64_t seed,
                                                    const std::vector<double>& epsilons,
                                                    std::size_t checkpoint_stride = 0,
                                                    unsigned threads = 0) {
  if (epsilons.empty()) throw Error("estimate_probability_consensus: no epsilons given");
  MonteCarloSpec spec;
  spec.n_runs = n_runs;
  spec.horizon = horizon;
  spec.seed = seed;
  spec.epsilons = epsilons;
  spec.checkpoint_stride = checkpoint_stride;
  spec.threads = threads;
  return run_monte_carlo(e, s, x0, spec);
}

// Almost-sure consensus: every run's gap is nonincreasing at dwell boundaries
// and ends below the threshold.
inline EnsembleStats check_almost_sure(const SwitchingEnsemble& e, const SamplingScheme& s,
                                       const StateVector& x0, std::size_t n_runs,
                                       std::size_t horizon, std::uint64_t seed,
                                       double terminal_gap_threshold = kDefaultTerminalGap,
                                       unsigned threads = 0) {
  MonteCarloSpec spec;
  spec.n_runs = n_runs;
  spec.horizon = horizon;
  spec.seed = seed;
  spec.terminal_gap_threshold = terminal_gap_threshold;
  spec.threads = threads;
  return run_monte_carlo(e, s, x0, spec);
}

}  // namespace dcons
