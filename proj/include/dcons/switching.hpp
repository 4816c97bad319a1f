#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dcons/dynamics.hpp"
#include "dcons/graph.hpp"
#include "dcons/rng.hpp"
#include "dcons/types.hpp"

namespace dcons {

enum class FaultKind { receive, send };

inline const char* to_string(FaultKind k) { return k == FaultKind::receive ? "receive" : "send"; }

// Records that an ensemble is the four-graph enumeration over two faulty
// agents: [fault on first, fault on second, both, none].
struct ScenarioForm {
  FaultKind kind = FaultKind::receive;
  Index first = 0;
  Index second = 1;
};

inline constexpr double kProbabilitySumTol = 1e-12;

class SwitchingEnsemble {
 public:
  SwitchingEnsemble(std::vector<Graph> graphs, std::vector<double> probs, std::size_t base_index,
                    std::optional<ScenarioForm> scenario = std::nullopt)
      : graphs_(std::move(graphs)),
        probs_(std::move(probs)),
        base_index_(base_index),
        scenario_(scenario) {
    if (graphs_.empty()) throw Error("ensemble: needs at least one graph");
    if (graphs_.size() != probs_.size()) {
      throw DimensionError("ensemble: one probability per graph required");
    }
    if (base_index_ >= graphs_.size()) throw IndexError("ensemble: base_index out of range");
    double sum = 0.0;
    for (double p : probs_) {
      if (!(p > 0.0 && p <= 1.0)) throw Error("ensemble: probabilities must lie in (0, 1]");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kProbabilitySumTol) {
      throw Error("ensemble: probabilities must sum to 1 (got " + std::to_string(sum) + ")");
    }
    const Index n = graphs_.front().n();
    for (const auto& g : graphs_) {
      if (g.n() != n) throw DimensionError("ensemble: all graphs must share n");
    }
    const Graph& base = graphs_[base_index_];
    if (!base.is_undirected() || !is_strongly_connected(base)) {
      throw ConnectivityError("ensemble: base graph must be undirected and connected");
    }
    laplacians_.reserve(graphs_.size());
    for (const auto& g : graphs_) laplacians_.push_back(build_laplacian(g));
  }

  Index n() const { return graphs_.front().n(); }
  std::size_t size() const { return graphs_.size(); }
  const std::vector<Graph>& graphs() const { return graphs_; }
  const std::vector<double>& probs() const { return probs_; }
  const std::vector<Laplacian>& laplacians() const { return laplacians_; }
  std::size_t base_index() const { return base_index_; }
  const Graph& base() const { return graphs_[base_index_]; }
  const std::optional<ScenarioForm>& scenario() const { return scenario_; }

  // Largest degree over every graph in the ensemble.
  double d_max() const {
    double d = 0.0;
    for (const auto& l : laplacians_) d = std::max(d, l.degrees.maxCoeff());
    return d;
  }

 private:
  std::vector<Graph> graphs_;
  std::vector<double> probs_;
  std::size_t base_index_;
  std::optional<ScenarioForm> scenario_;
  std::vector<Laplacian> laplacians_;
};

// Graph with faults of `kind` applied to the listed agents.
inline Graph faulted(const Graph& base, FaultKind kind, std::initializer_list<Index> agents) {
  FaultSpec f;
  for (Index a : agents) {
    (kind == FaultKind::receive ? f.receive_disabled : f.send_disabled).insert(a);
  }
  return apply_fault(base, f);
}

// Four-graph ensemble over faulty agents (first, second):
// [first faulty, second faulty, both, none] with probabilities
// (alpha, beta, gamma, theta).
inline SwitchingEnsemble make_scenario(const Graph& base, FaultKind kind, Index first,
                                       Index second, const std::vector<double>& probs) {
  if (probs.size() != 4) throw DimensionError("make_scenario: four probabilities required");
  if (first == second) throw Error("make_scenario: the two faulty agents must differ");
  for (double p : probs) {
    if (!(p > 0.0 && p < 1.0)) throw Error("make_scenario: probabilities must lie in (0, 1)");
  }
  std::vector<Graph> graphs{faulted(base, kind, {first}), faulted(base, kind, {second}),
                            faulted(base, kind, {first, second}), base};
  return SwitchingEnsemble(std::move(graphs), probs, 3, ScenarioForm{kind, first, second});
}

// Adjacency sum_i p_i A_i.
inline Graph expected_graph(const SwitchingEnsemble& e) {
  Matrix a = Matrix::Zero(e.n(), e.n());
  for (std::size_t i = 0; i < e.size(); ++i) a += e.probs()[i] * e.graphs()[i].adj();
  return Graph(std::move(a));
}

// Index i with cumulative(p_0..p_{i-1}) <= u < cumulative(p_0..p_i).
inline std::size_t categorical(const std::vector<double>& probs, double u) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return probs.size() - 1;
}

// Draw k uses rng::uniform(seed, k); the first draw selects the graph for
// the interval starting at t = 0.
inline std::vector<std::size_t> sample_switch_sequence(const SwitchingEnsemble& e,
                                                       std::size_t n_intervals,
                                                       std::uint64_t seed) {
  std::vector<std::size_t> seq(n_intervals);
  for (std::size_t k = 0; k < n_intervals; ++k) seq[k] = categorical(e.probs(), rng::uniform(seed, k));
  return seq;
}

inline void require_ensemble_sampling(const SwitchingEnsemble& e, const SamplingScheme& s,
                                      const std::string& context) {
  if (!s.continuous_limit) require_sampling_period(s.h, e.d_max(), context);
}

struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  // (dwell-interval start time, graph index)
  std::vector<std::pair<double, std::size_t>> switches;
  std::uint64_t seed = 0;
  bool continuous_limit = false;
};

// Drives x0 through a fixed switch sequence. Discrete mode records every
// delta step; continuous-limit mode records dwell boundaries only.
inline Trajectory simulate_sequence(const SwitchingEnsemble& e, const SamplingScheme& s,
                                    const StateVector& x0, const std::vector<std::size_t>& seq) {
  if (x0.n() != e.n()) throw DimensionError("simulate: x0 length differs from ensemble n");
  require_ensemble_sampling(e, s, "simulate");
  for (std::size_t g : seq) {
    if (g >= e.size()) throw IndexError("simulate: switch index out of range");
  }

  Trajectory tr;
  tr.continuous_limit = s.continuous_limit;
  const std::size_t per_interval = s.continuous_limit ? 1 : static_cast<std::size_t>(s.k_bar);
  const double step = s.continuous_limit ? s.delta_t : s.h;
  tr.times.reserve(seq.size() * per_interval + 1);
  tr.states.reserve(seq.size() * per_interval + 1);
  tr.times.push_back(x0.t);
  tr.states.push_back(x0.x);

  std::vector<Matrix> exp_cache;
  if (s.continuous_limit) {
    exp_cache.resize(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) exp_cache[i] = dwell_transition(e.laplacians()[i], s);
  }

  StateVector x = x0;
  std::size_t sample = 0;
  for (std::size_t k = 0; k < seq.size(); ++k) {
    const std::size_t g = seq[k];
    tr.switches.emplace_back(tr.times.back(), g);
    if (s.continuous_limit) {
      x.x = exp_cache[g] * x.x;
      ++sample;
      tr.times.push_back(x0.t + static_cast<double>(sample) * step);
      tr.states.push_back(x.x);
    } else {
      for (std::size_t j = 0; j < per_interval; ++j) {
        x = delta_step(x, e.laplacians()[g], s.h);
        ++sample;
        tr.times.push_back(x0.t + static_cast<double>(sample) * step);
        tr.states.push_back(x.x);
      }
    }
  }
  return tr;
}

inline Trajectory simulate(const SwitchingEnsemble& e, const SamplingScheme& s,
                           const StateVector& x0, std::size_t n_intervals, std::uint64_t seed) {
  Trajectory tr = simulate_sequence(e, s, x0, sample_switch_sequence(e, n_intervals, seed));
  tr.seed = seed;
  return tr;
}

// Graph index active at sample i (the last sample reports the final interval).
inline std::size_t graph_at_sample(const Trajectory& tr, std::size_t i) {
  if (tr.switches.empty()) return 0;
  const std::size_t per = (tr.states.size() - 1) / tr.switches.size();
  const std::size_t k = std::min(i / std::max<std::size_t>(per, 1), tr.switches.size() - 1);
  return tr.switches[k].second;
}

}  // namespace dcons
