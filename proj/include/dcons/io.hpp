#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "dcons/analysis.hpp"
#include "dcons/graph.hpp"
#include "dcons/switching.hpp"
#include "dcons/verify.hpp"

namespace dcons::io {

using json = nlohmann::json;

// 64-bit FNV-1a, printed as 16 hex digits.
inline std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// { "n": int, "edges": [[i, j, w], ...], "undirected": bool }
inline Graph graph_from_json(const json& j) {
  try {
    const Index n = j.at("n").get<Index>();
    const bool undirected = j.value("undirected", false);
    std::vector<std::tuple<Index, Index, double>> edges;
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || (e.size() != 2 && e.size() != 3)) {
        throw ConfigError("graph: each edge must be [i, j] or [i, j, w]");
      }
      edges.emplace_back(e[0].get<Index>(), e[1].get<Index>(), e.size() == 3 ? e[2].get<double>() : 1.0);
    }
    return Graph::from_edges(n, edges, undirected);
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("graph: malformed graph object: ") + ex.what());
  }
}

// Directed edge list of a graph, in the same file format.
inline json graph_to_json(const Graph& g) {
  json edges = json::array();
  for (Index i = 0; i < g.n(); ++i) {
    for (Index j = 0; j < g.n(); ++j) {
      if (g.adj()(i, j) > 0.0) edges.push_back({i, j, g.adj()(i, j)});
    }
  }
  return {{"n", g.n()}, {"edges", edges}, {"undirected", false}};
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& ex) {
    throw ConfigError("cannot parse " + path.string() + ": " + ex.what());
  }
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Header `t,x_0,...,x_{n-1},graph_index`; one row per recorded sample. The
// graph index is the graph driving the dwell interval the sample starts
// (the final sample repeats the last interval's graph).
inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  const Index n = tr.states.empty() ? 0 : tr.states.front().size();
  os << "t";
  for (Index i = 0; i < n; ++i) os << ",x_" << i;
  os << ",graph_index\n";
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    os << format_double(tr.times[k]);
    for (Index i = 0; i < n; ++i) os << ',' << format_double(tr.states[k](i));
    os << ',' << graph_at_sample(tr, k) << '\n';
  }
}

inline json to_json(const Vector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

inline json to_json(const BoundReport& r) {
  const bool closed_form = r.theorem == BoundKind::t5 || r.theorem == BoundKind::c1;
  return {
      {"theorem", to_string(r.theorem)},
      {"d_norm", r.d_norm},
      {"lambda_bar", r.lambda_bar},
      {"bound_e", r.bound_e},
      {"bound_e_statement", optional_json(r.bound_e_statement)},
      {"prob_factor", closed_form ? json(r.prob_factor) : json(nullptr)},
      {"prob_factor_statement", closed_form ? json(r.prob_factor_statement) : json(nullptr)},
      {"bound_state", optional_json(r.bound_state)},
      {"measured_e", r.measured_e},
      {"measured_state", optional_json(r.measured_state)},
      {"predicted_value", optional_json(r.predicted_value)},
      {"pi", to_json(r.pi)},
      {"sound", r.sound()},
  };
}

inline json to_json(const EnsembleStats& s) {
  json quantiles = json::array();
  for (const auto& q : s.gap_quantiles) {
    quantiles.push_back({{"min", q.min}, {"q25", q.q25}, {"median", q.median}, {"q75", q.q75}, {"max", q.max}});
  }
  json monotone = json::array();
  for (bool b : s.per_run_monotone) monotone.push_back(b);
  return {
      {"n_runs", s.n_runs},
      {"horizon", s.horizon},
      {"seed", s.seed},
      {"continuous_limit", s.continuous_limit},
      {"mean_state", to_json(s.mean_state)},
      {"std_error", to_json(s.std_error)},
      {"predicted_value", optional_json(s.predicted_value)},
      {"expected_state", to_json(s.expected_state)},
      {"max_abs_deviation", s.max_abs_deviation},
      {"max_z", std::isfinite(s.max_z) ? json(s.max_z) : json(nullptr)},
      {"checkpoints", s.checkpoints},
      {"gap_quantiles", quantiles},
      {"epsilons", s.epsilons},
      {"prob_exceed", s.prob_exceed},
      {"per_run_monotone", monotone},
      {"all_monotone", s.all_monotone},
      {"worst_gap_increase", s.worst_gap_increase},
      {"terminal_gap_threshold", s.terminal_gap_threshold},
      {"terminal_below_fraction", s.terminal_below_fraction},
      {"switch_counts", s.switch_counts},
  };
}

// checkpoint,min,q25,median,q75,max[,p_exceed_<eps>...]
inline void write_gap_quantiles_csv(std::ostream& os, const EnsembleStats& s) {
  os << "checkpoint,min,q25,median,q75,max";
  for (double e : s.epsilons) {
    char label[32];
    std::snprintf(label, sizeof label, "%g", e);
    os << ",p_exceed_" << label;
  }
  os << '\n';
  for (std::size_t c = 0; c < s.checkpoints.size(); ++c) {
    const auto& q = s.gap_quantiles[c];
    os << s.checkpoints[c] << ',' << format_double(q.min) << ',' << format_double(q.q25) << ','
       << format_double(q.median) << ',' << format_double(q.q75) << ',' << format_double(q.max);
    for (double p : s.prob_exceed[c]) os << ',' << format_double(p);
    os << '\n';
  }
}

}  // namespace dcons::io
