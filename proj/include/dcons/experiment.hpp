#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dcons/analysis.hpp"
#include "dcons/io.hpp"
#include "dcons/switching.hpp"
#include "dcons/verify.hpp"

namespace dcons {

enum class Analysis { simulate, bounds, montecarlo };

inline std::set<Analysis> parse_analyses(const std::string& name) {
  if (name == "all") return {Analysis::simulate, Analysis::bounds, Analysis::montecarlo};
  if (name == "simulate") return {Analysis::simulate};
  if (name == "bounds") return {Analysis::bounds};
  if (name == "montecarlo") return {Analysis::montecarlo};
  throw ConfigError("unknown analysis '" + name + "' (expected simulate|bounds|montecarlo|all)");
}

// Parsed experiment document. Graph references are resolved, so `resolved`
// (and its digest) captures everything that influences the results.
struct ExperimentConfig {
  std::vector<Graph> graphs;
  std::vector<double> probs;
  std::size_t base_index = 0;
  std::optional<ScenarioForm> scenario;
  SamplingScheme sampling;
  Vector x0;
  std::size_t horizon = 200;
  std::size_t n_runs = 1000;
  std::vector<double> epsilons;
  std::uint64_t seed = 0;
  double terminal_gap_threshold = kDefaultTerminalGap;
  std::size_t checkpoint_stride = 0;
  unsigned threads = 0;
  std::set<Analysis> analyses;

  io::json resolved;
  std::string digest;

  SwitchingEnsemble ensemble() const { return SwitchingEnsemble(graphs, probs, base_index, scenario); }
};

namespace detail {

inline io::json resolve_graph(const io::json& ref, const std::filesystem::path& base_dir) {
  if (ref.is_string()) {
    std::filesystem::path p = ref.get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    return io::read_json_file(p);
  }
  if (ref.is_object()) return ref;
  throw ConfigError("graph reference must be a file path or an inline graph object");
}

inline std::set<Index> index_set(const io::json& j, const char* key) {
  std::set<Index> out;
  if (j.contains(key)) {
    for (const auto& v : j.at(key)) out.insert(v.get<Index>());
  }
  return out;
}

}  // namespace detail

// Two ensemble forms are accepted:
//   "scenario": {"base": <graph>, "kind": "receive"|"send", "faulty": [a, b]}
//       expands to [a faulty, b faulty, both, none], base_index 3;
//   "ensemble": [{"graph": <graph>, "receive_disabled": [..], "send_disabled": [..]}, ...]
//       with "base_index".
// <graph> is an inline graph object or a path relative to the config file.
inline ExperimentConfig parse_config(const io::json& doc, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  io::json resolved = doc;
  try {
    if (doc.contains("scenario") == doc.contains("ensemble")) {
      throw ConfigError("config: exactly one of \"scenario\" or \"ensemble\" is required");
    }
    cfg.probs = doc.at("probs").get<std::vector<double>>();
    if (doc.contains("scenario")) {
      const auto& sc = doc.at("scenario");
      const io::json base_json = detail::resolve_graph(sc.at("base"), base_dir);
      resolved["scenario"]["base"] = base_json;
      const std::string kind = sc.value("kind", "receive");
      if (kind != "receive" && kind != "send") throw ConfigError("config: scenario kind must be receive or send");
      const auto faulty = sc.value("faulty", std::vector<Index>{0, 1});
      if (faulty.size() != 2) throw ConfigError("config: scenario needs exactly two faulty agents");
      const SwitchingEnsemble e =
          make_scenario(io::graph_from_json(base_json), kind == "receive" ? FaultKind::receive : FaultKind::send,
                        faulty[0], faulty[1], cfg.probs);
      cfg.graphs = e.graphs();
      cfg.base_index = e.base_index();
      cfg.scenario = e.scenario();
    } else {
      std::size_t k = 0;
      for (const auto& member : doc.at("ensemble")) {
        const io::json gj = detail::resolve_graph(member.at("graph"), base_dir);
        resolved["ensemble"][k]["graph"] = gj;
        FaultSpec f{detail::index_set(member, "receive_disabled"), detail::index_set(member, "send_disabled")};
        cfg.graphs.push_back(apply_fault(io::graph_from_json(gj), f));
        ++k;
      }
      cfg.base_index = doc.value("base_index", std::size_t{0});
    }

    const double h = doc.value("h", 0.0);
    if (doc.value("continuous_limit", false)) {
      cfg.sampling = SamplingScheme::continuous(doc.at("delta").get<double>(), h);
    } else if (doc.contains("k_bar")) {
      cfg.sampling = SamplingScheme::discrete(h, doc.at("k_bar").get<std::uint64_t>());
      if (doc.contains("delta")) {
        const auto check = SamplingScheme::from_dwell(h, doc.at("delta").get<double>());
        if (check.k_bar != cfg.sampling.k_bar) throw ConfigError("config: delta disagrees with k_bar * h");
      }
    } else {
      cfg.sampling = SamplingScheme::from_dwell(h, doc.at("delta").get<double>());
    }

    const auto x0 = doc.at("x0").get<std::vector<double>>();
    cfg.x0 = Eigen::Map<const Vector>(x0.data(), static_cast<Index>(x0.size()));
    cfg.horizon = doc.value("horizon", cfg.horizon);
    cfg.n_runs = doc.value("n_runs", cfg.n_runs);
    cfg.epsilons = doc.value("epsilons", std::vector<double>{});
    cfg.seed = doc.value("seed", std::uint64_t{0});
    cfg.terminal_gap_threshold = doc.value("terminal_gap_threshold", kDefaultTerminalGap);
    cfg.checkpoint_stride = doc.value("checkpoint_stride", std::size_t{0});
    cfg.threads = doc.value("threads", 0u);

    const io::json analyses = doc.value("analyses", io::json("all"));
    if (analyses.is_string()) {
      cfg.analyses = parse_analyses(analyses.get<std::string>());
    } else {
      for (const auto& a : analyses) {
        const auto s = parse_analyses(a.get<std::string>());
        cfg.analyses.insert(s.begin(), s.end());
      }
    }
  } catch (const io::json::exception& ex) {
    throw ConfigError(std::string("config: ") + ex.what());
  }

  if (cfg.graphs.empty()) throw ConfigError("config: ensemble is empty");
  if (cfg.x0.size() != cfg.graphs.front().n()) throw ConfigError("config: x0 length differs from graph size");
  if (cfg.n_runs == 0) throw ConfigError("config: n_runs must be positive");
  for (double e : cfg.epsilons) {
    if (!(e > 0.0)) throw ConfigError("config: epsilons must be positive");
  }
  // Threads do not affect results, so they stay out of the digest.
  resolved.erase("threads");
  cfg.resolved = resolved;
  cfg.digest = io::fnv1a_hex(resolved.dump());
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(io::read_json_file(path), path.parent_path());
}

// Hypothesis checks run before any computation; each throws naming the
// failed check.
inline SwitchingEnsemble validate_experiment(const ExperimentConfig& cfg) {
  SwitchingEnsemble e = cfg.ensemble();
  require_ensemble_sampling(e, cfg.sampling, "experiment");
  if (!is_strongly_connected(expected_graph(e))) {
    throw ConnectivityError("experiment: precondition 'expected graph strongly connected' violated");
  }
  return e;
}

struct ExperimentOutcome {
  int exit_code = 0;
  std::vector<std::string> failures;
  std::vector<std::filesystem::path> files;
  std::string summary;
};

namespace detail {

inline void write_file(const std::filesystem::path& p, const std::string& body, ExperimentOutcome& out) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error("cannot write " + p.string());
  f << body;
  out.files.push_back(p);
}

}  // namespace detail

// Emits trajectory.csv, bounds.json, montecarlo.json, gap_quantiles.csv and
// summary.txt (per requested analysis) into out_dir. exit_code is 1 when a
// soundness or monotonicity assertion fails.
inline ExperimentOutcome run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                                        std::optional<std::set<Analysis>> only = std::nullopt) {
  const SwitchingEnsemble e = validate_experiment(cfg);
  const std::set<Analysis> analyses = only ? *only : cfg.analyses;
  const StateVector x0{cfg.x0, 0.0};
  std::filesystem::create_directories(out_dir);

  ExperimentOutcome out;
  std::ostringstream summary;
  summary << "config digest " << cfg.digest << ", seed " << cfg.seed << "\n";
  summary << "agents " << e.n() << ", graphs " << e.size() << ", d_max " << e.d_max() << ", "
          << (cfg.sampling.continuous_limit ? "continuous limit" : "sampled") << ", h " << cfg.sampling.h
          << ", k_bar " << cfg.sampling.k_bar << ", delta " << cfg.sampling.delta_t << "\n";
  summary << "mean(x0) " << cfg.x0.mean() << "\n";

  if (analyses.count(Analysis::simulate)) {
    const Trajectory tr = simulate(e, cfg.sampling, x0, cfg.horizon, rng::run_stream(cfg.seed, 0));
    std::ostringstream csv;
    io::write_trajectory_csv(csv, tr);
    detail::write_file(out_dir / "trajectory.csv", csv.str(), out);
    summary << "trajectory: " << tr.states.size() << " samples, terminal gap "
            << (tr.states.back().maxCoeff() - tr.states.back().minCoeff()) << "\n";
  }

  if (analyses.count(Analysis::bounds)) {
    std::vector<BoundReport> reports;
    reports.push_back(bound_theorem4(e, cfg.sampling, x0));
    if (!cfg.sampling.continuous_limit) {
      reports.push_back(bound_theorem4(e, SamplingScheme::continuous(cfg.sampling.delta_t, cfg.sampling.h), x0));
      if (cfg.sampling.k_bar == 1 && e.scenario()) {
        reports.push_back(e.scenario()->kind == FaultKind::receive ? bound_theorem5(e, cfg.sampling, x0)
                                                                   : bound_corollary1(e, cfg.sampling, x0));
      }
    }
    io::json arr = io::json::array();
    for (const auto& r : reports) {
      arr.push_back(io::to_json(r));
      summary << to_string(r.theorem) << ": bound_e " << r.bound_e << " vs measured_e " << r.measured_e
              << (r.sound() ? " (holds)" : " (VIOLATED)");
      if (r.bound_state) summary << "; bound_state " << *r.bound_state << " vs measured " << *r.measured_state;
      if (r.predicted_value) summary << "; consensus value " << *r.predicted_value;
      summary << "\n";
      if (!r.sound()) out.failures.push_back(std::string(to_string(r.theorem)) + " bound violated");
    }
    const io::json doc{{"config_digest", cfg.digest}, {"seed", cfg.seed}, {"reports", arr}};
    detail::write_file(out_dir / "bounds.json", doc.dump(2) + "\n", out);
  }

  if (analyses.count(Analysis::montecarlo)) {
    MonteCarloSpec spec;
    spec.n_runs = cfg.n_runs;
    spec.horizon = cfg.horizon;
    spec.seed = cfg.seed;
    spec.epsilons = cfg.epsilons;
    spec.checkpoint_stride = cfg.checkpoint_stride;
    spec.terminal_gap_threshold = cfg.terminal_gap_threshold;
    spec.threads = cfg.threads;
    const EnsembleStats st = run_monte_carlo(e, cfg.sampling, x0, spec);
    const io::json doc{{"config_digest", cfg.digest}, {"seed", cfg.seed}, {"stats", io::to_json(st)}};
    detail::write_file(out_dir / "montecarlo.json", doc.dump(2) + "\n", out);
    std::ostringstream csv;
    io::write_gap_quantiles_csv(csv, st);
    detail::write_file(out_dir / "gap_quantiles.csv", csv.str(), out);
    summary << "monte carlo: " << st.n_runs << " runs x " << st.horizon << " intervals; ";
    if (st.predicted_value) {
      summary << "max |mean - pi^T x0| " << st.max_abs_deviation << " (" << st.max_z << " SE); ";
    }
    summary << "gap monotone in all runs: " << (st.all_monotone ? "yes" : "NO")
            << "; terminal gap < " << st.terminal_gap_threshold << " in " << 100.0 * st.terminal_below_fraction
            << "% of runs\n";
    if (!st.all_monotone) out.failures.push_back("gap monotonicity violated");
  }

  for (const auto& f : out.failures) summary << "FAILED: " << f << "\n";
  out.exit_code = out.failures.empty() ? 0 : 1;
  out.summary = summary.str();
  detail::write_file(out_dir / "summary.txt", out.summary, out);
  return out;
}

}  // namespace dcons
