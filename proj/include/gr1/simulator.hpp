#pragma once

// Monte-Carlo harness for the corridor scenarios: sample an event, reveal its
// refinement path as the ego approaches, run the strategy closed-loop, and
// aggregate per-action histograms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "gr1/corridor.hpp"
#include "gr1/refinement_tree.hpp"
#include "gr1/strategy.hpp"

namespace gr1::sim {

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mode { Baseline, Incremental };

inline const char* to_string(Mode m) { return m == Mode::Baseline ? "baseline" : "incremental"; }
inline Mode mode_from_string(const std::string& s) {
  if (s == "baseline") return Mode::Baseline;
  if (s == "incremental") return Mode::Incremental;
  throw SimulationError("unknown mode '" + s + "' (expected baseline or incremental)");
}

inline constexpr const char* kNoEvent = "none";
inline constexpr const char* kNoEventLabel = "no_event";
inline constexpr const char* kInfeasible = "infeasible";

// Detection probability per step, indexed by cell distance 0..horizon.
struct DetectionSchedule {
  std::vector<double> derived;
  std::vector<double> ground;
  std::map<std::size_t, std::vector<double>> by_depth;  // overrides for specific tree depths

  // Derived levels p = 0.9 within the horizon; the ground level p = 0.3 until
  // two cells out, then 0.9.
  static DetectionSchedule standard(std::size_t horizon) {
    DetectionSchedule s;
    s.derived.assign(horizon + 1, 0.9);
    for (std::size_t d = 0; d <= horizon; ++d) s.ground.push_back(d > 2 ? 0.3 : 0.9);
    return s;
  }

  double probability(std::size_t depth, bool leaf, std::size_t distance) const {
    auto it = by_depth.find(depth);
    const std::vector<double>& row = it != by_depth.end() ? it->second : leaf ? ground : derived;
    return distance < row.size() ? row[distance] : 0.0;
  }
};

struct ScenarioConfig {
  std::string name = "scenario";
  motion::CellCorridor corridor = motion::CellCorridor::unit(7, 0);
  std::size_t horizon = 4;
  RefinementTree tree;
  std::vector<std::pair<std::string, double>> ground_truth;  // leaf or "none" -> probability
  DetectionSchedule schedule = DetectionSchedule::standard(4);
  double reduced_traction = 0.0;  // probability that the event lies in a reduced-traction region
  std::vector<std::string> actions;  // histogram labels, most distant first
  Mode mode = Mode::Incremental;
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::map<std::string, std::string> specs;  // arm name -> spec path (used by the CLI)

  void validate() const {
    corridor.validate();
    if (horizon > corridor.cells - 1) throw SimulationError("horizon exceeds the corridor length");
    if (ground_truth.empty()) throw SimulationError("ground-truth distribution is empty");
    const auto leaves = partition(tree).ground;
    double total = 0.0;
    for (const auto& [e, p] : ground_truth) {
      if (!(p >= 0.0 && p <= 1.0)) throw SimulationError("probability of '" + e + "' is outside [0,1]");
      if (e != kNoEvent && !leaves.count(e)) throw SimulationError("'" + e + "' is not a ground variable of the tree");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw SimulationError("ground-truth distribution sums to " + std::to_string(total));
    auto check_row = [&](const std::vector<double>& row, const std::string& what) {
      for (double p : row)
        if (!(p >= 0.0 && p <= 1.0)) throw SimulationError(what + " probability outside [0,1]");
    };
    check_row(schedule.derived, "derived-level");
    check_row(schedule.ground, "ground-level");
    for (const auto& [d, row] : schedule.by_depth) check_row(row, "level " + std::to_string(d));
    if (!(reduced_traction >= 0.0 && reduced_traction <= 1.0))
      throw SimulationError("reduced_traction probability outside [0,1]");
    if (trials == 0) throw SimulationError("trial count must be at least 1");
  }
};

// Per-trial random stream: a 64-bit Mersenne Twister seeded from (master, trial).
class TrialRng {
 public:
  TrialRng(std::uint64_t master, std::uint64_t trial) : eng_(mix(mix(master) ^ (trial + 0x632be59bd9b4e019ULL))) {}
  explicit TrialRng(std::uint64_t seed) : eng_(mix(seed)) {}

  // Uniform in [0,1) with 53 random bits; identical on every platform.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  std::mt19937_64 eng_;
};

inline std::string sample_ground_truth(const ScenarioConfig& cfg, TrialRng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (const auto& [e, p] : cfg.ground_truth) {
    acc += p;
    if (u < acc) return e;
  }
  for (auto it = cfg.ground_truth.rbegin(); it != cfg.ground_truth.rend(); ++it)
    if (it->second > 0.0) return it->first;
  return cfg.ground_truth.back().first;
}

// What perception has established about the event so far: a root-prefix of
// the root-to-leaf path of the ground-truth node.
struct WorldState {
  std::string event = kNoEvent;
  std::vector<std::string> path;  // root .. leaf
  std::size_t revealed = 0;       // number of path nodes detected
  bool reduced_traction = false;

  std::vector<std::string> known() const { return {path.begin(), path.begin() + static_cast<std::ptrdiff_t>(revealed)}; }
};

inline WorldState make_world(const ScenarioConfig& cfg, const std::string& event, bool reduced_traction) {
  WorldState w;
  w.event = event;
  w.reduced_traction = reduced_traction;
  if (event != kNoEvent) w.path = cfg.tree.path_to(event);
  return w;
}

// One step of perception at `distance` cells from the event, using a single
// uniform draw u. Incremental: successive path levels are detected while u is
// below their probability. Baseline: only the ground variable is observable;
// detecting it reveals the whole path at once.
inline std::vector<std::string> reveal(WorldState& w, const ScenarioConfig& cfg, Mode mode, std::size_t distance,
                                       double u) {
  std::vector<std::string> fresh;
  if (w.path.empty() || distance > cfg.horizon || w.revealed == w.path.size()) return fresh;
  if (mode == Mode::Incremental) {
    while (w.revealed < w.path.size()) {
      const std::size_t depth = w.revealed;
      const bool leaf = depth + 1 == w.path.size();
      if (!(u < cfg.schedule.probability(depth, leaf, distance))) break;
      fresh.push_back(w.path[w.revealed++]);
    }
  } else {
    if (u < cfg.schedule.probability(w.path.size() - 1, true, distance))
      while (w.revealed < w.path.size()) fresh.push_back(w.path[w.revealed++]);
  }
  return fresh;
}

struct TrialStep {
  std::size_t cell = 0;
  Valuation env;
  Valuation sys;
};

struct TrialResult {
  std::size_t trial = 0;
  std::string event = kNoEvent;
  std::map<std::string, std::size_t> detection_cell;  // tree node -> cell where first detected
  std::string action = kNoEventLabel;
  std::optional<std::size_t> commit_cell;
  double s = 0.0;
  bool infeasible = false;
  std::vector<TrialStep> steps;

  Trace trace() const {
    Trace t;
    for (const auto& st : steps) t.steps.push_back({st.env, st.sys});
    return t;
  }
};

namespace detail {

inline std::string dist_value(std::size_t distance, std::size_t horizon) {
  return distance > horizon ? "far" : "d" + std::to_string(distance);
}

inline void check_compatible(const Strategy& strat, const ScenarioConfig& cfg) {
  const auto nodes = cfg.tree.nodes();
  const std::set<std::string> tree_nodes(nodes.begin(), nodes.end());
  for (const auto& v : strat.env_space().vars()) {
    if (v.name == "dist" || v.name == "reduced_traction" || tree_nodes.count(v.name)) continue;
    throw SimulationError("strategy env variable '" + v.name + "' is not driven by scenario '" + cfg.name + "'");
  }
  if (strat.env_space().position("dist") < 0) throw SimulationError("strategy has no 'dist' env variable");
  for (const auto& a : cfg.actions)
    if (strat.sys_space().position(a) < 0) throw SimulationError("action '" + a + "' is not a system variable");
}

}  // namespace detail

inline TrialResult run_trial(const Strategy& strat, const ScenarioConfig& cfg, std::size_t trial) {
  detail::check_compatible(strat, cfg);
  TrialRng rng(cfg.seed, trial);
  TrialResult r;
  r.trial = trial;
  r.event = sample_ground_truth(cfg, rng);
  const bool rt = rng.uniform() < cfg.reduced_traction;
  WorldState w = make_world(cfg, r.event, rt && r.event != kNoEvent);

  const auto& env = strat.env_space();
  std::optional<std::uint32_t> node;
  const std::size_t start = cfg.corridor.cells - 1;
  for (std::size_t t = 0;; ++t) {
    const std::size_t cell = start - t;
    const std::size_t distance = cell - cfg.corridor.target;
    const double u = rng.uniform();
    if (t > 0)
      for (const auto& n : reveal(w, cfg, cfg.mode, distance, u)) r.detection_cell.emplace(n, cell);

    Valuation x;
    const auto known = w.known();
    for (const auto& v : env.vars()) {
      if (v.name == "dist") {
        x[v.name] = detail::dist_value(distance, cfg.horizon);
        if (v.value_index(x[v.name]) < 0)
          throw SimulationError("dist value '" + x[v.name] + "' is not in the spec's domain");
      } else if (v.name == "reduced_traction") {
        x[v.name] = w.reduced_traction && distance <= cfg.horizon ? "true" : "false";
      } else {
        x[v.name] = std::find(known.begin(), known.end(), v.name) != known.end() ? "true" : "false";
      }
    }
    const std::size_t xi = env.from_valuation(x);
    node = t == 0 ? strat.initial(xi) : strat.step(*node, xi);
    if (!node)
      throw SimulationError("scenario input at cell c" + std::to_string(cell) +
                            " violates the spec's environment assumptions");
    Valuation y = strat.output(*node);
    for (const auto& a : cfg.actions)
      if (y.count(a) && y.at(a) == "true" && !r.commit_cell) r.commit_cell = cell;
    r.steps.push_back({cell, std::move(x), std::move(y)});
    if (cell == cfg.corridor.target) break;
  }

  const Valuation& last = r.steps.back().sys;
  std::optional<std::string> final_action;
  for (const auto& a : cfg.actions)
    if (last.count(a) && last.at(a) == "true") final_action = a;
  if (r.event == kNoEvent) {
    r.action = final_action.value_or(kNoEventLabel);
  } else if (!final_action || *final_action == kInfeasible) {
    r.action = kInfeasible;
    r.infeasible = true;
    r.s = 0.0;
  } else {
    r.action = *final_action;
    r.s = motion::performance(cfg.corridor, *r.commit_cell);
  }
  if (!final_action) r.commit_cell.reset();
  return r;
}

struct ActionStats {
  std::size_t count = 0;
  double mean_s = 0.0;
};

struct Histogram {
  std::string scenario;
  Mode mode = Mode::Incremental;
  std::vector<std::string> labels;           // fixed order: actions then no_event
  std::map<std::string, ActionStats> bins;
  std::size_t trials = 0;
  std::size_t event_trials = 0;
  double mean_s = 0.0;          // over event trials
  double infeasible_rate = 0.0; // over event trials

  bool operator==(const Histogram& o) const {
    auto same = [](const ActionStats& a, const ActionStats& b) { return a.count == b.count && a.mean_s == b.mean_s; };
    if (labels != o.labels || trials != o.trials || event_trials != o.event_trials || mean_s != o.mean_s ||
        infeasible_rate != o.infeasible_rate)
      return false;
    for (const auto& l : labels)
      if (!same(bins.at(l), o.bins.at(l))) return false;
    return true;
  }
};

inline Histogram aggregate(const ScenarioConfig& cfg, const std::vector<TrialResult>& results) {
  Histogram h;
  h.scenario = cfg.name;
  h.mode = cfg.mode;
  h.labels = cfg.actions;
  if (std::find(h.labels.begin(), h.labels.end(), kInfeasible) == h.labels.end()) h.labels.push_back(kInfeasible);
  h.labels.push_back(kNoEventLabel);
  for (const auto& l : h.labels) h.bins[l] = {};
  std::map<std::string, double> sums;
  double total_s = 0.0;
  std::size_t infeasible = 0;
  for (const auto& r : results) {
    if (!h.bins.count(r.action)) throw SimulationError("trial produced unknown action '" + r.action + "'");
    ++h.bins[r.action].count;
    sums[r.action] += r.s;
    ++h.trials;
    if (r.event == kNoEvent) continue;
    ++h.event_trials;
    total_s += r.s;
    infeasible += r.infeasible;
  }
  for (auto& [l, b] : h.bins)
    if (b.count) b.mean_s = sums[l] / static_cast<double>(b.count);
  if (h.event_trials) {
    h.mean_s = total_s / static_cast<double>(h.event_trials);
    h.infeasible_rate = static_cast<double>(infeasible) / static_cast<double>(h.event_trials);
  }
  return h;
}

struct Experiment {
  std::vector<TrialResult> trials;
  Histogram histogram;
};

// Trials are independent; with threads > 1 they are split across workers and
// gathered in trial order, so the result does not depend on the thread count.
inline Experiment run_experiment(const Strategy& strat, const ScenarioConfig& cfg) {
  cfg.validate();
  detail::check_compatible(strat, cfg);
  Experiment ex;
  ex.trials.resize(cfg.trials);
  const std::size_t workers = std::max<std::size_t>(1, std::min(cfg.threads, cfg.trials));
  if (workers == 1) {
    for (std::size_t i = 0; i < cfg.trials; ++i) ex.trials[i] = run_trial(strat, cfg, i);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < cfg.trials; i += workers) ex.trials[i] = run_trial(strat, cfg, i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  ex.histogram = aggregate(cfg, ex.trials);
  return ex;
}

struct ComparisonReport {
  double mean_s_baseline = 0.0;
  double mean_s_incremental = 0.0;
  double mean_s_delta = 0.0;           // incremental - baseline
  double infeasible_rate_delta = 0.0;  // incremental - baseline
  std::vector<std::string> labels;
  std::map<std::string, long> count_delta;  // incremental - baseline
};

inline ComparisonReport compare(const Histogram& baseline, const Histogram& incremental) {
  if (baseline.labels != incremental.labels) throw SimulationError("histograms use different action labels");
  if (baseline.trials != incremental.trials) throw SimulationError("histograms have different trial counts");
  ComparisonReport c;
  c.mean_s_baseline = baseline.mean_s;
  c.mean_s_incremental = incremental.mean_s;
  c.mean_s_delta = incremental.mean_s - baseline.mean_s;
  c.infeasible_rate_delta = incremental.infeasible_rate - baseline.infeasible_rate;
  c.labels = baseline.labels;
  for (const auto& l : c.labels)
    c.count_delta[l] =
        static_cast<long>(incremental.bins.at(l).count) - static_cast<long>(baseline.bins.at(l).count);
  return c;
}

// ---- serialization ---------------------------------------------------------

inline nlohmann::ordered_json to_json(const Histogram& h) {
  nlohmann::ordered_json bins = nlohmann::ordered_json::array();
  for (const auto& l : h.labels)
    bins.push_back({{"action", l}, {"count", h.bins.at(l).count}, {"mean_s", h.bins.at(l).mean_s}});
  return {{"scenario", h.scenario},   {"mode", to_string(h.mode)},         {"trials", h.trials},
          {"event_trials", h.event_trials}, {"mean_s", h.mean_s}, {"infeasible_rate", h.infeasible_rate},
          {"bins", bins}};
}

inline std::string to_csv(const Histogram& h) {
  std::string out = "action,count,mean_s\n";
  char buf[64];
  for (const auto& l : h.labels) {
    std::snprintf(buf, sizeof buf, ",%zu,%.6f\n", h.bins.at(l).count, h.bins.at(l).mean_s);
    out += l + buf;
  }
  return out;
}

inline nlohmann::ordered_json to_json(const ComparisonReport& c) {
  nlohmann::ordered_json deltas = nlohmann::ordered_json::array();
  for (const auto& l : c.labels) deltas.push_back({{"action", l}, {"count_delta", c.count_delta.at(l)}});
  return {{"mean_s_baseline", c.mean_s_baseline},
          {"mean_s_incremental", c.mean_s_incremental},
          {"mean_s_delta", c.mean_s_delta},
          {"infeasible_rate_delta", c.infeasible_rate_delta},
          {"actions", deltas}};
}

inline nlohmann::ordered_json to_json(const TrialResult& r) {
  nlohmann::ordered_json steps = nlohmann::ordered_json::array();
  for (const auto& s : r.steps) steps.push_back({{"cell", s.cell}, {"env", s.env}, {"sys", s.sys}});
  nlohmann::ordered_json j = {{"trial", r.trial}, {"event", r.event}, {"action", r.action}, {"s", r.s},
                              {"infeasible", r.infeasible}};
  j["commit_cell"] = r.commit_cell ? nlohmann::ordered_json(*r.commit_cell) : nlohmann::ordered_json(nullptr);
  j["detection_cell"] = r.detection_cell;
  j["steps"] = steps;
  return j;
}

// Scenario file. Relative paths (tree, corridor, specs) resolve against base_dir.
//
// {"name": "yield", "corridor": {...} | "path", "horizon": 4, "tree": {...} | "path",
//  "ground_truth": {"exact_sign": 0.9, "none": 0.1},
//  "schedule": {"derived": [..], "ground": [..], "depth": {"2": [..]}},
//  "reduced_traction": 0.0, "actions": [...], "trials": 100, "seed": 7,
//  "specs": {"baseline": "path", "incremental": "path"}}
inline ScenarioConfig scenario_from_json(const nlohmann::json& j, const std::string& base_dir = ".") {
  auto resolve = [&](const std::string& p) { return p.empty() || p[0] == '/' ? p : base_dir + "/" + p; };
  auto load = [&](const nlohmann::json& v) {
    return v.is_string() ? nlohmann::json::parse(read_text_file(resolve(v.get<std::string>()))) : v;
  };
  ScenarioConfig c;
  c.name = j.value("name", std::string("scenario"));
  if (j.contains("corridor")) c.corridor = motion::corridor_from_json(load(j.at("corridor")));
  c.horizon = j.value("horizon", std::size_t{4});
  c.tree = tree_from_json(load(j.at("tree")));
  for (const auto& [k, v] : j.at("ground_truth").items()) c.ground_truth.emplace_back(k, v.get<double>());
  c.schedule = DetectionSchedule::standard(c.horizon);
  if (j.contains("schedule")) {
    const auto& s = j.at("schedule");
    if (s.contains("derived")) c.schedule.derived = s.at("derived").get<std::vector<double>>();
    if (s.contains("ground")) c.schedule.ground = s.at("ground").get<std::vector<double>>();
    if (s.contains("depth"))
      for (const auto& [k, v] : s.at("depth").items())
        c.schedule.by_depth[std::stoul(k)] = v.get<std::vector<double>>();
  }
  c.reduced_traction = j.value("reduced_traction", 0.0);
  c.actions = j.at("actions").get<std::vector<std::string>>();
  if (j.contains("mode")) c.mode = mode_from_string(j.at("mode").get<std::string>());
  c.trials = j.value("trials", std::size_t{100});
  c.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("specs"))
    for (const auto& [k, v] : j.at("specs").items()) c.specs[k] = resolve(v.get<std::string>());
  c.validate();
  return c;
}

}  // namespace gr1::sim
