// gr1ctl: check, synthesize, simulate and export GR(1) perception/control specs.
//
// Exit codes: 0 success, 1 domain failure, 2 usage or IO error.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gr1/gr1.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr int kOk = 0;
constexpr int kDomain = 1;
constexpr int kUsage = 2;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json read_json(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw DomainError(path + ": " + e.what());
  }
}

std::size_t state_cap() {
  const char* v = std::getenv("GR1_STATE_CAP");
  if (!v || !*v) return gr1::kDefaultStateCap;
  char* end = nullptr;
  const unsigned long long n = std::strtoull(v, &end, 10);
  if (*end != '\0' || n == 0) throw CLI::ValidationError("GR1_STATE_CAP", "must be a positive integer");
  return static_cast<std::size_t>(n);
}

// Files are collected in memory and written in one go into a sibling staging
// directory, which is then renamed into place.
class OutputDir {
 public:
  explicit OutputDir(std::string path) : path_(std::move(path)) {}

  void add(const std::string& name, std::string content) { files_[name] = std::move(content); }

  void commit(const std::set<std::string>& replaceable) const {
    const fs::path out(path_);
    if (fs::exists(out)) {
      if (!fs::is_directory(out)) throw IoError("'" + path_ + "' exists and is not a directory");
      for (const auto& e : fs::directory_iterator(out)) {
        const std::string n = e.path().filename().string();
        if (!e.is_regular_file() || (!replaceable.count(n) && !files_.count(n)))
          throw IoError("'" + path_ + "' already contains '" + n + "'; refusing to replace it");
      }
    }
    const fs::path parent = out.has_parent_path() ? out.parent_path() : fs::path(".");
    std::error_code ec;
    fs::create_directories(parent, ec);
    const fs::path stage = parent / (out.filename().string() + ".partial");
    fs::remove_all(stage, ec);
    if (!fs::create_directory(stage, ec)) throw IoError("cannot create '" + stage.string() + "'");
    for (const auto& [name, content] : files_) {
      std::ofstream f(stage / name, std::ios::binary);
      f << content;
      if (!f) throw IoError("cannot write '" + (stage / name).string() + "'");
    }
    if (fs::exists(out)) fs::remove_all(out);
    fs::rename(stage, out, ec);
    if (ec) throw IoError("cannot move output into '" + path_ + "': " + ec.message());
  }

 private:
  std::string path_;
  std::map<std::string, std::string> files_;
};

void write_text(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  f << content;
  if (!f) throw IoError("cannot write '" + path + "'");
}

gr1::GR1Spec load_spec_checked(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return gr1::parse_spec(text);
  } catch (const gr1::ParseError& e) {
    throw DomainError(path + ":" + e.what());
  }
}

// ---- check -----------------------------------------------------------------

int cmd_check(const std::string& spec_path, const std::string& tree_path) {
  const std::string text = read_file(spec_path);
  gr1::GR1Spec spec;
  try {
    gr1::ParseOptions opts;
    opts.validate = false;
    spec = gr1::parse_spec(text, opts);
  } catch (const gr1::ParseError& e) {
    std::cerr << spec_path << ":" << e.what() << "\n";
    return kDomain;
  }
  const auto diags = gr1::validate_spec(spec);
  for (const auto& d : diags) std::cerr << spec_path << ": " << d.to_string() << "\n";
  int rc = diags.empty() ? kOk : kDomain;
  if (!tree_path.empty()) {
    try {
      const auto tree = gr1::tree_from_json(read_json(tree_path));
      const auto p = gr1::partition(tree);
      for (const auto& n : tree.nodes())
        if (!spec.find(n)) {
          std::cerr << tree_path << ": tree node '" << n << "' is not a variable of the spec\n";
          rc = kDomain;
        }
      std::cout << "tree: " << tree.nodes().size() << " nodes, " << p.derived.size() << " derived, "
                << p.ground.size() << " ground\n";
    } catch (const gr1::TreeError& e) {
      std::cerr << tree_path << ": " << e.what() << "\n";
      rc = kDomain;
    }
  }
  std::size_t env = spec.vars_of(gr1::Owner::Environment).size(), sys = spec.vars_of(gr1::Owner::System).size();
  std::cout << (rc == kOk ? "OK" : "INVALID") << ": " << env << " env vars, " << sys << " sys vars, "
            << spec.env_safety.size() << " env safety, " << spec.sys_safety.size() << " sys safety, "
            << spec.env_progress.size() << " env goals, " << spec.sys_progress.size() << " sys goals\n";
  return rc;
}

// ---- synth -----------------------------------------------------------------

const std::set<std::string> kSynthFiles{"strategy.json", "strategy.dot", "stats.json"};

int cmd_synth(const std::string& spec_path, const std::string& out, bool strict, bool require) {
  const auto spec = load_spec_checked(spec_path);
  gr1::GameOptions opt;
  opt.strict = strict;
  opt.state_cap = state_cap();
  const auto t0 = std::chrono::steady_clock::now();
  gr1::Synthesis syn;
  try {
    syn = gr1::synthesize(spec, opt);
  } catch (const gr1::GameError& e) {
    throw DomainError(e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const auto& st = syn.result.stats;
  ordered_json stats = {{"spec", fs::path(spec_path).filename().string()},
                        {"realizable", syn.result.realizable},
                        {"strict", strict},
                        {"env_valuations", syn.game.env.size()},
                        {"sys_valuations", syn.game.sys.size()},
                        {"states", st.states},
                        {"env_moves", st.moves},
                        {"edges", st.edges},
                        {"winning_states", syn.result.winning.count()},
                        {"z_iterations", st.z_iterations},
                        {"y_iterations", st.y_iterations},
                        {"x_iterations", st.x_iterations},
                        {"strategy_nodes", syn.strategy ? syn.strategy->size() : 0}};
  if (!out.empty()) {
    OutputDir dir(out);
    dir.add("stats.json", stats.dump(2) + "\n");
    if (syn.strategy) {
      dir.add("strategy.json", gr1::to_json(*syn.strategy).dump(1) + "\n");
      dir.add("strategy.dot", gr1::to_dot(*syn.strategy));
    }
    dir.commit(kSynthFiles);
  }
  std::cout << (syn.result.realizable ? "REALIZABLE" : "UNREALIZABLE") << "\n";
  std::printf("states %zu, strategy nodes %zu, %.3f s\n", st.states, syn.strategy ? syn.strategy->size() : 0,
              secs);
  return require && !syn.result.realizable ? kDomain : kOk;
}

// ---- simulate --------------------------------------------------------------

gr1::Strategy strategy_for_arm(const gr1::sim::ScenarioConfig& cfg, const std::string& arm,
                               const std::map<std::string, std::string>& given, bool strict) {
  if (auto it = given.find(arm); it != given.end()) {
    try {
      return gr1::strategy_from_json(read_json(it->second));
    } catch (const gr1::StrategyError& e) {
      throw DomainError(it->second + ": " + e.what());
    }
  }
  auto sp = cfg.specs.find(arm);
  if (sp == cfg.specs.end())
    throw DomainError("no strategy given for arm '" + arm + "' and the scenario names no spec for it");
  gr1::GameOptions opt;
  opt.strict = strict;
  opt.state_cap = state_cap();
  auto syn = gr1::synthesize(load_spec_checked(sp->second), opt);
  if (!syn.strategy) throw DomainError("spec for arm '" + arm + "' is unrealizable");
  return *syn.strategy;
}

int cmd_simulate(const std::string& scenario_path, const std::vector<std::string>& strategy_args,
                 const std::string& arms, std::optional<std::size_t> trials, std::optional<std::uint64_t> seed,
                 std::size_t threads, const std::string& out, bool strict) {
  const json j = read_json(scenario_path);
  gr1::sim::ScenarioConfig base;
  try {
    base = gr1::sim::scenario_from_json(j, fs::path(scenario_path).parent_path().string().empty()
                                               ? "."
                                               : fs::path(scenario_path).parent_path().string());
  } catch (const std::runtime_error& e) {
    throw DomainError(scenario_path + ": " + e.what());
  }
  if (trials) base.trials = *trials;
  if (seed) base.seed = *seed;
  base.threads = threads;

  std::map<std::string, std::string> given;
  for (const auto& s : strategy_args) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      if (arms == "both") throw CLI::ValidationError("--strategy", "use arm=PATH when simulating both arms");
      given[arms] = s;
    } else {
      given[s.substr(0, eq)] = s.substr(eq + 1);
    }
  }

  std::vector<std::string> run = arms == "both" ? std::vector<std::string>{"baseline", "incremental"}
                                                : std::vector<std::string>{arms};
  const bool both = run.size() == 2;
  OutputDir dir(out);
  std::map<std::string, gr1::sim::Histogram> hist;
  std::set<std::string> names;
  for (const auto& arm : run) {
    gr1::sim::ScenarioConfig cfg = base;
    cfg.mode = gr1::sim::mode_from_string(arm);
    const auto strat = strategy_for_arm(cfg, arm, given, strict);
    gr1::sim::Experiment ex;
    try {
      ex = gr1::sim::run_experiment(strat, cfg);
    } catch (const gr1::sim::SimulationError& e) {
      throw DomainError(arm + ": " + e.what());
    }
    const std::string suffix = both ? "." + arm : "";
    std::string lines;
    for (const auto& t : ex.trials) lines += gr1::sim::to_json(t).dump() + "\n";
    dir.add("histogram" + suffix + ".json", gr1::sim::to_json(ex.histogram).dump(2) + "\n");
    dir.add("histogram" + suffix + ".csv", gr1::sim::to_csv(ex.histogram));
    dir.add("traces" + suffix + ".jsonl", lines);
    hist[arm] = ex.histogram;
    std::printf("%-12s trials %zu, event trials %zu, mean s %.3f, infeasible rate %.3f\n", arm.c_str(),
                ex.histogram.trials, ex.histogram.event_trials, ex.histogram.mean_s, ex.histogram.infeasible_rate);
  }
  if (both) {
    const auto rep = gr1::sim::compare(hist.at("baseline"), hist.at("incremental"));
    dir.add("comparison.json", gr1::sim::to_json(rep).dump(2) + "\n");
    std::printf("mean s delta (incremental - baseline) %+.3f\n", rep.mean_s_delta);
  }
  if (!out.empty()) {
    std::set<std::string> replaceable{"comparison.json"};
    for (const char* a : {"", ".baseline", ".incremental"})
      for (const char* f : {"histogram%s.json", "histogram%s.csv", "traces%s.jsonl"}) {
        char buf[64];
        std::snprintf(buf, sizeof buf, f, a);
        replaceable.insert(buf);
      }
    dir.commit(replaceable);
  }
  return kOk;
}

// ---- report ----------------------------------------------------------------

int cmd_report(const std::string& dir) {
  if (!fs::is_directory(dir)) throw IoError("'" + dir + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string n = e.path().filename().string();
    if (n.rfind("histogram", 0) == 0 && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no histogram files in '" + dir + "'");
  for (const auto& f : files) {
    const json h = read_json(f.string());
    std::printf("%s (%s): %zu trials, %zu with an event, mean s %.3f, infeasible rate %.3f\n",
                h.at("scenario").get<std::string>().c_str(), h.at("mode").get<std::string>().c_str(),
                h.at("trials").get<std::size_t>(), h.at("event_trials").get<std::size_t>(),
                h.at("mean_s").get<double>(), h.at("infeasible_rate").get<double>());
    std::printf("  %-14s %6s %8s\n", "action", "count", "mean_s");
    for (const auto& b : h.at("bins"))
      std::printf("  %-14s %6zu %8.3f\n", b.at("action").get<std::string>().c_str(), b.at("count").get<std::size_t>(),
                  b.at("mean_s").get<double>());
  }
  const fs::path cmp = fs::path(dir) / "comparison.json";
  if (fs::exists(cmp)) {
    const json c = read_json(cmp.string());
    std::printf("incremental - baseline: mean s %+.3f, infeasible rate %+.3f\n", c.at("mean_s_delta").get<double>(),
                c.at("infeasible_rate_delta").get<double>());
  }
  return kOk;
}

// ---- export-dot ------------------------------------------------------------

int cmd_export_dot(const std::string& tree, const std::string& strategy, const std::string& corridor,
                   bool movement, const std::string& out) {
  const int given = !tree.empty() + !strategy.empty() + !corridor.empty();
  if (given != 1) throw CLI::ValidationError("export-dot", "give exactly one of --tree, --strategy, --corridor");
  try {
    if (!tree.empty()) write_text(out, gr1::to_dot(gr1::tree_from_json(read_json(tree))));
    if (!strategy.empty()) write_text(out, gr1::to_dot(gr1::strategy_from_json(read_json(strategy))));
    if (!corridor.empty()) {
      const auto c = gr1::motion::corridor_from_json(read_json(corridor));
      write_text(out, movement ? gr1::motion::to_dot(gr1::motion::movement_abstraction(c).ts, "movement")
                               : gr1::motion::to_dot(gr1::motion::cell_transition_system(c), "cells"));
    }
  } catch (const gr1::TreeError& e) {
    throw DomainError(e.what());
  } catch (const gr1::StrategyError& e) {
    throw DomainError(e.what());
  } catch (const gr1::motion::MotionError& e) {
    throw DomainError(e.what());
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GR(1) synthesis for perception-aware reactive planning"};
  app.require_subcommand(1);

  std::string spec, tree, corridor, scenario, out, arms = "incremental", dir;
  std::vector<std::string> strategies;
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
  bool require = false, non_strict = false, strict_flag = false, movement = false;

  auto* check = app.add_subcommand("check", "validate a spec (and optionally a refinement tree)");
  check->add_option("--spec", spec, "spec file")->required();
  check->add_option("--tree", tree, "refinement tree JSON");

  auto* synth = app.add_subcommand("synth", "decide realizability and write the strategy");
  synth->add_option("--spec", spec, "spec file")->required();
  synth->add_option("--out", out, "output directory (strategy.json, strategy.dot, stats.json)");
  synth->add_flag("--require-realizable", require, "exit 1 when the spec is unrealizable");
  auto* s1 = synth->add_flag("--strict", strict_flag, "strict realizability (default)");
  auto* s2 = synth->add_flag("--non-strict", non_strict, "plain implication between assumptions and guarantees");
  s1->excludes(s2);

  auto* sim = app.add_subcommand("simulate", "run a corridor scenario closed-loop");
  sim->add_option("--scenario", scenario, "scenario JSON")->required();
  sim->add_option("--strategy", strategies, "strategy JSON, as ARM=PATH (repeatable)");
  sim->add_option("--arms", arms, "baseline, incremental or both")
      ->check(CLI::IsMember({"baseline", "incremental", "both"}));
  sim->add_option("--trials", trials, "number of trials")->check(CLI::PositiveNumber);
  sim->add_option("--seed", seed, "master seed");
  sim->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  sim->add_option("--out", out, "output directory");
  auto* m1 = sim->add_flag("--strict", strict_flag, "synthesize strictly (default)");
  auto* m2 = sim->add_flag("--non-strict", non_strict, "synthesize non-strictly");
  m1->excludes(m2);

  auto* report = app.add_subcommand("report", "summarize the outputs of simulate");
  report->add_option("--dir", dir, "directory written by simulate")->required();

  auto* dot = app.add_subcommand("export-dot", "write a DOT graph");
  dot->add_option("--tree", tree, "refinement tree JSON");
  dot->add_option("--strategy", spec, "strategy JSON");
  dot->add_option("--corridor", corridor, "corridor JSON");
  dot->add_flag("--movement", movement, "with --corridor: the movement abstraction instead of the cells");
  dot->add_option("--out", out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*check) return cmd_check(spec, tree);
    if (*synth) return cmd_synth(spec, out, !non_strict, require);
    if (*sim) return cmd_simulate(scenario, strategies, arms, trials, seed, threads, out, !non_strict);
    if (*report) return cmd_report(dir);
    if (*dot) return cmd_export_dot(tree, spec, corridor, movement, out);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDomain;
  }
  return kUsage;
}
