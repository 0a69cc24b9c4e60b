// Command-line front end: validate, transitions, count, run.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cwc/cwc.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kModel = 1, kIo = 2, kRuntime = 3 };

struct Loaded {
  int code = kOk;
  std::optional<cwc::ModelFile> model;
};

Loaded load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << path << ": error: [file-not-found] cannot open file\n";
    return {kIo, std::nullopt};
  }
  std::stringstream buf;
  buf << in.rdbuf();
  auto result = cwc::parse_model(buf.str());
  if (!result.ok()) {
    for (const auto& d : result.diagnostics) std::cerr << path << ":" << cwc::to_string(d) << "\n";
    if (result.diagnostics.empty()) std::cerr << path << ": error: model rejected\n";
    return {kModel, std::nullopt};
  }
  return {kOk, std::move(result.model)};
}

int cmd_validate(const std::string& path) {
  auto l = load(path);
  if (!l.model) return l.code;
  std::cout << path << ": ok (" << l.model->rules.size() << " rules, " << l.model->observables.size()
            << " observables)\n";
  return kOk;
}

int cmd_transitions(const std::string& path, bool json) {
  auto l = load(path);
  if (!l.model) return l.code;
  std::vector<cwc::Transition> ts;
  try {
    ts = cwc::enumerate_transitions(l.model->init, l.model->rules);
  } catch (const cwc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  if (json) {
    auto arr = nlohmann::json::array();
    for (const auto& t : ts) {
      arr.push_back({{"rule", t.rule_id},
                     {"path", cwc::to_string(t.path)},
                     {"outcome", cwc::format_term(t.outcome_local)},
                     {"n", t.n},
                     {"multiplicity", t.multiplicity},
                     {"rate", t.rate}});
    }
    std::cout << arr.dump(2) << "\n";
    return kOk;
  }
  for (const auto& t : ts) {
    std::cout << t.rule_id << "\t" << cwc::to_string(t.path) << "\t" << cwc::format_term(t.outcome_local)
              << "\tn=" << t.n;
    if (t.multiplicity != 1) std::cout << "\tcopies=" << t.multiplicity;
    std::cout << "\trate=" << cwc::format_number(t.rate) << "\n";
  }
  return kOk;
}

int cmd_count(const std::string& path, const std::string& rule_id, bool oracle) {
  auto l = load(path);
  if (!l.model) return l.code;
  const cwc::Rule* rule = nullptr;
  for (const auto& r : l.model->rules)
    if (r.id == rule_id) rule = &r;
  if (rule == nullptr) {
    std::cerr << "error: [unknown-rule] no rule named '" << rule_id << "'\n";
    return kModel;
  }
  const cwc::Term& state = l.model->init;
  bool agree = true;
  try {
    for (const auto& ctx : cwc::enumerate_contexts(state)) {
      const cwc::Term& content = cwc::resolve(state, ctx.path);
      auto found = cwc::local_outcomes(*rule, content);
      std::map<cwc::Term, std::uint64_t> reference;
      if (oracle) reference = cwc::oracle_outcomes(*rule, content);
      for (const auto& o : found) {
        std::cout << cwc::to_string(ctx.path) << "\t" << cwc::format_term(o.outcome) << "\tn=" << o.n;
        if (oracle) {
          auto it = reference.find(o.outcome);
          std::uint64_t m = it == reference.end() ? 0 : it->second;
          std::cout << ", oracle=" << m << (m == o.n ? ", OK" : ", MISMATCH");
          agree = agree && m == o.n;
          if (it != reference.end()) reference.erase(it);
        }
        std::cout << "\n";
      }
      for (const auto& [outcome, m] : reference) {
        std::cout << cwc::to_string(ctx.path) << "\t" << cwc::format_term(outcome) << "\tn=0, oracle=" << m
                  << ", MISMATCH\n";
        agree = false;
      }
    }
  } catch (const cwc::OracleLimitExceeded& e) {
    std::cerr << "error: [oracle-limit] " << e.what() << "\n";
    return kRuntime;
  } catch (const cwc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return agree ? kOk : kModel;
}

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<double> tmax;
  std::optional<std::uint64_t> replicates;
  std::optional<double> sample;
  std::optional<std::uint64_t> max_events;
  std::string out_dir = "cwc-out";
  std::vector<std::string> overrides;
  unsigned jobs = 0;
  bool log_events = false;
  bool cross_check = false;
  std::uint64_t max_term_size = cwc::Limits{}.max_term_size;
  std::uint32_t max_depth = cwc::Limits{}.max_depth;
};

bool apply_override(cwc::Term& init, const std::string& spec) {
  auto eq = spec.find('=');
  const std::string prefix = "init-";
  if (eq == std::string::npos || spec.rfind(prefix, 0) != 0) return false;
  std::string name = spec.substr(prefix.size(), eq - prefix.size());
  std::string value = spec.substr(eq + 1);
  if (!cwc::is_identifier(name)) return false;
  std::uint64_t n = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), n);
  if (ec != std::errc() || ptr != value.data() + value.size()) return false;
  auto atom = cwc::SimpleTerm::atom(cwc::Atom(name));
  auto current = init.count(atom);
  if (current > 0) init = init.without(atom, current);
  if (n > 0) init = init.with(atom, n);
  return true;
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv("CWC_SEED")) {
    std::uint64_t v = 0;
    std::string s(env);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc() && ptr == s.data() + s.size()) return v;
    std::cerr << "warning: ignoring malformed CWC_SEED\n";
  }
  return 0;
}

int cmd_run(const std::string& path, const RunOptions& opt) {
  auto l = load(path);
  if (!l.model) return l.code;
  cwc::ModelFile& mf = *l.model;
  for (const auto& o : opt.overrides) {
    if (!apply_override(mf.init, o)) {
      std::cerr << "error: [bad-override] expected init-<atom>=<count>, got '" << o << "'\n";
      return kModel;
    }
  }

  const auto& d = mf.directives;
  cwc::SimConfig cfg;
  cfg.seed = opt.seed ? *opt.seed : d.seed ? *d.seed : default_seed();
  cfg.t_max = opt.tmax ? *opt.tmax : d.tmax.value_or(cfg.t_max);
  cfg.sample_dt = opt.sample ? *opt.sample : d.sample.value_or(cfg.sample_dt);
  cfg.replicates = opt.replicates ? *opt.replicates : d.replicates.value_or(1);
  cfg.max_events = opt.max_events ? *opt.max_events : d.max_events.value_or(0);
  cfg.log_events = opt.log_events;
  cfg.cross_check = opt.cross_check;
  cfg.limits.max_term_size = opt.max_term_size;
  cfg.limits.max_depth = opt.max_depth;
  if (!(cfg.sample_dt > 0) || cfg.replicates == 0 || !(cfg.t_max > 0 || cfg.max_events > 0)) {
    std::cerr << "error: [bad-config] need sample > 0, replicates > 0, and tmax > 0 or maxevents > 0\n";
    return kModel;
  }

  std::error_code ec;
  fs::create_directories(opt.out_dir, ec);
  if (ec) {
    std::cerr << opt.out_dir << ": error: [io] " << ec.message() << "\n";
    return kIo;
  }

  auto start = std::chrono::steady_clock::now();
  auto runs = cwc::run_replicates(cwc::to_model(mf), cfg, opt.jobs);
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  int code = kOk;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "rep_%03zu.csv", i);
    fs::path file = fs::path(opt.out_dir) / name;
    std::ofstream out(file, std::ios::binary);
    if (!out) {
      std::cerr << file.string() << ": error: [io] cannot write\n";
      return kIo;
    }
    cwc::write_trajectory_csv(out, mf.observables, runs[i]);
    std::cout << file.string() << "\t" << cwc::to_string(runs[i].status) << "\tevents=" << runs[i].events
              << "\tt=" << cwc::format_number(runs[i].final_time);
    if (cfg.cross_check) std::cout << "\tdiscrepancies=" << runs[i].discrepancies;
    std::cout << "\n";
    if (runs[i].status == cwc::Status::Error) {
      std::cerr << "replicate " << i << ": error: " << runs[i].message << "\n";
      code = kRuntime;
    }
    if (runs[i].discrepancies > 0) code = kRuntime;
  }
  if (!cfg.log_events) {
    fs::path file = fs::path(opt.out_dir) / "aggregate.csv";
    std::ofstream out(file, std::ios::binary);
    if (!out) {
      std::cerr << file.string() << ": error: [io] cannot write\n";
      return kIo;
    }
    cwc::write_aggregate_csv(out, mf.observables, cwc::aggregate(runs, mf.observables.size()));
    std::cout << file.string() << "\n";
  }
  std::cout << "seed=" << cfg.seed << " replicates=" << cfg.replicates << " wall=" << cwc::format_number(wall)
            << "s\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic simulator for the Calculus of Wrapped Compartments"};
  app.require_subcommand(1);

  std::string file;
  bool json = false;
  bool oracle = false;
  std::string rule;
  RunOptions ropt;

  auto* validate = app.add_subcommand("validate", "Parse and check a model file");
  validate->add_option("file", file, "Model file")->required();

  auto* transitions = app.add_subcommand("transitions", "List the transitions enabled in the initial state");
  transitions->add_option("file", file, "Model file")->required();
  transitions->add_flag("--json", json, "Emit a JSON array");

  auto* count = app.add_subcommand("count", "Match counts of one rule in every context of the initial state");
  count->add_option("file", file, "Model file")->required();
  count->add_option("rule", rule, "Rule name")->required();
  count->add_flag("--oracle", oracle, "Also run the brute-force labelled count and compare");

  auto* run = app.add_subcommand("run", "Simulate and write CSV trajectories");
  run->add_option("file", file, "Model file")->required();
  run->add_option("--seed", ropt.seed, "Base seed (default: file directive, then CWC_SEED, then 0)");
  run->add_option("--tmax", ropt.tmax, "Time horizon");
  run->add_option("--replicates", ropt.replicates, "Number of replicates");
  run->add_option("--sample", ropt.sample, "Sampling grid spacing");
  run->add_option("--max-events", ropt.max_events, "Event cap per replicate");
  run->add_option("--out-dir", ropt.out_dir, "Output directory")->capture_default_str();
  run->add_option("--override", ropt.overrides, "Initial multiplicity override, e.g. init-Pi=20");
  run->add_option("--jobs", ropt.jobs, "Worker threads (default: available parallelism)");
  run->add_option("--max-term-size", ropt.max_term_size, "Abort when the state grows beyond this size");
  run->add_option("--max-depth", ropt.max_depth, "Abort when compartments nest deeper than this");
  run->add_flag("--log-events", ropt.log_events, "One row per event instead of the sampling grid");
  run->add_flag("--cross-check", ropt.cross_check, "Verify incremental transition updates every step");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kModel;
  }

  if (*validate) return cmd_validate(file);
  if (*transitions) return cmd_transitions(file, json);
  if (*count) return cmd_count(file, rule, oracle);
  if (*run) return cmd_run(file, ropt);
  return kModel;
}
