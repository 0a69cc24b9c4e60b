#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "cwc/dsl.hpp"
#include "cwc/matcher.hpp"
#include "cwc/pattern.hpp"
#include "cwc/rates.hpp"
#include "cwc/term.hpp"

namespace cwc {

class SimulationError : public Error {
 public:
  using Error::Error;
};

/// One enabled rewrite: an edge of the induced continuous-time Markov chain.
struct Transition {
  std::size_t rule_index = 0;
  std::string rule_id;
  Path path;
  Term outcome_local;
  std::uint64_t n = 0;             // labelled instantiations within one context copy
  std::uint64_t multiplicity = 1;  // distinguishable copies of the context
  double rate = 0.0;

  friend bool operator==(const Transition&, const Transition&) = default;
};

namespace detail {

inline double total_rate(const RateSpec& spec, double unit_rate, std::uint64_t n, std::uint64_t multiplicity) {
  if (const auto* ma = std::get_if<MassAction>(&spec)) return ma->k * static_cast<double>(checked_mul(n, multiplicity));
  return unit_rate * static_cast<double>(multiplicity);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Transition index: per-context match results arranged like the state tree,
// so that a rewrite only recomputes contexts whose content changed.

struct ContextNode {
  struct Local {
    std::size_t rule = 0;
    Term outcome;
    std::uint64_t n = 0;
    double unit_rate = 0.0;  // rate for a single copy of the context
  };
  std::vector<Local> locals;
  std::vector<std::shared_ptr<const ContextNode>> children;  // aligned with content entries; null for atoms
};

using NodePtr = std::shared_ptr<const ContextNode>;

struct TransitionRef {
  const ContextNode::Local* local = nullptr;
  Path path;
  std::uint64_t multiplicity = 1;
  double rate = 0.0;
};

class TransitionIndex {
 public:
  explicit TransitionIndex(const std::vector<Rule>& rules) : rules_(&rules) {}

  NodePtr build(const Term& content, const Path& where = {}) const {
    auto node = std::make_shared<ContextNode>();
    node->locals = compute_locals(content, where);
    node->children.resize(content.distinct());
    for (std::size_t i = 0; i < content.distinct(); ++i) {
      const auto& e = content[i];
      if (e.value.is_compartment()) node->children[i] = build(e.value.as_compartment().content, where.child(i));
    }
    return node;
  }

  /// Node for `new_content`, reusing every subtree of `old` whose content is
  /// unchanged. Correct for any `old`; reuse is keyed on exact content equality.
  NodePtr update(const NodePtr& old, const Term& old_content, const Term& new_content, const Path& where = {}) const {
    if (old_content == new_content) return old;
    auto node = std::make_shared<ContextNode>();
    node->locals = compute_locals(new_content, where);
    node->children.resize(new_content.distinct());

    std::vector<bool> kept(old_content.distinct(), false);
    std::vector<std::size_t> fresh;
    for (std::size_t i = 0; i < new_content.distinct(); ++i) {
      const auto& e = new_content[i];
      if (e.value.is_atom()) continue;
      if (auto j = old_content.elements().find(e.value)) {
        node->children[i] = old->children[*j];
        kept[*j] = true;
      } else {
        fresh.push_back(i);
      }
    }
    std::vector<std::size_t> dropped;
    for (std::size_t j = 0; j < old_content.distinct(); ++j)
      if (!kept[j] && old_content[j].value.is_compartment()) dropped.push_back(j);

    std::size_t d = 0;
    for (std::size_t i : fresh) {
      const auto& comp = new_content[i].value.as_compartment();
      if (d < dropped.size()) {
        std::size_t j = dropped[d++];
        node->children[i] = update(old->children[j], old_content[j].value.as_compartment().content, comp.content,
                                   where.child(i));
      } else {
        node->children[i] = build(comp.content, where.child(i));
      }
    }
    return node;
  }

  /// Depth-first, contexts in path order; within a context by rule, then outcome.
  void flatten(const NodePtr& node, const Term& content, std::vector<TransitionRef>& out) const {
    out.clear();
    flatten_into(*node, content, Path{}, 1, out);
  }

  std::vector<Transition> transitions(const NodePtr& node, const Term& content) const {
    std::vector<TransitionRef> refs;
    flatten(node, content, refs);
    std::vector<Transition> out;
    out.reserve(refs.size());
    for (const auto& r : refs) {
      const auto& rule = (*rules_)[r.local->rule];
      out.push_back(Transition{r.local->rule, rule.id, r.path, r.local->outcome, r.local->n, r.multiplicity, r.rate});
    }
    return out;
  }

  const std::vector<Rule>& rules() const { return *rules_; }

 private:
  std::vector<ContextNode::Local> compute_locals(const Term& content, const Path& where) const {
    std::vector<ContextNode::Local> locals;
    for (std::size_t r = 0; r < rules_->size(); ++r) {
      const Rule& rule = (*rules_)[r];
      for (auto& o : local_outcomes(rule, content)) {
        double unit = 0.0;
        try {
          unit = rate_of(rule.rate, content, o.outcome, o.n);
        } catch (const RateError& e) {
          throw SimulationError(std::string(to_string(e.kind())) + " in rule " + rule.id + " at context " +
                                to_string(where) + ": " + e.what());
        }
        locals.push_back({r, std::move(o.outcome), o.n, unit});
      }
    }
    return locals;
  }

  void flatten_into(const ContextNode& node, const Term& content, const Path& here, std::uint64_t mult,
                    std::vector<TransitionRef>& out) const {
    for (const auto& l : node.locals) {
      double rate = detail::total_rate((*rules_)[l.rule].rate, l.unit_rate, l.n, mult);
      if (rate > 0.0) out.push_back({&l, here, mult, rate});
    }
    for (std::size_t i = 0; i < content.distinct(); ++i) {
      const auto& e = content[i];
      if (e.value.is_atom()) continue;
      const auto& c = e.value.as_compartment();
      flatten_into(*node.children[i], c.content, here.child(i), c.atom_bearing() ? mult * e.count : mult, out);
    }
  }

  const std::vector<Rule>* rules_;
};

/// Every enabled transition of `state`, zero-rate ones excluded, in canonical order.
inline std::vector<Transition> enumerate_transitions(const Term& state, const std::vector<Rule>& rules) {
  TransitionIndex index(rules);
  return index.transitions(index.build(state), state);
}

/// Recomputes transitions after `applied` fired on the state that `prev_node`
/// describes, reusing the contexts the rewrite did not touch.
inline std::vector<Transition> incremental_retransitions(const TransitionIndex& index, const NodePtr& prev_node,
                                                         const Term& prev_state, const Term& next_state) {
  return index.transitions(index.update(prev_node, prev_state, next_state), next_state);
}

// ---------------------------------------------------------------------------
// Random numbers.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// 64-bit Mersenne Twister with a hand-rolled (0,1] conversion so that draws
/// do not depend on the standard library's distribution implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  static Rng for_replicate(std::uint64_t seed, std::uint64_t replicate) {
    return Rng(splitmix64(seed ^ splitmix64(replicate + 1)));
  }

  double uniform_open_closed() { return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

/// Neumaier-compensated sum.
class CompensatedSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

namespace detail {

template <typename Seq, typename RateOf>
std::size_t select_index(const Seq& items, double a0, double u, RateOf rate_of_item) {
  double target = u * a0;
  double acc = 0.0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    acc += rate_of_item(items[i]);
    if (acc >= target) return i;
  }
  return items.size() - 1;
}

template <typename Seq, typename RateOf>
double total_propensity(const Seq& items, RateOf rate_of_item) {
  CompensatedSum s;
  for (const auto& t : items) s.add(rate_of_item(t));
  return s.value();
}

}  // namespace detail

struct StepResult {
  double dt = 0.0;
  std::size_t chosen = 0;
  Term next_state;
};

/// One Gillespie direct-method step: first draw sets the waiting time, second
/// draw selects the transition. Empty result means deadlock (no draws taken).
inline std::optional<StepResult> step(const Term& state, const std::vector<Transition>& transitions, Rng& rng) {
  if (transitions.empty()) return std::nullopt;
  auto rate = [](const Transition& t) { return t.rate; };
  double a0 = detail::total_propensity(transitions, rate);
  StepResult r;
  r.dt = -std::log(rng.uniform_open_closed()) / a0;
  r.chosen = detail::select_index(transitions, a0, rng.uniform_open_closed(), rate);
  const auto& t = transitions[r.chosen];
  r.next_state = replace_at(state, t.path, t.outcome_local);
  return r;
}

// ---------------------------------------------------------------------------
// Simulation runs.

struct Model {
  Term init;
  std::vector<Rule> rules;
  std::vector<Observable> observables;
};

inline Model to_model(const ModelFile& f) { return Model{f.init, f.rules, f.observables}; }

struct Limits {
  std::uint64_t max_term_size = 10'000'000;
  std::uint32_t max_depth = 1'000;
};

struct SimConfig {
  double t_max = 100.0;         // <= 0: no time horizon
  std::uint64_t max_events = 0;  // 0: no event cap
  std::uint64_t seed = 0;
  double sample_dt = 1.0;
  std::uint64_t replicates = 1;
  Limits limits;
  bool log_events = false;   // one row per event instead of the sampling grid
  bool cross_check = false;  // compare incremental transitions with a full rebuild every step
};

enum class Status { HorizonReached, Deadlock, EventCap, Error };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::HorizonReached: return "horizon-reached";
    case Status::Deadlock: return "deadlock";
    case Status::EventCap: return "event-cap";
    case Status::Error: return "error";
  }
  return "?";
}

struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<std::uint64_t>> rows;
  Status status = Status::HorizonReached;
  std::string message;
  std::uint64_t events = 0;
  std::uint64_t discrepancies = 0;  // cross-check mismatches
  Term final_state;
  double final_time = 0.0;
};

inline std::vector<std::uint64_t> measure(const Term& state, const std::vector<Observable>& obs) {
  std::vector<std::uint64_t> row;
  row.reserve(obs.size());
  for (const auto& o : obs) row.push_back(count_atom(state, o.atom, o.scope));
  return row;
}

namespace detail {

inline bool same_transitions(const TransitionIndex& index, const std::vector<TransitionRef>& a,
                             const std::vector<TransitionRef>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a[i];
    const auto& y = b[i];
    if (x.local->rule != y.local->rule || x.path != y.path || x.multiplicity != y.multiplicity ||
        x.rate != y.rate || x.local->n != y.local->n || !(x.local->outcome == y.local->outcome))
      return false;
  }
  (void)index;
  return true;
}

}  // namespace detail

/// Runs one replicate. Deterministic in (model, cfg, replicate).
inline Trajectory run(const Model& model, const SimConfig& cfg, std::uint64_t replicate = 0) {
  Trajectory traj;
  Rng rng = Rng::for_replicate(cfg.seed, replicate);
  TransitionIndex index(model.rules);
  const double horizon = cfg.t_max > 0 ? cfg.t_max : std::numeric_limits<double>::infinity();

  Term state = model.init;
  double t = 0.0;
  std::uint64_t next_grid = 0;

  auto record = [&](double time) {
    if (!traj.times.empty() && !(time > traj.times.back())) {
      traj.rows.back() = measure(state, model.observables);
      return;
    }
    traj.times.push_back(time);
    traj.rows.push_back(measure(state, model.observables));
  };
  // Grid points in [t, until) (or [t, until] when `inclusive`) see the current state.
  auto sample_until = [&](double until, bool inclusive) {
    if (cfg.log_events) return;
    while (true) {
      double g = static_cast<double>(next_grid) * cfg.sample_dt;
      if (g > horizon || g > until || (!inclusive && g == until)) break;
      record(g);
      ++next_grid;
    }
  };

  if (cfg.log_events) record(0.0);

  NodePtr node;
  std::vector<TransitionRef> refs;
  std::vector<TransitionRef> check;
  auto rate = [](const TransitionRef& r) { return r.rate; };
  try {
    node = index.build(state);
    while (true) {
      index.flatten(node, state, refs);
      if (refs.empty()) {
        sample_until(std::isfinite(horizon) ? horizon : t, true);
        traj.status = Status::Deadlock;
        break;
      }
      if (cfg.max_events > 0 && traj.events >= cfg.max_events) {
        sample_until(t, true);
        traj.status = Status::EventCap;
        break;
      }
      double a0 = detail::total_propensity(refs, rate);
      double dt = -std::log(rng.uniform_open_closed()) / a0;
      if (t + dt > horizon) {
        sample_until(horizon, true);
        traj.status = Status::HorizonReached;
        break;
      }
      std::size_t k = detail::select_index(refs, a0, rng.uniform_open_closed(), rate);
      sample_until(t + dt, false);

      const auto& chosen = refs[k];
      Term next = replace_at(state, chosen.path, chosen.local->outcome);
      if (next.size() > cfg.limits.max_term_size || next.depth() > cfg.limits.max_depth) {
        traj.status = Status::Error;
        traj.message = "resource-limit-exceeded: rule " + model.rules[chosen.local->rule].id + " at context " +
                       to_string(chosen.path) + " produced a term of size " + std::to_string(next.size()) +
                       " and depth " + std::to_string(next.depth());
        break;
      }
      NodePtr next_node = index.update(node, state, next);
      state = std::move(next);
      node = std::move(next_node);
      t += dt;
      ++traj.events;
      if (cfg.log_events) record(t);

      if (cfg.cross_check) {
        index.flatten(node, state, refs);
        NodePtr fresh = index.build(state);
        index.flatten(fresh, state, check);
        if (!detail::same_transitions(index, refs, check)) ++traj.discrepancies;
      }
    }
  } catch (const Error& e) {
    traj.status = Status::Error;
    traj.message = e.what();
  }
  traj.final_state = state;
  traj.final_time = t;
  return traj;
}

/// Runs cfg.replicates independent replicates on `jobs` worker threads.
inline std::vector<Trajectory> run_replicates(const Model& model, const SimConfig& cfg, unsigned jobs = 0) {
  std::vector<Trajectory> out(cfg.replicates);
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::uint64_t>(jobs, cfg.replicates));
  std::atomic<std::uint64_t> next{0};
  auto worker = [&]() {
    for (std::uint64_t i = next++; i < cfg.replicates; i = next++) out[i] = run(model, cfg, i);
  };
  if (jobs <= 1) {
    worker();
    return out;
  }
  std::vector<std::thread> pool;
  for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace cwc
