#include <gtest/gtest.h>

#include <map>
#include <tuple>

#include "cwc/cwc.hpp"
#include "support/generators.hpp"

using namespace cwc;
using cwc::testing::must_parse;
using cwc::testing::Rng64;

namespace {

Rule rule(const std::string& text) { return must_parse("init *\nrule r: " + text + "\n").rules.front(); }

std::map<Term, std::uint64_t> combinatorial(const Rule& r, const Term& content) {
  std::map<Term, std::uint64_t> out;
  for (const auto& o : local_outcomes(r, content)) out[o.outcome] = o.n;
  return out;
}

// Checks every context of `state`; returns how many contexts were compared.
int expect_agreement(const Rule& r, const Term& state, std::uint64_t labelling_seed = 0) {
  int compared = 0;
  for (const auto& ctx : enumerate_contexts(state)) {
    const Term& content = resolve(state, ctx.path);
    EXPECT_EQ(combinatorial(r, content), oracle_outcomes(r, content, labelling_seed))
        << "rule " << to_string(r.lhs_source) << " -> " << to_string(r.rhs) << "\ncontent " << content;
    ++compared;
  }
  return compared;
}

}  // namespace

TEST(Counting, PaperCountingExample) {
  Rule r = rule("a a $X -> a c $X @ 1");
  auto out = local_outcomes(r, parse_term("a a a b"));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].outcome, parse_term("a a c b"));
  EXPECT_EQ(out[0].n, 3u);
  EXPECT_EQ(count_oracle(r, parse_term("a a a b"), parse_term("a c a b")), 3u);
}

TEST(Counting, PaperMembraneExample) {
  Rule r = rule("a (b ~x | $X) $Y -> (a b ~x | $X) $Y @ 1");
  Term t = parse_term("a (b b | c) (b | c)");
  auto out = combinatorial(r, t);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out.at(parse_term("(a b b | c) (b | c)")), 2u);
  EXPECT_EQ(out.at(parse_term("(b b | c) (a b | c)")), 1u);
  EXPECT_EQ(out, oracle_outcomes(r, t));
}

TEST(Counting, ResidueTakesTheRest) {
  Rule r = rule("a $X -> c $X @ 1");
  auto ms = match_at(r, parse_term("a a"), Path{});
  ASSERT_EQ(ms.size(), 1u);
  EXPECT_EQ(ms[0].subst.terms.at("X"), parse_term("a"));
  EXPECT_EQ(ms[0].labelled_count, 2u);
  EXPECT_EQ(ms[0].outcome_local, parse_term("a c"));
}

TEST(Counting, MassActionProduct) {
  Rule r = rule("a b $X -> c $X @ 1");
  for (std::uint64_t m = 0; m <= 6; ++m) {
    for (std::uint64_t q = 0; q <= 5; ++q) {
      Term t = Term().with(SimpleTerm::atom(Atom("a")), m).with(SimpleTerm::atom(Atom("b")), q);
      auto out = local_outcomes(r, t);
      if (m == 0 || q == 0) {
        EXPECT_TRUE(out.empty());
        continue;
      }
      ASSERT_EQ(out.size(), 1u);
      EXPECT_EQ(out[0].n, m * q);
      EXPECT_EQ(out[0].n, count_oracle(r, t, out[0].outcome));
    }
  }
  Rule pair = rule("a a b $X -> c $X @ 1");
  Term t = parse_term("a a a a b b b");
  EXPECT_EQ(local_outcomes(pair, t).at(0).n, 6u * 3u);
  EXPECT_EQ(count_oracle(pair, t, local_outcomes(pair, t).at(0).outcome), 18u);
}

TEST(Counting, CornerCases) {
  struct Case {
    const char* rule;
    const char* state;
  };
  const Case cases[] = {
      // two compartment patterns on two congruent labelled copies
      {"(~x | $X) (~y | $Y) $Z -> (~x ~y | $X $Y) $Z @ 1", "(b | c) (b | c)"},
      // the same on label-free copies
      {"(~x | $X) (~y | $Y) $Z -> (~x ~y | $X $Y) $Z @ 1", "(| *) (| *) (| *)"},
      // label-free bound values inside labelled copies
      {"(b ~x | $X) $Z -> (c ~x | $X) $Z @ 1", "(b | *) (b | *) (b b | *)"},
      // ground compartment pattern against congruent copies
      {"(b | c) $Z -> d $Z @ 1", "(b | c) (b | c) (b | c)"},
      {"(| *) $Z -> d $Z @ 1", "(| *) (| *)"},
      // nesting
      {"(~x | (~y | a $Y) $X) $Z -> (~x | $X) (~y | $Y) $Z @ 1", "(m | (b | a a) (b | a a)) (m | (b | a a) (b | a a))"},
      {"a (~x | a $X) $Z -> (~x | a a $X) $Z @ 1", "a a (b | a a) (b | a a) (| a)"},
      // rhs that forgets bound values
      {"a (~x | $X) $Z -> b $Z @ 1", "a (m | c) (m | c) (b | *)"},
  };
  for (const auto& c : cases) {
    Rule r = rule(c.rule);
    Term t = parse_term(c.state);
    EXPECT_GT(expect_agreement(r, t), 0) << c.rule;
  }
}

TEST(Counting, OracleOnUnmatchedStateIsEmpty) {
  Rule r = rule("z $X -> $X @ 1");
  EXPECT_TRUE(oracle_outcomes(r, parse_term("a b (c | d)")).empty());
  EXPECT_TRUE(local_outcomes(r, parse_term("a b (c | d)")).empty());
  EXPECT_TRUE(local_outcomes(r, Term()).empty());
}

TEST(Counting, OracleLimits) {
  Rule r = rule("a $X -> $X @ 1");
  Term big = Term().with(SimpleTerm::atom(Atom("a")), 40);
  EXPECT_THROW(oracle_outcomes(r, big), OracleLimitExceeded);
}

TEST(Counting, AgreesWithOracleOnRandomInstances) {
  Rng64 rng(101);
  int contexts = 0;
  for (int i = 0; i < 400; ++i) {
    Term t = cwc::testing::random_state(rng);
    Rule r = cwc::testing::random_rule_for(rng, t);
    contexts += expect_agreement(r, t);
  }
  EXPECT_GT(contexts, 400);
}

TEST(Counting, IndependentOfLabelling) {
  Rng64 rng(102);
  for (int i = 0; i < 150; ++i) {
    Term t = cwc::testing::random_state(rng);
    Rule r = cwc::testing::random_rule_for(rng, t);
    EXPECT_EQ(oracle_outcomes(r, t, 0), oracle_outcomes(r, t, 1 + rng() % 1000));
  }
}

TEST(Counting, ClosedUnderCongruence) {
  Rng64 rng(103);
  for (int i = 0; i < 200; ++i) {
    Term t = cwc::testing::random_state(rng);
    std::vector<Rule> rules{cwc::testing::random_rule_for(rng, t), cwc::testing::random_rule_for(rng, t)};
    rules[1].id = "s";
    Term u = parse_term(cwc::testing::shuffled_text(t, rng));
    auto key = [&](const Term& state) {
      std::multiset<std::tuple<std::string, Term, std::uint64_t, double>> out;
      for (const auto& tr : enumerate_transitions(state, rules))
        out.insert({tr.rule_id, replace_at(state, tr.path, tr.outcome_local), tr.n * tr.multiplicity, tr.rate});
      return out;
    };
    EXPECT_EQ(key(t), key(u));
  }
}

TEST(Counting, MatchReconstructsContext) {
  Rng64 rng(104);
  for (int i = 0; i < 200; ++i) {
    Term t = cwc::testing::random_state(rng);
    Rule r = cwc::testing::random_rule_for(rng, t);
    for (const auto& ctx : enumerate_contexts(t)) {
      for (const auto& m : match_at(r, t, ctx.path)) {
        Substitution full = m.subst;
        EXPECT_EQ(apply_subst(r.lhs_source, full), resolve(t, ctx.path));
        EXPECT_EQ(m.outcome_local, apply_subst(r.rhs, m.subst));
        Term next = replace_at(t, ctx.path, m.outcome_local);
        EXPECT_EQ(resolve(next, Path{}), next);
      }
    }
  }
}
