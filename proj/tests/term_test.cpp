#include <gtest/gtest.h>

#include <random>

#include "cwc/cwc.hpp"
#include "support/generators.hpp"

using namespace cwc;
using cwc::testing::Rng64;

namespace {

Term T(const char* s) { return parse_term(s); }

}  // namespace

TEST(Atom, InterningGivesIdentity) {
  Atom a("PhoR"), b("PhoR"), c("PhoB");
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  EXPECT_LT(c, a);
  EXPECT_THROW(Atom("9x"), Error);
  EXPECT_THROW(Atom(""), Error);
}

TEST(Term, CanonicalOrderingSortsAtomsFirst) {
  EXPECT_EQ(format_term(T("b a")), "a b");
  EXPECT_EQ(format_term(T("(x | y) b a a")), "a a b (x | y)");
  EXPECT_EQ(format_term(T("*")), "*");
  EXPECT_EQ(format_term(T("(| *)")), "(| *)");
  EXPECT_EQ(format_term(T("(b a | d c)")), "(a b | c d)");
}

TEST(Term, CongruenceIsEquality) {
  EXPECT_TRUE(equiv(T("a (b | c d) e"), T("e (b | d c) a")));
  EXPECT_FALSE(equiv(T("a a"), T("a")));
  EXPECT_FALSE(equiv(T("(a | b)"), T("(b | a)")));
  EXPECT_FALSE(equiv(T("(a | *)"), T("a")));
}

TEST(Term, CachedMeasures) {
  Term t = T("a a (b | c (d | e)) (| *)");
  EXPECT_EQ(t.total(), 4u);
  EXPECT_EQ(t.atom_total(), 6u);
  EXPECT_EQ(t.depth(), 2u);
  EXPECT_EQ(T("*").depth(), 0u);
  EXPECT_EQ(T("a").size(), 1u);
}

TEST(Term, CanonicalizeIsIdempotentAndShuffleInvariant) {
  Rng64 rng(11);
  for (int i = 0; i < 300; ++i) {
    Term t = cwc::testing::random_state(rng, {20, 4, 6});
    std::vector<SimpleTerm> raw;
    for (const auto& e : t.entries())
      for (std::uint64_t k = 0; k < e.count; ++k) raw.push_back(e.value);
    EXPECT_EQ(Term::canonicalize(raw), t);
    EXPECT_EQ(cwc::testing::reshuffle(t, rng), t);
    EXPECT_EQ(parse_term(cwc::testing::shuffled_text(t, rng)), t);
  }
}

TEST(Term, OrderIsTotalAndConsistent) {
  Rng64 rng(12);
  std::vector<Term> ts;
  for (int i = 0; i < 60; ++i) ts.push_back(cwc::testing::random_state(rng, {8, 3, 3}));
  for (const auto& a : ts) {
    EXPECT_EQ(compare(a, a), 0);
    for (const auto& b : ts) {
      EXPECT_EQ(compare(a, b), -compare(b, a));
      EXPECT_EQ(compare(a, b) == 0, a == b);
      for (const auto& c : ts) {
        if (compare(a, b) < 0 && compare(b, c) < 0) {
          EXPECT_LT(compare(a, c), 0);
        }
      }
    }
  }
}

TEST(Term, MultisetArithmetic) {
  Term t = T("a a b (c | d)");
  EXPECT_TRUE(t.contains(T("a (c | d)")));
  EXPECT_FALSE(t.contains(T("a a a")));
  EXPECT_EQ(t.minus(T("a (c | d)")), T("a b"));
  EXPECT_EQ(t.plus(T("b")), T("a a b b (c | d)"));
}

TEST(Path, ResolveReplaceRoundTrip) {
  Rng64 rng(13);
  for (int i = 0; i < 200; ++i) {
    Term t = cwc::testing::random_state(rng, {14, 3, 4});
    for (const auto& ctx : enumerate_contexts(t)) {
      const Term& here = resolve(t, ctx.path);
      EXPECT_EQ(replace_at(t, ctx.path, here), t);
      Term changed = replace_at(t, ctx.path, here.plus(T("zz")));
      EXPECT_EQ(changed.atom_total(), t.atom_total() + 1);
      EXPECT_EQ(context_multiplicity(t, ctx.path), ctx.multiplicity);
    }
  }
}

TEST(Path, ContextsAndMultiplicity) {
  auto ctx = enumerate_contexts(T("a b"));
  ASSERT_EQ(ctx.size(), 1u);
  EXPECT_TRUE(ctx[0].path.is_top());

  ctx = enumerate_contexts(T("a (b | (c | *))"));
  ASSERT_EQ(ctx.size(), 3u);
  EXPECT_EQ(to_string(ctx[1].path), "/1.0");
  EXPECT_EQ(to_string(ctx[2].path), "/1.0/0.0");

  ctx = enumerate_contexts(T("(b | *) (b | *)"));
  ASSERT_EQ(ctx.size(), 2u);
  EXPECT_EQ(ctx[1].multiplicity, 2u);

  // Copies without any atom cannot be told apart even when labelled.
  ctx = enumerate_contexts(T("(| *) (| *)"));
  ASSERT_EQ(ctx.size(), 2u);
  EXPECT_EQ(ctx[1].multiplicity, 1u);
}

TEST(Path, InvalidPathsThrow) {
  Term t = T("a (b | c)");
  EXPECT_THROW(resolve(t, Path{}.child(0)), InvalidPath);
  EXPECT_THROW(resolve(t, Path{}.child(5)), InvalidPath);
  EXPECT_THROW(resolve(t, Path{}.child(1, 1)), InvalidPath);
  EXPECT_NO_THROW(resolve(t, Path{}.child(1)));
}

TEST(Observables, Scopes) {
  Term t = T("x x (M x | x (N | x) (M | x x)) (x | x)");
  EXPECT_EQ(count_atom(t, Atom("x"), Scope::top()), 2u);
  EXPECT_EQ(count_atom(t, Atom("x"), Scope::anywhere()), 7u);  // contents only, wraps excluded
  EXPECT_EQ(count_atom(t, Atom("x"), Scope::inside(Atom("M"))), 3u);
  EXPECT_EQ(count_atom(t, Atom("x"), Scope::on_wrap()), 2u);
  EXPECT_EQ(count_atom(t, Atom("x"), Scope::on_wrap(Atom("M"))), 1u);
}
