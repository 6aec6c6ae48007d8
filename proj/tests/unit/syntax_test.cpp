#include <gtest/gtest.h>

#include "inflogic/syntax.hpp"
#include "support.hpp"

namespace {

using namespace inflogic;
using namespace inflogic::testing;

Term v(const std::string& name) { return Term::variable(name); }

Signature round_trip_sig() {
  Signature sig;
  sig.predicates = {{"P", 1, rat(1)}, {"R", 2, rat(2)}};
  sig.functions = {{"f", 1, rat(1)}, {"g", 2, rat(1, 2)}};
  sig.constants = {"c1", "c2", "c3", "c4", "c5", "c6", "c7", "e"};
  return sig;
}

TEST(Parse, ZeroTestPattern) {
  Formula f = parse_formula("(isup n nat (scale n (P x)))", tri().signature());
  EXPECT_EQ(f, ind(Formula::pred("P", {v("x")})));
  EXPECT_EQ(parse_formula("(ind (P x))", tri().signature()), f);
}

TEST(Parse, ProxySentence) {
  Formula f = parse_formula(kProxySentence, m1().signature());
  Formula body = Formula::isup(
      "R", IndexRange::naturals(),
      Formula::scale(Affine::of_index("R"), Formula::dist(v("x"), Term::indexed_constant("c", "n"))));
  EXPECT_EQ(f, Formula::sup("x", Formula::iinf("n", IndexRange::up_to(2), body)));
}

TEST(Parse, ArityError) {
  EXPECT_THROW(parse_formula("(P x y)", tri().signature()), Error);
  try {
    parse_formula("(P x y)", tri().signature());
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("arity"), std::string::npos);
  } catch (const IllFormedError& e) {
    ASSERT_FALSE(e.violations().empty());
    EXPECT_NE(e.violations()[0].find("arity"), std::string::npos);
  }
}

TEST(Parse, ErrorsCarryPositions) {
  try {
    parse_formula("(max (P x)\n  (frob x))", tri().signature());
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.column(), 4u);  // the unknown head symbol
  }
  EXPECT_THROW(parse_formula("(max (P x)", tri().signature()), ParseError);
  EXPECT_THROW(parse_formula("(P x))", tri().signature()), ParseError);
  EXPECT_THROW(parse_formula("", tri().signature()), ParseError);
  EXPECT_THROW(parse_formula("(const 3/0)", tri().signature()), ParseError);
  EXPECT_THROW(parse_formula("(Q x)", tri().signature()), Error);
}

TEST(Parse, WhitespaceAndComments) {
  Formula a = parse_formula("(max (P x) (const 1/2))", tri().signature());
  Formula b = parse_formula("  ( max\n\t(P   x) ; comment\n (const 2/4) )  ", tri().signature());
  EXPECT_EQ(a, b);
}

TEST(Parse, AffineExpressions) {
  Formula f = parse_formula("(isup n nat (scale (+ (* 2 n) 1) (P x)))", tri().signature());
  const auto* q = as<IdxQuantNode>(f);
  ASSERT_NE(q, nullptr);
  const auto* s = as<ScaleNode>(q->body);
  ASSERT_NE(s, nullptr);
  EXPECT_EQ(s->factor, Affine::of_index("n", rat(2), rat(1)));
  EXPECT_THROW(parse_formula("(isup n nat (scale (* n n) (P x)))", tri().signature()), ParseError);
}

TEST(Parse, RhoForms) {
  Formula canonical = parse_formula("(rho (x) (y) (P y))", tri().signature());
  Formula shorthand = parse_formula("(rho (y) (P y))", tri().signature());
  EXPECT_EQ(canonical, shorthand);
  EXPECT_EQ(canonical, Formula::rho({v("x")}, {"y"}, Formula::pred("P", {v("y")})));
}

TEST(Parse, InferringSignature) {
  auto r = parse_formula_inferring("(max (P x) (R (f x) y))");
  ASSERT_NE(r.signature.find_predicate("P"), nullptr);
  ASSERT_NE(r.signature.find_predicate("R"), nullptr);
  EXPECT_EQ(r.signature.find_predicate("R")->arity, 2u);
  ASSERT_NE(r.signature.find_function("f"), nullptr);
  EXPECT_EQ(r.formula.free_variables(), (std::vector<std::string>{"x", "y"}));
}

TEST(Print, CanonicalForms) {
  Formula f = parse_formula("(isup n nat (scale (+ (* 2 n) 1) (sub (P x) (recip (+ n 1)))))", tri().signature());
  EXPECT_EQ(print_formula(f), "(isup n nat (scale (+ (* 2 n) 1) (sub (P x) (recip (+ n 1)))))");
  EXPECT_EQ(print_formula(parse_formula("(ind (P x))", tri().signature())), "(isup n nat (scale n (P x)))");
  EXPECT_EQ(print_formula(Formula::constant(rat(1, 2))), "(const 1/2)");
  EXPECT_EQ(print_range(IndexRange::from("k")), "(from k)");
  EXPECT_EQ(print_range(IndexRange::up_to(3)), "(upto 3)");
}

TEST(RoundTrip, FixtureFormulas) {
  const std::vector<std::pair<std::string, Signature>> cases{
      {"(isup n nat (scale n (P x)))", tri().signature()},
      {kProxySentence, m1().signature()},
      {"(rho (x) (y) (P y))", tri().signature()},
      {"(sup x (P x))", tri().signature()},
      {"(d x x)", sym().signature()},
      {"(iinf n nat (isup R nat (scale R (sub (recip n) (P x)))))", tri().signature()},
  };
  for (const auto& [text, sig] : cases) {
    Formula f = parse_formula(text, sig);
    EXPECT_EQ(parse_formula(print_formula(f), sig), f) << text;
    EXPECT_EQ(print_formula(parse_formula(print_formula(f), sig)), print_formula(f));
  }
}

TEST(RoundTrip, RandomFormulas) {
  FormulaOptions opts;
  opts.variables = {"x", "y", "z", "x'"};
  opts.rho = true;
  opts.zero_test = true;
  opts.syntax_only = true;
  opts.max_depth = 5;
  Signature sig = round_trip_sig();
  FormulaGenerator gen(sig, opts, 31);
  for (int i = 0; i < 1000; ++i) {
    Formula f = gen.next();
    ASSERT_TRUE(well_formed(sig, f).empty()) << print_formula(f);
    std::string text = print_formula(f);
    EXPECT_EQ(parse_formula(text, sig), f) << text;
  }
}

}  // namespace
