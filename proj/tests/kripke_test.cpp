#include <gtest/gtest.h>

#include <algorithm>

#include "provgame/closure.hpp"
#include "provgame/enumerate.hpp"
#include "provgame/kripke.hpp"
#include "provgame/model_io.hpp"
#include "provgame/syntax.hpp"
#include "support/generators.hpp"
#include "support/naive_forcing.hpp"

namespace provgame {
namespace {

Element C(const std::string& n) { return Element::constant(n); }
GroundAtom ga(const std::string& p, std::vector<Element> args = {}) { return {p, std::move(args)}; }

Signature sig_p(unsigned arity, std::initializer_list<const char*> consts = {}) {
  Signature s;
  s.declare_predicate("P", arity);
  for (const char* c : consts) s.declare_constant(c);
  return s;
}

KripkeModel chain(std::vector<std::vector<Element>> domains, std::vector<std::set<GroundAtom>> atoms) {
  KripkeModel m;
  const std::size_t n = domains.size();
  for (std::size_t i = 0; i < n; ++i) m.worlds.push_back("w" + std::to_string(i));
  std::vector<std::pair<WorldId, WorldId>> covers;
  for (std::size_t i = 0; i + 1 < n; ++i) covers.emplace_back(i, i + 1);
  m.order = KripkeModel::close_order(n, covers);
  m.domain = std::move(domains);
  m.atoms = std::move(atoms);
  return m;
}

// w0 < w1, domain {c} throughout, P(c) true only at w1.
KripkeModel excluded_middle_model() { return chain({{C("c")}, {C("c")}}, {{}, {ga("P", {C("c")})}}); }

const char* const casari = "(forall x. ((P(x) -> forall y. P(y)) -> forall y. P(y))) -> forall x. P(x)";

TEST(Validate, MonotoneChainIsOk) {
  auto m = chain({{C("c")}, {C("c"), C("d")}}, {{}, {ga("P", {C("d")})}});
  EXPECT_TRUE(validate_model(m).ok());
}

TEST(Validate, ValuationNotMonotone) {
  auto m = chain({{C("c")}, {C("c")}}, {{ga("P", {C("c")})}, {}});
  auto r = validate_model(m);
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_NE(r.violations[0].find("valuation not monotone"), std::string::npos);
  EXPECT_NE(r.violations[0].find("w0"), std::string::npos);
  EXPECT_NE(r.violations[0].find("w1"), std::string::npos);
}

TEST(Validate, AtomOutsideDomain) {
  auto m = chain({{C("c")}}, {{ga("P", {C("d")})}});
  auto r = validate_model(m);
  ASSERT_FALSE(r.ok());
  EXPECT_NE(r.violations[0].find("outside the domain"), std::string::npos);
}

TEST(Validate, OrderAndDomainDefects) {
  KripkeModel m = chain({{C("c"), C("d")}, {C("c")}}, {{}, {}});
  auto r = validate_model(m);
  ASSERT_FALSE(r.ok());
  EXPECT_NE(r.violations[0].find("domain not monotone"), std::string::npos);

  m = chain({{C("c")}, {C("c")}}, {{}, {}});
  m.order[1][0] = 1;
  EXPECT_FALSE(validate_model(m).ok());

  m = chain({{}}, {{}});
  EXPECT_FALSE(validate_model(m).ok());
  m.empty_domain_tolerant = true;
  EXPECT_TRUE(validate_model(m).ok());
}

TEST(Forces, ExcludedMiddleFailsAtRoot) {
  const auto m = excluded_middle_model();
  const auto sig = sig_p(1, {"c"});
  EXPECT_FALSE(forces(m, 0, parse_formula("P(c) | ~P(c)", sig)));
  EXPECT_TRUE(forces(m, 1, parse_formula("P(c) | ~P(c)", sig)));
  EXPECT_TRUE(forces(m, 1, parse_formula("~~P(c)", sig)));
  EXPECT_TRUE(forces(m, 0, parse_formula("~~P(c)", sig)));
  EXPECT_FALSE(forces(m, 0, parse_formula("P(c)", sig)));
  EXPECT_FALSE(forces(m, 0, parse_formula("~~P(c) -> P(c)", sig)));
}

TEST(Forces, FalsumImpliesFalsumEverywhere) {
  const auto m = excluded_middle_model();
  const Formula f = Formula::implies(Formula::bottom(), Formula::bottom());
  for (WorldId w = 0; w < m.size(); ++w) EXPECT_TRUE(forces(m, w, f));
  EXPECT_FALSE(forces(m, 0, Formula::bottom()));
}

TEST(Forces, QuantifiersRangeOverGrowingDomains) {
  auto m = chain({{C("c")}, {C("c"), C("d")}}, {{ga("P", {C("c")})}, {ga("P", {C("c")})}});
  const auto sig = sig_p(1, {"c"});
  EXPECT_FALSE(forces(m, 0, parse_formula("forall x. P(x)", sig)));
  EXPECT_TRUE(forces(m, 0, parse_formula("exists x. P(x)", sig)));
  EXPECT_FALSE(forces(m, 0, parse_formula("~P(c) | forall x. P(x)", sig)));
}

TEST(Forces, InterpretationAndErrors) {
  auto m = excluded_middle_model();
  m.interpretation.emplace(Element::fresh(1), C("c"));
  EXPECT_TRUE(forces(m, 1, Formula::atom("P", {Term::element(Element::fresh(1))})));
  EXPECT_THROW(forces(m, 0, Formula::atom("P", {Term::element(Element::fresh(2))})), ForcingError);
  EXPECT_THROW(forces(m, 0, Formula::atom("P", {Term::element(C("e"))})), ForcingError);
  EXPECT_THROW(forces(m, 0, Formula::atom("P", {Term::free_var("x")})), ForcingError);
}

TEST(Classify, FiniteModelsAreInEveryClass) {
  auto r = classify(excluded_middle_model());
  EXPECT_TRUE(r.finite_worlds);
  EXPECT_TRUE(r.finite_domains);
  EXPECT_EQ(r.member_of.size(), 6u);
}

TEST(Posets, CountsUpToIsomorphism) {
  const std::vector<std::size_t> expected = {1, 2, 5, 16, 63};
  for (std::size_t n = 1; n <= expected.size(); ++n) EXPECT_EQ(posets(n).size(), expected[n - 1]) << n;
  const std::vector<std::size_t> rooted = {1, 1, 2, 5, 16};
  for (std::size_t n = 1; n <= rooted.size(); ++n) {
    auto c = std::count_if(posets(n).begin(), posets(n).end(), [](const Poset& p) { return p.rooted(); });
    EXPECT_EQ(static_cast<std::size_t>(c), rooted[n - 1]) << n;
  }
}

TEST(Enumerate, SingleWorldCounts) {
  const auto sig = sig_p(1);
  EXPECT_EQ(enumerate_models(sig, {1, 1}).size(), 2u);
  EXPECT_EQ(enumerate_models(sig, {1, 1}, {.empty_domain_tolerant = true}).size(), 3u);
  EXPECT_EQ(enumerate_models(sig, {1, 0}, {.empty_domain_tolerant = true}).size(), 1u);
  EXPECT_EQ(enumerate_models(sig, {1, 0}).size(), 0u);
}

TEST(Enumerate, ContainsExcludedMiddleCountermodel) {
  Signature sig;
  sig.declare_predicate("P", 0);
  bool seen = false;
  for (const auto& m : enumerate_models(sig, {2, 1}))
    if (m.size() == 2 && m.le(0, 1) && m.atoms[0].empty() && m.atoms[1] == std::set<GroundAtom>{ga("P")}) seen = true;
  EXPECT_TRUE(seen);
}

TEST(Enumerate, EveryModelValidAndStreamDeterministic) {
  const auto sig = sig_p(1, {"c"});
  const auto a = enumerate_models(sig, {3, 1});
  const auto b = enumerate_models(sig, {3, 1});
  EXPECT_EQ(a, b);
  for (const auto& m : a) EXPECT_TRUE(validate_model(m).ok());
  // Worlds never decrease along the stream.
  for (std::size_t i = 1; i < a.size(); ++i) EXPECT_LE(a[i - 1].size(), a[i].size());
}

TEST(Enumerate, CeilingRefusal) {
  Signature sig;
  sig.declare_predicate("Q", 2);
  try {
    enumerate_models(sig, {4, 4});
    FAIL() << "expected refusal";
  } catch (const EnumerationTooLarge& e) {
    EXPECT_NE(std::string(e.what()).find("ceiling"), std::string::npos);
  }
}

TEST(Countermodel, ExcludedMiddle) {
  const auto sig = sig_p(1, {"c"});
  auto cm = find_countermodel({}, parse_formula("P(c) | ~P(c)", sig), {2, 1});
  ASSERT_TRUE(cm);
  EXPECT_EQ(cm->model.size(), 2u);
  EXPECT_FALSE(forces(cm->model, cm->root, parse_formula("P(c) | ~P(c)", sig)));
  EXPECT_FALSE(find_countermodel({}, parse_formula("P(c) | ~P(c)", sig), {1, 2}));
}

TEST(Countermodel, PremiseEqualsGoal) {
  const auto sig = sig_p(1, {"c"});
  const Formula p = parse_formula("P(c)", sig);
  EXPECT_FALSE(find_countermodel({p}, p, {3, 2}));
}

TEST(Countermodel, CasariHasNoneAtThreeTwo) {
  EXPECT_FALSE(find_countermodel({}, parse_formula(casari, sig_p(1)), {3, 2}));
}

TEST(Countermodel, NeedsASecondElement) {
  const auto sig = sig_p(1, {"c"});
  const Formula f = parse_formula("~P(c) -> ~exists x. P(x)", sig);
  EXPECT_FALSE(find_countermodel({}, f, {3, 0}));
  auto cm = find_countermodel({}, f, {1, 1});
  ASSERT_TRUE(cm);
  EXPECT_EQ(cm->model.domain[0].size(), 2u);
}

TEST(ModelIO, ParsesAndRoundTrips) {
  const std::string text =
      "worlds: [w0,w1]\n"
      "order: [[w0,w1]]   # covering pairs\n"
      "domain: {w0:[c], w1:[c,d]}\n"
      "atoms: {w1:[\"P(d)\"]}\n";
  const KripkeModel m = parse_model(text);
  EXPECT_EQ(m.size(), 2u);
  EXPECT_TRUE(m.le(0, 1));
  EXPECT_EQ(m.atoms[1], std::set<GroundAtom>{ga("P", {C("d")})});
  EXPECT_EQ(parse_model(format_model(m)), m);

  KripkeModel fancy = excluded_middle_model();
  fancy.domain[1].push_back(Element::fresh(3));
  fancy.atoms[1].insert(ga("Q", {Element::fresh(3), C("c")}));
  fancy.interpretation.emplace(Element::fresh(1), C("c"));
  EXPECT_EQ(parse_model(format_model(fancy)), fancy);
}

TEST(ModelIO, RejectsInvalidModels) {
  EXPECT_THROW(parse_model("worlds: [w0,w1]\norder: [[w0,w1]]\ndomain: {w0:[c], w1:[c]}\natoms: {w0:[\"P(c)\"]}"),
               ModelFormatError);
  EXPECT_THROW(parse_model("worlds: [w0]\norder: [[w0,w9]]"), ModelFormatError);
  EXPECT_THROW(parse_model("worlds: [w0]\ncolour: red"), ModelFormatError);
  EXPECT_THROW(parse_model("worlds: [w0,w1]\norder: [[w0,w1],[w1,w0]]\ndomain: {w0:[c], w1:[c]}"), ModelFormatError);
}

std::vector<Formula> probe_formulas() {
  const auto sig = sig_p(1);
  std::vector<Formula> out;
  for (const char* s : {casari, "forall x. (P(x) | ~P(x))", "~~forall x. (P(x) | ~P(x))",
                        "exists x. (P(x) -> forall y. P(y))", "(~forall x. P(x)) -> exists x. ~P(x)",
                        "forall y. exists x. (P(x) -> P(y))"})
    out.push_back(parse_formula(s, sig));
  return out;
}

TEST(Property, ForcingIsMonotone) {
  const auto gamma = probe_formulas();
  std::size_t checks = 0;
  for_each_model(sig_p(1), {3, 2}, {}, [&](const KripkeModel& m) {
    const auto u = m.universe();
    const std::vector<Element> delta(u.begin(), u.end());
    const ClosureSet cl(gamma, delta);
    Forcing f(m);
    for (const Formula& g : cl.members())
      for (WorldId w = 0; w < m.size(); ++w) {
        const auto els = elements_of(g);
        if (!std::all_of(els.begin(), els.end(), [&](const Element& e) { return m.in_domain(w, e); })) continue;
        if (!f(w, g)) continue;
        for (WorldId v : m.cone(w)) {
          EXPECT_TRUE(f(v, g)) << to_string(g) << "\n" << format_model(m);
          ++checks;
        }
      }
    return true;
  });
  EXPECT_GT(checks, 10000u);
}

TEST(Property, ForcingAgreesWithNaiveEvaluator) {
  testing::FormulaGen gen(11, true);
  std::vector<Formula> formulas = probe_formulas();
  for (int i = 0; i < 40; ++i) formulas.push_back(gen.closed(4));
  Signature sig = sig_p(1, {"c", "d"});
  std::size_t checks = 0;
  for_each_model(sig, {2, 2}, {}, [&](const KripkeModel& m) {
    const auto u = m.universe();
    const ClosureSet cl(formulas, std::vector<Element>(u.begin(), u.end()));
    Forcing f(m);
    for (const Formula& g : cl.members()) {
      const auto els = elements_of(g);
      for (WorldId w = 0; w < m.size(); ++w) {
        if (!std::all_of(els.begin(), els.end(), [&](const Element& e) { return m.in_domain(w, e); })) continue;
        const bool agree = f(w, g) == testing::naive_forces(m, w, g);
        EXPECT_TRUE(agree) << to_string(g) << "\n" << format_model(m);
        if (!agree) return false;
        ++checks;
      }
    }
    return true;
  });
  EXPECT_GT(checks, 100000u);
}

TEST(Property, CountermodelsSatisfyPostcondition) {
  testing::FormulaGen gen(23, true);
  int found = 0;
  for (int i = 0; i < 150; ++i) {
    std::vector<Formula> o;
    if (i % 2) o.push_back(gen.closed(2));
    const Formula phi = gen.closed(3);
    auto cm = find_countermodel(o, phi, {2, 1});
    if (!cm) continue;
    ++found;
    const KripkeModel& m = cm->model;
    EXPECT_TRUE(validate_model(m).ok());
    EXPECT_FALSE(testing::naive_forces(m, cm->root, phi));
    for (WorldId w = 0; w < m.size(); ++w)
      for (const Formula& g : o) EXPECT_TRUE(testing::naive_forces(m, w, g));
  }
  EXPECT_GT(found, 30);
}

}  // namespace
}  // namespace provgame
