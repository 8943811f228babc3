#include <gtest/gtest.h>

#include "provgame/enumerate.hpp"
#include "provgame/extract.hpp"
#include "provgame/solver.hpp"
#include "provgame/strategy.hpp"
#include "support/corpus.hpp"
#include "support/generators.hpp"
#include "support/naive_forcing.hpp"
#include "support/naive_solver.hpp"
#include "support/random_play.hpp"

namespace provgame {
namespace {

Signature sig() { return testing::corpus_signature(); }
Formula F(const std::string& s) { return parse_formula(s, sig()); }
Element C(const std::string& n) { return Element::constant(n); }
Element alpha(std::uint32_t k) { return Element::fresh(k); }

const char* const game2 = "~P(c) -> ~exists x. P(x)";
const char* const casari = "(forall x. ((P(x) -> forall y. P(y)) -> forall y. P(y))) -> forall x. P(x)";

Player solved(const std::string& phi, std::size_t budget) {
  const SolveVerdict v = solve_game(initial_position({}, F(phi)), budget);
  EXPECT_TRUE(v.conclusive()) << phi;
  return v.winner.value_or(Player::proponent);
}

TEST(Solve, Examples) {
  EXPECT_EQ(solved(game2, 1), Player::opponent);
  EXPECT_EQ(solved(game2, 0), Player::proponent);
  EXPECT_EQ(solved("A | ~A", 0), Player::opponent);
  EXPECT_EQ(solved(casari, 1), Player::proponent);
  EXPECT_EQ(solved(casari, 2), Player::proponent);
  EXPECT_EQ(solved("false -> false", 0), Player::proponent);
}

TEST(Solve, VerdictJson) {
  const SolveVerdict v = solve_game(initial_position({}, F(game2)), 1);
  const auto j = verdict_to_json(v);
  EXPECT_EQ(j["budget"], 1);
  EXPECT_EQ(j["winner"], "opponent");
  EXPECT_GT(j["explored"].get<std::size_t>(), 0u);
  EXPECT_FALSE(j["witness"].empty());
}

TEST(Canonicalize, Examples) {
  const Position base = initial_position({}, F(game2));
  Position a = base, b = base;
  a.closure = std::make_shared<const ClosureSet>(base.closure->extended(std::vector<Element>{alpha(2)}));
  b.closure = std::make_shared<const ClosureSet>(base.closure->extended(std::vector<Element>{alpha(7)}));
  a.o_set = {F("P(α2)")};
  b.o_set = {F("P(α7)")};
  EXPECT_EQ(canonicalize_position(a), canonicalize_position(b));
  EXPECT_EQ(canonicalize_position(a), canonicalize_position(a));

  Position c = a;
  c.p_set.insert(F("~P(c)"));
  EXPECT_NE(canonicalize_position(a), canonicalize_position(c));
  Position d = a;
  d.o_set = {F("P(c)")};
  EXPECT_NE(canonicalize_position(a), canonicalize_position(d));
}

TEST(Canonicalize, SwappedFreshElementsShareAKey) {
  const Position base = initial_position({}, F(game2));
  const std::vector<Element> two{alpha(1), alpha(2)};
  Position a = base, b = base;
  a.closure = b.closure = std::make_shared<const ClosureSet>(base.closure->extended(two));
  a.o_set = {F("P(α1)"), F("exists x. P(x)")};
  b.o_set = {F("P(α2)"), F("exists x. P(x)")};
  EXPECT_EQ(canonicalize_position(a), canonicalize_position(b));
}

TEST(Oracle, CorpusAgreesWithNaiveMinimax) {
  std::size_t compared = 0;
  for (const auto& e : testing::corpus()) {
    const Position start = initial_position({}, testing::corpus_formula(e));
    for (std::size_t budget = 0; budget <= 1; ++budget) {
      testing::NaiveSolver naive(start, budget, 11);
      Player expected;
      try {
        expected = naive.winner(start);
      } catch (const std::length_error&) {
        continue;
      }
      const SolveVerdict v = solve_game(start, budget);
      ASSERT_TRUE(v.conclusive());
      EXPECT_EQ(*v.winner, expected) << e.text << " budget " << budget;
      ++compared;
    }
  }
  EXPECT_GE(compared, 20u);
}

TEST(Oracle, RandomFormulasAgreeWithNaiveMinimax) {
  std::size_t compared = 0;
  for (unsigned seed = 0; seed < 400 && compared < 150; ++seed) {
    testing::FormulaGen gen(seed, true);
    const Formula phi = gen.closed(2 + static_cast<int>(seed % 2));
    std::vector<Formula> o0;
    if (seed % 3 == 0) o0.push_back(gen.closed(1));
    const Position start = initial_position(o0, phi);
    for (std::size_t budget = 0; budget <= 1; ++budget) {
      testing::NaiveSolver naive(start, budget, 10);
      Player expected;
      try {
        expected = naive.winner(start);
      } catch (const std::length_error&) {
        continue;
      }
      const SolveVerdict v = solve_game(start, budget);
      ASSERT_TRUE(v.conclusive());
      EXPECT_EQ(*v.winner, expected) << to_string(phi) << " budget " << budget;
      ++compared;
    }
  }
  EXPECT_GE(compared, 100u);
}

TEST(Property, OpponentWinsAreMonotoneInBudget) {
  for (const auto& e : testing::corpus()) {
    const Position start = initial_position({}, testing::corpus_formula(e));
    bool opponent_won = false;
    for (std::size_t budget = 0; budget <= 3; ++budget) {
      const SolveVerdict v = solve_game(start, budget);
      ASSERT_TRUE(v.conclusive()) << e.text;
      if (opponent_won) {
        EXPECT_EQ(*v.winner, Player::opponent) << e.text << " budget " << budget;
      }
      opponent_won = opponent_won || *v.winner == Player::opponent;
    }
    EXPECT_EQ(opponent_won, !e.valid) << e.text;
  }
}

TEST(Property, SolverAgreesWithCountermodelSearch) {
  for (const auto& e : testing::corpus()) {
    const Formula phi = testing::corpus_formula(e);
    const ModelBounds b{3, is_quantifier_free(phi) ? 1u : 2u};
    auto cm = find_countermodel({}, phi, b, {});
    if (!cm) continue;
    ModelOpponent o(cm->model, false, cm->root);
    SaturationProponent p;
    const Position start = initial_position({}, phi);
    const GameTrace t = run_game(start, o, p);
    ASSERT_EQ(t.outcome.winner, Player::opponent) << e.text;
    const std::size_t used = t.final_position().delta().size() - start.delta().size();
    const SolveVerdict v = solve_game(start, used);
    ASSERT_TRUE(v.conclusive());
    EXPECT_EQ(*v.winner, Player::opponent) << e.text << " budget " << used;
  }
}

TEST(Witness, WinsAgainstVariedAdversaries) {
  for (const auto& e : testing::corpus()) {
    const Position start = initial_position({}, testing::corpus_formula(e));
    const std::size_t budget = 2;
    const SolveVerdict v = solve_game(start, budget);
    ASSERT_TRUE(v.conclusive());
    for (unsigned seed = 0; seed < 25; ++seed) {
      SolverStrategy w(v.witness);
      testing::RandomStrategy r(seed, seed % (budget + 1));
      SaturationProponent sat;
      Strategy* adversary = &r;
      if (*v.winner == Player::opponent && seed == 0) adversary = &sat;
      const GameTrace t = *v.winner == Player::opponent ? run_game(start, w, *adversary) : run_game(start, *adversary, w);
      EXPECT_EQ(t.outcome.winner, *v.winner) << e.text << " seed " << seed;
      EXPECT_NE(t.outcome.reason, OutcomeReason::cutoff_presumed_infinite) << e.text;
    }
  }
}

TEST(Extract, ExcludedMiddleChain) {
  const Formula phi = F("A | ~A");
  KripkeModel m;
  m.worlds = {"u", "v"};
  m.order = KripkeModel::close_order(2, {{0, 1}});
  m.domain = {{}, {}};
  m.atoms = {{}, {GroundAtom{"A", {}}}};
  m.empty_domain_tolerant = true;
  ModelOpponent o(m);
  ScriptedStrategy p({ProponentMove{{F("~A")}}});
  const GameTrace t = run_game(initial_position({}, phi), o, p);
  ASSERT_EQ(t.outcome.winner, Player::opponent);
  const KripkeModel cm = extract_countermodel(t);
  ASSERT_EQ(cm.size(), 2u);
  EXPECT_TRUE(cm.le(0, 1));
  EXPECT_TRUE(cm.atoms[0].empty());
  EXPECT_EQ(cm.atoms[1], (std::set<GroundAtom>{GroundAtom{"A", {}}}));
  EXPECT_FALSE(testing::naive_forces(cm, 0, phi));
}

TEST(Extract, GameTwo) {
  ScriptedStrategy o({OpponentMove{{alpha(1)}, {F("~P(c)"), F("exists x. P(x)"), F("P(α1)")}}});
  SaturationProponent p;
  const Formula phi = F(game2);
  const GameTrace t = run_game(initial_position({}, phi), o, p);
  ASSERT_EQ(t.outcome.winner, Player::opponent);
  const KripkeModel cm = extract_countermodel(t);
  ASSERT_EQ(cm.size(), 2u);
  EXPECT_EQ(cm.worlds, (std::vector<std::string>{"ω0", "ω1"}));
  EXPECT_EQ(cm.domain[0], std::vector<Element>{C("c")});
  EXPECT_EQ(cm.domain[1], (std::vector<Element>{C("c"), alpha(1)}));
  EXPECT_TRUE(cm.atoms[0].empty());
  EXPECT_EQ(cm.atoms[1], (std::set<GroundAtom>{GroundAtom{"P", {alpha(1)}}}));
  EXPECT_FALSE(testing::naive_forces(cm, 0, phi));
}

TEST(Extract, SingleWorldWithoutOpponentMoves) {
  ExpanderOpponent o;
  SaturationProponent p;
  const GameTrace t = run_game(initial_position({}, F("P(c)")), o, p);
  ASSERT_EQ(t.outcome.winner, Player::opponent);
  const KripkeModel cm = extract_countermodel(t);
  EXPECT_EQ(cm.size(), 1u);
  EXPECT_FALSE(testing::naive_forces(cm, 0, F("P(c)")));
}

TEST(Extract, FallsBackToTheSolverWhenThePlayIsNotARefutation) {
  // Saturation resigns at once, so the play itself has a single state.
  ExpanderOpponent o;
  SaturationProponent p;
  const Formula phi = F("A | ~A");
  const GameTrace t = run_game(initial_position({}, phi), o, p);
  ASSERT_EQ(t.outcome.winner, Player::opponent);
  ASSERT_TRUE(t.steps.empty());
  const KripkeModel cm = extract_countermodel(t);
  EXPECT_GE(cm.size(), 2u);
  EXPECT_FALSE(testing::naive_forces(cm, 0, phi));
}

TEST(Extract, RejectsProponentWins) {
  ExpanderOpponent o;
  SaturationProponent p;
  const GameTrace t = run_game(initial_position({}, F("P(c) -> P(c)")), o, p, 4);
  ASSERT_EQ(t.outcome.winner, Player::proponent);
  EXPECT_THROW(extract_countermodel(t), std::invalid_argument);
}

TEST(Property, ExtractionIsSoundOnCorpusWins) {
  std::size_t trees = 0, chains = 0;
  for (const auto& e : testing::corpus()) {
    if (e.valid) continue;
    const Formula phi = testing::corpus_formula(e);
    const Position start = initial_position({}, phi);
    const SolveVerdict v = solve_game(start, 2);
    ASSERT_EQ(v.winner, Player::opponent) << e.text;
    auto sound = [&](const KripkeModel& cm) {
      EXPECT_TRUE(validate_model(cm).ok()) << e.text;
      EXPECT_FALSE(testing::naive_forces(cm, 0, phi)) << e.text;
    };
    {
      SolverStrategy w(v.witness);
      SaturationProponent sat;
      const GameTrace t = run_game(start, w, sat);
      ASSERT_EQ(t.outcome.winner, Player::opponent);
      sound(extract_countermodel(t));
      ++chains;
    }
    for (unsigned seed = 0; seed < 10; ++seed) {
      SolverStrategy w(v.witness);
      testing::RandomStrategy r(seed, 0);
      const GameTrace t = run_game(start, w, r);
      ASSERT_EQ(t.outcome.winner, Player::opponent);
      sound(extract_countermodel(t, v.witness.get()));
      ++trees;
      sound(extract_countermodel(t));
      ++chains;
    }
  }
  EXPECT_EQ(trees, 80u);
  EXPECT_EQ(chains, 88u);
}

TEST(Limits, NodeLimitIsInconclusive) {
  const SolveVerdict v = solve_game(initial_position({}, F(casari)), 2, std::size_t{3});
  EXPECT_FALSE(v.conclusive());
  EXPECT_FALSE(v.note.empty());
  EXPECT_EQ(verdict_to_json(v)["winner"], "inconclusive");
}

TEST(Limits, ClosureCeilingRefuses) {
  SolverOptions opts;
  opts.closure_ceiling = 6;
  EXPECT_THROW(solve_game(initial_position({}, F(casari)), 2, opts), SolverRefused);
  EXPECT_NO_THROW(solve_game(initial_position({}, F("P(c)")), 0, opts));
}

}  // namespace
}  // namespace provgame
