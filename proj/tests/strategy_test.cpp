#include <gtest/gtest.h>

#include "provgame/enumerate.hpp"
#include "provgame/game.hpp"
#include "provgame/model_io.hpp"
#include "provgame/referee.hpp"
#include "provgame/strategy.hpp"
#include "support/corpus.hpp"
#include "support/random_play.hpp"

namespace provgame {
namespace {

Signature sig() { return testing::corpus_signature(); }
Formula F(const std::string& s) { return parse_formula(s, sig()); }
Element C(const std::string& n) { return Element::constant(n); }
Element alpha(std::uint32_t k) { return Element::fresh(k); }
GroundAtom ga(const std::string& p, std::vector<Element> args = {}) { return {p, std::move(args)}; }

KripkeModel make_model(std::vector<std::pair<WorldId, WorldId>> covers, std::vector<std::vector<Element>> domains,
                       std::vector<std::set<GroundAtom>> atoms) {
  KripkeModel m;
  const std::size_t n = domains.size();
  for (std::size_t i = 0; i < n; ++i) m.worlds.push_back("w" + std::to_string(i));
  m.order = KripkeModel::close_order(n, covers);
  for (auto& d : domains) std::sort(d.begin(), d.end());
  m.domain = std::move(domains);
  m.atoms = std::move(atoms);
  return m;
}

Position with_move(const Position& c, const OpponentMove& mv) {
  Position out = c;
  if (!mv.fresh.empty()) out.closure = std::make_shared<const ClosureSet>(c.closure->extended(mv.fresh));
  out.o_set.insert(mv.into_o.begin(), mv.into_o.end());
  return out;
}

TEST(OpponentFromModel, ExcludedMiddleGame) {
  const Formula phi = F("A | ~A");
  KripkeModel m = make_model({{0, 1}}, {{}, {}}, {{}, {ga("A")}});
  m.empty_domain_tolerant = true;
  ModelOpponentState s(m);
  Position c = initial_position({}, phi);

  const OpponentMove first = opponent_next_move(s, c);
  EXPECT_TRUE(first.fresh.empty());
  EXPECT_TRUE(first.into_o.empty());
  EXPECT_EQ(s.world, 0u);

  c = apply_move(c, Player::proponent, ProponentMove{{F("~A")}});
  ASSERT_EQ(to_move(c), Player::opponent);
  const OpponentMove second = opponent_next_move(s, c);
  EXPECT_EQ(s.world, 1u);
  EXPECT_EQ(second.into_o, (std::set<Formula>{F("A"), phi}));
  c = apply_move(c, Player::opponent, second);
  EXPECT_EQ(to_move(c), Player::proponent);
  EXPECT_FALSE(mistakes(c).proponent.empty());
  for (const Formula& f : c.closure->members())
    if (!c.p_set.contains(f)) {
      EXPECT_TRUE(f == F("A") || f == phi || f == Formula::bottom()) << to_string(f);
    }
}

TEST(OpponentFromModel, SingleWorldAtom) {
  const KripkeModel m = make_model({}, {{C("c")}}, {{}});
  ModelOpponentState s(m);
  const Position c = initial_position({}, F("P(c)"));
  const OpponentMove mv = opponent_next_move(s, c);
  EXPECT_TRUE(mv.fresh.empty());
  EXPECT_TRUE(mv.into_o.empty());
}

TEST(OpponentFromModel, GameTwoMoveFromItsOwnModel) {
  const Element a = C("a");
  const KripkeModel m = make_model({{0, 1}}, {{C("c")}, {C("c"), a}}, {{}, {ga("P", {a})}});
  ModelOpponentState s(m);
  const Position c = initial_position({}, F("~P(c) -> ~exists x. P(x)"));
  const OpponentMove mv = opponent_next_move(s, c);
  EXPECT_EQ(mv.fresh, std::vector<Element>{alpha(1)});
  EXPECT_EQ(mv.into_o, (std::set<Formula>{F("~P(c)"), F("exists x. P(x)"), F("P(α1)")}));
  EXPECT_EQ(s.world, 1u);
  EXPECT_EQ(s.interp.at(alpha(1)), a);
}

TEST(OpponentFromModel, Errors) {
  const KripkeModel m = make_model({}, {{C("c")}}, {{ga("P", {C("c")})}});
  ModelOpponentState s(m);
  EXPECT_THROW(opponent_next_move(s, initial_position({}, F("P(c)"))), StrategyError);
  const KripkeModel two_roots = make_model({}, {{C("c")}, {C("c")}}, {{}, {}});
  EXPECT_THROW(ModelOpponentState{two_roots}, StrategyError);
  EXPECT_NO_THROW((ModelOpponentState{two_roots, 1}));
}

TEST(CasariSelectWorld, GrowingChainMatchesMaximalChoice) {
  const Element d1 = C("d1"), d2 = C("d2");
  const KripkeModel m = make_model({{0, 1}, {1, 2}}, {{C("c")}, {C("c"), d1}, {C("c"), d1, d2}}, {{}, {}, {}});
  const Position c = initial_position({}, F("forall x. P(x)"));
  ModelOpponentState s1(m), s2(m);
  const OpponentMove a = opponent_next_move(s1, c);
  const OpponentMove b = casari_next_move(s2, c);
  EXPECT_EQ(s1.world, 2u);
  EXPECT_EQ(s2.world, 2u);
  EXPECT_EQ(a, b);
  EXPECT_EQ(casari_select_world(m, 0, c.p_set, *c.closure), 2u);
}

TEST(CasariSelectWorld, SingleWorld) {
  const KripkeModel m = make_model({}, {{C("c")}}, {{}});
  const Position c = initial_position({}, F("P(c)"));
  EXPECT_EQ(casari_select_world(m, 0, c.p_set, *c.closure), 0u);
}

TEST(CasariSelectWorld, IndistinguishableSuccessorsKeepTheRoot) {
  const KripkeModel m = make_model({{0, 1}, {0, 2}}, {{C("c")}, {C("c")}, {C("c")}}, {{}, {}, {}});
  const Position c = initial_position({}, F("P(c)"));
  EXPECT_EQ(casari_select_world(m, 0, c.p_set, *c.closure), 0u);
  EXPECT_THROW(casari_select_world(m, 0, {}, *c.closure), StrategyError);
}

TEST(Saturation, GameOneAfterFirstElement) {
  const Formula phi = F("forall y. exists x. (P(x) -> P(y))");
  Position c = initial_position({}, phi);
  c = apply_move(c, Player::opponent, OpponentMove{{alpha(1)}, {}});
  ASSERT_EQ(to_move(c), Player::proponent);
  const ProponentMove mv = proponent_saturation_move(c);
  EXPECT_TRUE(mv.into_p.contains(F("exists x. (P(x) -> P(α1))")));
  EXPECT_TRUE(mv.into_p.contains(F("P(α1) -> P(α1)")));
  EXPECT_FALSE(mv.into_p.contains(F("P(α1)")));
  EXPECT_TRUE(find_countermodel({}, F("P(α1)"), {1, 1}, {}));
  EXPECT_EQ(to_move(apply_move(c, Player::proponent, mv)), Player::opponent);
}

TEST(Saturation, AddsExistentialWitnessedByPremise) {
  Position c = initial_position({F("P(c)")}, F("(exists x. P(x)) | Q(c)"));
  ASSERT_EQ(to_move(c), Player::proponent);
  const ProponentMove mv = proponent_saturation_move(c);
  EXPECT_TRUE(mv.into_p.contains(F("exists x. P(x)")));
  EXPECT_FALSE(mv.into_p.contains(F("Q(c)")));
  // Cross-check by forcing on every model in the small bounds.
  for_each_model(sig(), {2, 2}, {}, [&](const KripkeModel& m) {
    Forcing f(m);
    for (WorldId w = 0; w < m.size(); ++w)
      if (f(w, F("P(c)"))) {
        EXPECT_TRUE(f(w, F("exists x. P(x)")));
      }
    return true;
  });
}

TEST(Saturation, ResignsWithNothingToAdd) {
  const Position c = initial_position({}, F("A | ~A"));
  ASSERT_EQ(to_move(c), Player::proponent);
  SaturationProponent p;
  EXPECT_FALSE(p.next_move(c, Player::proponent));
}

// Fixture goals over one unary predicate and the constant c.
const std::vector<std::string>& fixture_goals() {
  static const std::vector<std::string> goals = {
      "P(c)",
      "P(c) | ~P(c)",
      "~~P(c) -> P(c)",
      "~P(c) -> ~exists x. P(x)",
      "(~forall x. P(x)) -> exists x. ~P(x)",
      "exists x. (P(x) -> forall y. P(y))",
      "forall x. (P(x) | ~P(x))",
      "(forall x. ((P(x) -> forall y. P(y)) -> forall y. P(y))) -> forall x. P(x)",
  };
  return goals;
}

std::vector<std::vector<Formula>> fixture_premises() { return {{}, {F("~~P(c)")}, {F("forall x. ~~P(x)")}}; }

std::map<std::string, unsigned> unary_p() { return {{"P", 1}}; }

TEST(Property, BridgeAtMaximalWorldsExhaustive) {
  std::mt19937 rng(7);
  std::size_t checked = 0;
  EnumerationOptions opts;
  opts.rooted_only = true;
  for_each_model(unary_p(), {C("c")}, {3, 2}, opts, [&](const KripkeModel& m) {
    Forcing forcing(m);
    for (const auto& o0 : fixture_premises()) {
      bool premises_hold = true;
      for (const Formula& g : o0) premises_hold = premises_hold && forcing(0, g);
      if (!premises_hold) continue;
      for (const std::string& goal : fixture_goals()) {
        const Formula phi = F(goal);
        Position c = initial_position(o0, phi);
        // A second 𝒫-set: the goal plus a seeded sample of the closure.
        std::vector<Position> starts{c};
        Position wider = c;
        for (const Formula& g : c.closure->members())
          if (rng() % 3 == 0) wider.p_set.insert(g);
        starts.push_back(wider);
        for (const Position& start : starts) {
          ModelOpponentState s(m);
          s.cover(start.delta());
          bool falsified = false;
          for (const Formula& g : start.p_set) falsified = falsified || !s.forces(forcing, 0, g);
          if (!falsified) continue;
          const OpponentMove mv = opponent_next_move(s, start);
          const Position after = with_move(start, mv);
          for (const Formula& psi : after.closure->members())
            EXPECT_EQ(position_truth(after, psi), s.forces(forcing, s.world, psi))
                << goal << " at " << m.worlds[s.world] << ": " << to_string(psi) << "\n"
                << format_model(m);
          EXPECT_EQ(to_move(after), Player::proponent);
          ++checked;
        }
      }
    }
    return !HasFailure();
  });
  EXPECT_GT(checked, 10000u);
}

TEST(Property, CasariPartitionExhaustive) {
  std::size_t checked = 0;
  EnumerationOptions opts;
  opts.rooted_only = true;
  for_each_model(unary_p(), {C("c")}, {3, 2}, opts, [&](const KripkeModel& m) {
    Forcing f(m);
    for (const std::string& goal : fixture_goals()) {
      const Position c = initial_position({}, F(goal));
      if (f(0, F(goal))) continue;
      const WorldId w = casari_select_world(m, 0, c.p_set, *c.closure);
      EXPECT_FALSE(f(w, F(goal)));
      const ClosureSet here(c.gamma(), m.domain[w]);
      for (WorldId v : m.cone(w)) {
        const bool in_x = f(v, F(goal));
        bool in_y = m.domain[v] == m.domain[w];
        if (in_y)
          for (const Formula& g : here.members()) in_y = in_y && f(v, g) == f(w, g);
        EXPECT_TRUE(in_x || in_y) << goal << " w=" << m.worlds[w] << " v=" << m.worlds[v] << "\n" << format_model(m);
      }
      ++checked;
    }
    return !HasFailure();
  });
  EXPECT_GT(checked, 1000u);
}

TEST(Property, SaturationTransfersTheTurnOnValidGoals) {
  std::size_t checked = 0;
  for (const auto& e : testing::corpus()) {
    if (!e.valid) continue;
    for (unsigned seed = 0; seed < 24; ++seed) {
      testing::RandomStrategy o(seed, 1);
      SaturationProponent sat;
      const GameTrace t = run_game(initial_position({}, testing::corpus_formula(e)), o, sat, 8);
      std::vector<Position> all{t.start};
      for (const Step& s : t.steps) all.push_back(s.result);
      for (const Position& c : all) {
        if (to_move(c) != Player::proponent) continue;
        const ProponentMove mv = proponent_saturation_move(c);
        const std::vector<Formula> o_vec(c.o_set.begin(), c.o_set.end());
        bool verified = true;
        for (const Formula& g : mv.into_p)
          verified = verified && !find_countermodel(o_vec, g, {3, 1}, {.empty_domain_tolerant = c.delta().empty()});
        if (!verified) continue;
        bool goals_follow = true;
        for (const Formula& g : c.p_set)
          goals_follow = goals_follow && !find_countermodel(o_vec, g, {3, 1}, {.empty_domain_tolerant = c.delta().empty()});
        if (!goals_follow) continue;
        EXPECT_EQ(to_move(apply_move(c, Player::proponent, mv)), Player::opponent) << e.text;
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 10u);
}

TEST(Property, ModelOpponentBeatsSaturationOnCountermodels) {
  for (const auto& e : testing::corpus()) {
    const Formula phi = testing::corpus_formula(e);
    // Quantifier-free goals need no elements beyond the constants.
    const ModelBounds b{3, is_quantifier_free(phi) ? 1u : 2u};
    auto cm = find_countermodel({}, phi, b, {});
    EXPECT_EQ(cm.has_value(), !e.valid) << e.text;
    if (!cm) continue;
    ModelOpponent o(cm->model, false, cm->root);
    SaturationProponent p;
    const GameTrace t = run_game(initial_position({}, phi), o, p);
    EXPECT_EQ(t.outcome.winner, Player::opponent) << e.text;
    EXPECT_EQ(verify_trace(t), "");
    ModelOpponent cas(cm->model, true, cm->root);
    SaturationProponent p2;
    EXPECT_EQ(run_game(initial_position({}, phi), cas, p2).outcome.winner, Player::opponent) << e.text;
  }
}

TEST(Determinism, StrategiesRepeatThemselves) {
  const Formula phi = F("(~forall x. P(x)) -> exists x. ~P(x)");
  auto cm = find_countermodel({}, phi, {3, 2}, {});
  ASSERT_TRUE(cm);
  auto play = [&] {
    ModelOpponent o(cm->model, false, cm->root);
    SaturationProponent p;
    return run_game(initial_position({}, phi), o, p);
  };
  EXPECT_EQ(play(), play());
}

}  // namespace
}  // namespace provgame
