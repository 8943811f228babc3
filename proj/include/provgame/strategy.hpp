#pragma once

// Strategies: an Opponent driven by a Kripke countermodel, the stabilizing
// variant for frames whose domains settle, a saturating Proponent, and
// scripted players.

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "provgame/closure.hpp"
#include "provgame/enumerate.hpp"
#include "provgame/game.hpp"
#include "provgame/kripke.hpp"
#include "provgame/referee.hpp"
#include "provgame/syntax.hpp"

namespace provgame {

class StrategyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using ElementMap = std::map<Element, Element>;

inline Formula apply_map(const Formula& f, const ElementMap& map) {
  return map_elements(f, [&](const Element& e) {
    auto it = map.find(e);
    if (it == map.end()) throw StrategyError("element " + e.str() + " has no interpretation");
    return it->second;
  });
}

// Opponent state: a model, the world play has reached, and the injection of
// game elements into that world's domain.
struct ModelOpponentState {
  KripkeModel model;
  WorldId world = 0;
  ElementMap interp;

  explicit ModelOpponentState(KripkeModel m, std::optional<WorldId> start = std::nullopt) : model(std::move(m)) {
    auto r = validate_model(model);
    if (!r.ok()) throw StrategyError("invalid model: " + r.violations[0]);
    if (start) {
      world = *start;
    } else if (auto root = model.root()) {
      world = *root;
    } else {
      throw StrategyError("model has no least world; name a starting world");
    }
  }

  // Extends the injection to every element of Δ, using the model's
  // interpretation or the element itself.
  void cover(const std::vector<Element>& delta) {
    std::set<Element> image;
    for (const auto& [from, to] : interp) image.insert(to);
    for (const Element& e : delta) {
      if (interp.contains(e)) continue;
      Element target = e;
      if (auto it = model.interpretation.find(e); it != model.interpretation.end()) target = it->second;
      if (!model.in_domain(world, target))
        throw StrategyError("game element " + e.str() + " is not interpreted in " + model.worlds[world]);
      if (!image.insert(target).second)
        throw StrategyError("interpretation is not injective at " + target.str());
      interp.emplace(e, target);
    }
  }

  bool forces(Forcing& f, WorldId w, const Formula& g) const { return f.eval(w, apply_map(g, interp)); }
};

namespace detail {

inline bool falsifies_some(const ModelOpponentState& s, Forcing& f, WorldId w, const std::set<Formula>& p_set) {
  for (const Formula& g : p_set)
    if (!s.forces(f, w, g)) return true;
  return false;
}

// The move that takes the game to world `w`: new elements for the part of
// domain(w) not yet named, and every closure member forced at w.
inline OpponentMove move_to_world(ModelOpponentState& s, Forcing& f, const Position& c, WorldId w) {
  std::set<Element> image;
  for (const auto& [from, to] : s.interp) image.insert(to);
  OpponentMove mv;
  for (const Element& d : s.model.domain[w]) {
    if (image.contains(d)) continue;
    const Element name = next_fresh(c, mv.fresh.size());
    mv.fresh.push_back(name);
    s.interp.emplace(name, d);
  }
  const ClosureSet cl = mv.fresh.empty() ? *c.closure : c.closure->extended(mv.fresh);
  for (const Formula& g : cl.members())
    if (!c.o_set.contains(g) && s.forces(f, w, g)) mv.into_o.insert(g);
  s.world = w;
  return mv;
}

}  // namespace detail

// Moves to the lowest-numbered maximal world above the current one that
// falsifies some formula of 𝒫.
inline OpponentMove opponent_next_move(ModelOpponentState& s, const Position& c) {
  s.cover(c.delta());
  Forcing f(s.model);
  std::vector<WorldId> falsifying;
  for (WorldId v : s.model.cone(s.world))
    if (detail::falsifies_some(s, f, v, c.p_set)) falsifying.push_back(v);
  if (falsifying.empty())
    throw StrategyError("no world above " + s.model.worlds[s.world] + " falsifies a formula of P");
  for (WorldId v : falsifying) {
    bool maximal = true;
    for (WorldId u : falsifying)
      if (u != v && s.model.le(v, u)) maximal = false;
    if (maximal) return detail::move_to_world(s, f, c, v);
  }
  throw std::logic_error("finite order without a maximal element");
}

namespace detail {

inline std::vector<char> closure_truth(const KripkeModel& m, Forcing& f, WorldId w, const std::vector<Formula>& gamma) {
  const ClosureSet cl(gamma, m.domain[w]);
  std::vector<char> out;
  for (const Formula& g : cl.members()) out.push_back(f.eval(w, g));
  return out;
}

}  // namespace detail

// From w0, repeatedly steps to a strictly higher world that falsifies some
// 𝒫-formula: preferably one with a larger domain, otherwise one with the same
// domain but different truth on the closure over its domain. `gamma` and
// `p_set` must already be expressed in model elements.
inline WorldId casari_select_world(const KripkeModel& m, WorldId w0, const std::set<Formula>& p_set,
                                   const std::vector<Formula>& gamma) {
  Forcing f(m);
  auto falsifies = [&](WorldId v) {
    for (const Formula& g : p_set)
      if (!f.eval(v, g)) return true;
    return false;
  };
  if (!falsifies(w0)) throw StrategyError("no formula of P fails at " + m.worlds[w0]);
  WorldId cur = w0;
  while (true) {
    std::optional<WorldId> bigger, different;
    std::optional<std::vector<char>> here;
    for (WorldId v = 0; v < m.size(); ++v) {
      if (v == cur || !m.le(cur, v) || !falsifies(v)) continue;
      if (m.domain[v].size() > m.domain[cur].size()) {
        bigger = v;
        break;
      }
      if (!different) {
        if (!here) here = detail::closure_truth(m, f, cur, gamma);
        if (detail::closure_truth(m, f, v, gamma) != *here) different = v;
      }
    }
    if (bigger) cur = *bigger;
    else if (different) cur = *different;
    else return cur;
  }
}

inline WorldId casari_select_world(const KripkeModel& m, WorldId w0, const std::set<Formula>& p_set,
                                   const ClosureSet& closure) {
  return casari_select_world(m, w0, p_set, closure.gamma());
}

inline OpponentMove casari_next_move(ModelOpponentState& s, const Position& c) {
  s.cover(c.delta());
  std::set<Formula> p;
  for (const Formula& g : c.p_set) p.insert(apply_map(g, s.interp));
  std::vector<Formula> gamma;
  for (const Formula& g : c.gamma()) gamma.push_back(apply_map(g, s.interp));
  const WorldId w = casari_select_world(s.model, s.world, p, gamma);
  Forcing f(s.model);
  return detail::move_to_world(s, f, c, w);
}

struct SaturationBounds {
  ModelBounds bounds{2, 2};
  double ceiling = 5e6;
};

// Adds every closure member outside 𝒫 that no model within the bounds
// separates from 𝒪. Candidates whose search would exceed the ceiling are
// left out.
inline ProponentMove proponent_saturation_move(const Position& c, const SaturationBounds& b = {}) {
  ProponentMove mv;
  const std::vector<Formula> o(c.o_set.begin(), c.o_set.end());
  EnumerationOptions opts;
  opts.ceiling = b.ceiling;
  opts.empty_domain_tolerant = c.delta().empty();
  for (const Formula& g : c.closure->members()) {
    if (c.p_set.contains(g)) continue;
    if (c.o_set.contains(g)) {
      mv.into_p.insert(g);
      continue;
    }
    try {
      if (!find_countermodel(o, g, b.bounds, opts)) mv.into_p.insert(g);
    } catch (const EnumerationTooLarge&) {
    }
  }
  return mv;
}

class ModelOpponent : public Strategy {
 public:
  explicit ModelOpponent(KripkeModel m, bool casari = false, std::optional<WorldId> start = std::nullopt)
      : state_(std::move(m), start), casari_(casari) {}

  std::string kind() const override { return casari_ ? "casari_policy" : "opponent_from_model"; }

  std::optional<Move> next_move(const Position& c, Player me) override {
    if (me != Player::opponent) throw StrategyError(kind() + " only plays Opponent");
    return casari_ ? casari_next_move(state_, c) : opponent_next_move(state_, c);
  }

  const ModelOpponentState& state() const { return state_; }

 private:
  ModelOpponentState state_;
  bool casari_;
};

class SaturationProponent : public Strategy {
 public:
  explicit SaturationProponent(SaturationBounds b = {}) : bounds_(b) {}
  std::string kind() const override { return "proponent_saturation"; }

  std::optional<Move> next_move(const Position& c, Player me) override {
    if (me != Player::proponent) throw StrategyError("saturation only plays Proponent");
    ProponentMove mv = proponent_saturation_move(c, bounds_);
    if (mv.into_p.empty()) return std::nullopt;
    return mv;
  }

 private:
  SaturationBounds bounds_;
};

// A fixed list of moves; resigns when it runs out.
class ScriptedStrategy : public Strategy {
 public:
  explicit ScriptedStrategy(std::vector<Move> moves) : moves_(std::move(moves)) {}
  std::string kind() const override { return "scripted"; }

  std::optional<Move> next_move(const Position&, Player me) override {
    if (next_ >= moves_.size()) return std::nullopt;
    const Move& m = moves_[next_++];
    if (mover_of(m) != me) throw StrategyError("script holds a move for the other player");
    return m;
  }

 private:
  std::vector<Move> moves_;
  std::size_t next_ = 0;
};

// Opponent that introduces one new element per turn and asserts nothing.
class ExpanderOpponent : public Strategy {
 public:
  std::string kind() const override { return "scripted"; }
  std::optional<Move> next_move(const Position& c, Player me) override {
    if (me != Player::opponent) throw StrategyError("the expander only plays Opponent");
    return OpponentMove{{next_fresh(c)}, {}};
  }
};

}  // namespace provgame
