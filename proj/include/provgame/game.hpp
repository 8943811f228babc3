#pragma once

// Game positions, the position truth table, mistakes, the turn rule and move
// application.

#include <algorithm>
#include <memory>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "provgame/closure.hpp"
#include "provgame/formula.hpp"
#include "provgame/syntax.hpp"

namespace provgame {

enum class Player { opponent, proponent };

inline const char* to_string(Player p) { return p == Player::opponent ? "opponent" : "proponent"; }
inline Player other(Player p) { return p == Player::opponent ? Player::proponent : Player::opponent; }

struct OpponentMove {
  std::vector<Element> fresh;
  std::set<Formula> into_o;
  friend bool operator==(const OpponentMove&, const OpponentMove&) = default;
};

struct ProponentMove {
  std::set<Formula> into_p;
  friend bool operator==(const ProponentMove&, const ProponentMove&) = default;
};

using Move = std::variant<OpponentMove, ProponentMove>;

inline Player mover_of(const Move& m) {
  return std::holds_alternative<OpponentMove>(m) ? Player::opponent : Player::proponent;
}

class MoveError : public std::runtime_error {
 public:
  enum class Kind { wrong_mover, wrong_shape, outside_closure, reused_element };
  MoveError(Kind k, const std::string& msg) : std::runtime_error(msg), kind_(k) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

inline const char* to_string(MoveError::Kind k) {
  switch (k) {
    case MoveError::Kind::wrong_mover: return "wrong_mover";
    case MoveError::Kind::wrong_shape: return "wrong_shape";
    case MoveError::Kind::outside_closure: return "outside_closure";
    case MoveError::Kind::reused_element: return "reused_element";
  }
  return "?";
}

struct Position {
  std::shared_ptr<const ClosureSet> closure;
  std::set<Formula> o_set;
  std::set<Formula> p_set;

  const std::vector<Formula>& gamma() const { return closure->gamma(); }
  const std::vector<Element>& delta() const { return closure->delta(); }

  friend bool operator==(const Position& a, const Position& b) {
    return a.gamma() == b.gamma() && a.delta() == b.delta() && a.o_set == b.o_set && a.p_set == b.p_set;
  }
};

inline Position initial_position(std::span<const Formula> o0, const Formula& phi) {
  std::vector<Formula> gamma(o0.begin(), o0.end());
  gamma.push_back(phi);
  std::set<Element> consts;
  for (const Formula& f : gamma) {
    if (!f.is_closed()) throw std::invalid_argument("open formula: " + to_string(f));
    for (const Element& e : elements_of(f)) consts.insert(e);
  }
  const std::vector<Element> delta(consts.begin(), consts.end());
  Position c;
  c.closure = std::make_shared<const ClosureSet>(gamma, delta);
  c.o_set.insert(o0.begin(), o0.end());
  c.p_set.insert(phi);
  return c;
}

inline Position initial_position(std::initializer_list<Formula> o0, const Formula& phi) {
  return initial_position(std::span<const Formula>(o0.begin(), o0.size()), phi);
}

// Truth in a position, memoized for one position.
class PositionTruth {
 public:
  explicit PositionTruth(const Position& c) : c_(c) {}

  bool operator()(const Formula& f) {
    if (!c_.closure->contains(f)) throw std::invalid_argument("formula outside the closure: " + to_string(f));
    return eval(f);
  }

 private:
  bool marked(const Formula& f) const { return c_.o_set.contains(f) || c_.p_set.contains(f); }

  bool eval(const Formula& f) {
    switch (f.op()) {
      case Connective::bottom: return false;
      case Connective::atom: return c_.o_set.contains(f);
      default: break;
    }
    if (!marked(f)) return false;
    if (auto it = memo_.find(f); it != memo_.end()) return it->second;
    bool v = false;
    switch (f.op()) {
      case Connective::implies: v = !eval(f.lhs()) || eval(f.rhs()); break;
      case Connective::conj: v = eval(f.lhs()) && eval(f.rhs()); break;
      case Connective::disj: v = eval(f.lhs()) || eval(f.rhs()); break;
      case Connective::forall:
        v = std::all_of(c_.delta().begin(), c_.delta().end(),
                        [&](const Element& d) { return eval(open_body(f.body(), d)); });
        break;
      case Connective::exists:
        v = std::any_of(c_.delta().begin(), c_.delta().end(),
                        [&](const Element& d) { return eval(open_body(f.body(), d)); });
        break;
      default: break;
    }
    memo_.emplace(f, v);
    return v;
  }

  const Position& c_;
  std::unordered_map<Formula, bool, FormulaHash> memo_;
};

inline bool position_truth(const Position& c, const Formula& f) { return PositionTruth(c)(f); }

struct Mistakes {
  std::set<Formula> opponent;
  std::set<Formula> proponent;
};

inline Mistakes mistakes(const Position& c) {
  PositionTruth t(c);
  Mistakes m;
  for (const Formula& f : c.o_set)
    if (!t(f)) m.opponent.insert(f);
  for (const Formula& f : c.p_set)
    if (!t(f)) m.proponent.insert(f);
  return m;
}

inline Player to_move(const Position& c) {
  PositionTruth t(c);
  for (const Formula& f : c.o_set)
    if (!t(f)) return Player::opponent;
  for (const Formula& f : c.p_set)
    if (!t(f)) return Player::proponent;
  return Player::opponent;
}

// The next unused game element name α<k>.
inline Element next_fresh(const Position& c, std::size_t skip = 0) {
  std::uint32_t top = 0;
  for (const Element& e : c.delta())
    if (e.is_fresh()) top = std::max(top, e.fresh_index());
  return Element::fresh(top + 1 + static_cast<std::uint32_t>(skip));
}

inline Position apply_move(const Position& c, Player mover, const Move& m) {
  if (mover != to_move(c))
    throw MoveError(MoveError::Kind::wrong_mover, std::string("it is not ") + to_string(mover) + "'s turn");
  if (mover_of(m) != mover)
    throw MoveError(MoveError::Kind::wrong_shape, mover == Player::proponent
                                                      ? "proponent may only add formulas to P"
                                                      : "opponent moves extend delta and O");
  Position next = c;
  if (const auto* om = std::get_if<OpponentMove>(&m)) {
    std::set<Element> seen;
    for (const Element& e : om->fresh) {
      if (!seen.insert(e).second || std::find(c.delta().begin(), c.delta().end(), e) != c.delta().end())
        throw MoveError(MoveError::Kind::reused_element, "element " + e.str() + " is not new");
    }
    if (!om->fresh.empty()) next.closure = std::make_shared<const ClosureSet>(c.closure->extended(om->fresh));
    for (const Formula& f : om->into_o) {
      if (!next.closure->contains(f))
        throw MoveError(MoveError::Kind::outside_closure, "not in the closure: " + to_string(f));
      next.o_set.insert(f);
    }
  } else {
    for (const Formula& f : std::get<ProponentMove>(m).into_p) {
      if (!c.closure->contains(f))
        throw MoveError(MoveError::Kind::outside_closure, "not in the closure: " + to_string(f));
      next.p_set.insert(f);
    }
  }
  return next;
}

}  // namespace provgame
