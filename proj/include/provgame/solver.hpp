#pragma once

// Exhaustive solver for the budgeted game: Opponent may introduce at most
// `budget` new elements over the whole play. States are bitmasks over the
// closure of the start position extended by every element the budget allows.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "provgame/closure.hpp"
#include "provgame/game.hpp"
#include "provgame/referee.hpp"
#include "provgame/syntax.hpp"

namespace provgame {

class SolverRefused : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolverOptions {
  std::size_t node_limit = 2'000'000;
  std::size_t closure_ceiling = 20;
};

// Renames game-introduced elements (those of Δ not occurring in Γ) so that
// positions differing only in those names get the same key.
inline std::string canonicalize_position(const Position& c) {
  std::set<Element> base;
  for (const Formula& g : c.gamma())
    for (const Element& e : elements_of(g)) base.insert(e);
  std::vector<Element> introduced;
  std::uint32_t offset = 0;
  for (const Element& e : c.delta()) {
    if (base.contains(e)) continue;
    introduced.push_back(e);
  }
  for (const Element& e : base)
    if (e.is_fresh()) offset = std::max(offset, e.fresh_index());

  auto serialize = [&](const std::vector<std::size_t>& perm) {
    std::map<Element, Element> rename;
    for (std::size_t j = 0; j < introduced.size(); ++j)
      rename.emplace(introduced[j], Element::fresh(offset + 1 + static_cast<std::uint32_t>(perm[j])));
    auto mapped = [&](const Formula& f) {
      return to_string(map_elements(f, [&](const Element& e) {
        auto it = rename.find(e);
        return it == rename.end() ? e : it->second;
      }));
    };
    std::vector<std::string> d, o, p;
    for (const Element& e : c.delta()) {
      auto it = rename.find(e);
      d.push_back((it == rename.end() ? e : it->second).str());
    }
    for (const Formula& f : c.o_set) o.push_back(mapped(f));
    for (const Formula& f : c.p_set) p.push_back(mapped(f));
    for (auto* v : {&d, &o, &p}) std::sort(v->begin(), v->end());
    std::string out = "D{";
    for (const auto& s : d) out += s + ",";
    out += "}O{";
    for (const auto& s : o) out += s + ";";
    out += "}P{";
    for (const auto& s : p) out += s + ";";
    return out + "}";
  };

  std::vector<std::size_t> perm(introduced.size());
  std::iota(perm.begin(), perm.end(), 0);
  if (introduced.size() > 6) return serialize(perm);
  std::string best = serialize(perm);
  while (std::next_permutation(perm.begin(), perm.end())) best = std::min(best, serialize(perm));
  return best;
}

class GameSolver;

struct SolveVerdict {
  std::size_t budget = 0;
  std::optional<Player> winner;  // empty when the node limit stopped the search
  std::size_t explored = 0;
  std::string note;
  std::shared_ptr<GameSolver> witness;

  bool conclusive() const { return winner.has_value(); }
};

class GameSolver : public std::enable_shared_from_this<GameSolver> {
 public:
  struct State {
    std::uint32_t k = 0;  // new elements introduced so far
    std::uint64_t o = 0, p = 0;
    friend bool operator==(const State&, const State&) = default;
  };

  struct Entry {
    bool mover_wins = false;
    bool has_move = false;
    std::uint32_t fresh = 0;
    std::uint64_t add = 0;  // in the canonical state's coordinates
  };

  class NodeLimit : public std::runtime_error {
   public:
    NodeLimit() : std::runtime_error("node limit exceeded") {}
  };

  GameSolver(const Position& start, std::size_t budget, SolverOptions opts = {})
      : start_(start), budget_(budget), opts_(opts) {
    base_ = start.delta().size();
    std::vector<Element> extra;
    for (std::size_t i = 0; i < budget; ++i) extra.push_back(next_fresh(start, i));
    if (base_ + budget > 64) throw SolverRefused("too many elements for the solver");
    universe_ = start.delta();
    universe_.insert(universe_.end(), extra.begin(), extra.end());
    closure_ = extra.empty() ? *start.closure : start.closure->extended(extra);
    if (closure_.size() > opts_.closure_ceiling)
      throw SolverRefused("closure has " + std::to_string(closure_.size()) + " members at budget " +
                          std::to_string(budget) + ", above the ceiling of " + std::to_string(opts_.closure_ceiling));
    index_members();
    build_permutations();
  }

  const Position& start() const { return start_; }
  std::size_t budget() const { return budget_; }
  std::size_t explored() const { return memo_.size(); }
  const std::vector<Element>& universe() const { return universe_; }
  const std::vector<Formula>& members() const { return forms_; }

  SolveVerdict solve() {
    SolveVerdict v;
    v.budget = budget_;
    v.witness = shared_from_this();
    const auto s = state_of(start_);
    if (!s) throw SolverRefused("start position is outside the solver universe");
    nodes_ = 0;
    try {
      const bool mover_wins = win(*s);
      const Player mover = mover_at(*s);
      v.winner = mover_wins ? mover : other(mover);
    } catch (const NodeLimit&) {
      v.note = "node limit of " + std::to_string(opts_.node_limit) + " exceeded; inconclusive";
    }
    v.explored = memo_.size();
    return v;
  }

  // The position's state, if its elements fit the solver universe.
  std::optional<State> state_of(const Position& c) const {
    if (c.gamma() != start_.gamma()) return std::nullopt;
    if (c.delta().size() < base_ || c.delta().size() > universe_.size()) return std::nullopt;
    if (!std::equal(universe_.begin(), universe_.begin() + static_cast<std::ptrdiff_t>(base_), c.delta().begin()))
      return std::nullopt;
    std::map<Element, Element> to_universe;
    for (std::size_t j = base_; j < c.delta().size(); ++j) to_universe.emplace(c.delta()[j], universe_[j]);
    State s{static_cast<std::uint32_t>(c.delta().size() - base_), 0, 0};
    auto bit = [&](const Formula& f) -> std::optional<std::uint64_t> {
      const Formula g = map_elements(f, [&](const Element& e) {
        auto it = to_universe.find(e);
        return it == to_universe.end() ? e : it->second;
      });
      auto it = index_.find(g);
      if (it == index_.end()) return std::nullopt;
      return std::uint64_t{1} << it->second;
    };
    for (const Formula& f : c.o_set) {
      auto b = bit(f);
      if (!b) return std::nullopt;
      s.o |= *b;
    }
    for (const Formula& f : c.p_set) {
      auto b = bit(f);
      if (!b) return std::nullopt;
      s.p |= *b;
    }
    return s;
  }

  // The stored move for `c` (winning if one exists, otherwise any move that
  // passes the turn), solving on demand. Empty if there is none.
  std::optional<Move> move_for(const Position& c) {
    const auto s = state_of(c);
    if (!s) return std::nullopt;
    nodes_ = 0;
    try {
      win(*s);
    } catch (const NodeLimit&) {
      return std::nullopt;
    }
    const auto [key, perm] = canonical(*s);
    const Entry& e = memo_.at(key);
    if (!e.has_move) return std::nullopt;
    const std::uint64_t add = apply_map(inverse_[s->k][perm], e.add);
    std::map<Element, Element> to_game;
    for (std::size_t j = base_; j < c.delta().size(); ++j) to_game.emplace(universe_[j], c.delta()[j]);
    std::vector<Element> fresh;
    for (std::uint32_t i = 0; i < e.fresh; ++i) {
      fresh.push_back(next_fresh(c, i));
      to_game.emplace(universe_[base_ + s->k + i], fresh.back());
    }
    std::set<Formula> formulas;
    for (std::size_t i = 0; i < forms_.size(); ++i)
      if (add >> i & 1)
        formulas.insert(map_elements(forms_[i], [&](const Element& x) {
          auto it = to_game.find(x);
          return it == to_game.end() ? x : it->second;
        }));
    if (mover_at(*s) == Player::opponent) return OpponentMove{std::move(fresh), std::move(formulas)};
    return ProponentMove{std::move(formulas)};
  }

  Player mover_at(const State& s) const {
    const std::uint64_t t = truth(s);
    if (s.o & ~t) return Player::opponent;
    if (s.p & ~t) return Player::proponent;
    return Player::opponent;
  }

  // Looks up (solving if needed) the entry for a state, with its move mapped
  // back to the state's own coordinates.
  std::optional<std::pair<State, Entry>> entry_for(const State& s) {
    nodes_ = 0;
    win(s);
    const auto [key, perm] = canonical(s);
    Entry e = memo_.at(key);
    e.add = apply_map(inverse_[s.k][perm], e.add);
    return std::pair{s, e};
  }

  // All Proponent moves from `s` that pass the turn.
  std::vector<State> proponent_replies(const State& s) const {
    std::vector<State> out;
    proponent_moves(s, [&](std::uint64_t p2) {
      out.push_back({s.k, s.o, p2});
      return false;
    });
    return out;
  }

  std::uint64_t truth(const State& s) const {
    const std::uint64_t avail = avail_[s.k];
    std::uint64_t t = 0;
    for (std::size_t i = 0; i < forms_.size(); ++i) {
      const std::uint64_t bit = std::uint64_t{1} << i;
      if (!(avail & bit)) continue;
      bool v;
      if (atom_[i]) v = s.o & bit;
      else v = ((s.o | s.p) & bit) && value(i, t, s.k);
      if (v) t |= bit;
    }
    return t;
  }

  std::size_t delta_size(const State& s) const { return base_ + s.k; }

  // Entries of the winner's decision list, keyed by canonical position.
  nlohmann::ordered_json export_witness(Player winner) const {
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    std::vector<std::pair<std::string, nlohmann::ordered_json>> rows;
    for (const auto& [key, e] : memo_) {
      const State s = key;
      if (!e.has_move || !e.mover_wins || mover_at(s) != winner) continue;
      const Position c = position_of(s);
      nlohmann::ordered_json added = nlohmann::ordered_json::array();
      for (std::size_t i = 0; i < forms_.size(); ++i)
        if (e.add >> i & 1) added.push_back(to_string(forms_[i]));
      nlohmann::ordered_json fresh = nlohmann::ordered_json::array();
      for (std::uint32_t i = 0; i < e.fresh; ++i) fresh.push_back(universe_[base_ + s.k + i].str());
      rows.emplace_back(canonicalize_position(c), nlohmann::ordered_json{{"position", canonicalize_position(c)},
                                                                         {"mover", to_string(mover_at(s))},
                                                                         {"fresh", fresh},
                                                                         {"added", added}});
    }
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& r : rows) list.push_back(std::move(r.second));
    return list;
  }

  Position position_of(const State& s) const {
    Position c;
    std::vector<Element> extra(universe_.begin() + static_cast<std::ptrdiff_t>(base_),
                               universe_.begin() + static_cast<std::ptrdiff_t>(base_ + s.k));
    c.closure = std::make_shared<const ClosureSet>(extra.empty() ? *start_.closure : start_.closure->extended(extra));
    for (std::size_t i = 0; i < forms_.size(); ++i) {
      if (s.o >> i & 1) c.o_set.insert(forms_[i]);
      if (s.p >> i & 1) c.p_set.insert(forms_[i]);
    }
    return c;
  }

 private:
  struct KeyHash {
    std::size_t operator()(const State& s) const {
      std::size_t h = std::hash<std::uint64_t>{}(s.o);
      h ^= std::hash<std::uint64_t>{}(s.p) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      return h ^ (s.k * 0x85ebca6bULL);
    }
  };

  void index_members() {
    forms_.assign(closure_.members().begin(), closure_.members().end());
    std::stable_sort(forms_.begin(), forms_.end(), [](const Formula& a, const Formula& b) { return a.size() < b.size(); });
    const std::size_t n = forms_.size();
    for (std::size_t i = 0; i < n; ++i) index_.emplace(forms_[i], static_cast<int>(i));
    auto idx = [&](const Formula& f) {
      auto it = index_.find(f);
      if (it == index_.end()) throw std::logic_error("closure is not subformula-closed at " + to_string(f));
      return it->second;
    };
    op_.resize(n);
    atom_.resize(n);
    lhs_.assign(n, -1);
    rhs_.assign(n, -1);
    inst_.assign(n, {});
    std::vector<std::uint64_t> elems(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const Formula& f = forms_[i];
      op_[i] = f.op();
      atom_[i] = f.op() == Connective::atom;
      if (is_binary(f.op())) {
        lhs_[i] = idx(f.lhs());
        rhs_[i] = idx(f.rhs());
      } else if (is_quantifier(f.op())) {
        for (const Element& d : universe_) inst_[i].push_back(idx(open_body(f.body(), d)));
      }
      for (const Element& e : elements_of(f)) {
        auto pos = std::find(universe_.begin(), universe_.end(), e);
        elems[i] |= std::uint64_t{1} << (pos - universe_.begin());
      }
    }
    avail_.assign(budget_ + 1, 0);
    for (std::size_t k = 0; k <= budget_; ++k) {
      const std::size_t d = base_ + k;
      const std::uint64_t dmask = d >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << d) - 1;
      for (std::size_t i = 0; i < n; ++i)
        if ((elems[i] & ~dmask) == 0) avail_[k] |= std::uint64_t{1} << i;
    }
    compound_.assign(n + 1, 0);
    for (std::size_t i = n; i-- > 0;) {
      compound_[i] = compound_[i + 1];
      if (!atom_[i] && op_[i] != Connective::bottom) compound_[i] |= std::uint64_t{1} << i;
    }
  }

  // Member maps for every permutation of the first k new elements.
  void build_permutations() {
    perms_.assign(budget_ + 1, {});
    inverse_.assign(budget_ + 1, {});
    for (std::size_t k = 0; k <= budget_; ++k) {
      std::vector<std::size_t> sigma(k);
      std::iota(sigma.begin(), sigma.end(), 0);
      do {
        std::map<Element, Element> rename;
        for (std::size_t j = 0; j < k; ++j) rename.emplace(universe_[base_ + j], universe_[base_ + sigma[j]]);
        std::vector<int> fwd(forms_.size()), inv(forms_.size());
        for (std::size_t i = 0; i < forms_.size(); ++i) {
          const Formula g = map_elements(forms_[i], [&](const Element& e) {
            auto it = rename.find(e);
            return it == rename.end() ? e : it->second;
          });
          fwd[i] = index_.at(g);
          inv[fwd[i]] = static_cast<int>(i);
        }
        perms_[k].push_back(std::move(fwd));
        inverse_[k].push_back(std::move(inv));
      } while (std::next_permutation(sigma.begin(), sigma.end()));
    }
  }

  static std::uint64_t apply_map(const std::vector<int>& map, std::uint64_t mask) {
    std::uint64_t out = 0;
    while (mask) {
      const int i = std::countr_zero(mask);
      mask &= mask - 1;
      out |= std::uint64_t{1} << map[i];
    }
    return out;
  }

  std::pair<State, std::size_t> canonical(const State& s) const {
    State best = s;
    std::size_t which = 0;
    const auto& ps = perms_[s.k];
    for (std::size_t j = 1; j < ps.size(); ++j) {
      const State t{s.k, apply_map(ps[j], s.o), apply_map(ps[j], s.p)};
      if (t.o < best.o || (t.o == best.o && t.p < best.p)) {
        best = t;
        which = j;
      }
    }
    return {best, which};
  }

  bool value(std::size_t i, std::uint64_t t, std::uint32_t k) const {
    auto bit = [&](int j) { return (t >> j & 1) != 0; };
    switch (op_[i]) {
      case Connective::bottom: return false;
      case Connective::atom: return false;
      case Connective::implies: return !bit(lhs_[i]) || bit(rhs_[i]);
      case Connective::conj: return bit(lhs_[i]) && bit(rhs_[i]);
      case Connective::disj: return bit(lhs_[i]) || bit(rhs_[i]);
      case Connective::forall:
        for (std::size_t d = 0; d < base_ + k; ++d)
          if (!bit(inst_[i][d])) return false;
        return true;
      case Connective::exists:
        for (std::size_t d = 0; d < base_ + k; ++d)
          if (bit(inst_[i][d])) return true;
        return false;
    }
    return false;
  }

  // Calls fn(o2) for every Opponent addition at k2 that leaves Opponent
  // without mistakes and Proponent with one. fn returns true to stop.
  template <class Fn>
  bool opponent_moves(const State& s, std::uint32_t k2, Fn&& fn) const {
    const std::size_t n = forms_.size();
    const std::uint64_t avail = avail_[k2];
    bool stop = false;
    std::function<void(std::size_t, std::uint64_t, std::uint64_t)> dfs = [&](std::size_t i, std::uint64_t o2,
                                                                            std::uint64_t t) {
      if (stop) return;
      if (i == n) {
        if (s.p & ~t) stop = fn(o2);
        return;
      }
      const std::uint64_t bit = std::uint64_t{1} << i;
      if (!(avail & bit)) return dfs(i + 1, o2, t);
      if (s.o & bit) {
        if (!(atom_[i] || value(i, t, k2))) return;
        return dfs(i + 1, o2, t | bit);
      }
      const bool ex = !atom_[i] && (s.p & bit) && value(i, t, k2);
      dfs(i + 1, o2, ex ? t | bit : t);
      if (atom_[i] || value(i, t, k2)) dfs(i + 1, o2 | bit, t | bit);
    };
    dfs(0, s.o, 0);
    return stop;
  }

  // Calls fn(p2) for every Proponent addition that passes the turn: either
  // no Proponent mistake remains, or Opponent has a mistake too.
  template <class Fn>
  bool proponent_moves(const State& s, Fn&& fn) const {
    const std::size_t n = forms_.size();
    const std::uint64_t avail = avail_[s.k];
    bool stop = false;
    // No Proponent mistakes afterwards.
    std::function<void(std::size_t, std::uint64_t, std::uint64_t)> clean = [&](std::size_t i, std::uint64_t p2,
                                                                              std::uint64_t t) {
      if (stop) return;
      if (i == n) {
        if (p2 != s.p) stop = fn(p2);
        return;
      }
      const std::uint64_t bit = std::uint64_t{1} << i;
      if (!(avail & bit)) return clean(i + 1, p2, t);
      const bool in_o = s.o & bit, in_p = s.p & bit;
      if (!in_o && !in_p) {
        clean(i + 1, p2, t);
        if (!atom_[i] && value(i, t, s.k)) clean(i + 1, p2 | bit, t | bit);
        return;
      }
      const bool v = atom_[i] ? in_o : value(i, t, s.k);
      if (in_p && !v) return;
      clean(i + 1, p2, v ? t | bit : t);
    };
    clean(0, s.p, 0);
    if (stop || !(s.o & compound_[0])) return stop;
    // Opponent and Proponent both with mistakes afterwards.
    std::function<void(std::size_t, std::uint64_t, std::uint64_t, bool)> mixed =
        [&](std::size_t i, std::uint64_t p2, std::uint64_t t, bool o_mistake) {
          if (stop) return;
          if (!o_mistake && !(s.o & compound_[i])) return;
          if (i == n) {
            if (p2 & ~t) stop = fn(p2);
            return;
          }
          const std::uint64_t bit = std::uint64_t{1} << i;
          if (!(avail & bit)) return mixed(i + 1, p2, t, o_mistake);
          const bool in_o = s.o & bit, in_p = s.p & bit;
          if (!in_o && !in_p) {
            mixed(i + 1, p2, t, o_mistake);
            if (!atom_[i]) {
              const bool v = value(i, t, s.k);
              mixed(i + 1, p2 | bit, v ? t | bit : t, o_mistake);
            } else {
              mixed(i + 1, p2 | bit, t, o_mistake);
            }
            return;
          }
          const bool v = atom_[i] ? in_o : value(i, t, s.k);
          mixed(i + 1, p2, v ? t | bit : t, o_mistake || (in_o && !v));
        };
    mixed(0, s.p, 0, false);
    return stop;
  }

  bool win(const State& s) {
    const State key = canonical(s).first;
    if (auto it = memo_.find(key); it != memo_.end()) return it->second.mover_wins;
    if (++nodes_ > opts_.node_limit) throw NodeLimit();
    Entry e;
    const Player mover = mover_at(key);
    if (mover == Player::opponent) {
      for (std::uint32_t f = 0; key.k + f <= budget_ && !e.mover_wins; ++f) {
        opponent_moves(key, key.k + f, [&](std::uint64_t o2) {
          const bool child_wins = win(State{key.k + f, o2, key.p});
          if (!e.has_move || !child_wins) e = Entry{!child_wins, true, f, o2 & ~key.o};
          return !child_wins;
        });
      }
    } else {
      proponent_moves(key, [&](std::uint64_t p2) {
        const bool child_wins = win(State{key.k, key.o, p2});
        if (!e.has_move || !child_wins) e = Entry{!child_wins, true, 0, p2 & ~key.p};
        return !child_wins;
      });
    }
    memo_[key] = e;
    return e.mover_wins;
  }

  Position start_;
  std::size_t budget_;
  SolverOptions opts_;
  std::size_t base_ = 0;
  std::vector<Element> universe_;
  ClosureSet closure_;
  std::vector<Formula> forms_;
  std::unordered_map<Formula, int, FormulaHash> index_;
  std::vector<Connective> op_;
  std::vector<char> atom_;
  std::vector<int> lhs_, rhs_;
  std::vector<std::vector<int>> inst_;
  std::vector<std::uint64_t> avail_;
  std::vector<std::uint64_t> compound_;  // compound members at index >= i
  std::vector<std::vector<std::vector<int>>> perms_, inverse_;
  std::unordered_map<State, Entry, KeyHash> memo_;
  std::size_t nodes_ = 0;
};

inline SolveVerdict solve_game(const Position& start, std::size_t budget, SolverOptions opts = {}) {
  return std::make_shared<GameSolver>(start, budget, opts)->solve();
}

inline SolveVerdict solve_game(const Position& start, std::size_t budget, std::size_t node_limit) {
  SolverOptions opts;
  opts.node_limit = node_limit;
  return solve_game(start, budget, opts);
}

inline nlohmann::ordered_json verdict_to_json(const SolveVerdict& v) {
  nlohmann::ordered_json j{{"budget", v.budget},
                           {"winner", v.winner ? to_string(*v.winner) : "inconclusive"},
                           {"explored", v.explored}};
  if (!v.note.empty()) j["note"] = v.note;
  j["witness"] = v.winner && v.witness ? v.witness->export_witness(*v.winner) : nlohmann::ordered_json::array();
  return j;
}

// Plays from a solver's table, solving unseen positions on demand.
class SolverStrategy : public Strategy {
 public:
  explicit SolverStrategy(std::shared_ptr<GameSolver> solver) : solver_(std::move(solver)) {}
  std::string kind() const override { return "solver_backed"; }

  std::optional<Move> next_move(const Position& c, Player me) override {
    if (to_move(c) != me) return std::nullopt;
    return solver_->move_for(c);
  }

 private:
  std::shared_ptr<GameSolver> solver_;
};

}  // namespace provgame
