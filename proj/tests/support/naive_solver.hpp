#pragma once

// Plain minimax over positions: every subset of unmarked closure members is
// a move, no pruning and no symmetry reduction. Only usable on tiny closures.

#include <map>
#include <stdexcept>
#include <string>

#include "provgame/game.hpp"

namespace provgame::testing {

class NaiveSolver {
 public:
  NaiveSolver(const Position& start, std::size_t budget, std::size_t max_options = 12)
      : base_(start.delta().size()), budget_(budget), max_options_(max_options) {}

  // Winner of the budgeted game from `c`.
  Player winner(const Position& c) {
    const Player mover = to_move(c);
    return mover_wins(c) ? mover : other(mover);
  }

 private:
  static std::string key(const Position& c) {
    std::string k;
    for (const Element& e : c.delta()) k += e.str() + ",";
    k += "|";
    for (const Formula& f : c.o_set) k += to_string(f) + ";";
    k += "|";
    for (const Formula& f : c.p_set) k += to_string(f) + ";";
    return k;
  }

  bool mover_wins(const Position& c) {
    const std::string k = key(c);
    if (auto it = memo_.find(k); it != memo_.end()) return it->second;
    const Player mover = to_move(c);
    bool wins = false;
    auto try_child = [&](const Position& child) {
      if (to_move(child) == mover) return;  // still the mover's turn: a losing move
      if (!mover_wins(child)) wins = true;
    };
    if (mover == Player::opponent) {
      const std::size_t used = c.delta().size() - base_;
      for (std::size_t f = 0; f + used <= budget_ && !wins; ++f) {
        std::vector<Element> fresh;
        for (std::size_t i = 0; i < f; ++i) fresh.push_back(next_fresh(c, i));
        const ClosureSet cl = fresh.empty() ? *c.closure : c.closure->extended(fresh);
        std::vector<Formula> options;
        for (const Formula& g : cl.members())
          if (!c.o_set.contains(g)) options.push_back(g);
        for_each_subset(options, [&](std::set<Formula> add) {
          try_child(apply_move(c, Player::opponent, OpponentMove{fresh, std::move(add)}));
          return !wins;
        });
      }
    } else {
      std::vector<Formula> options;
      for (const Formula& g : c.closure->members())
        if (!c.p_set.contains(g)) options.push_back(g);
      for_each_subset(options, [&](std::set<Formula> add) {
        try_child(apply_move(c, Player::proponent, ProponentMove{std::move(add)}));
        return !wins;
      });
    }
    memo_[k] = wins;
    return wins;
  }

  template <class Fn>
  void for_each_subset(const std::vector<Formula>& options, Fn&& fn) const {
    if (options.size() > max_options_) throw std::length_error("too many options for the naive solver");
    for (std::uint32_t mask = 0; mask < (1u << options.size()); ++mask) {
      std::set<Formula> add;
      for (std::size_t i = 0; i < options.size(); ++i)
        if (mask >> i & 1) add.insert(options[i]);
      if (!fn(std::move(add))) return;
    }
  }

  std::size_t base_;
  std::size_t budget_;
  std::size_t max_options_;
  std::map<std::string, bool> memo_;
};

}  // namespace provgame::testing
