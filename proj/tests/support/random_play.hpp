#pragma once

// A seeded player that picks arbitrary legal-shaped moves, for property tests.

#include <random>

#include "provgame/game.hpp"
#include "provgame/referee.hpp"

namespace provgame::testing {

class RandomStrategy : public Strategy {
 public:
  RandomStrategy(unsigned seed, std::size_t max_fresh) : rng_(seed), max_fresh_(max_fresh) {}
  std::string kind() const override { return "random"; }

  std::optional<Move> next_move(const Position& c, Player me) override {
    std::bernoulli_distribution coin(0.3);
    if (me == Player::proponent) {
      ProponentMove m;
      for (const Formula& f : c.closure->members())
        if (coin(rng_)) m.into_p.insert(f);
      return m;
    }
    OpponentMove m;
    if (used_ < max_fresh_ && coin(rng_)) {
      m.fresh.push_back(next_fresh(c));
      ++used_;
    }
    const ClosureSet cl = m.fresh.empty() ? *c.closure : c.closure->extended(m.fresh);
    for (const Formula& f : cl.members())
      if (coin(rng_)) m.into_o.insert(f);
    return m;
  }

 private:
  std::mt19937 rng_;
  std::size_t max_fresh_;
  std::size_t used_ = 0;
};

}  // namespace provgame::testing
