#pragma once

// Strategy interface, game traces and the referee loop.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "provgame/game.hpp"

namespace provgame {

class Strategy {
 public:
  virtual ~Strategy() = default;
  virtual std::string kind() const = 0;
  // std::nullopt resigns.
  virtual std::optional<Move> next_move(const Position& c, Player me) = 0;
};

enum class OutcomeReason { stuck_after_own_move, illegal_or_resign, cutoff_presumed_infinite };

inline const char* to_string(OutcomeReason r) {
  switch (r) {
    case OutcomeReason::stuck_after_own_move: return "stuck_after_own_move";
    case OutcomeReason::illegal_or_resign: return "illegal_or_resign";
    case OutcomeReason::cutoff_presumed_infinite: return "cutoff_presumed_infinite";
  }
  return "?";
}

struct Outcome {
  Player winner = Player::proponent;
  OutcomeReason reason = OutcomeReason::cutoff_presumed_infinite;
  std::string detail;
  friend bool operator==(const Outcome&, const Outcome&) = default;
};

struct Step {
  Player mover;
  Move move;
  Position result;
  friend bool operator==(const Step&, const Step&) = default;
};

struct GameTrace {
  Position start;
  std::vector<Step> steps;
  Outcome outcome;  // meaningful only when finished
  std::size_t round_cutoff = 64;
  bool finished = true;

  const Position& final_position() const { return steps.empty() ? start : steps.back().result; }
  friend bool operator==(const GameTrace&, const GameTrace&) = default;
};

inline constexpr std::size_t default_round_cutoff = 64;

// A game in progress. Moves are applied one at a time; the match records the
// outcome as soon as one is decided.
class Match {
 public:
  explicit Match(Position start, std::size_t round_cutoff = default_round_cutoff) {
    trace_.start = std::move(start);
    trace_.round_cutoff = round_cutoff;
    trace_.finished = false;
    check_cutoff();
  }

  const GameTrace& trace() const { return trace_; }
  const Position& position() const { return trace_.final_position(); }
  bool finished() const { return trace_.finished; }
  Player mover() const { return to_move(position()); }

  // Throws MoveError and leaves the match unchanged if the move is illegal.
  void play(const Move& m) {
    if (finished()) throw std::logic_error("the game is over");
    const Player who = mover();
    Position next = apply_move(position(), who, m);
    trace_.steps.push_back({who, m, std::move(next)});
    if (mover() == who) {
      finish({other(who), OutcomeReason::stuck_after_own_move,
              std::string(to_string(who)) + " must move again after its own move"});
      return;
    }
    check_cutoff();
  }

  // The player to move forfeits.
  void forfeit(std::string detail) {
    if (finished()) throw std::logic_error("the game is over");
    finish({other(mover()), OutcomeReason::illegal_or_resign, std::move(detail)});
  }

  // Asks `s` for the mover's next move; resignation, exceptions and illegal
  // moves forfeit.
  void step(Strategy& s) {
    const Player who = mover();
    std::optional<Move> m;
    try {
      m = s.next_move(position(), who);
    } catch (const std::exception& e) {
      forfeit(s.kind() + " failed: " + e.what());
      return;
    }
    if (!m) {
      forfeit(std::string(to_string(who)) + " resigned");
      return;
    }
    try {
      play(*m);
    } catch (const MoveError& e) {
      forfeit(std::string("illegal move: ") + e.what());
    }
  }

 private:
  void finish(Outcome o) {
    trace_.outcome = std::move(o);
    trace_.finished = true;
  }
  void check_cutoff() {
    if (trace_.steps.size() >= trace_.round_cutoff)
      finish({Player::proponent, OutcomeReason::cutoff_presumed_infinite,
              std::to_string(trace_.round_cutoff) + " moves without a decision"});
  }

  GameTrace trace_;
};

inline GameTrace run_game(const Position& start, Strategy& opponent, Strategy& proponent,
                          std::size_t round_cutoff = default_round_cutoff) {
  Match match(start, round_cutoff);
  while (!match.finished()) match.step(match.mover() == Player::opponent ? opponent : proponent);
  return match.trace();
}

// The outcome implied by the recorded steps alone. A game that ends without a
// stuck mover or a cutoff was ended by the player to move resigning or
// erring, so the other player wins.
inline Outcome implied_outcome(const GameTrace& t) {
  const Position& last = t.final_position();
  if (!t.steps.empty() && to_move(last) == t.steps.back().mover)
    return {other(t.steps.back().mover), OutcomeReason::stuck_after_own_move, {}};
  if (t.steps.size() >= t.round_cutoff) return {Player::proponent, OutcomeReason::cutoff_presumed_infinite, {}};
  return {other(to_move(last)), OutcomeReason::illegal_or_resign, {}};
}

// Replays every step through apply_move and checks the recorded outcome.
// Returns an empty string on success, otherwise what went wrong.
inline std::string verify_trace(const GameTrace& t) {
  Position cur = t.start;
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const Step& s = t.steps[i];
    Position next;
    try {
      next = apply_move(cur, s.mover, s.move);
    } catch (const MoveError& e) {
      return "step " + std::to_string(i + 1) + ": " + e.what();
    }
    if (!(next == s.result)) return "step " + std::to_string(i + 1) + ": recorded position differs from replay";
    if ((i + 1 < t.steps.size() || !t.finished) && to_move(next) == s.mover)
      return "step " + std::to_string(i + 1) + ": game should have ended here";
    cur = std::move(next);
  }
  if (!t.finished) {
    if (t.steps.size() >= t.round_cutoff) return "the cutoff was reached but the game is marked unfinished";
    return {};
  }
  const Outcome o = implied_outcome(t);
  if (o.winner != t.outcome.winner || o.reason != t.outcome.reason)
    return std::string("recorded outcome ") + to_string(t.outcome.winner) + "/" + to_string(t.outcome.reason) +
           " but replay gives " + to_string(o.winner) + "/" + to_string(o.reason);
  return {};
}

}  // namespace provgame
