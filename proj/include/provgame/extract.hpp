#pragma once

// Countermodels from Opponent wins. Each world is an (𝒪, Δ) state reached
// after an Opponent move; its domain is Δ and its atoms are the ground atoms
// of 𝒪. Worlds are ordered by the play (or witness tree) that reaches them.

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "provgame/game.hpp"
#include "provgame/kripke.hpp"
#include "provgame/referee.hpp"
#include "provgame/solver.hpp"

namespace provgame {

class ExtractionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

class WorldBuilder {
 public:
  explicit WorldBuilder(bool tolerant) { m_.empty_domain_tolerant = tolerant; }

  std::size_t add(std::optional<std::size_t> parent, const std::vector<Element>& delta, const std::set<Formula>& o) {
    std::vector<Element> dom(delta.begin(), delta.end());
    std::sort(dom.begin(), dom.end());
    std::set<GroundAtom> atoms;
    for (const Formula& f : o)
      if (auto a = as_ground_atom(f)) atoms.insert(*a);
    if (parent && m_.domain[*parent] == dom && m_.atoms[*parent] == atoms) return *parent;
    if (parent)
      for (std::size_t c : children_[*parent])
        if (m_.domain[c] == dom && m_.atoms[c] == atoms) return c;
    if (m_.size() >= max_worlds)
      throw ExtractionError("countermodel would exceed " + std::to_string(max_worlds) + " worlds");
    const std::size_t w = m_.size();
    m_.worlds.push_back("ω" + std::to_string(w));
    m_.domain.push_back(std::move(dom));
    m_.atoms.push_back(std::move(atoms));
    parent_.push_back(parent);
    children_.emplace_back();
    if (parent) children_[*parent].push_back(w);
    return w;
  }

  KripkeModel finish() {
    const std::size_t n = m_.size();
    m_.order.assign(n, std::vector<char>(n, 0));
    for (std::size_t w = 0; w < n; ++w)
      for (std::optional<std::size_t> a = w; a; a = parent_[*a]) m_.order[*a][w] = 1;
    return m_;
  }

  static constexpr std::size_t max_worlds = 4096;

 private:
  KripkeModel m_;
  std::vector<std::optional<std::size_t>> parent_;
  std::vector<std::vector<std::size_t>> children_;
};

inline void check_countermodel(const KripkeModel& m, const Position& start) {
  auto report = validate_model(m);
  if (!report.ok()) throw ExtractionError("extracted model is invalid: " + report.violations[0]);
  Forcing f(m);
  for (WorldId w = 0; w < m.size(); ++w)
    for (const Formula& g : start.o_set)
      if (!f(w, g)) throw ExtractionError("world " + m.worlds[w] + " does not force premise " + to_string(g));
  for (const Formula& g : start.p_set)
    if (!f(0, g)) return;
  throw ExtractionError("root " + m.worlds[0] + " forces every goal formula");
}

}  // namespace detail

// With a solver witness for the trace's start, the worlds form the tree of
// the witness's Opponent moves against every Proponent reply that passes the
// turn. Without one, the chain of states along the trace is tried first; if
// that play alone does not refute the goal, the start is solved at growing
// budgets and the witness tree is used.
inline KripkeModel extract_countermodel(const GameTrace& trace, GameSolver* witness = nullptr,
                                        std::size_t max_budget = 3) {
  if (trace.outcome.winner != Player::opponent) throw std::invalid_argument("the trace is not an Opponent win");
  const Position& start = trace.start;
  detail::WorldBuilder b(start.delta().empty());
  const std::size_t root = b.add(std::nullopt, start.delta(), start.o_set);

  if (!witness) {
    std::size_t cur = root;
    for (const Step& s : trace.steps)
      if (s.mover == Player::opponent) cur = b.add(cur, s.result.delta(), s.result.o_set);
    KripkeModel m = b.finish();
    try {
      detail::check_countermodel(m, start);
      return m;
    } catch (const ExtractionError& chain_failure) {
      const std::size_t used = trace.final_position().delta().size() - start.delta().size();
      for (std::size_t budget = used; budget <= std::max(used, max_budget); ++budget) {
        SolveVerdict v;
        try {
          v = solve_game(start, budget);
        } catch (const SolverRefused&) {
          break;
        }
        if (v.winner == Player::opponent) return extract_countermodel(trace, v.witness.get());
      }
      throw ExtractionError(std::string(chain_failure.what()) + "; no solver witness found up to budget " +
                            std::to_string(std::max(used, max_budget)));
    }
  }

  if (!(witness->start() == start)) throw ExtractionError("the witness was solved for a different start");
  auto root_state = witness->state_of(start);
  if (!root_state) throw ExtractionError("start position is outside the witness universe");
  std::function<void(const GameSolver::State&, std::size_t)> grow = [&](const GameSolver::State& s,
                                                                       std::size_t parent) {
    if (witness->mover_at(s) == Player::proponent) {
      for (const auto& next : witness->proponent_replies(s)) grow(next, parent);
      return;
    }
    auto entry = witness->entry_for(s);
    const GameSolver::Entry& e = entry->second;
    if (!e.mover_wins || !e.has_move) throw ExtractionError("the witness has no winning Opponent move here");
    const GameSolver::State next{s.k + e.fresh, s.o | e.add, s.p};
    const Position c = witness->position_of(next);
    const std::size_t w = b.add(parent, c.delta(), c.o_set);
    grow(next, w);
  };
  grow(*root_state, root);
  KripkeModel m = b.finish();
  detail::check_countermodel(m, start);
  return m;
}

}  // namespace provgame
