#pragma once

// Strategies by name, configured from JSON parameters. Shared by the command
// line referee and the session service.

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "provgame/model_io.hpp"
#include "provgame/referee.hpp"
#include "provgame/solver.hpp"
#include "provgame/strategy.hpp"
#include "provgame/trace_io.hpp"

namespace provgame {

class EngineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& engine_names() {
  static const std::vector<std::string> names = {"saturation", "expander", "from-model", "casari", "solver", "scripted"};
  return names;
}

// Predicates of Γ plus every named element of Δ as a constant.
inline Signature signature_of(const Position& c) {
  Signature sig = signature_of(std::span<const Formula>(c.gamma()));
  for (const Element& e : c.delta())
    if (!e.is_fresh()) sig.declare_constant(e.name());
  return sig;
}

// A move from its wire form: `fresh` is either a count of new elements, named
// in sequence after those already present, or a list of element names;
// `added` lists formulas.
inline Move move_from_json(const Json& j, Player mover, const Position& c) {
  const Signature sig = signature_of(c);
  std::vector<Element> fresh;
  if (j.contains("fresh")) {
    const Json& f = j.at("fresh");
    if (f.is_number_integer()) {
      if (f.get<long long>() < 0) throw EngineError("'fresh' cannot be negative");
      for (std::size_t i = 0; i < f.get<std::size_t>(); ++i) fresh.push_back(next_fresh(c, i));
    } else if (f.is_array()) {
      for (const auto& s : f) fresh.push_back(parse_element(s.get<std::string>()));
    } else {
      throw EngineError("'fresh' must be a count or a list of element names");
    }
  }
  std::set<Formula> added;
  if (j.contains("added"))
    for (const auto& s : j.at("added")) added.insert(parse_formula(s.get<std::string>(), sig));
  if (mover == Player::proponent) {
    if (!fresh.empty()) throw MoveError(MoveError::Kind::wrong_shape, "proponent cannot introduce elements");
    return ProponentMove{std::move(added)};
  }
  return OpponentMove{std::move(fresh), std::move(added)};
}

namespace detail {

inline std::size_t param(const Json& p, const char* key, std::size_t fallback) {
  if (!p.contains(key)) return fallback;
  if (!p.at(key).is_number_integer() || p.at(key).get<long long>() < 0)
    throw EngineError(std::string("'") + key + "' must be a non-negative integer");
  return p.at(key).get<std::size_t>();
}

inline KripkeModel model_param(const Json& p) {
  if (!p.contains("model") || !p.at("model").is_string()) throw EngineError("this engine needs a 'model' text");
  return parse_model(p.at("model").get<std::string>());
}

inline std::optional<WorldId> world_param(const KripkeModel& m, const Json& p) {
  if (!p.contains("world")) return std::nullopt;
  auto w = m.world_index(p.at("world").get<std::string>());
  if (!w) throw EngineError("no world named " + p.at("world").get<std::string>());
  return w;
}

// Plays scripted moves whose elements are given by count, naming them when
// the move is due.
class WireScript : public Strategy {
 public:
  explicit WireScript(Json moves) : moves_(std::move(moves)) {}
  std::string kind() const override { return "scripted"; }
  std::optional<Move> next_move(const Position& c, Player me) override {
    if (next_ >= moves_.size()) return std::nullopt;
    return move_from_json(moves_.at(next_++), me, c);
  }

 private:
  Json moves_;
  std::size_t next_ = 0;
};

}  // namespace detail

// Parameters by engine:
//   saturation  worlds, dom, ceiling
//   from-model  model (model text), world (starting world name)
//   casari      as from-model
//   solver      budget, nodes
//   scripted    moves (list of wire moves)
//   expander    none
inline std::unique_ptr<Strategy> make_engine(const std::string& name, const Json& params, const Position& start) {
  const Json p = params.is_null() ? Json::object() : params;
  if (!p.is_object()) throw EngineError("engine parameters must be an object");
  try {
    if (name == "saturation") {
      SaturationBounds b;
      b.bounds.worlds = detail::param(p, "worlds", b.bounds.worlds);
      b.bounds.domain = detail::param(p, "dom", b.bounds.domain);
      if (p.contains("ceiling")) b.ceiling = p.at("ceiling").get<double>();
      return std::make_unique<SaturationProponent>(b);
    }
    if (name == "expander") return std::make_unique<ExpanderOpponent>();
    if (name == "from-model" || name == "casari") {
      KripkeModel m = detail::model_param(p);
      const auto w = detail::world_param(m, p);
      return std::make_unique<ModelOpponent>(std::move(m), name == "casari", w);
    }
    if (name == "solver") {
      SolverOptions opts;
      opts.node_limit = detail::param(p, "nodes", opts.node_limit);
      auto solver = std::make_shared<GameSolver>(start, detail::param(p, "budget", 2), opts);
      solver->solve();
      return std::make_unique<SolverStrategy>(std::move(solver));
    }
    if (name == "scripted") {
      if (!p.contains("moves") || !p.at("moves").is_array()) throw EngineError("scripted needs a 'moves' list");
      return std::make_unique<detail::WireScript>(p.at("moves"));
    }
  } catch (const EngineError&) {
    throw;
  } catch (const std::exception& e) {
    throw EngineError(name + ": " + e.what());
  }
  throw EngineError("unknown engine '" + name + "'");
}

}  // namespace provgame
