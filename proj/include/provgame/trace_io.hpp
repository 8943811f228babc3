#pragma once

// JSON encoding of positions, moves and game traces.

#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"
#include "provgame/game.hpp"
#include "provgame/referee.hpp"
#include "provgame/syntax.hpp"

namespace provgame {

class TraceFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Json = nlohmann::ordered_json;

inline constexpr const char* trace_format_tag = "provgame-trace/1";

inline Json formulas_to_json(const auto& formulas) {
  Json out = Json::array();
  for (const Formula& f : formulas) out.push_back(to_string(f));
  return out;
}

inline Json elements_to_json(const std::vector<Element>& elements) {
  Json out = Json::array();
  for (const Element& e : elements) out.push_back(e.str());
  return out;
}

inline Json position_to_json(const Position& c) {
  return Json{{"gamma", formulas_to_json(c.gamma())},
              {"delta", elements_to_json(c.delta())},
              {"o", formulas_to_json(c.o_set)},
              {"p", formulas_to_json(c.p_set)}};
}

inline Json move_to_json(Player mover, const Move& m) {
  Json j{{"mover", to_string(mover)}};
  if (const auto* om = std::get_if<OpponentMove>(&m)) {
    j["fresh"] = elements_to_json(om->fresh);
    j["added"] = formulas_to_json(om->into_o);
  } else {
    j["fresh"] = Json::array();
    j["added"] = formulas_to_json(std::get<ProponentMove>(m).into_p);
  }
  return j;
}

inline Json trace_to_json(const GameTrace& t) {
  Json steps = Json::array();
  for (const Step& s : t.steps) steps.push_back(move_to_json(s.mover, s.move));
  return Json{{"format", trace_format_tag},
              {"start", position_to_json(t.start)},
              {"round_cutoff", t.round_cutoff},
              {"steps", std::move(steps)},
              {"outcome", t.finished ? Json{{"winner", to_string(t.outcome.winner)},
                                             {"reason", to_string(t.outcome.reason)},
                                             {"detail", t.outcome.detail}}
                                     : Json(nullptr)}};
}

inline std::string save_trace(const GameTrace& t) { return trace_to_json(t).dump(2) + "\n"; }

namespace detail {

inline Player player_from(const std::string& s) {
  if (s == "opponent") return Player::opponent;
  if (s == "proponent") return Player::proponent;
  throw TraceFormatError("unknown player '" + s + "'");
}

inline OutcomeReason reason_from(const std::string& s) {
  for (auto r : {OutcomeReason::stuck_after_own_move, OutcomeReason::illegal_or_resign,
                 OutcomeReason::cutoff_presumed_infinite})
    if (s == to_string(r)) return r;
  throw TraceFormatError("unknown outcome reason '" + s + "'");
}

// Reads formulas against a signature inferred from Γ plus the game elements.
class TraceReader {
 public:
  Position start(const Json& j) {
    std::vector<Formula> gamma;
    for (const auto& s : j.at("gamma")) gamma.push_back(parse_inferring(s.get<std::string>()));
    std::vector<Element> delta;
    for (const auto& s : j.at("delta")) delta.push_back(element(s.get<std::string>()));
    Position c;
    c.closure = std::make_shared<const ClosureSet>(gamma, delta);
    for (const auto& s : j.at("o")) c.o_set.insert(formula(s.get<std::string>()));
    for (const auto& s : j.at("p")) c.p_set.insert(formula(s.get<std::string>()));
    return c;
  }

  std::pair<Player, Move> move(const Json& j) {
    const Player mover = player_from(j.at("mover").get<std::string>());
    std::vector<Element> fresh;
    for (const auto& s : j.at("fresh")) fresh.push_back(element(s.get<std::string>()));
    std::set<Formula> added;
    for (const auto& s : j.at("added")) added.insert(formula(s.get<std::string>()));
    if (mover == Player::opponent) return {mover, OpponentMove{std::move(fresh), std::move(added)}};
    if (!fresh.empty()) throw TraceFormatError("proponent steps cannot introduce elements");
    return {mover, ProponentMove{std::move(added)}};
  }

  Element element(const std::string& s) {
    try {
      Element e = parse_element(s);
      if (!e.is_fresh() && !sig_.constants.contains(e.name())) sig_.declare_constant(e.name());
      return e;
    } catch (const std::exception& ex) {
      throw TraceFormatError("bad element '" + s + "': " + ex.what());
    }
  }

  Formula formula(const std::string& s) {
    try {
      return parse_formula(s, sig_);
    } catch (const std::exception& ex) {
      throw TraceFormatError("bad formula '" + s + "': " + ex.what());
    }
  }

 private:
  Formula parse_inferring(const std::string& s) {
    try {
      return parse_formula_inferring(s, sig_);
    } catch (const std::exception& ex) {
      throw TraceFormatError("bad formula '" + s + "': " + ex.what());
    }
  }

  Signature sig_;
};

}  // namespace detail

// Parses a trace and replays its moves. Positions are recomputed, so a
// loaded trace is always internally consistent.
inline GameTrace load_trace(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw TraceFormatError(std::string("not valid JSON: ") + e.what());
  }
  try {
    if (j.value("format", std::string{}) != trace_format_tag)
      throw TraceFormatError(std::string("expected format '") + trace_format_tag + "'");
    detail::TraceReader r;
    GameTrace t;
    t.start = r.start(j.at("start"));
    t.round_cutoff = j.at("round_cutoff").get<std::size_t>();
    Position cur = t.start;
    for (const auto& step : j.at("steps")) {
      auto [mover, m] = r.move(step);
      try {
        cur = apply_move(cur, mover, m);
      } catch (const MoveError& e) {
        throw TraceFormatError("step " + std::to_string(t.steps.size() + 1) + " is illegal: " + e.what());
      }
      t.steps.push_back({mover, std::move(m), cur});
    }
    const Json& o = j.at("outcome");
    if (o.is_null()) {
      t.finished = false;
      return t;
    }
    t.outcome = {detail::player_from(o.at("winner").get<std::string>()),
                 detail::reason_from(o.at("reason").get<std::string>()), o.value("detail", std::string{})};
    return t;
  } catch (const Json::exception& e) {
    throw TraceFormatError(std::string("malformed trace: ") + e.what());
  }
}

}  // namespace provgame
