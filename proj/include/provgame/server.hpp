#pragma once

// Game sessions over HTTP: a human plays one side, an engine the other.
// The wire format is documented in docs/wire_api.md.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <shared_mutex>
#include <string>

#include <httplib.h>

#include "provgame/engines.hpp"
#include "provgame/referee.hpp"
#include "provgame/trace_io.hpp"

namespace provgame {

// A request the service refuses; `status` is the HTTP status to report.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(int status, std::string kind, const std::string& msg)
      : std::runtime_error(msg), status_(status), kind_(std::move(kind)) {}
  int status() const { return status_; }
  const std::string& kind() const { return kind_; }

 private:
  int status_;
  std::string kind_;
};

inline const char* session_status(const GameTrace& t, Player human) {
  if (t.finished) return "finished";
  return to_move(t.final_position()) == human ? "awaiting_human" : "awaiting_engine";
}

// The state view, computed from the trace alone.
inline Json session_view(const std::string& id, const GameTrace& t, Player human, const std::string& engine) {
  const Position& c = t.final_position();
  const Mistakes mk = mistakes(c);
  PositionTruth truth(c);
  Json closure = Json::array();
  for (const Formula& f : c.closure->members()) {
    const bool in_o = c.o_set.contains(f), in_p = c.p_set.contains(f);
    const bool mo = mk.opponent.contains(f), mp = mk.proponent.contains(f);
    closure.push_back({{"formula", to_string(f)},
                       {"mark", in_o && in_p ? "both" : in_o ? "o" : in_p ? "p" : "unmarked"},
                       {"truth", truth(f)},
                       {"mistake", mo && mp ? "both" : mo ? "opponent" : mp ? "proponent" : "none"}});
  }
  Json history = Json::array();
  for (const Step& s : t.steps) history.push_back(move_to_json(s.mover, s.move));
  Json v{{"id", id},
         {"status", session_status(t, human)},
         {"human_side", to_string(human)},
         {"engine", engine},
         {"to_move", t.finished ? Json(nullptr) : Json(to_string(to_move(c)))},
         {"gamma", formulas_to_json(c.gamma())},
         {"delta", elements_to_json(c.delta())},
         {"o", formulas_to_json(c.o_set)},
         {"p", formulas_to_json(c.p_set)},
         {"closure", std::move(closure)},
         {"mistakes", {{"opponent", formulas_to_json(mk.opponent)}, {"proponent", formulas_to_json(mk.proponent)}}},
         {"history", std::move(history)},
         {"round_cutoff", t.round_cutoff}};
  v["outcome"] = t.finished ? Json{{"winner", to_string(t.outcome.winner)},
                                   {"reason", to_string(t.outcome.reason)},
                                   {"detail", t.outcome.detail}}
                            : Json(nullptr);
  return v;
}

class SessionManager {
 public:
  // With a directory, each session's trace is rewritten there after every change.
  explicit SessionManager(std::optional<std::filesystem::path> trace_dir = std::nullopt)
      : trace_dir_(std::move(trace_dir)), rng_(std::random_device{}()) {}

  // Request fields: o (list), phi, human_side, engine {name, params}, round_cutoff.
  Json create(const Json& req) {
    if (!req.is_object()) throw ServiceError(400, "bad_request", "expected a JSON object");
    Position start;
    Player human;
    std::string engine_name;
    std::unique_ptr<Strategy> engine;
    std::size_t cutoff = default_round_cutoff;
    try {
      Signature sig;
      std::vector<Formula> o0;
      for (const auto& s : req.value("o", Json::array())) o0.push_back(parse_formula_inferring(s.get<std::string>(), sig));
      const Formula phi = parse_formula_inferring(req.at("phi").get<std::string>(), sig);
      start = initial_position(o0, phi);
      human = detail::player_from(req.value("human_side", std::string("opponent")));
      cutoff = req.value("round_cutoff", default_round_cutoff);
      const Json& e = req.at("engine");
      engine_name = e.is_string() ? e.get<std::string>() : e.at("name").get<std::string>();
      engine = make_engine(engine_name, e.is_object() ? e.value("params", Json::object()) : Json::object(), start);
    } catch (const EngineError& e) {
      throw ServiceError(400, "bad_engine", e.what());
    } catch (const std::exception& e) {
      throw ServiceError(400, "bad_request", e.what());
    }
    auto s = std::make_shared<Session>(new_id(), std::move(start), cutoff, human, engine_name, std::move(engine));
    std::unique_lock lock(s->mutex);
    s->engine_turns();
    {
      std::unique_lock map_lock(map_mutex_);
      sessions_.emplace(s->id, s);
    }
    persist(*s);
    return s->view();
  }

  Json state(const std::string& id) const {
    auto s = find(id);
    std::shared_lock lock(s->mutex);
    return s->view();
  }

  // Request fields: fresh (count or names, Opponent only), added (formulas).
  Json submit(const std::string& id, const Json& req) {
    auto s = find(id);
    std::unique_lock lock(s->mutex);
    if (s->match.finished()) throw ServiceError(409, "game_over", "the game is over");
    if (s->match.mover() != s->human) throw ServiceError(409, "wrong_mover", "it is the engine's turn");
    Move m;
    try {
      m = move_from_json(req, s->human, s->match.position());
    } catch (const MoveError& e) {
      throw ServiceError(409, to_string(e.kind()), e.what());
    } catch (const std::exception& e) {
      throw ServiceError(400, "bad_request", e.what());
    }
    try {
      s->match.play(m);
    } catch (const MoveError& e) {
      throw ServiceError(409, to_string(e.kind()), e.what());
    }
    s->engine_turns();
    persist(*s);
    return s->view();
  }

  std::string trace(const std::string& id) const {
    auto s = find(id);
    std::shared_lock lock(s->mutex);
    return save_trace(s->match.trace());
  }

 private:
  struct Session {
    Session(std::string i, Position start, std::size_t cutoff, Player h, std::string name, std::unique_ptr<Strategy> e)
        : id(std::move(i)), match(std::move(start), cutoff), human(h), engine_name(std::move(name)), engine(std::move(e)) {}

    // The loss rule allows at most one engine move per human move.
    void engine_turns() {
      while (!match.finished() && match.mover() != human) match.step(*engine);
    }
    Json view() const { return session_view(id, match.trace(), human, engine_name); }

    std::string id;
    Match match;
    Player human;
    std::string engine_name;
    std::unique_ptr<Strategy> engine;
    mutable std::shared_mutex mutex;
  };

  std::shared_ptr<Session> find(const std::string& id) const {
    std::shared_lock lock(map_mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw ServiceError(404, "unknown_session", "no session '" + id + "'");
    return it->second;
  }

  std::string new_id() {
    std::lock_guard lock(rng_mutex_);
    static constexpr char hex[] = "0123456789abcdef";
    std::string id;
    for (int i = 0; i < 16; ++i) id += hex[rng_() % 16];
    return id;
  }

  void persist(const Session& s) const {
    if (!trace_dir_) return;
    const auto path = *trace_dir_ / (s.id + ".trace.json");
    const auto tmp = path.string() + ".tmp";
    {
      std::ofstream out(tmp);
      out << save_trace(s.match.trace());
    }
    std::filesystem::rename(tmp, path);
  }

  std::optional<std::filesystem::path> trace_dir_;
  mutable std::shared_mutex map_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::mutex rng_mutex_;
  std::mt19937_64 rng_;
};

inline void mount_routes(httplib::Server& srv, SessionManager& mgr) {
  auto reply = [](httplib::Response& res, auto&& body, int ok_status = 200) {
    res.set_header("Access-Control-Allow-Origin", "*");
    try {
      const Json j = body();
      res.status = ok_status;
      res.set_content(j.dump(2), "application/json");
    } catch (const ServiceError& e) {
      res.status = e.status();
      res.set_content(Json{{"error", {{"kind", e.kind()}, {"message", e.what()}}}}.dump(2), "application/json");
    }
  };
  auto parse_body = [](const httplib::Request& req) {
    try {
      return req.body.empty() ? Json::object() : Json::parse(req.body);
    } catch (const Json::exception& e) {
      throw ServiceError(400, "bad_request", std::string("body is not JSON: ") + e.what());
    }
  };

  srv.Post("/sessions", [&mgr, reply, parse_body](const httplib::Request& req, httplib::Response& res) {
    reply(res, [&] { return mgr.create(parse_body(req)); }, 201);
  });
  srv.Get(R"(/sessions/([0-9a-f]+))", [&mgr, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, [&] { return mgr.state(req.matches[1]); });
  });
  srv.Post(R"(/sessions/([0-9a-f]+)/moves)", [&mgr, reply, parse_body](const httplib::Request& req,
                                                                       httplib::Response& res) {
    reply(res, [&] { return mgr.submit(req.matches[1], parse_body(req)); });
  });
  srv.Get(R"(/sessions/([0-9a-f]+)/trace)", [&mgr](const httplib::Request& req, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    try {
      res.set_content(mgr.trace(req.matches[1]), "application/json");
    } catch (const ServiceError& e) {
      res.status = e.status();
      res.set_content(Json{{"error", {{"kind", e.kind()}, {"message", e.what()}}}}.dump(2), "application/json");
    }
  });
  srv.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
}

}  // namespace provgame
