// provgame: command line front end for the provability game engine.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "provgame/engines.hpp"
#include "provgame/enumerate.hpp"
#include "provgame/extract.hpp"
#include "provgame/model_io.hpp"
#include "provgame/server.hpp"
#include "provgame/solver.hpp"
#include "provgame/trace_io.hpp"

namespace {

using namespace provgame;

enum Exit { ok = 0, negative = 1, usage = 2, inconclusive = 3 };

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
}

// Options shared by the commands that take a goal.
struct Goal {
  std::vector<std::string> premises;
  std::string phi;
  std::string sig_file;

  void add_to(CLI::App* cmd, bool required = true) {
    cmd->add_option("--o", premises, "premise formula (repeatable; empty strings are ignored)")->allow_extra_args(false);
    auto* opt = cmd->add_option("--phi", phi, "goal formula");
    if (required) opt->required();
    cmd->add_option("--sig", sig_file, "signature file; otherwise inferred from the formulas");
  }

  // Parses against the signature file, or infers one (arities from first use).
  std::pair<std::vector<Formula>, Formula> parse() const {
    Signature sig;
    const bool explicit_sig = !sig_file.empty();
    if (explicit_sig) sig = parse_signature(read_file(sig_file));
    auto one = [&](const std::string& text) {
      return explicit_sig ? parse_formula(text, sig) : parse_formula_inferring(text, sig);
    };
    std::vector<Formula> o;
    for (const std::string& s : premises)
      if (s.find_first_not_of(" \t") != std::string::npos) o.push_back(one(s));
    return {o, one(phi)};
  }
};

std::string join(const std::vector<std::string>& xs, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? sep : "") + xs[i];
  return out;
}

std::string describe(const Step& s) {
  std::vector<std::string> added;
  const auto* om = std::get_if<OpponentMove>(&s.move);
  for (const Formula& f : om ? om->into_o : std::get<ProponentMove>(s.move).into_p) added.push_back(to_string(f));
  std::string out = to_string(s.mover);
  if (om && !om->fresh.empty()) {
    std::vector<std::string> names;
    for (const Element& e : om->fresh) names.push_back(e.str());
    out += " introduces " + join(names, ", ") + ";";
  }
  return out + (added.empty() ? " adds nothing" : " adds " + join(added, "; "));
}

std::string winner_line(const GameTrace& t) {
  if (!t.finished) return "game in progress, " + std::string(to_string(to_move(t.final_position()))) + " to move";
  std::string w = t.outcome.winner == Player::opponent ? "Opponent" : "Proponent";
  std::string line = "Winner(" + w + "): " + to_string(t.outcome.reason);
  if (!t.outcome.detail.empty()) line += " (" + t.outcome.detail + ")";
  return line;
}

std::string trace_text(const GameTrace& t) {
  std::string out;
  for (std::size_t i = 0; i < t.steps.size(); ++i) out += std::to_string(i + 1) + ". " + describe(t.steps[i]) + "\n";
  return out + winner_line(t) + "\n";
}

Exit verdict_exit(const GameTrace& t) {
  if (!t.finished) return ok;
  return t.outcome.winner == Player::opponent ? negative : ok;
}

// An engine name with an optional file argument, as in `from-model m.txt`.
std::unique_ptr<Strategy> engine_from(const std::vector<std::string>& spec, const Position& start, std::size_t budget,
                                      std::size_t nodes, const ModelBounds& bounds) {
  const std::string& name = spec.at(0);
  Json params = Json::object();
  if (name == "from-model" || name == "casari") {
    if (spec.size() < 2) throw InputError(name + " needs a model file");
    params["model"] = read_file(spec[1]);
  } else if (name == "scripted") {
    if (spec.size() < 2) throw InputError("scripted needs a file of moves");
    const Json j = Json::parse(read_file(spec[1]));
    params["moves"] = j.is_object() && j.contains("steps") ? j.at("steps") : j;
  } else if (name == "solver") {
    params["budget"] = budget;
    params["nodes"] = nodes;
  } else if (name == "saturation") {
    params["worlds"] = bounds.worlds;
    params["dom"] = bounds.domain;
  }
  if (spec.size() > 1 && !params.contains("model") && !params.contains("moves"))
    throw InputError(name + " takes no file argument");
  return make_engine(name, params, start);
}

class Output {
 public:
  explicit Output(const std::string& format) : structured_(format == "structured") {}
  bool structured() const { return structured_; }
  void print(const Json& j, const std::string& human) const {
    if (structured_) std::cout << j.dump(2) << "\n";
    else std::cout << human;
  }

 private:
  bool structured_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Provability games for first-order intuitionistic logic"};
  app.require_subcommand(1);
  std::string format = "human";
  app.add_option("--format", format, "output format")->check(CLI::IsMember({"human", "structured"}));
  std::size_t worlds = 2, dom = 2, budget = 2, cutoff = default_round_cutoff, nodes = SolverOptions{}.node_limit;
  unsigned seed = 0;
  app.add_option("--seed", seed, "accepted for compatibility; every algorithm is deterministic");

  Goal goal;
  Exit status = ok;

  auto* parse_cmd = app.add_subcommand("parse", "parse a formula and print it with its signature");
  goal.add_to(parse_cmd);

  auto* closure_cmd = app.add_subcommand("closure", "list the subformula closure");
  goal.add_to(closure_cmd);
  std::vector<std::string> extra_elements;
  closure_cmd->add_option("--delta", extra_elements, "additional elements (repeatable)");

  auto* check_cmd = app.add_subcommand("check", "bounded countermodel search for O |= phi");
  goal.add_to(check_cmd);
  bool tolerant = false;
  double ceiling = EnumerationOptions{}.ceiling;
  check_cmd->add_option("--worlds", worlds, "maximum number of worlds");
  check_cmd->add_option("--dom", dom, "maximum number of elements beyond the constants");
  check_cmd->add_flag("--empty-domains", tolerant, "allow worlds with empty domains");
  check_cmd->add_option("--ceiling", ceiling, "refuse searches estimated above this many models");

  auto* solve_cmd = app.add_subcommand("solve", "exact game value with a bounded number of new elements");
  goal.add_to(solve_cmd);
  solve_cmd->add_option("--budget", budget, "new elements Opponent may introduce in total");
  solve_cmd->add_option("--nodes", nodes, "node limit");

  auto* play_cmd = app.add_subcommand("play", "referee a game between two strategies");
  goal.add_to(play_cmd);
  std::vector<std::string> opponent{"solver"}, proponent{"saturation"};
  std::string trace_out;
  play_cmd->add_option("--opponent", opponent, "saturation | expander | solver | from-model FILE | casari FILE | scripted FILE")
      ->expected(1, 2);
  play_cmd->add_option("--proponent", proponent, "saturation | solver | scripted FILE")->expected(1, 2);
  play_cmd->add_option("--cutoff", cutoff, "moves before the game counts as infinite");
  play_cmd->add_option("--budget", budget, "budget for the solver strategy");
  play_cmd->add_option("--nodes", nodes, "node limit for the solver strategy");
  play_cmd->add_option("--worlds", worlds, "world bound for saturation");
  play_cmd->add_option("--dom", dom, "element bound for saturation");
  play_cmd->add_option("--trace", trace_out, "write the trace here");

  auto* replay_cmd = app.add_subcommand("replay", "re-run a saved trace through the referee");
  std::string trace_in;
  replay_cmd->add_option("--trace", trace_in, "trace file")->required();

  auto* extract_cmd = app.add_subcommand("extract", "countermodel from a trace won by Opponent");
  extract_cmd->add_option("--trace", trace_in, "trace file")->required();
  extract_cmd->add_option("--budget", budget, "largest solver budget tried when the play alone is not enough");

  auto* serve_cmd = app.add_subcommand("serve", "start the session service");
  std::string host = "127.0.0.1", trace_dir;
  int port = 8080;
  serve_cmd->add_option("--host", host, "address to bind");
  serve_cmd->add_option("--port", port, "port to bind");
  serve_cmd->add_option("--traces", trace_dir, "directory for per-session trace files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : usage;
  }
  const Output out(format);

  try {
    if (*parse_cmd) {
      auto [o, phi] = goal.parse();
      std::vector<Formula> all = o;
      all.push_back(phi);
      const Signature sig = signature_of(std::span<const Formula>(all));
      Json j{{"o", formulas_to_json(o)}, {"phi", to_string(phi)}, {"signature", to_string(sig)}};
      std::string human;
      for (const Formula& f : o) human += "premise  " + to_string(f) + "\n";
      human += "goal     " + to_string(phi) + "\n" + to_string(sig);
      out.print(j, human);
    } else if (*closure_cmd) {
      auto [o, phi] = goal.parse();
      Position c = initial_position(o, phi);
      std::vector<Element> extra;
      for (const std::string& s : extra_elements) extra.push_back(parse_element(s));
      const ClosureSet cl = extra.empty() ? *c.closure : c.closure->extended(extra);
      std::string human = "delta: " + join(elements_to_json(cl.delta()).get<std::vector<std::string>>(), ", ") + "\n";
      for (const Formula& f : cl.members()) human += to_string(f) + "\n";
      human += std::to_string(cl.size()) + " formulas\n";
      out.print(Json{{"delta", elements_to_json(cl.delta())}, {"closure", formulas_to_json(cl.members())}}, human);
    } else if (*check_cmd) {
      auto [o, phi] = goal.parse();
      EnumerationOptions opts;
      opts.empty_domain_tolerant = tolerant;
      opts.ceiling = ceiling;
      const std::string bounds = "(" + std::to_string(worlds) + "," + std::to_string(dom) + ")";
      try {
        auto cm = find_countermodel(o, phi, {worlds, dom}, opts);
        if (!cm) {
          out.print(Json{{"bounds", {worlds, dom}}, {"countermodel", nullptr}}, "no countermodel at bounds " + bounds + "\n");
        } else {
          const std::string text = format_model(cm->model);
          out.print(Json{{"bounds", {worlds, dom}}, {"root", cm->model.worlds[cm->root]}, {"countermodel", text}},
                    "countermodel at bounds " + bounds + ", root " + cm->model.worlds[cm->root] + ":\n" + text);
          status = negative;
        }
      } catch (const EnumerationTooLarge& e) {
        out.print(Json{{"bounds", {worlds, dom}}, {"inconclusive", e.what()}}, std::string("inconclusive: ") + e.what() + "\n");
        status = inconclusive;
      }
    } else if (*solve_cmd) {
      auto [o, phi] = goal.parse();
      try {
        const SolveVerdict v = solve_game(initial_position(o, phi), budget, nodes);
        std::string human = "budget " + std::to_string(budget) + ": ";
        if (v.winner) {
          human += std::string("winner ") + to_string(*v.winner) + " (" + std::to_string(v.explored) + " positions)\n";
          status = *v.winner == Player::opponent ? negative : ok;
        } else {
          human += "inconclusive: " + v.note + "\n";
          status = inconclusive;
        }
        out.print(verdict_to_json(v), human);
      } catch (const SolverRefused& e) {
        out.print(Json{{"budget", budget}, {"winner", "inconclusive"}, {"note", e.what()}},
                  std::string("refused: ") + e.what() + "\n");
        status = inconclusive;
      }
    } else if (*play_cmd) {
      auto [o, phi] = goal.parse();
      const Position start = initial_position(o, phi);
      auto opp = engine_from(opponent, start, budget, nodes, {worlds, dom});
      auto pro = engine_from(proponent, start, budget, nodes, {worlds, dom});
      const GameTrace t = run_game(start, *opp, *pro, cutoff);
      if (!trace_out.empty()) write_file(trace_out, save_trace(t));
      out.print(trace_to_json(t), trace_text(t));
      status = verdict_exit(t);
    } else if (*replay_cmd) {
      const GameTrace t = load_trace(read_file(trace_in));
      const std::string problem = verify_trace(t);
      Json j = trace_to_json(t);
      j["verified"] = problem.empty();
      if (!problem.empty()) j["problem"] = problem;
      out.print(j, trace_text(t) + (problem.empty() ? "trace verified\n" : "trace does not replay: " + problem + "\n"));
      status = problem.empty() ? ok : negative;
    } else if (*extract_cmd) {
      const GameTrace t = load_trace(read_file(trace_in));
      if (!t.finished || t.outcome.winner != Player::opponent) throw InputError("the trace is not an Opponent win");
      try {
        const KripkeModel m = extract_countermodel(t, nullptr, budget);
        const std::string text = format_model(m);
        out.print(Json{{"worlds", m.size()}, {"model", text}}, text);
      } catch (const ExtractionError& e) {
        out.print(Json{{"inconclusive", e.what()}}, std::string("inconclusive: ") + e.what() + "\n");
        status = inconclusive;
      }
    } else if (*serve_cmd) {
      std::optional<std::filesystem::path> dir;
      if (!trace_dir.empty()) {
        dir = trace_dir;
        std::filesystem::create_directories(*dir);
      }
      SessionManager mgr(dir);
      httplib::Server srv;
      mount_routes(srv, mgr);
      std::cerr << "listening on http://" << host << ":" << port << "\n";
      if (!srv.listen(host, port)) throw InputError("cannot listen on " + host + ":" + std::to_string(port));
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return usage;
  }
  return status;
}
