#pragma once

// Text format for Kripke models:
//
//   worlds: [w0, w1]
//   order: [[w0, w1]]                 covering pairs
//   domain: {w0: [c], w1: [c, d]}
//   atoms: {w1: ["P(d)"]}
//   interpretation: {α1: d}           optional
//   empty_domains: tolerant           optional
//
// Keys may span lines; `#` starts a comment.

#include <cctype>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "provgame/kripke.hpp"
#include "provgame/syntax.hpp"

namespace provgame {

class ModelFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

struct FlowValue {
  enum class Kind { scalar, list, map } kind = Kind::scalar;
  std::string text;
  std::vector<FlowValue> items;
  std::vector<std::pair<std::string, FlowValue>> entries;
};

class FlowReader {
 public:
  explicit FlowReader(std::string_view s) : s_(s) {}

  std::vector<std::pair<std::string, FlowValue>> document() {
    std::vector<std::pair<std::string, FlowValue>> out;
    skip();
    while (i_ < s_.size()) {
      std::string key = scalar();
      expect(':');
      out.emplace_back(std::move(key), value());
      skip();
    }
    return out;
  }

 private:
  void skip() {
    while (i_ < s_.size()) {
      if (std::isspace(static_cast<unsigned char>(s_[i_]))) {
        ++i_;
      } else if (s_[i_] == '#') {
        while (i_ < s_.size() && s_[i_] != '\n') ++i_;
      } else {
        break;
      }
    }
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ModelFormatError(what + " at offset " + std::to_string(i_));
  }

  void expect(char c) {
    skip();
    if (i_ >= s_.size() || s_[i_] != c) fail(std::string("expected '") + c + "'");
    ++i_;
  }

  bool accept(char c) {
    skip();
    if (i_ < s_.size() && s_[i_] == c) {
      ++i_;
      return true;
    }
    return false;
  }

  std::string scalar() {
    skip();
    if (i_ >= s_.size()) fail("unexpected end of input");
    if (s_[i_] == '"') {
      std::string out;
      for (++i_; i_ < s_.size() && s_[i_] != '"'; ++i_) out += s_[i_];
      if (i_ >= s_.size()) fail("unterminated string");
      ++i_;
      return out;
    }
    const std::size_t start = i_;
    while (i_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[i_])) &&
           std::string_view(",:[]{}#\"").find(s_[i_]) == std::string_view::npos)
      ++i_;
    if (i_ == start) fail("expected a value");
    return std::string(s_.substr(start, i_ - start));
  }

  FlowValue value() {
    FlowValue v;
    if (accept('[')) {
      v.kind = FlowValue::Kind::list;
      if (accept(']')) return v;
      do v.items.push_back(value());
      while (accept(','));
      expect(']');
    } else if (accept('{')) {
      v.kind = FlowValue::Kind::map;
      if (accept('}')) return v;
      do {
        std::string key = scalar();
        expect(':');
        v.entries.emplace_back(std::move(key), value());
      } while (accept(','));
      expect('}');
    } else {
      v.text = scalar();
    }
    return v;
  }

  std::string_view s_;
  std::size_t i_ = 0;
};

inline Element element_from_name(const std::string& name) {
  try {
    return parse_element(name);
  } catch (const ParseError&) {
    throw ModelFormatError("bad element name '" + name + "'");
  }
}

inline const std::vector<FlowValue>& as_list(const FlowValue& v, const std::string& what) {
  if (v.kind != FlowValue::Kind::list) throw ModelFormatError(what + " must be a list");
  return v.items;
}

inline const std::string& as_scalar(const FlowValue& v, const std::string& what) {
  if (v.kind != FlowValue::Kind::scalar) throw ModelFormatError(what + " must be a plain value");
  return v.text;
}

inline const std::vector<std::pair<std::string, FlowValue>>& as_map(const FlowValue& v, const std::string& what) {
  if (v.kind != FlowValue::Kind::map) throw ModelFormatError(what + " must be a mapping");
  return v.entries;
}

}  // namespace detail

// Parses and validates a model; invalid models are rejected.
inline KripkeModel parse_model(std::string_view text) {
  using namespace detail;
  KripkeModel m;
  std::map<std::string, FlowValue> doc;
  for (auto& [k, v] : FlowReader(text).document()) {
    static const std::set<std::string> known = {"worlds", "order", "domain", "atoms", "interpretation", "empty_domains"};
    if (!known.contains(k)) throw ModelFormatError("unknown key '" + k + "'");
    if (!doc.emplace(k, std::move(v)).second) throw ModelFormatError("duplicate key '" + k + "'");
  }
  if (!doc.contains("worlds")) throw ModelFormatError("missing 'worlds'");
  for (const FlowValue& w : as_list(doc["worlds"], "worlds")) {
    const std::string& name = as_scalar(w, "world name");
    if (m.world_index(name)) throw ModelFormatError("duplicate world '" + name + "'");
    m.worlds.push_back(name);
  }
  if (m.worlds.empty()) throw ModelFormatError("a model needs at least one world");
  auto world = [&](const std::string& name) {
    auto w = m.world_index(name);
    if (!w) throw ModelFormatError("unknown world '" + name + "'");
    return *w;
  };

  std::vector<std::pair<WorldId, WorldId>> covers;
  if (doc.contains("order"))
    for (const FlowValue& pair : as_list(doc["order"], "order")) {
      const auto& ends = as_list(pair, "order pair");
      if (ends.size() != 2) throw ModelFormatError("order pairs have two worlds");
      covers.emplace_back(world(as_scalar(ends[0], "world")), world(as_scalar(ends[1], "world")));
    }
  m.order = KripkeModel::close_order(m.size(), covers);

  m.domain.assign(m.size(), {});
  Signature sig;
  if (doc.contains("domain"))
    for (const auto& [w, elems] : as_map(doc["domain"], "domain")) {
      auto& d = m.domain[world(w)];
      for (const FlowValue& e : as_list(elems, "domain of " + w)) {
        Element el = element_from_name(as_scalar(e, "element"));
        if (!el.is_fresh()) sig.declare_constant(el.name());
        d.push_back(el);
      }
      std::sort(d.begin(), d.end());
      if (std::adjacent_find(d.begin(), d.end()) != d.end()) throw ModelFormatError("repeated element in " + w);
    }

  m.atoms.assign(m.size(), {});
  if (doc.contains("atoms"))
    for (const auto& [w, list] : as_map(doc["atoms"], "atoms")) {
      auto& a = m.atoms[world(w)];
      for (const FlowValue& item : as_list(list, "atoms of " + w)) {
        const std::string& src = as_scalar(item, "atom");
        Formula f;
        try {
          f = parse_formula_inferring(src, sig);
        } catch (const std::exception& e) {
          throw ModelFormatError("bad atom '" + src + "': " + e.what());
        }
        auto g = as_ground_atom(f);
        if (!g) throw ModelFormatError("'" + src + "' is not a ground atom");
        a.insert(*g);
      }
    }

  if (doc.contains("interpretation"))
    for (const auto& [from, to] : as_map(doc["interpretation"], "interpretation"))
      m.interpretation.emplace(element_from_name(from), element_from_name(as_scalar(to, "interpretation target")));

  if (doc.contains("empty_domains")) {
    const std::string& flag = as_scalar(doc["empty_domains"], "empty_domains");
    if (flag == "tolerant" || flag == "true") m.empty_domain_tolerant = true;
    else if (flag != "forbidden" && flag != "false") throw ModelFormatError("empty_domains is tolerant or forbidden");
  }

  auto report = validate_model(m);
  if (!report.ok()) {
    std::string msg = "invalid model:";
    for (const auto& v : report.violations) msg += "\n  " + v;
    throw ModelFormatError(msg);
  }
  return m;
}

inline std::string format_model(const KripkeModel& m) {
  std::ostringstream os;
  auto join = [&](const auto& range, auto&& fn) {
    bool first = true;
    for (const auto& x : range) {
      if (!first) os << ", ";
      first = false;
      fn(x);
    }
  };
  os << "worlds: [";
  join(m.worlds, [&](const std::string& w) { os << w; });
  os << "]\norder: [";
  join(m.covering_pairs(), [&](const auto& p) { os << "[" << m.worlds[p.first] << ", " << m.worlds[p.second] << "]"; });
  os << "]\ndomain: {";
  std::vector<WorldId> ids(m.size());
  for (WorldId w = 0; w < m.size(); ++w) ids[w] = w;
  join(ids, [&](WorldId w) {
    os << m.worlds[w] << ": [";
    join(m.domain[w], [&](const Element& e) { os << e.str(); });
    os << "]";
  });
  os << "}\natoms: {";
  join(ids, [&](WorldId w) {
    os << m.worlds[w] << ": [";
    join(m.atoms[w], [&](const GroundAtom& a) { os << '"' << to_string(to_formula(a)) << '"'; });
    os << "]";
  });
  os << "}\n";
  if (!m.interpretation.empty()) {
    os << "interpretation: {";
    join(m.interpretation, [&](const auto& kv) { os << kv.first.str() << ": " << kv.second.str(); });
    os << "}\n";
  }
  if (m.empty_domain_tolerant) os << "empty_domains: tolerant\n";
  return os.str();
}

}  // namespace provgame
