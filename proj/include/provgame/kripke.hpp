#pragma once

// Finite predicate Kripke models and intuitionistic forcing.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "provgame/formula.hpp"
#include "provgame/syntax.hpp"

namespace provgame {

using WorldId = std::size_t;

class ForcingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct KripkeModel {
  std::vector<std::string> worlds;
  // order[i][j] != 0 iff worlds[i] <= worlds[j]; reflexive-transitive.
  std::vector<std::vector<char>> order;
  std::vector<std::vector<Element>> domain;  // sorted, per world
  std::vector<std::set<GroundAtom>> atoms;
  // Game/signature elements that are not domain elements themselves.
  std::map<Element, Element> interpretation;
  bool empty_domain_tolerant = false;

  std::size_t size() const { return worlds.size(); }
  bool le(WorldId a, WorldId b) const { return order[a][b] != 0; }

  std::vector<WorldId> cone(WorldId w) const {
    std::vector<WorldId> out;
    for (WorldId v = 0; v < size(); ++v)
      if (le(w, v)) out.push_back(v);
    return out;
  }

  bool in_domain(WorldId w, const Element& e) const {
    return std::binary_search(domain[w].begin(), domain[w].end(), e);
  }

  std::set<Element> universe() const {
    std::set<Element> out;
    for (const auto& d : domain) out.insert(d.begin(), d.end());
    return out;
  }

  std::optional<WorldId> world_index(const std::string& name) const {
    for (WorldId w = 0; w < size(); ++w)
      if (worlds[w] == name) return w;
    return std::nullopt;
  }

  // The least world, if the order has one.
  std::optional<WorldId> root() const {
    for (WorldId w = 0; w < size(); ++w) {
      bool least = true;
      for (WorldId v = 0; v < size() && least; ++v) least = le(w, v);
      if (least) return w;
    }
    return std::nullopt;
  }

  // Builds the reflexive-transitive closure of the given covering pairs.
  static std::vector<std::vector<char>> close_order(std::size_t n, const std::vector<std::pair<WorldId, WorldId>>& covers) {
    std::vector<std::vector<char>> le(n, std::vector<char>(n, 0));
    for (std::size_t i = 0; i < n; ++i) le[i][i] = 1;
    for (auto [a, b] : covers) le[a][b] = 1;
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i)
        if (le[i][k])
          for (std::size_t j = 0; j < n; ++j)
            if (le[k][j]) le[i][j] = 1;
    return le;
  }

  std::vector<std::pair<WorldId, WorldId>> covering_pairs() const {
    std::vector<std::pair<WorldId, WorldId>> out;
    for (WorldId a = 0; a < size(); ++a)
      for (WorldId b = 0; b < size(); ++b) {
        if (a == b || !le(a, b)) continue;
        bool direct = true;
        for (WorldId m = 0; m < size() && direct; ++m)
          if (m != a && m != b && le(a, m) && le(m, b)) direct = false;
        if (direct) out.emplace_back(a, b);
      }
    return out;
  }

  friend bool operator==(const KripkeModel&, const KripkeModel&) = default;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

inline ValidationReport validate_model(const KripkeModel& m) {
  ValidationReport r;
  auto bad = [&](std::string s) { r.violations.push_back(std::move(s)); };
  const std::size_t n = m.size();
  if (m.order.size() != n || m.domain.size() != n || m.atoms.size() != n) {
    bad("world count mismatch between worlds, order, domain and atoms");
    return r;
  }
  for (const auto& row : m.order)
    if (row.size() != n) {
      bad("order matrix is not square");
      return r;
    }
  for (WorldId a = 0; a < n; ++a) {
    if (!m.le(a, a)) bad("order not reflexive at " + m.worlds[a]);
    for (WorldId b = 0; b < n; ++b) {
      if (a != b && m.le(a, b) && m.le(b, a)) {
        if (a < b) bad("order not antisymmetric: " + m.worlds[a] + " and " + m.worlds[b]);
      }
      for (WorldId c = 0; c < n; ++c)
        if (m.le(a, b) && m.le(b, c) && !m.le(a, c))
          bad("order not transitive: " + m.worlds[a] + " <= " + m.worlds[b] + " <= " + m.worlds[c]);
    }
  }
  for (WorldId w = 0; w < n; ++w) {
    if (!std::is_sorted(m.domain[w].begin(), m.domain[w].end()) ||
        std::adjacent_find(m.domain[w].begin(), m.domain[w].end()) != m.domain[w].end())
      bad("domain of " + m.worlds[w] + " is not a sorted set");
    if (m.domain[w].empty() && !m.empty_domain_tolerant) bad("empty domain at " + m.worlds[w]);
    for (const GroundAtom& a : m.atoms[w])
      for (const Element& e : a.args)
        if (!m.in_domain(w, e))
          bad("atom " + to_string(to_formula(a)) + " at " + m.worlds[w] + " uses " + e.str() + " outside the domain");
  }
  for (WorldId a = 0; a < n; ++a)
    for (WorldId b = 0; b < n; ++b) {
      if (a == b || !m.le(a, b)) continue;
      for (const Element& e : m.domain[a])
        if (!m.in_domain(b, e))
          bad("domain not monotone: " + e.str() + " in " + m.worlds[a] + " but not in " + m.worlds[b]);
      for (const GroundAtom& at : m.atoms[a])
        if (!m.atoms[b].contains(at))
          bad("valuation not monotone: " + to_string(to_formula(at)) + " true at " + m.worlds[a] + " but not at " +
              m.worlds[b]);
    }
  std::set<Element> images;
  for (const auto& [from, to] : m.interpretation) {
    if (!images.insert(to).second) bad("interpretation is not injective at " + to.str());
    for (WorldId w = 0; w < n; ++w) {
      bool minimal = true;
      for (WorldId v = 0; v < n && minimal; ++v) minimal = v == w || !m.le(v, w);
      if (minimal && !m.in_domain(w, to))
        bad("interpretation of " + from.str() + " is outside the domain of " + m.worlds[w]);
    }
  }
  return r;
}

// Forcing with a per-(world, formula) memo. Formulas are interpreted into the
// model's domain before evaluation.
class Forcing {
 public:
  explicit Forcing(const KripkeModel& m) : m_(m), up_(m.size()) {
    for (WorldId w = 0; w < m.size(); ++w) up_[w] = m.cone(w);
  }

  // Maps game/signature elements to domain elements.
  Formula interpret(const Formula& f) const {
    if (m_.interpretation.empty()) return f;
    return map_elements(f, [&](const Element& e) {
      auto it = m_.interpretation.find(e);
      return it == m_.interpretation.end() ? e : it->second;
    });
  }

  bool operator()(WorldId w, const Formula& f) {
    if (w >= m_.size()) throw ForcingError("no world with index " + std::to_string(w));
    if (!f.is_closed()) throw ForcingError("forcing needs a closed formula: " + to_string(f));
    const Formula g = interpret(f);
    for (const Element& e : elements_of(g))
      if (!m_.in_domain(w, e)) throw ForcingError("uninterpreted element " + e.str() + " at " + m_.worlds[w]);
    return eval(w, g);
  }

  // `f` must already be interpreted and have its elements in domain(w).
  bool eval(WorldId w, const Formula& f) {
    switch (f.op()) {
      case Connective::bottom: return false;
      case Connective::atom: {
        GroundAtom a{f.predicate(), {}};
        a.args.reserve(f.args().size());
        for (const Term& t : f.args()) a.args.push_back(t.element());
        return m_.atoms[w].contains(a);
      }
      case Connective::conj: return eval(w, f.lhs()) && eval(w, f.rhs());
      case Connective::disj: return eval(w, f.lhs()) || eval(w, f.rhs());
      default: break;
    }
    const Key key{w, f};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    bool result = true;
    switch (f.op()) {
      case Connective::implies:
        for (WorldId v : up_[w])
          if (eval(v, f.lhs()) && !eval(v, f.rhs())) {
            result = false;
            break;
          }
        break;
      case Connective::forall:
        for (WorldId v : up_[w]) {
          for (const Element& d : m_.domain[v])
            if (!eval(v, open_body(f.body(), d))) {
              result = false;
              break;
            }
          if (!result) break;
        }
        break;
      case Connective::exists:
        result = false;
        for (const Element& d : m_.domain[w])
          if (eval(w, open_body(f.body(), d))) {
            result = true;
            break;
          }
        break;
      default: break;
    }
    memo_.emplace(key, result);
    return result;
  }

  const KripkeModel& model() const { return m_; }

 private:
  struct Key {
    WorldId w;
    Formula f;
    bool operator==(const Key& o) const { return w == o.w && f == o.f; }
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const { return k.f.hash() * 31 + k.w; }
  };

  const KripkeModel& m_;
  std::vector<std::vector<WorldId>> up_;
  std::unordered_map<Key, bool, KeyHash> memo_;
};

inline bool forces(const KripkeModel& m, WorldId w, const Formula& f) { return Forcing(m)(w, f); }

enum class FrameClass { Fin, finFin, N, finN, Cas, finCas };

inline const char* to_string(FrameClass c) {
  switch (c) {
    case FrameClass::Fin: return "Fin";
    case FrameClass::finFin: return "finFin";
    case FrameClass::N: return "N";
    case FrameClass::finN: return "finN";
    case FrameClass::Cas: return "Cas";
    case FrameClass::finCas: return "finCas";
  }
  return "?";
}

struct FrameClassReport {
  bool finite_worlds = true;
  bool finite_domains = true;
  std::vector<FrameClass> member_of;
};

// Every representable model is finite with finite domains, so it has no
// infinite increasing chains and its domains trivially stabilize.
inline FrameClassReport classify(const KripkeModel&) {
  return {true, true,
          {FrameClass::Fin, FrameClass::finFin, FrameClass::N, FrameClass::finN, FrameClass::Cas, FrameClass::finCas}};
}

}  // namespace provgame
