#pragma once

// First-order intuitionistic formulas over {->, &, |, false, forall, exists},
// no function symbols. Bound variables are de Bruijn indices, so
// alpha-equivalent formulas compare equal; binder names are kept only as
// printing hints.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace provgame {

// An individual: either a signature constant or an element introduced during
// a game (printed as α1, α2, ...).
class Element {
 public:
  Element() = default;

  static Element constant(std::string name) {
    Element e;
    e.name_ = std::move(name);
    return e;
  }
  static Element fresh(std::uint32_t index) {
    Element e;
    e.fresh_ = true;
    e.index_ = index;
    return e;
  }

  bool is_fresh() const { return fresh_; }
  std::uint32_t fresh_index() const { return index_; }
  const std::string& name() const { return name_; }

  std::string str() const {
    return fresh_ ? "\xCE\xB1" + std::to_string(index_) : name_;
  }

  // Constants first (by name), then game elements by introduction index.
  friend std::strong_ordering operator<=>(const Element& a, const Element& b) {
    if (a.fresh_ != b.fresh_) return a.fresh_ ? std::strong_ordering::greater : std::strong_ordering::less;
    if (a.fresh_) return a.index_ <=> b.index_;
    return a.name_.compare(b.name_) <=> 0;
  }
  friend bool operator==(const Element& a, const Element& b) {
    return a.fresh_ == b.fresh_ && a.index_ == b.index_ && a.name_ == b.name_;
  }

 private:
  bool fresh_ = false;
  std::uint32_t index_ = 0;
  std::string name_;
};

class Term {
 public:
  enum class Kind : std::uint8_t { element, free_var, bound };

  static Term element(Element e) {
    Term t;
    t.kind_ = Kind::element;
    t.element_ = std::move(e);
    return t;
  }
  static Term free_var(std::string name) {
    Term t;
    t.kind_ = Kind::free_var;
    t.var_ = std::move(name);
    return t;
  }
  static Term bound(std::uint32_t index) {
    Term t;
    t.kind_ = Kind::bound;
    t.index_ = index;
    return t;
  }

  Kind kind() const { return kind_; }
  bool is_element() const { return kind_ == Kind::element; }
  bool is_free_var() const { return kind_ == Kind::free_var; }
  bool is_bound() const { return kind_ == Kind::bound; }
  const Element& element() const { return element_; }
  const std::string& var_name() const { return var_; }
  std::uint32_t index() const { return index_; }

  friend std::strong_ordering operator<=>(const Term& a, const Term& b) {
    if (a.kind_ != b.kind_) return a.kind_ <=> b.kind_;
    switch (a.kind_) {
      case Kind::element: return a.element_ <=> b.element_;
      case Kind::free_var: return a.var_.compare(b.var_) <=> 0;
      case Kind::bound: return a.index_ <=> b.index_;
    }
    return std::strong_ordering::equal;
  }
  friend bool operator==(const Term& a, const Term& b) { return (a <=> b) == 0; }

 private:
  Kind kind_ = Kind::element;
  std::uint32_t index_ = 0;
  std::string var_;
  Element element_;
};

// Declaration order is the canonical structural order.
enum class Connective : std::uint8_t { bottom, atom, implies, conj, disj, forall, exists };

inline bool is_binary(Connective c) {
  return c == Connective::implies || c == Connective::conj || c == Connective::disj;
}
inline bool is_quantifier(Connective c) { return c == Connective::forall || c == Connective::exists; }

struct FormulaNode;

class Formula {
 public:
  Formula() = default;  // empty handle; only valid as a placeholder

  static Formula bottom();
  static Formula atom(std::string predicate, std::vector<Term> args = {});
  static Formula implies(Formula lhs, Formula rhs);
  static Formula conj(Formula lhs, Formula rhs);
  static Formula disj(Formula lhs, Formula rhs);
  static Formula negation(Formula f) { return implies(std::move(f), bottom()); }
  // Binds the free variable `var` of `body`.
  static Formula forall(const std::string& var, const Formula& body);
  static Formula exists(const std::string& var, const Formula& body);
  // `body` already uses bound index 0 for the new binder.
  static Formula quantify(Connective q, Formula body, std::string hint);

  bool valid() const { return node_ != nullptr; }
  const FormulaNode& node() const { return *node_; }
  const FormulaNode* get() const { return node_.get(); }

  Connective op() const;
  const std::string& predicate() const;
  const std::vector<Term>& args() const;
  const Formula& lhs() const;
  const Formula& rhs() const;
  const Formula& body() const;  // quantifier body
  const std::string& binder_hint() const;

  std::size_t hash() const;
  std::uint32_t size() const;
  // One more than the largest loose bound index; 0 when none occur.
  std::uint32_t loose_bound() const;
  bool has_free_vars() const;
  bool is_closed() const { return loose_bound() == 0 && !has_free_vars(); }
  bool is_negation() const;

  friend std::strong_ordering operator<=>(const Formula& a, const Formula& b);
  friend bool operator==(const Formula& a, const Formula& b);

  // Finalizes hash, size and variable bookkeeping of a raw node.
  static Formula make(FormulaNode n);

 private:
  explicit Formula(std::shared_ptr<const FormulaNode> n) : node_(std::move(n)) {}

  std::shared_ptr<const FormulaNode> node_;
};

struct FormulaNode {
  Connective op = Connective::bottom;
  std::string predicate;
  std::vector<Term> args;
  Formula lhs;  // also the quantifier body
  Formula rhs;
  std::string hint;
  std::size_t hash = 0;
  std::uint32_t size = 1;
  std::uint32_t loose = 0;
  bool free_vars = false;
};

namespace detail {

inline std::size_t mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

inline std::size_t term_hash(const Term& t) {
  std::size_t h = static_cast<std::size_t>(t.kind()) * 31;
  switch (t.kind()) {
    case Term::Kind::element:
      h = mix(h, t.element().is_fresh() ? t.element().fresh_index() + 1000003u
                                        : std::hash<std::string>{}(t.element().name()));
      break;
    case Term::Kind::free_var: h = mix(h, std::hash<std::string>{}(t.var_name())); break;
    case Term::Kind::bound: h = mix(h, t.index()); break;
  }
  return h;
}

}  // namespace detail

inline Formula Formula::make(FormulaNode n) {
  std::size_t h = static_cast<std::size_t>(n.op) + 17;
  switch (n.op) {
    case Connective::bottom: break;
    case Connective::atom:
      h = detail::mix(h, std::hash<std::string>{}(n.predicate));
      for (const Term& t : n.args) {
        h = detail::mix(h, detail::term_hash(t));
        if (t.is_bound()) n.loose = std::max(n.loose, t.index() + 1);
        if (t.is_free_var()) n.free_vars = true;
      }
      break;
    case Connective::implies:
    case Connective::conj:
    case Connective::disj:
      h = detail::mix(detail::mix(h, n.lhs.hash()), n.rhs.hash());
      n.size = 1 + n.lhs.size() + n.rhs.size();
      n.loose = std::max(n.lhs.loose_bound(), n.rhs.loose_bound());
      n.free_vars = n.lhs.has_free_vars() || n.rhs.has_free_vars();
      break;
    case Connective::forall:
    case Connective::exists:
      h = detail::mix(h, n.lhs.hash());
      n.size = 1 + n.lhs.size();
      n.loose = n.lhs.loose_bound() > 0 ? n.lhs.loose_bound() - 1 : 0;
      n.free_vars = n.lhs.has_free_vars();
      break;
  }
  n.hash = h;
  return Formula(std::make_shared<const FormulaNode>(std::move(n)));
}

inline Connective Formula::op() const { return node_->op; }
inline const std::string& Formula::predicate() const { return node_->predicate; }
inline const std::vector<Term>& Formula::args() const { return node_->args; }
inline const Formula& Formula::lhs() const { return node_->lhs; }
inline const Formula& Formula::rhs() const { return node_->rhs; }
inline const Formula& Formula::body() const { return node_->lhs; }
inline const std::string& Formula::binder_hint() const { return node_->hint; }
inline std::size_t Formula::hash() const { return node_->hash; }
inline std::uint32_t Formula::size() const { return node_->size; }
inline std::uint32_t Formula::loose_bound() const { return node_->loose; }
inline bool Formula::has_free_vars() const { return node_->free_vars; }
inline bool Formula::is_negation() const {
  return op() == Connective::implies && rhs().op() == Connective::bottom;
}

inline Formula Formula::bottom() {
  static const Formula b = make(FormulaNode{});
  return b;
}


inline Formula Formula::atom(std::string predicate, std::vector<Term> args) {
  FormulaNode n;
  n.op = Connective::atom;
  n.predicate = std::move(predicate);
  n.args = std::move(args);
  return make(std::move(n));
}

namespace detail {
inline Formula binary(Connective c, Formula l, Formula r) {
  if (!l.valid() || !r.valid()) throw std::invalid_argument("connective applied to an empty formula");
  FormulaNode n;
  n.op = c;
  n.lhs = std::move(l);
  n.rhs = std::move(r);
  return Formula::make(std::move(n));
}
}  // namespace detail

inline Formula Formula::implies(Formula l, Formula r) { return detail::binary(Connective::implies, std::move(l), std::move(r)); }
inline Formula Formula::conj(Formula l, Formula r) { return detail::binary(Connective::conj, std::move(l), std::move(r)); }
inline Formula Formula::disj(Formula l, Formula r) { return detail::binary(Connective::disj, std::move(l), std::move(r)); }

inline Formula Formula::quantify(Connective q, Formula body, std::string hint) {
  if (!is_quantifier(q)) throw std::invalid_argument("quantify expects forall or exists");
  if (!body.valid()) throw std::invalid_argument("quantifier over an empty formula");
  FormulaNode n;
  n.op = q;
  n.lhs = std::move(body);
  n.hint = std::move(hint);
  return make(std::move(n));
}

inline std::strong_ordering operator<=>(const Formula& a, const Formula& b) {
  if (a.get() == b.get()) return std::strong_ordering::equal;
  if (a.op() != b.op()) return a.op() <=> b.op();
  switch (a.op()) {
    case Connective::bottom: return std::strong_ordering::equal;
    case Connective::atom: {
      if (auto c = a.predicate().compare(b.predicate()) <=> 0; c != 0) return c;
      return std::lexicographical_compare_three_way(a.args().begin(), a.args().end(),
                                                    b.args().begin(), b.args().end());
    }
    case Connective::implies:
    case Connective::conj:
    case Connective::disj:
      if (auto c = a.lhs() <=> b.lhs(); c != 0) return c;
      return a.rhs() <=> b.rhs();
    case Connective::forall:
    case Connective::exists: return a.body() <=> b.body();
  }
  return std::strong_ordering::equal;
}

inline bool operator==(const Formula& a, const Formula& b) {
  if (a.get() == b.get()) return true;
  if (!a.valid() || !b.valid()) return false;
  return a.hash() == b.hash() && (a <=> b) == 0;
}

struct FormulaHash {
  std::size_t operator()(const Formula& f) const { return f.hash(); }
};

// ---------------------------------------------------------------------------
// Structural rewriting.

namespace detail {

// Rewrites every term through `fn(term, depth)`; subtrees for which `skip`
// holds are shared unchanged.
template <typename TermFn, typename Skip>
Formula rewrite_terms(const Formula& f, std::uint32_t depth, TermFn&& fn, Skip&& skip) {
  if (skip(f, depth)) return f;
  switch (f.op()) {
    case Connective::bottom: return f;
    case Connective::atom: {
      std::vector<Term> args;
      args.reserve(f.args().size());
      for (const Term& t : f.args()) args.push_back(fn(t, depth));
      return Formula::atom(f.predicate(), std::move(args));
    }
    case Connective::implies:
    case Connective::conj:
    case Connective::disj:
      return binary(f.op(), rewrite_terms(f.lhs(), depth, fn, skip), rewrite_terms(f.rhs(), depth, fn, skip));
    case Connective::forall:
    case Connective::exists:
      return Formula::quantify(f.op(), rewrite_terms(f.body(), depth + 1, fn, skip), f.binder_hint());
  }
  return f;
}

}  // namespace detail

inline Formula abstract_variable(const Formula& f, const std::string& var, std::uint32_t depth = 0) {
  return detail::rewrite_terms(
      f, depth,
      [&](const Term& t, std::uint32_t d) {
        return t.is_free_var() && t.var_name() == var ? Term::bound(d) : t;
      },
      [](const Formula& g, std::uint32_t) { return !g.has_free_vars(); });
}

inline Formula Formula::forall(const std::string& var, const Formula& body) {
  return quantify(Connective::forall, abstract_variable(body, var), var);
}
inline Formula Formula::exists(const std::string& var, const Formula& body) {
  return quantify(Connective::exists, abstract_variable(body, var), var);
}

// Replaces the loose bound index 0 of a quantifier body by `e`.
inline Formula open_body(const Formula& body, const Element& e) {
  return detail::rewrite_terms(
      body, 0,
      [&](const Term& t, std::uint32_t d) {
        if (!t.is_bound() || t.index() < d) return t;
        if (t.index() == d) return Term::element(e);
        return Term::bound(t.index() - 1);
      },
      [](const Formula& g, std::uint32_t d) { return g.loose_bound() <= d; });
}

// Substitutes every loose index i with env[i]. All loose indices that occur
// must be assigned; the result then has none.
inline Formula substitute_loose(const Formula& f, std::span<const std::optional<Element>> env) {
  return detail::rewrite_terms(
      f, 0,
      [&](const Term& t, std::uint32_t d) {
        if (!t.is_bound() || t.index() < d) return t;
        const std::uint32_t i = t.index() - d;
        if (i >= env.size() || !env[i]) throw std::invalid_argument("unassigned loose variable");
        return Term::element(*env[i]);
      },
      [](const Formula& g, std::uint32_t d) { return g.loose_bound() <= d; });
}

template <typename Fn>
Formula map_elements(const Formula& f, Fn&& fn) {
  return detail::rewrite_terms(
      f, 0, [&](const Term& t, std::uint32_t) { return t.is_element() ? Term::element(fn(t.element())) : t; },
      [](const Formula&, std::uint32_t) { return false; });
}

template <typename Fn>
void for_each_term(const Formula& f, Fn&& fn) {
  switch (f.op()) {
    case Connective::bottom: return;
    case Connective::atom:
      for (const Term& t : f.args()) fn(t);
      return;
    case Connective::implies:
    case Connective::conj:
    case Connective::disj:
      for_each_term(f.lhs(), fn);
      for_each_term(f.rhs(), fn);
      return;
    case Connective::forall:
    case Connective::exists: for_each_term(f.body(), fn); return;
  }
}

// Visits every subformula occurrence with its binder depth.
template <typename Fn>
void for_each_subformula(const Formula& f, Fn&& fn, std::uint32_t depth = 0) {
  fn(f, depth);
  if (is_binary(f.op())) {
    for_each_subformula(f.lhs(), fn, depth);
    for_each_subformula(f.rhs(), fn, depth);
  } else if (is_quantifier(f.op())) {
    for_each_subformula(f.body(), fn, depth + 1);
  }
}

inline std::set<std::string> free_variables(const Formula& f) {
  std::set<std::string> out;
  for_each_term(f, [&](const Term& t) {
    if (t.is_free_var()) out.insert(t.var_name());
  });
  return out;
}

inline std::set<Element> elements_of(const Formula& f) {
  std::set<Element> out;
  for_each_term(f, [&](const Term& t) {
    if (t.is_element()) out.insert(t.element());
  });
  return out;
}

// Loose bound indices that actually occur, relative to the top of `f`.
inline std::vector<std::uint32_t> loose_indices(const Formula& f) {
  std::set<std::uint32_t> seen;
  std::function<void(const Formula&, std::uint32_t)> walk = [&](const Formula& g, std::uint32_t d) {
    if (g.loose_bound() <= d) return;
    if (g.op() == Connective::atom) {
      for (const Term& t : g.args())
        if (t.is_bound() && t.index() >= d) seen.insert(t.index() - d);
    } else if (is_binary(g.op())) {
      walk(g.lhs(), d);
      walk(g.rhs(), d);
    } else if (is_quantifier(g.op())) {
      walk(g.body(), d + 1);
    }
  };
  walk(f, 0);
  return {seen.begin(), seen.end()};
}

inline void collect_predicates(const Formula& f, std::map<std::string, unsigned>& out) {
  for_each_subformula(f, [&](const Formula& g, std::uint32_t) {
    if (g.op() == Connective::atom) out.emplace(g.predicate(), static_cast<unsigned>(g.args().size()));
  });
}

inline bool is_quantifier_free(const Formula& f) {
  bool found = false;
  for_each_subformula(f, [&](const Formula& g, std::uint32_t) { found = found || is_quantifier(g.op()); });
  return !found;
}

// Replaces the free variable `var` by `e`.
inline Formula instantiate(const Formula& f, const std::string& var, const Element& e) {
  if (!free_variables(f).contains(var))
    throw std::invalid_argument("variable '" + var + "' is not free in the formula");
  return detail::rewrite_terms(
      f, 0, [&](const Term& t, std::uint32_t) { return t.is_free_var() && t.var_name() == var ? Term::element(e) : t; },
      [](const Formula& g, std::uint32_t) { return !g.has_free_vars(); });
}

// Ground atom key: predicate plus element arguments.
struct GroundAtom {
  std::string predicate;
  std::vector<Element> args;

  friend auto operator<=>(const GroundAtom&, const GroundAtom&) = default;
  friend bool operator==(const GroundAtom&, const GroundAtom&) = default;
};

inline std::optional<GroundAtom> as_ground_atom(const Formula& f) {
  if (f.op() != Connective::atom) return std::nullopt;
  GroundAtom a{f.predicate(), {}};
  for (const Term& t : f.args()) {
    if (!t.is_element()) return std::nullopt;
    a.args.push_back(t.element());
  }
  return a;
}

inline Formula to_formula(const GroundAtom& a) {
  std::vector<Term> args;
  for (const Element& e : a.args) args.push_back(Term::element(e));
  return Formula::atom(a.predicate, std::move(args));
}

}  // namespace provgame
