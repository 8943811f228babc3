#pragma once

// Text form of formulas and signatures.
//
//   atoms        P(c,x)   or a bare nullary predicate P
//   connectives  ->  &  |  ~A (sugar for A -> false)  false
//   quantifiers  forall x. A   exists x y. A   (body extends maximally right)
//   elements     α3 or $3 for game-introduced elements
//
// `->` is right-associative; precedence ~ > & > | > ->. The unicode symbols
// → ∧ ∨ ¬ ⊥ ∀ ∃ are accepted as aliases.

#include <cctype>
#include <cstdint>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "provgame/formula.hpp"

namespace provgame {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " at offset " + std::to_string(position)), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class SignatureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Signature {
  std::map<std::string, unsigned> predicates;
  std::set<std::string> constants;

  void declare_predicate(const std::string& name, unsigned arity) {
    if (name.empty()) throw SignatureError("empty predicate name");
    if (constants.contains(name)) throw SignatureError("'" + name + "' is already a constant");
    auto [it, inserted] = predicates.emplace(name, arity);
    if (!inserted && it->second != arity)
      throw SignatureError("predicate '" + name + "' redeclared with arity " + std::to_string(arity));
  }
  void declare_constant(const std::string& name) {
    if (name.empty()) throw SignatureError("empty constant name");
    if (predicates.contains(name)) throw SignatureError("'" + name + "' is already a predicate");
    constants.insert(name);
  }

  friend bool operator==(const Signature&, const Signature&) = default;
};

inline Signature signature_of(std::span<const Formula> formulas) {
  Signature sig;
  for (const Formula& f : formulas) {
    std::map<std::string, unsigned> preds;
    collect_predicates(f, preds);
    for (const auto& [p, n] : preds) sig.declare_predicate(p, n);
    for (const Element& e : elements_of(f))
      if (!e.is_fresh()) sig.declare_constant(e.name());
  }
  return sig;
}

// Signature file: one declaration per line, `pred P/2` or `const c`;
// `#` starts a comment.
inline Signature parse_signature(std::string_view text) {
  Signature sig;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    const std::size_t line_offset = offset;
    offset += line.size() + 1;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string kw, decl, extra;
    if (!(ls >> kw)) continue;
    if (!(ls >> decl) || (ls >> extra)) throw ParseError("malformed declaration '" + line + "'", line_offset);
    if (kw == "const") {
      sig.declare_constant(decl);
    } else if (kw == "pred") {
      auto slash = decl.find('/');
      if (slash == std::string::npos || slash == 0 || slash + 1 == decl.size())
        throw ParseError("expected pred NAME/ARITY", line_offset);
      unsigned arity = 0;
      for (char ch : decl.substr(slash + 1)) {
        if (!std::isdigit(static_cast<unsigned char>(ch))) throw ParseError("bad arity in '" + decl + "'", line_offset);
        arity = arity * 10 + static_cast<unsigned>(ch - '0');
      }
      sig.declare_predicate(decl.substr(0, slash), arity);
    } else {
      throw ParseError("unknown declaration '" + kw + "'", line_offset);
    }
  }
  return sig;
}

inline std::string to_string(const Signature& sig) {
  std::string out;
  for (const auto& [p, n] : sig.predicates) out += "pred " + p + "/" + std::to_string(n) + "\n";
  for (const auto& c : sig.constants) out += "const " + c + "\n";
  return out;
}

namespace detail {

enum class Tok { ident, element, lparen, rparen, comma, dot, arrow, amp, bar, tilde, kw_forall, kw_exists, kw_false, end };

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
  std::uint32_t index = 0;  // game element index
};

inline bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

inline std::vector<Token> tokenize(std::string_view s) {
  static const std::pair<std::string_view, Tok> kUnicode[] = {
      {"\xE2\x86\x92", Tok::arrow}, {"\xE2\x88\xA7", Tok::amp},       {"\xE2\x88\xA8", Tok::bar},
      {"\xC2\xAC", Tok::tilde},     {"\xE2\x8A\xA5", Tok::kw_false}, {"\xE2\x88\x80", Tok::kw_forall},
      {"\xE2\x88\x83", Tok::kw_exists}};
  std::vector<Token> out;
  std::size_t i = 0;
  auto element = [&](std::size_t start, std::size_t digits_at) {
    std::size_t j = digits_at;
    while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
    if (j == digits_at) throw ParseError("expected digits after element marker", start);
    std::uint64_t v = 0;
    for (std::size_t k = digits_at; k < j; ++k) {
      v = v * 10 + static_cast<std::uint64_t>(s[k] - '0');
      if (v > 1000000000u) throw ParseError("element index too large", start);
    }
    if (v == 0) throw ParseError("element indices start at 1", start);
    out.push_back({Tok::element, std::string(s.substr(start, j - start)), start, static_cast<std::uint32_t>(v)});
    i = j;
  };
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    bool matched = false;
    for (const auto& [sym, tok] : kUnicode) {
      if (s.substr(i, sym.size()) == sym) {
        out.push_back({tok, std::string(sym), i});
        i += sym.size();
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (s.substr(i, 2) == "\xCE\xB1") {
      element(i, i + 2);
      continue;
    }
    if (c == '$') {
      element(i, i + 1);
      continue;
    }
    if (s.substr(i, 2) == "->") {
      out.push_back({Tok::arrow, "->", i});
      i += 2;
      continue;
    }
    switch (c) {
      case '(': out.push_back({Tok::lparen, "(", i}); ++i; continue;
      case ')': out.push_back({Tok::rparen, ")", i}); ++i; continue;
      case ',': out.push_back({Tok::comma, ",", i}); ++i; continue;
      case '.': out.push_back({Tok::dot, ".", i}); ++i; continue;
      case '&': out.push_back({Tok::amp, "&", i}); ++i; continue;
      case '|': out.push_back({Tok::bar, "|", i}); ++i; continue;
      case '~': out.push_back({Tok::tilde, "~", i}); ++i; continue;
      default: break;
    }
    if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < s.size() && is_ident_char(s[j])) ++j;
      std::string word(s.substr(i, j - i));
      Tok kind = Tok::ident;
      if (word == "forall") kind = Tok::kw_forall;
      else if (word == "exists") kind = Tok::kw_exists;
      else if (word == "false") kind = Tok::kw_false;
      out.push_back({kind, std::move(word), i});
      i = j;
      continue;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", i);
  }
  out.push_back({Tok::end, "", s.size()});
  return out;
}

class Parser {
 public:
  enum class Mode { closed, open, infer };

  Parser(std::string_view text, Signature& sig, Mode mode) : toks_(tokenize(text)), sig_(sig), mode_(mode) {}

  Formula parse() {
    Formula f = formula();
    if (peek().kind != Tok::end) fail("unexpected '" + peek().text + "'");
    return f;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    ++pos_;
    return true;
  }
  void expect(Tok k, const char* what) {
    if (!accept(k)) fail(std::string("expected ") + what);
  }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, peek().pos); }

  Formula formula() {
    if (peek().kind == Tok::kw_forall || peek().kind == Tok::kw_exists) return quantified();
    Formula lhs = disjunction();
    if (accept(Tok::arrow)) return Formula::implies(lhs, formula());
    return lhs;
  }

  Formula quantified() {
    const Connective q = next().kind == Tok::kw_forall ? Connective::forall : Connective::exists;
    std::vector<std::string> vars;
    while (peek().kind == Tok::ident) vars.push_back(next().text);
    if (vars.empty()) fail("expected a bound variable");
    expect(Tok::dot, "'.' after quantified variables");
    for (const auto& v : vars) scope_.push_back(v);
    Formula body = formula();
    for (std::size_t k = vars.size(); k-- > 0;) {
      scope_.pop_back();
      body = Formula::quantify(q, body, vars[k]);
    }
    return body;
  }

  Formula disjunction() {
    Formula f = conjunction();
    while (accept(Tok::bar)) f = Formula::disj(f, conjunction());
    return f;
  }

  Formula conjunction() {
    Formula f = unary();
    while (accept(Tok::amp)) f = Formula::conj(f, unary());
    return f;
  }

  Formula unary() {
    if (accept(Tok::tilde)) return Formula::negation(unary());
    if (peek().kind == Tok::kw_forall || peek().kind == Tok::kw_exists) return quantified();
    return primary();
  }

  Formula primary() {
    if (accept(Tok::kw_false)) return Formula::bottom();
    if (accept(Tok::lparen)) {
      Formula f = formula();
      expect(Tok::rparen, "')'");
      return f;
    }
    if (peek().kind != Tok::ident) fail(peek().kind == Tok::end ? "unexpected end of formula" : "unexpected '" + peek().text + "'");
    const Token& name = next();
    std::vector<Term> args;
    if (accept(Tok::lparen)) {
      do {
        args.push_back(term());
      } while (accept(Tok::comma));
      expect(Tok::rparen, "')' after arguments");
    }
    auto it = sig_.predicates.find(name.text);
    if (it == sig_.predicates.end()) {
      if (mode_ != Mode::infer) throw ParseError("unknown predicate '" + name.text + "'", name.pos);
      try {
        sig_.declare_predicate(name.text, static_cast<unsigned>(args.size()));
      } catch (const SignatureError& e) {
        throw ParseError(e.what(), name.pos);
      }
    } else if (it->second != args.size()) {
      throw ParseError("arity mismatch: '" + name.text + "' expects " + std::to_string(it->second) +
                           " argument(s), got " + std::to_string(args.size()),
                       name.pos);
    }
    return Formula::atom(name.text, std::move(args));
  }

  Term term() {
    const Token& t = next();
    if (t.kind == Tok::element) return Term::element(Element::fresh(t.index));
    if (t.kind != Tok::ident) throw ParseError("expected a term", t.pos);
    for (std::size_t k = scope_.size(); k-- > 0;)
      if (scope_[k] == t.text) return Term::bound(static_cast<std::uint32_t>(scope_.size() - 1 - k));
    if (sig_.constants.contains(t.text)) return Term::element(Element::constant(t.text));
    switch (mode_) {
      case Mode::open: return Term::free_var(t.text);
      case Mode::infer:
        try {
          sig_.declare_constant(t.text);
        } catch (const SignatureError& e) {
          throw ParseError(e.what(), t.pos);
        }
        return Term::element(Element::constant(t.text));
      case Mode::closed: break;
    }
    throw ParseError("unbound variable '" + t.text + "'", t.pos);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  Signature& sig_;
  Mode mode_;
  std::vector<std::string> scope_;
};

}  // namespace detail

// Parses a closed formula; every identifier in term position must be bound
// or a declared constant.
// A single element name: a constant identifier, or α<k> / $<k>.
inline Element parse_element(std::string_view text) {
  const auto toks = detail::tokenize(text);
  if (toks.size() != 2) throw ParseError("expected a single element name", 0);
  if (toks[0].kind == detail::Tok::element) return Element::fresh(toks[0].index);
  if (toks[0].kind == detail::Tok::ident) return Element::constant(toks[0].text);
  throw ParseError("'" + std::string(text) + "' is not an element name", toks[0].pos);
}

inline Formula parse_formula(std::string_view text, const Signature& sig) {
  Signature copy = sig;
  return detail::Parser(text, copy, detail::Parser::Mode::closed).parse();
}

// Undeclared identifiers in term position become free variables.
inline Formula parse_open_formula(std::string_view text, const Signature& sig) {
  Signature copy = sig;
  return detail::Parser(text, copy, detail::Parser::Mode::open).parse();
}

// Extends `sig` with predicates (arity from first occurrence) and constants
// for every unbound identifier.
inline Formula parse_formula_inferring(std::string_view text, Signature& sig) {
  return detail::Parser(text, sig, detail::Parser::Mode::infer).parse();
}

// ---------------------------------------------------------------------------
// Printing

namespace detail {

class Printer {
 public:
  std::string print(const Formula& f) {
    out_.clear();
    emit(f, 0);
    return out_;
  }

 private:
  // Precedence levels: 0 top / quantifier body, 1 ->, 2 |, 3 &, 4 unary.
  // `tail` is set when nothing follows in the output, so a quantifier there
  // can extend right without parentheses.
  void emit(const Formula& f, int ctx, bool tail = true) {
    switch (f.op()) {
      case Connective::bottom: out_ += "false"; return;
      case Connective::atom: atom(f); return;
      case Connective::forall:
      case Connective::exists: {
        const bool paren = ctx > 0 && !tail;
        if (paren) out_ += '(';
        std::string name = pick_name(f);
        out_ += f.op() == Connective::forall ? "forall " : "exists ";
        out_ += name;
        out_ += ". ";
        scope_.push_back(name);
        emit(f.body(), 0);
        scope_.pop_back();
        if (paren) out_ += ')';
        return;
      }
      case Connective::implies:
        if (f.is_negation()) {
          out_ += '~';
          emit(f.lhs(), 4, tail);
          return;
        }
        binary(f, " -> ", 1, ctx, 2, 1, tail);
        return;
      case Connective::disj: binary(f, " | ", 2, ctx, 2, 3, tail); return;
      case Connective::conj: binary(f, " & ", 3, ctx, 3, 4, tail); return;
    }
  }

  void binary(const Formula& f, const char* sym, int level, int ctx, int lctx, int rctx, bool tail) {
    const bool paren = ctx > level;
    if (paren) out_ += '(';
    emit(f.lhs(), lctx, false);
    out_ += sym;
    emit(f.rhs(), rctx, paren || tail);
    if (paren) out_ += ')';
  }

  void atom(const Formula& f) {
    out_ += f.predicate();
    if (f.args().empty()) return;
    out_ += '(';
    for (std::size_t i = 0; i < f.args().size(); ++i) {
      if (i) out_ += ',';
      const Term& t = f.args()[i];
      switch (t.kind()) {
        case Term::Kind::element: out_ += t.element().str(); break;
        case Term::Kind::free_var: out_ += t.var_name(); break;
        case Term::Kind::bound:
          if (t.index() >= scope_.size()) out_ += "#" + std::to_string(t.index());
          else out_ += scope_[scope_.size() - 1 - t.index()];
          break;
      }
    }
    out_ += ')';
  }

  // A binder name must not capture constants or free variables of the body,
  // nor shadow an outer binder the body still refers to.
  std::string pick_name(const Formula& q) {
    std::set<std::string> taken;
    for_each_term(q.body(), [&](const Term& t) {
      if (t.is_element() && !t.element().is_fresh()) taken.insert(t.element().name());
      if (t.is_free_var()) taken.insert(t.var_name());
    });
    for (std::uint32_t i : loose_indices(q.body()))
      if (i >= 1 && i - 1 < scope_.size()) taken.insert(scope_[scope_.size() - i]);
    std::string base = q.binder_hint().empty() ? "x" : q.binder_hint();
    if (!taken.contains(base) && base != "forall" && base != "exists" && base != "false") return base;
    for (const char* c : {"x", "y", "z", "u", "v", "w"})
      if (!taken.contains(c)) return c;
    for (int k = 1;; ++k) {
      std::string cand = base + std::to_string(k);
      if (!taken.contains(cand)) return cand;
    }
  }

  std::string out_;
  std::vector<std::string> scope_;
};

}  // namespace detail

inline std::string to_string(const Formula& f) { return detail::Printer{}.print(f); }

inline std::ostream& operator<<(std::ostream& os, const Formula& f) { return os << to_string(f); }
inline std::ostream& operator<<(std::ostream& os, const Element& e) { return os << e.str(); }

}  // namespace provgame
