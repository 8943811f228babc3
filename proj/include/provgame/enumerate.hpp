#pragma once

// Bounded enumeration of finite Kripke models and countermodel search.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "provgame/formula.hpp"
#include "provgame/kripke.hpp"
#include "provgame/syntax.hpp"

namespace provgame {

class EnumerationTooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// `worlds` caps the number of worlds. `domain` caps how many elements a model
// may use beyond the constants it must interpret.
struct ModelBounds {
  std::size_t worlds = 2;
  std::size_t domain = 2;
};

struct EnumerationOptions {
  bool empty_domain_tolerant = false;
  bool rooted_only = false;
  double ceiling = 5e7;
};

// A finite poset on 0..n-1 labeled so that i <= j implies i <= j numerically.
struct Poset {
  std::size_t n = 0;
  std::vector<std::vector<char>> le;

  bool rooted() const {
    for (std::size_t j = 0; j < n; ++j)
      if (!le[0][j]) return false;
    return true;
  }
};

namespace detail {

inline constexpr std::size_t max_poset_size = 9;
inline constexpr std::array<double, 10> unlabeled_poset_counts = {1, 1, 2, 5, 16, 63, 318, 2045, 16999, 183231};

inline std::uint64_t encode_relabeled(const Poset& p, const std::vector<std::size_t>& label) {
  std::uint64_t code = 0;
  std::size_t bit = 0;
  // label[new] = old
  for (std::size_t i = 0; i < p.n; ++i)
    for (std::size_t j = i + 1; j < p.n; ++j, ++bit)
      if (p.le[label[i]][label[j]]) code |= std::uint64_t{1} << bit;
  return code;
}

// Minimum encoding over all linear extensions, i.e. over every natural relabeling.
inline std::uint64_t canonical_code(const Poset& p) {
  std::uint64_t best = ~std::uint64_t{0};
  std::vector<std::size_t> label;
  std::vector<char> used(p.n, 0);
  std::function<void()> rec = [&] {
    if (label.size() == p.n) {
      best = std::min(best, encode_relabeled(p, label));
      return;
    }
    for (std::size_t v = 0; v < p.n; ++v) {
      if (used[v]) continue;
      bool minimal = true;
      for (std::size_t u = 0; u < p.n && minimal; ++u)
        if (u != v && !used[u] && p.le[u][v]) minimal = false;
      if (!minimal) continue;
      used[v] = 1;
      label.push_back(v);
      rec();
      label.pop_back();
      used[v] = 0;
    }
  };
  rec();
  return best;
}

inline Poset decode_poset(std::size_t n, std::uint64_t code) {
  Poset p{n, std::vector<std::vector<char>>(n, std::vector<char>(n, 0))};
  std::size_t bit = 0;
  for (std::size_t i = 0; i < n; ++i) {
    p.le[i][i] = 1;
    for (std::size_t j = i + 1; j < n; ++j, ++bit)
      if (code >> bit & 1) p.le[i][j] = 1;
  }
  return p;
}

}  // namespace detail

// One representative per isomorphism class, in increasing canonical code.
inline const std::vector<Poset>& posets(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, std::vector<Poset>> cache;
  if (n == 0 || n > detail::max_poset_size)
    throw EnumerationTooLarge("poset size " + std::to_string(n) + " is outside 1.." +
                              std::to_string(detail::max_poset_size));
  {
    std::lock_guard lock(mu);
    if (auto it = cache.find(n); it != cache.end()) return it->second;
  }
  std::vector<Poset> out;
  if (n == 1) {
    out.push_back(detail::decode_poset(1, 0));
  } else {
    std::set<std::uint64_t> codes;
    for (const Poset& base : posets(n - 1)) {
      const std::size_t m = n - 1;
      // The new element goes on top of a down-closed subset of `base`.
      for (std::uint64_t sub = 0; sub < (std::uint64_t{1} << m); ++sub) {
        bool ideal = true;
        for (std::size_t j = 0; j < m && ideal; ++j)
          if (sub >> j & 1)
            for (std::size_t i = 0; i < m && ideal; ++i)
              if (base.le[i][j] && !(sub >> i & 1)) ideal = false;
        if (!ideal) continue;
        Poset p{n, base.le};
        for (auto& row : p.le) row.push_back(0);
        p.le.emplace_back(n, 0);
        p.le[m][m] = 1;
        for (std::size_t i = 0; i < m; ++i)
          if (sub >> i & 1) p.le[i][m] = 1;
        codes.insert(detail::canonical_code(p));
      }
    }
    for (std::uint64_t c : codes) out.push_back(detail::decode_poset(n, c));
  }
  std::lock_guard lock(mu);
  return cache.emplace(n, std::move(out)).first->second;
}

namespace detail {

struct AtomSlot {
  GroundAtom atom;
  std::uint64_t elements = 0;  // bitmask over universe positions
};

inline std::vector<AtomSlot> atom_slots(const std::map<std::string, unsigned>& predicates,
                                        const std::vector<Element>& universe) {
  std::vector<AtomSlot> out;
  for (const auto& [name, arity] : predicates) {
    if (universe.empty() && arity > 0) continue;
    std::vector<std::size_t> idx(arity, 0);
    while (true) {
      AtomSlot s{{name, {}}, 0};
      for (std::size_t i : idx) {
        s.atom.args.push_back(universe[i]);
        s.elements |= std::uint64_t{1} << i;
      }
      out.push_back(std::move(s));
      std::size_t pos = arity;
      while (pos > 0 && ++idx[pos - 1] == universe.size()) idx[--pos] = 0;
      if (pos == 0) break;
    }
  }
  return out;
}

inline std::size_t atom_count(const std::map<std::string, unsigned>& predicates, std::size_t universe) {
  std::size_t total = 0;
  for (const auto& [name, arity] : predicates) {
    std::size_t c = 1;
    for (std::size_t i = 0; i < arity; ++i) c *= universe;
    total += c;
  }
  return total;
}

inline std::vector<Element> extra_elements(std::size_t k, const std::vector<Element>& constants) {
  std::set<Element> taken(constants.begin(), constants.end());
  std::vector<Element> out;
  for (std::size_t i = 1; out.size() < k; ++i) {
    Element e = Element::constant("d" + std::to_string(i));
    if (!taken.contains(e)) out.push_back(e);
  }
  return out;
}

}  // namespace detail

// Upper bound on the number of models for_each_model would visit.
inline double estimate_model_count(const std::map<std::string, unsigned>& predicates, std::size_t constants,
                                   ModelBounds b) {
  double total = 0;
  for (std::size_t n = 1; n <= b.worlds; ++n) {
    const double shapes = n < detail::unlabeled_poset_counts.size() ? detail::unlabeled_poset_counts[n] : INFINITY;
    for (std::size_t k = 0; k <= b.domain; ++k) {
      const double atoms = static_cast<double>(detail::atom_count(predicates, constants + k));
      total += shapes * std::pow(2.0, static_cast<double>(k * n) + atoms * static_cast<double>(n));
    }
  }
  return total;
}

// Visits models in canonical order: fewer worlds first, then fewer extra
// elements, then poset shape, then domain and valuation choices. Every world
// contains all `constants`; extras are named d1, d2, ... avoiding clashes.
// `fn` returns false to stop; the result is false iff it stopped early.
template <class Fn>
bool for_each_model(const std::map<std::string, unsigned>& predicates, std::vector<Element> constants,
                    ModelBounds b, const EnumerationOptions& opts, Fn&& fn) {
  if (b.worlds == 0) throw std::invalid_argument("model bounds need at least one world");
  std::sort(constants.begin(), constants.end());
  constants.erase(std::unique(constants.begin(), constants.end()), constants.end());
  const double estimate = estimate_model_count(predicates, constants.size(), b);
  if (!(estimate <= opts.ceiling)) {
    std::ostringstream os;
    os << "enumeration at bounds (" << b.worlds << "," << b.domain << ") over " << constants.size()
       << " constants and " << predicates.size() << " predicates may visit about " << estimate
       << " models, above the ceiling of " << opts.ceiling << "; lower the bounds";
    throw EnumerationTooLarge(os.str());
  }
  const std::size_t c = constants.size();
  for (std::size_t n = 1; n <= b.worlds; ++n) {
    for (std::size_t k = 0; k <= b.domain; ++k) {
      if (c + k > 64) throw EnumerationTooLarge("more than 64 domain elements");
      std::vector<Element> universe = constants;
      for (const Element& e : detail::extra_elements(k, constants)) universe.push_back(e);
      const auto slots = detail::atom_slots(predicates, universe);
      if (slots.size() > 64) throw EnumerationTooLarge("more than 64 ground atoms per world");
      const std::uint64_t const_mask = c == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << c) - 1;
      const std::uint64_t full_extra = ((std::uint64_t{1} << k) - 1) << c;

      for (const Poset& p : posets(n)) {
        if (opts.rooted_only && !p.rooted()) continue;
        std::vector<std::vector<std::size_t>> below(n);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < i; ++j)
            if (p.le[j][i]) below[i].push_back(j);

        KripkeModel m;
        m.empty_domain_tolerant = opts.empty_domain_tolerant;
        m.order = p.le;
        m.domain.resize(n);
        m.atoms.resize(n);
        for (std::size_t i = 0; i < n; ++i) m.worlds.push_back("w" + std::to_string(i));

        std::vector<std::uint64_t> dom(n, 0), val(n, 0);
        bool keep_going = true;

        std::function<void(std::size_t)> valuation = [&](std::size_t i) {
          if (!keep_going) return;
          if (i == n) {
            for (std::size_t w = 0; w < n; ++w) {
              m.atoms[w].clear();
              for (std::size_t s = 0; s < slots.size(); ++s)
                if (val[w] >> s & 1) m.atoms[w].insert(slots[s].atom);
            }
            if (!fn(static_cast<const KripkeModel&>(m))) keep_going = false;
            return;
          }
          std::uint64_t lower = 0, avail = 0;
          for (std::size_t j : below[i]) lower |= val[j];
          for (std::size_t s = 0; s < slots.size(); ++s)
            if ((slots[s].elements & ~dom[i]) == 0) avail |= std::uint64_t{1} << s;
          const std::uint64_t free = avail & ~lower;
          // Subsets of `free` in increasing order.
          std::uint64_t sub = 0;
          while (true) {
            val[i] = lower | sub;
            valuation(i + 1);
            if (!keep_going || sub == free) break;
            sub = (sub - free) & free;
          }
        };

        std::function<void(std::size_t)> domains = [&](std::size_t i) {
          if (!keep_going) return;
          if (i == n) {
            std::uint64_t all = 0;
            for (std::uint64_t d : dom) all |= d;
            if ((all & full_extra) != full_extra) return;
            for (std::size_t w = 0; w < n; ++w) {
              m.domain[w].clear();
              for (std::size_t e = 0; e < universe.size(); ++e)
                if (dom[w] >> e & 1) m.domain[w].push_back(universe[e]);
              std::sort(m.domain[w].begin(), m.domain[w].end());
            }
            valuation(0);
            return;
          }
          std::uint64_t lower = const_mask;
          for (std::size_t j : below[i]) lower |= dom[j];
          const std::uint64_t free = full_extra & ~lower;
          std::uint64_t sub = 0;
          while (true) {
            dom[i] = lower | sub;
            if (dom[i] != 0 || opts.empty_domain_tolerant) domains(i + 1);
            if (!keep_going || sub == free) break;
            sub = (sub - free) & free;
          }
        };

        domains(0);
        if (!keep_going) return false;
      }
    }
  }
  return true;
}

template <class Fn>
bool for_each_model(const Signature& sig, ModelBounds b, const EnumerationOptions& opts, Fn&& fn) {
  std::vector<Element> constants;
  for (const std::string& s : sig.constants) constants.push_back(Element::constant(s));
  return for_each_model(sig.predicates, std::move(constants), b, opts, std::forward<Fn>(fn));
}

inline std::vector<KripkeModel> enumerate_models(const Signature& sig, ModelBounds b,
                                                 const EnumerationOptions& opts = {}) {
  std::vector<KripkeModel> out;
  for_each_model(sig, b, opts, [&](const KripkeModel& m) {
    out.push_back(m);
    return true;
  });
  return out;
}

struct Countermodel {
  KripkeModel model;
  WorldId root = 0;
};

// A rooted model whose every world forces all of `o` and whose root does not
// force `phi`. Only the predicates and elements occurring in o and phi are
// interpreted; elements of the model are the formulas' own elements.
inline std::optional<Countermodel> find_countermodel(std::span<const Formula> o, const Formula& phi, ModelBounds b,
                                                     const EnumerationOptions& opts = {}) {
  std::map<std::string, unsigned> predicates;
  std::set<Element> elements;
  auto scan = [&](const Formula& f) {
    if (!f.is_closed()) throw std::invalid_argument("countermodel search needs closed formulas: " + to_string(f));
    collect_predicates(f, predicates);
    for (const Element& e : elements_of(f)) elements.insert(e);
  };
  for (const Formula& f : o) scan(f);
  scan(phi);
  EnumerationOptions rooted = opts;
  rooted.rooted_only = true;
  std::optional<Countermodel> found;
  for_each_model(predicates, std::vector<Element>(elements.begin(), elements.end()), b, rooted,
                 [&](const KripkeModel& m) {
                   Forcing f(m);
                   if (f.eval(0, phi)) return true;
                   for (const Formula& g : o)
                     if (!f.eval(0, g)) return true;
                   found = Countermodel{m, 0};
                   return false;
                 });
  if (!found) return std::nullopt;

  const KripkeModel& m = found->model;
  auto report = validate_model(m);
  if (!report.ok()) throw std::logic_error("countermodel search produced an invalid model: " + report.violations[0]);
  Forcing check(m);
  if (check(found->root, phi)) throw std::logic_error("countermodel search result forces the goal");
  for (WorldId w = 0; w < m.size(); ++w)
    for (const Formula& g : o)
      if (!check(w, g)) throw std::logic_error("countermodel search result misses a premise at " + m.worlds[w]);
  return found;
}

inline std::optional<Countermodel> find_countermodel(std::initializer_list<Formula> o, const Formula& phi,
                                                     ModelBounds b, const EnumerationOptions& opts = {}) {
  return find_countermodel(std::span<const Formula>(o.begin(), o.size()), phi, b, opts);
}

}  // namespace provgame
