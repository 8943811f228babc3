#pragma once

// The instantiated-subformula closure F(Γ, Δ): every subformula of a member
// of Γ, with its loose variables replaced by elements of Δ in all ways.

#include <algorithm>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <vector>

#include "provgame/formula.hpp"
#include "provgame/syntax.hpp"

namespace provgame {

class ClosureSet {
 public:
  ClosureSet() = default;

  ClosureSet(std::span<const Formula> gamma, std::span<const Element> delta) {
    std::set<Formula> g;
    for (const Formula& f : gamma) {
      if (!f.is_closed()) throw std::invalid_argument("open formula in gamma: " + to_string(f));
      g.insert(f);
    }
    gamma_.assign(g.begin(), g.end());
    std::set<Formula> seen;
    for (const Formula& f : gamma_) {
      for_each_subformula(f, [&](const Formula& sub, std::uint32_t) {
        if (seen.insert(sub).second) templates_.push_back({sub, loose_indices(sub)});
      });
    }
    add_elements(delta);
  }

  const std::vector<Formula>& gamma() const { return gamma_; }
  const std::vector<Element>& delta() const { return delta_; }
  const std::set<Formula>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  bool contains(const Formula& f) const { return members_.contains(f); }

  // Same closure over delta ∪ more; only instances mentioning a new element
  // are generated.
  ClosureSet extended(std::span<const Element> more) const {
    ClosureSet out = *this;
    out.add_elements(more);
    return out;
  }

  friend bool operator==(const ClosureSet& a, const ClosureSet& b) {
    return a.gamma_ == b.gamma_ && a.delta_ == b.delta_ && a.members_ == b.members_;
  }

 private:
  struct Template {
    Formula pattern;
    std::vector<std::uint32_t> loose;
  };

  void add_elements(std::span<const Element> more) {
    const std::size_t old_count = delta_.size();
    for (const Element& e : more) {
      if (std::find(delta_.begin(), delta_.end(), e) != delta_.end())
        throw std::invalid_argument("element " + e.str() + " already in delta");
      delta_.push_back(e);
    }
    for (const Template& t : templates_) {
      if (t.loose.empty()) {
        members_.insert(t.pattern);
        continue;
      }
      std::vector<std::optional<Element>> env(t.loose.back() + 1);
      std::vector<std::size_t> choice(t.loose.size(), 0);
      if (delta_.empty()) continue;
      while (true) {
        bool uses_new = false;
        for (std::size_t k = 0; k < t.loose.size(); ++k) {
          env[t.loose[k]] = delta_[choice[k]];
          uses_new = uses_new || choice[k] >= old_count;
        }
        if (uses_new) members_.insert(substitute_loose(t.pattern, env));
        std::size_t k = 0;
        while (k < choice.size() && ++choice[k] == delta_.size()) choice[k++] = 0;
        if (k == choice.size()) break;
      }
    }
  }

  std::vector<Formula> gamma_;
  std::vector<Element> delta_;
  std::vector<Template> templates_;
  std::set<Formula> members_;
};

inline ClosureSet subformula_closure(std::span<const Formula> gamma, std::span<const Element> delta) {
  return ClosureSet(gamma, delta);
}

}  // namespace provgame
