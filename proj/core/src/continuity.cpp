#include "inflogic/continuity.hpp"

#include <algorithm>
#include <optional>
#include <unordered_map>
#include <unordered_set>

namespace inflogic {

LipschitzBound operator+(const LipschitzBound& a, const LipschitzBound& b) {
  if (a.infinite || b.infinite) return LipschitzBound::unbounded();
  return LipschitzBound::finite(a.value + b.value);
}

LipschitzBound max(const LipschitzBound& a, const LipschitzBound& b) {
  if (a.infinite || b.infinite) return LipschitzBound::unbounded();
  return LipschitzBound::finite(std::max(a.value, b.value));
}

LipschitzBound operator*(const Rational& c, const LipschitzBound& b) {
  if (c.is_zero()) return LipschitzBound::finite(Rational(0));
  if (b.infinite) return b;
  return LipschitzBound::finite(c * b.value);
}

std::string to_string(const LipschitzBound& b) { return b.infinite ? "inf" : b.value.to_string(); }

LipschitzBound LipschitzReport::at(const std::string& var) const {
  auto it = bounds.find(var);
  return it == bounds.end() ? LipschitzBound::finite(Rational(0)) : it->second;
}

bool LipschitzReport::all_finite() const {
  return std::all_of(bounds.begin(), bounds.end(), [](const auto& kv) { return !kv.second.infinite; });
}

std::string_view to_string(FragmentClass c) {
  switch (c) {
    case FragmentClass::kFO: return "FO";
    case FragmentClass::kLC: return "LC";
    case FragmentClass::kLCRho: return "LCRho";
    case FragmentClass::kLFull: return "LFull";
  }
  return "?";
}

namespace {

using BoundMap = std::map<std::string, LipschitzBound>;

void add_into(BoundMap& acc, const BoundMap& b) {
  for (const auto& [v, x] : b) {
    auto it = acc.find(v);
    if (it == acc.end()) {
      acc.emplace(v, x);
    } else {
      it->second = it->second + x;
    }
  }
}

void max_into(BoundMap& acc, const BoundMap& b) {
  for (const auto& [v, x] : b) {
    auto it = acc.find(v);
    if (it == acc.end()) {
      acc.emplace(v, x);
    } else {
      it->second = max(it->second, x);
    }
  }
}

BoundMap scaled(const LipschitzBound& c, const BoundMap& b) {
  BoundMap out;
  for (const auto& [v, x] : b) {
    if (!x.infinite && x.value.is_zero()) {
      out.emplace(v, x);
    } else if (c.infinite) {
      out.emplace(v, LipschitzBound::unbounded());
    } else {
      out.emplace(v, c.value * x);
    }
  }
  return out;
}

struct Scope {
  std::string name;
  std::optional<std::int64_t> max;  // nullopt: unbounded
};

class Analyzer {
 public:
  explicit Analyzer(const Signature& sig) : sig_(sig) {}

  BoundMap term(const Term& t) {
    switch (t.kind) {
      case Term::Kind::kVariable:
        return {{t.name, LipschitzBound::finite(Rational(1))}};
      case Term::Kind::kConstant:
      case Term::Kind::kIndexedConstant:
        return {};
      case Term::Kind::kApply: {
        BoundMap args;
        for (const auto& a : t.args) max_into(args, term(a));
        const SymbolDecl* f = sig_.find_function(t.name);
        if (f == nullptr) return scaled(LipschitzBound::unbounded(), args);
        return scaled(LipschitzBound::finite(f->lipschitz), args);
      }
    }
    return {};
  }

  // Largest value the affine factor takes over the current scopes.
  LipschitzBound factor(const Affine& a) const {
    if (a.is_constant()) return LipschitzBound::finite(a.offset);
    if (a.coeff < Rational(0)) return LipschitzBound::finite(a.offset);
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      if (it->name != a.index) continue;
      if (!it->max) return LipschitzBound::unbounded();
      return LipschitzBound::finite(a.at(*it->max));
    }
    return LipschitzBound::unbounded();  // free index: ranges over all naturals
  }

  BoundMap bounds(const Formula& f) {
    const bool memoizable = f.free_indices().empty();
    if (memoizable) {
      if (auto it = memo_.find(f.id()); it != memo_.end()) return it->second;
    }
    BoundMap out = compute(f);
    if (memoizable) memo_.emplace(f.id(), out);
    return out;
  }

  // Records every infinite family, rho node and its bounds.
  void survey(const Formula& f) {
    if (f.free_indices().empty() && !surveyed_.insert(f.id()).second) return;
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, BinaryNode>) {
            survey(n.lhs);
            survey(n.rhs);
          } else if constexpr (std::is_same_v<T, ScaleNode> || std::is_same_v<T, VarQuantNode>) {
            survey(n.body);
          } else if constexpr (std::is_same_v<T, RhoNode>) {
            has_rho = true;
            survey(n.body);
          } else if constexpr (std::is_same_v<T, IdxQuantNode>) {
            if (n.range.infinite()) {
              has_infinite = true;
              BoundMap b = bounds(f);
              if (std::any_of(b.begin(), b.end(), [](const auto& kv) { return kv.second.infinite; })) {
                unbounded_family = true;
              }
            }
            push(n);
            survey(n.body);
            scopes_.pop_back();
          }
        },
        f.node().data);
  }

  bool has_infinite = false;
  bool has_rho = false;
  bool unbounded_family = false;

 private:
  void push(const IdxQuantNode& n) {
    scopes_.push_back({n.index, n.range.infinite() ? std::nullopt : std::optional<std::int64_t>(n.range.bound)});
  }

  BoundMap compute(const Formula& f) {
    return std::visit(
        [&](const auto& n) -> BoundMap {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, DistNode>) {
            BoundMap out = term(n.lhs);
            add_into(out, term(n.rhs));
            return out;
          } else if constexpr (std::is_same_v<T, PredNode>) {
            BoundMap args;
            for (const auto& a : n.args) max_into(args, term(a));
            const SymbolDecl* p = sig_.find_predicate(n.symbol);
            return scaled(p ? LipschitzBound::finite(p->lipschitz) : LipschitzBound::unbounded(), args);
          } else if constexpr (std::is_same_v<T, ConstNode>) {
            return {};
          } else if constexpr (std::is_same_v<T, BinaryNode>) {
            BoundMap out = bounds(n.lhs);
            if (n.op == Connective::kSub || n.op == Connective::kAdd) {
              add_into(out, bounds(n.rhs));
            } else {
              max_into(out, bounds(n.rhs));
            }
            return out;
          } else if constexpr (std::is_same_v<T, ScaleNode>) {
            return scaled(factor(n.factor), bounds(n.body));
          } else if constexpr (std::is_same_v<T, VarQuantNode>) {
            BoundMap out = bounds(n.body);
            out.erase(n.var);
            return out;
          } else if constexpr (std::is_same_v<T, IdxQuantNode>) {
            push(n);
            BoundMap out = bounds(n.body);
            scopes_.pop_back();
            return out;
          } else {
            BoundMap out = bounds(n.body);
            for (const auto& y : n.bound) out.erase(y);
            for (auto& [v, x] : out) x = LipschitzBound::unbounded();
            for (const auto& s : n.slots) max_into(out, term(s));
            return out;
          }
        },
        f.node().data);
  }

  const Signature& sig_;
  std::vector<Scope> scopes_;
  std::unordered_map<const FormulaNode*, BoundMap> memo_;
  std::unordered_set<const FormulaNode*> surveyed_;
};

}  // namespace

LipschitzReport lipschitz_bounds(const Signature& sig, const Formula& f) {
  Analyzer a(sig);
  LipschitzReport report;
  report.bounds = a.bounds(f);
  for (const auto& v : f.free_variables()) report.bounds.try_emplace(v, LipschitzBound::finite(Rational(0)));
  return report;
}

FragmentClass classify_fragment(const Signature& sig, const Formula& f) {
  Analyzer a(sig);
  a.survey(f);
  bool free_index = !f.free_indices().empty();
  if (free_index) {
    a.has_infinite = true;
    if (!lipschitz_bounds(sig, f).all_finite()) a.unbounded_family = true;
  }
  if (!a.has_infinite && !a.has_rho) return FragmentClass::kFO;
  if (a.unbounded_family) return FragmentClass::kLFull;
  return a.has_rho ? FragmentClass::kLCRho : FragmentClass::kLC;
}

}  // namespace inflogic
