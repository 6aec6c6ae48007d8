#include "inflogic/evaluator.hpp"

#include <algorithm>
#include <unordered_map>

namespace inflogic {

const Rational& EvalResult::value() const {
  if (!is_exact()) throw EvalError("no exact value: " + to_string(*this));
  return lo;
}

std::string to_string(const EvalResult& r) {
  if (r.is_exact()) return r.lo.to_string();
  return "[" + r.lo.to_string() + ", " + r.hi.to_string() + "] (budget " + std::to_string(r.budget) + ")";
}

namespace {

struct Interval {
  Rational lo;
  Rational hi;

  static Interval point(Rational v) { return {v, v}; }
  bool exact() const { return lo == hi; }
};

const Rational kZero(0);
const Rational kOne(1);

Rational min_one(const Rational& r) { return r > kOne ? kOne : r; }

struct MemoKey {
  const FormulaNode* node;
  std::vector<std::int64_t> values;

  bool operator==(const MemoKey&) const = default;
};

struct MemoKeyHash {
  std::size_t operator()(const MemoKey& k) const noexcept {
    std::size_t h = std::hash<const void*>{}(k.node);
    for (auto v : k.values) h = h * 1000003u ^ std::hash<std::int64_t>{}(v);
    return h;
  }
};

struct DependKey {
  const FormulaNode* node;
  std::string index;
  bool operator==(const DependKey&) const = default;
};

struct DependKeyHash {
  std::size_t operator()(const DependKey& k) const noexcept {
    return std::hash<const void*>{}(k.node) ^ (std::hash<std::string>{}(k.index) << 1);
  }
};

bool mentions(const std::vector<std::string>& sorted, const std::string& name) {
  return std::binary_search(sorted.begin(), sorted.end(), name);
}

bool is_one_or_more(const Formula& f) {
  const auto* c = as<ConstNode>(f);
  return c != nullptr && !c->reciprocal && c->value.is_constant() && c->value.offset >= Rational(1);
}

// min(g, c) with c >= 1 is g, since every value lies in [0,1].
const Formula& strip_cap(const Formula& f) {
  const auto* b = as<BinaryNode>(f);
  if (b == nullptr || b->op != Connective::kMin) return f;
  if (is_one_or_more(b->rhs)) return strip_cap(b->lhs);
  if (is_one_or_more(b->lhs)) return strip_cap(b->rhs);
  return f;
}

// Zero-test family: sup over an infinite range of min((r i + s) F, 1), r > 0.
const Formula* zero_test_body(const IdxQuantNode& q) {
  if (q.quantifier != Quantifier::kSup || !q.range.infinite()) return nullptr;
  const auto* scale = as<ScaleNode>(strip_cap(q.body));
  if (scale == nullptr || scale->factor.index != q.index || scale->factor.coeff <= kZero) return nullptr;
  return &scale->body;
}

// Negation family: inf over an infinite range of ind(1/(r i + s) -. G), r > 0.
const Formula* negation_operand(const IdxQuantNode& q) {
  if (q.quantifier != Quantifier::kInf || !q.range.infinite()) return nullptr;
  const auto* inner = as<IdxQuantNode>(q.body);
  if (inner == nullptr) return nullptr;
  const Formula* f = zero_test_body(*inner);
  if (f == nullptr) return nullptr;
  const auto* sub = as<BinaryNode>(*f);
  if (sub == nullptr || sub->op != Connective::kSub) return nullptr;
  const auto* c = as<ConstNode>(sub->lhs);
  if (c == nullptr || !c->reciprocal || c->value.index != q.index || c->value.coeff <= kZero) return nullptr;
  return &sub->rhs;
}

}  // namespace

struct Evaluator::Impl {
  struct VarBinding {
    const std::string* name;
    PointId value;
  };
  struct IndexBinding {
    const std::string* name;
    std::int64_t value;
  };

  const FiniteStructure& m;
  std::int64_t budget;
  std::vector<Formula> roots;  // keeps cached node addresses alive
  std::vector<VarBinding> vars;
  std::vector<IndexBinding> indices;
  std::unordered_map<MemoKey, Interval, MemoKeyHash> memo;
  std::unordered_map<DependKey, bool, DependKeyHash> depend_memo;

  Impl(const FiniteStructure& structure, std::int64_t b) : m(structure), budget(b) {}

  PointId lookup_var(const std::string& name) const {
    for (auto it = vars.rbegin(); it != vars.rend(); ++it) {
      if (*it->name == name) return it->value;
    }
    throw EvalError("no assignment for free variable '" + name + "'");
  }

  std::int64_t lookup_index(const std::string& name) const {
    for (auto it = indices.rbegin(); it != indices.rend(); ++it) {
      if (*it->name == name) return it->value;
    }
    throw EvalError("unbound meta-index '" + name + "'");
  }

  PointId constant(const std::string& name) const {
    if (!m.signature().has_constant(name) || !m.has_constant_value(name)) {
      throw EvalError("constant '" + name + "' is not interpreted");
    }
    return m.constant(name);
  }

  PointId term(const Term& t) {
    switch (t.kind) {
      case Term::Kind::kVariable:
        return lookup_var(t.name);
      case Term::Kind::kConstant:
        return constant(t.name);
      case Term::Kind::kIndexedConstant:
        return constant(t.name + std::to_string(lookup_index(t.index)));
      case Term::Kind::kApply: {
        Tuple args;
        args.reserve(t.args.size());
        for (const auto& a : t.args) args.push_back(term(a));
        if (m.signature().find_function(t.name) == nullptr) throw EvalError("unknown function '" + t.name + "'");
        return m.function(t.name, args);
      }
    }
    return 0;
  }

  Rational affine(const Affine& a) const {
    if (a.is_constant()) return a.offset;
    return a.at(lookup_index(a.index));
  }

  std::int64_t range_start(const IndexRange& r) const {
    switch (r.kind) {
      case IndexRange::Kind::kNaturals:
      case IndexRange::Kind::kUpTo:
        return 1;
      case IndexRange::Kind::kFrom:
        return r.from_index.empty() ? r.bound : lookup_index(r.from_index);
    }
    return 1;
  }

  // Whether the value of f can change with the meta-index i. Occurrences of
  // i as the start of a tail range are ignored when the family's value does
  // not depend on where it starts.
  bool depends(const Formula& f, const std::string& i) {
    if (!mentions(f.free_indices(), i)) return false;
    DependKey key{f.id(), i};
    if (auto it = depend_memo.find(key); it != depend_memo.end()) return it->second;
    bool result = std::visit(
        [&](const auto& n) -> bool {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, BinaryNode>) {
            return depends(n.lhs, i) || depends(n.rhs, i);
          } else if constexpr (std::is_same_v<T, ScaleNode>) {
            return n.factor.index == i || depends(n.body, i);
          } else if constexpr (std::is_same_v<T, VarQuantNode>) {
            return depends(n.body, i);
          } else if constexpr (std::is_same_v<T, RhoNode>) {
            for (const auto& s : n.slots) {
              if (term_mentions_index(s, i)) return true;
            }
            return depends(n.body, i);
          } else if constexpr (std::is_same_v<T, IdxQuantNode>) {
            bool starts_at_i = n.range.kind == IndexRange::Kind::kFrom && n.range.from_index == i;
            if (starts_at_i && !start_independent(n)) return true;
            return n.index != i && depends(n.body, i);
          } else {
            return true;  // a leaf that mentions i
          }
        },
        f.node().data);
    depend_memo.emplace(std::move(key), result);
    return result;
  }

  static bool term_mentions_index(const Term& t, const std::string& i) {
    if (t.kind == Term::Kind::kIndexedConstant && t.index == i) return true;
    return std::any_of(t.args.begin(), t.args.end(), [&](const Term& a) { return term_mentions_index(a, i); });
  }

  // Recognized infinite families whose value is the same for every start.
  bool start_independent(const IdxQuantNode& q) {
    if (!q.range.infinite()) return false;
    if (const Formula* f = zero_test_body(q); f != nullptr && !depends(*f, q.index)) return true;
    if (const Formula* g = negation_operand(q)) {
      const auto& inner = std::get<IdxQuantNode>(q.body.node().data);
      if (!depends(*g, q.index) && !depends(*g, inner.index)) return true;
    }
    return !depends(q.body, q.index);
  }

  bool cacheable(const Formula& f) const {
    if (f.use_count() <= 1) return false;
    const auto& d = f.node().data;
    return !std::holds_alternative<DistNode>(d) && !std::holds_alternative<PredNode>(d) &&
           !std::holds_alternative<ConstNode>(d);
  }

  Interval eval(const Formula& f) {
    if (!cacheable(f)) return compute(f);
    MemoKey key{f.id(), {}};
    key.values.reserve(f.free_variables().size() + f.free_indices().size());
    for (const auto& v : f.free_variables()) key.values.push_back(static_cast<std::int64_t>(lookup_var(v)));
    for (const auto& i : f.free_indices()) key.values.push_back(lookup_index(i));
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    Interval r = compute(f);
    memo.emplace(std::move(key), r);
    return r;
  }

  Interval with_index(const IdxQuantNode& q, std::int64_t value, const Formula& body) {
    indices.push_back({&q.index, value});
    Interval r = eval(body);
    indices.pop_back();
    return r;
  }

  Interval compute(const Formula& f) {
    return std::visit(
        [&](const auto& n) -> Interval {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, DistNode>) {
            return Interval::point(m.distance(term(n.lhs), term(n.rhs)));
          } else if constexpr (std::is_same_v<T, PredNode>) {
            Tuple args;
            args.reserve(n.args.size());
            for (const auto& a : n.args) args.push_back(term(a));
            if (m.signature().find_predicate(n.symbol) == nullptr) {
              throw EvalError("unknown predicate '" + n.symbol + "'");
            }
            return Interval::point(m.predicate(n.symbol, args));
          } else if constexpr (std::is_same_v<T, ConstNode>) {
            if (!n.reciprocal) return Interval::point(n.value.offset);
            Rational den = affine(n.value);
            if (den < kOne) throw EvalError("recip denominator " + den.to_string() + " is below 1");
            return Interval::point(kOne / den);
          } else if constexpr (std::is_same_v<T, BinaryNode>) {
            return binary(n);
          } else if constexpr (std::is_same_v<T, ScaleNode>) {
            Rational c = affine(n.factor);
            if (c.is_zero()) return Interval::point(kZero);
            Interval b = eval(n.body);
            return {min_one(c * b.lo), min_one(c * b.hi)};
          } else if constexpr (std::is_same_v<T, VarQuantNode>) {
            return quantify(n);
          } else if constexpr (std::is_same_v<T, IdxQuantNode>) {
            return index_family(n);
          } else {
            return rho(n);
          }
        },
        f.node().data);
  }

  Interval binary(const BinaryNode& n) {
    Interval a = eval(n.lhs);
    switch (n.op) {
      case Connective::kMax:
        if (a.lo == kOne) return a;
        break;
      case Connective::kMin:
        if (a.hi == kZero) return a;
        break;
      case Connective::kSub:
        if (a.hi == kZero) return a;
        break;
      case Connective::kAdd:
        if (a.lo == kOne) return a;
        break;
    }
    Interval b = eval(n.rhs);
    switch (n.op) {
      case Connective::kSub:
        return {monus(a.lo, b.hi), monus(a.hi, b.lo)};
      case Connective::kAdd:
        return {clipped_sum(a.lo, b.lo), clipped_sum(a.hi, b.hi)};
      case Connective::kMin:
        return {std::min(a.lo, b.lo), std::min(a.hi, b.hi)};
      case Connective::kMax:
        return {std::max(a.lo, b.lo), std::max(a.hi, b.hi)};
    }
    return a;
  }

  Interval quantify(const VarQuantNode& n) {
    const bool sup = n.quantifier == Quantifier::kSup;
    Interval acc = Interval::point(sup ? kZero : kOne);
    vars.push_back({&n.var, 0});
    for (PointId p = 0; p < m.size(); ++p) {
      vars.back().value = p;
      Interval v = eval(n.body);
      if (sup) {
        acc = {std::max(acc.lo, v.lo), std::max(acc.hi, v.hi)};
        if (acc.lo == kOne) break;
      } else {
        acc = {std::min(acc.lo, v.lo), std::min(acc.hi, v.hi)};
        if (acc.hi == kZero) break;
      }
    }
    vars.pop_back();
    return acc;
  }

  Interval index_family(const IdxQuantNode& q) {
    const bool sup = q.quantifier == Quantifier::kSup;
    const std::int64_t start = range_start(q.range);

    if (!q.range.infinite()) {
      Interval acc = Interval::point(sup ? kZero : kOne);
      for (std::int64_t k = start; k <= q.range.bound; ++k) {
        Interval v = with_index(q, k, q.body);
        if (sup) {
          acc = {std::max(acc.lo, v.lo), std::max(acc.hi, v.hi)};
          if (acc.lo == kOne) break;
        } else {
          acc = {std::min(acc.lo, v.lo), std::min(acc.hi, v.hi)};
          if (acc.hi == kZero) break;
        }
      }
      return acc;
    }

    if (const Formula* f = zero_test_body(q); f != nullptr && !depends(*f, q.index)) {
      Interval v = with_index(q, start, *f);
      return {v.lo.is_zero() ? kZero : kOne, v.hi.is_zero() ? kZero : kOne};
    }

    if (const Formula* g = negation_operand(q)) {
      const auto& inner = std::get<IdxQuantNode>(q.body.node().data);
      if (!depends(*g, q.index) && !depends(*g, inner.index)) {
        indices.push_back({&q.index, start});
        indices.push_back({&inner.index, range_start(inner.range)});
        Interval v = eval(*g);
        indices.resize(indices.size() - 2);
        // Some 1/(r i + s) drops below G exactly when G > 0.
        return {v.hi.is_zero() ? kOne : kZero, v.lo.is_zero() ? kOne : kZero};
      }
    }

    if (!depends(q.body, q.index)) return with_index(q, start, q.body);

    Rational best = sup ? kZero : kOne;
    for (std::int64_t k = start; k < start + budget; ++k) {
      Interval v = with_index(q, k, q.body);
      if (sup) {
        best = std::max(best, v.lo);
        if (best == kOne) return Interval::point(kOne);
      } else {
        best = std::min(best, v.hi);
        if (best == kZero) return Interval::point(kZero);
      }
    }
    return sup ? Interval{best, kOne} : Interval{kZero, best};
  }

  Interval rho(const RhoNode& n) {
    const std::size_t k = n.bound.size();
    Tuple slots;
    for (const auto& s : n.slots) slots.push_back(term(s));
    const std::size_t base = vars.size();
    for (const auto& y : n.bound) vars.push_back({&y, 0});
    Rational surely = kOne;    // min distance over tuples where the body is surely 0
    Rational possibly = kOne;  // ... where it may be 0
    Tuple b;
    const std::size_t count = m.tuple_count(k);
    for (std::size_t code = 0; code < count; ++code) {
      b = m.tuple_from_code(code, k);
      Rational d = m.tuple_distance(slots, b);
      if (d >= surely) continue;
      for (std::size_t i = 0; i < k; ++i) vars[base + i].value = b[i];
      Interval v = eval(n.body);
      if (v.lo.is_zero()) possibly = std::min(possibly, d);
      if (v.hi.is_zero()) surely = std::min(surely, d);
    }
    vars.resize(base);
    return {possibly, surely};
  }
};

Evaluator::Evaluator(const FiniteStructure& m, std::int64_t budget) : impl_(std::make_unique<Impl>(m, budget)) {
  if (budget < 1) throw EvalError("budget must be at least 1, got " + std::to_string(budget));
}

Evaluator::~Evaluator() = default;

const FiniteStructure& Evaluator::structure() const { return impl_->m; }
std::int64_t Evaluator::budget() const { return impl_->budget; }

EvalResult Evaluator::evaluate(const Formula& f, const Assignment& env) {
  Impl& s = *impl_;
  for (const auto& v : f.free_variables()) {
    auto it = env.find(v);
    if (it == env.end()) throw EvalError("no assignment for free variable '" + v + "'");
  }
  for (const auto& [name, p] : env) {
    if (p >= s.m.size()) throw EvalError("variable '" + name + "' is assigned a point outside the structure");
  }
  if (!f.free_indices().empty()) throw EvalError("formula has unbound meta-index '" + f.free_indices().front() + "'");
  if (s.roots.empty() || s.roots.back().id() != f.id()) s.roots.push_back(f);
  s.vars.clear();
  s.indices.clear();
  for (const auto& [name, p] : env) s.vars.push_back({&name, p});
  Interval r = s.eval(f);
  s.vars.clear();
  if (r.exact()) return EvalResult::exact(r.lo);
  return EvalResult::bounds(r.lo, r.hi, s.budget);
}

EvalResult Evaluator::evaluate(const Formula& f, std::span<const std::string> vars, std::span<const PointId> tuple) {
  if (vars.size() != tuple.size()) throw EvalError("variable list and tuple differ in length");
  Assignment env;
  for (std::size_t i = 0; i < vars.size(); ++i) env[vars[i]] = tuple[i];
  return evaluate(f, env);
}

EvalResult evaluate(const FiniteStructure& m, const Formula& f, const Assignment& env, std::int64_t budget) {
  return Evaluator(m, budget).evaluate(f, env);
}

bool satisfies(const FiniteStructure& m, const Formula& f, const Assignment& env, std::int64_t budget) {
  EvalResult r = evaluate(m, f, env, budget);
  if (!r.is_exact()) {
    throw EvalError("satisfaction undecided: value only bounded by " + to_string(r) + "; raise the budget");
  }
  return r.lo.is_zero();
}

std::optional<Formula> recognize_zero_test(const Formula& f) {
  const auto* q = as<IdxQuantNode>(f);
  if (q == nullptr) return std::nullopt;
  const Formula* body = zero_test_body(*q);
  if (body == nullptr || mentions(body->free_indices(), q->index)) return std::nullopt;
  return *body;
}

}  // namespace inflogic
