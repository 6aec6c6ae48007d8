#include "inflogic/formula.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <optional>
#include <unordered_map>
#include <unordered_set>

namespace inflogic {
namespace {

using NameSet = std::vector<std::string>;  // sorted, unique

void insert_sorted(NameSet& set, const std::string& name) {
  auto it = std::lower_bound(set.begin(), set.end(), name);
  if (it == set.end() || *it != name) set.insert(it, name);
}

NameSet merged(const NameSet& a, const NameSet& b) {
  NameSet out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

NameSet without(NameSet set, const std::string& name) {
  auto it = std::lower_bound(set.begin(), set.end(), name);
  if (it != set.end() && *it == name) set.erase(it);
  return set;
}

bool contains(const NameSet& set, const std::string& name) {
  return std::binary_search(set.begin(), set.end(), name);
}

void collect_term_vars(const Term& t, NameSet& out) {
  if (t.kind == Term::Kind::kVariable) insert_sorted(out, t.name);
  for (const auto& a : t.args) collect_term_vars(a, out);
}

void collect_term_indices(const Term& t, NameSet& out) {
  if (t.kind == Term::Kind::kIndexedConstant) insert_sorted(out, t.index);
  for (const auto& a : t.args) collect_term_indices(a, out);
}

Affine normalized(Affine a) {
  if (a.coeff.is_zero()) a.index.clear();
  return a;
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

Term Term::variable(std::string name) { return Term{Kind::kVariable, std::move(name), {}, {}}; }
Term Term::constant(std::string name) { return Term{Kind::kConstant, std::move(name), {}, {}}; }
Term Term::indexed_constant(std::string prefix, std::string index) {
  return Term{Kind::kIndexedConstant, std::move(prefix), std::move(index), {}};
}
Term Term::apply(std::string function, std::vector<Term> args) {
  return Term{Kind::kApply, std::move(function), {}, std::move(args)};
}

Affine Affine::constant(Rational value) { return Affine{Rational(0), {}, value}; }
Affine Affine::of_index(std::string index, Rational coeff, Rational offset) {
  return normalized(Affine{coeff, std::move(index), offset});
}

IndexRange IndexRange::naturals() { return IndexRange{Kind::kNaturals, 1, {}}; }
IndexRange IndexRange::up_to(std::int64_t k) { return IndexRange{Kind::kUpTo, k, {}}; }
IndexRange IndexRange::from(std::string outer_index) { return IndexRange{Kind::kFrom, 0, std::move(outer_index)}; }
IndexRange IndexRange::from(std::int64_t start) { return IndexRange{Kind::kFrom, start, {}}; }

Formula Formula::make(FormulaNode node) {
  NameSet vars;
  NameSet idx;
  std::visit(Overloaded{
                 [&](const DistNode& n) {
                   collect_term_vars(n.lhs, vars);
                   collect_term_vars(n.rhs, vars);
                   collect_term_indices(n.lhs, idx);
                   collect_term_indices(n.rhs, idx);
                 },
                 [&](const PredNode& n) {
                   for (const auto& a : n.args) {
                     collect_term_vars(a, vars);
                     collect_term_indices(a, idx);
                   }
                 },
                 [&](const ConstNode& n) {
                   if (!n.value.is_constant()) idx.push_back(n.value.index);
                 },
                 [&](const BinaryNode& n) {
                   vars = merged(n.lhs.free_variables(), n.rhs.free_variables());
                   idx = merged(n.lhs.free_indices(), n.rhs.free_indices());
                 },
                 [&](const ScaleNode& n) {
                   vars = n.body.free_variables();
                   idx = n.body.free_indices();
                   if (!n.factor.is_constant()) insert_sorted(idx, n.factor.index);
                 },
                 [&](const VarQuantNode& n) {
                   vars = without(n.body.free_variables(), n.var);
                   idx = n.body.free_indices();
                 },
                 [&](const IdxQuantNode& n) {
                   vars = n.body.free_variables();
                   idx = without(n.body.free_indices(), n.index);
                   if (n.range.kind == IndexRange::Kind::kFrom && !n.range.from_index.empty()) {
                     insert_sorted(idx, n.range.from_index);
                   }
                 },
                 [&](const RhoNode& n) {
                   vars = n.body.free_variables();
                   for (const auto& y : n.bound) vars = without(std::move(vars), y);
                   for (const auto& s : n.slots) {
                     collect_term_vars(s, vars);
                     collect_term_indices(s, idx);
                   }
                   idx = merged(idx, n.body.free_indices());
                 },
             },
             node.data);
  node.free_vars = std::move(vars);
  node.free_idx = std::move(idx);
  return Formula(std::make_shared<const FormulaNode>(std::move(node)));
}

Formula Formula::dist(Term lhs, Term rhs) { return make(FormulaNode{DistNode{std::move(lhs), std::move(rhs)}, {}, {}}); }
Formula Formula::pred(std::string symbol, std::vector<Term> args) {
  return make(FormulaNode{PredNode{std::move(symbol), std::move(args)}, {}, {}});
}
Formula Formula::constant(Rational value) {
  return make(FormulaNode{ConstNode{Affine::constant(value), false}, {}, {}});
}
Formula Formula::recip(Affine denominator) {
  return make(FormulaNode{ConstNode{normalized(std::move(denominator)), true}, {}, {}});
}
Formula Formula::binary(Connective op, Formula lhs, Formula rhs) {
  return make(FormulaNode{BinaryNode{op, std::move(lhs), std::move(rhs)}, {}, {}});
}
Formula Formula::scale(Affine factor, Formula body) {
  return make(FormulaNode{ScaleNode{normalized(std::move(factor)), std::move(body)}, {}, {}});
}
Formula Formula::quantify(Quantifier q, std::string var, Formula body) {
  return make(FormulaNode{VarQuantNode{q, std::move(var), std::move(body)}, {}, {}});
}
Formula Formula::index_quantify(Quantifier q, std::string index, IndexRange range, Formula body) {
  return make(FormulaNode{IdxQuantNode{q, std::move(index), std::move(range), std::move(body)}, {}, {}});
}
Formula Formula::isup(std::string index, IndexRange range, Formula body) {
  return index_quantify(Quantifier::kSup, std::move(index), std::move(range), std::move(body));
}
Formula Formula::iinf(std::string index, IndexRange range, Formula body) {
  return index_quantify(Quantifier::kInf, std::move(index), std::move(range), std::move(body));
}
Formula Formula::rho(std::vector<Term> slots, std::vector<std::string> bound, Formula body) {
  return make(FormulaNode{RhoNode{std::move(slots), std::move(bound), std::move(body)}, {}, {}});
}

const std::vector<std::string>& Formula::free_variables() const { return node_->free_vars; }
const std::vector<std::string>& Formula::free_indices() const { return node_->free_idx; }

bool operator==(const Formula& a, const Formula& b) {
  if (a.id() == b.id()) return true;
  const auto& x = a.node().data;
  const auto& y = b.node().data;
  if (x.index() != y.index()) return false;
  if (a.free_variables() != b.free_variables() || a.free_indices() != b.free_indices()) return false;
  return std::visit(Overloaded{
                        [&](const DistNode& n) {
                          const auto& m = std::get<DistNode>(y);
                          return n.lhs == m.lhs && n.rhs == m.rhs;
                        },
                        [&](const PredNode& n) {
                          const auto& m = std::get<PredNode>(y);
                          return n.symbol == m.symbol && n.args == m.args;
                        },
                        [&](const ConstNode& n) {
                          const auto& m = std::get<ConstNode>(y);
                          return n.reciprocal == m.reciprocal && n.value == m.value;
                        },
                        [&](const BinaryNode& n) {
                          const auto& m = std::get<BinaryNode>(y);
                          return n.op == m.op && n.lhs == m.lhs && n.rhs == m.rhs;
                        },
                        [&](const ScaleNode& n) {
                          const auto& m = std::get<ScaleNode>(y);
                          return n.factor == m.factor && n.body == m.body;
                        },
                        [&](const VarQuantNode& n) {
                          const auto& m = std::get<VarQuantNode>(y);
                          return n.quantifier == m.quantifier && n.var == m.var && n.body == m.body;
                        },
                        [&](const IdxQuantNode& n) {
                          const auto& m = std::get<IdxQuantNode>(y);
                          return n.quantifier == m.quantifier && n.index == m.index && n.range == m.range &&
                                 n.body == m.body;
                        },
                        [&](const RhoNode& n) {
                          const auto& m = std::get<RhoNode>(y);
                          return n.slots == m.slots && n.bound == m.bound && n.body == m.body;
                        },
                    },
                    x);
}

std::string fresh_index(std::span<const Formula> avoid, const std::string& base) {
  auto taken = [&](const std::string& name) {
    return std::any_of(avoid.begin(), avoid.end(),
                       [&](const Formula& f) { return contains(f.free_indices(), name); });
  };
  if (!taken(base)) return base;
  for (int i = 1;; ++i) {
    std::string candidate = base + std::to_string(i);
    if (!taken(candidate)) return candidate;
  }
}

Formula ind(Formula body) {
  std::string n = fresh_index(std::span<const Formula>(&body, 1));
  return Formula::isup(n, IndexRange::naturals(), Formula::scale(Affine::of_index(n), std::move(body)));
}

Formula abs_diff(Formula lhs, Formula rhs) {
  return Formula::max(Formula::sub(lhs, rhs), Formula::sub(rhs, lhs));
}

Formula max_of(std::span<const Formula> items) {
  if (items.empty()) return Formula::constant(Rational(0));
  Formula acc = items.front();
  for (std::size_t i = 1; i < items.size(); ++i) acc = Formula::max(acc, items[i]);
  return acc;
}

Formula min_of(std::span<const Formula> items) {
  if (items.empty()) return Formula::constant(Rational(1));
  Formula acc = items.front();
  for (std::size_t i = 1; i < items.size(); ++i) acc = Formula::min(acc, items[i]);
  return acc;
}

Formula sup_distance(std::span<const Term> lhs, std::span<const Term> rhs) {
  if (lhs.size() != rhs.size()) throw Error("sup_distance: tuple length mismatch");
  std::vector<Formula> parts;
  for (std::size_t i = 0; i < lhs.size(); ++i) parts.push_back(Formula::dist(lhs[i], rhs[i]));
  return max_of(parts);
}

Formula sup_chain(std::span<const std::string> vars, Formula body) {
  for (std::size_t i = vars.size(); i-- > 0;) body = Formula::sup(vars[i], std::move(body));
  return body;
}

Formula inf_chain(std::span<const std::string> vars, Formula body) {
  for (std::size_t i = vars.size(); i-- > 0;) body = Formula::inf(vars[i], std::move(body));
  return body;
}

// ---------------------------------------------------------------------------
// Well-formedness

namespace {

struct IndexScope {
  std::string name;
  std::int64_t min;
  std::optional<std::int64_t> max;  // nullopt: unbounded
};

class WellFormedChecker {
 public:
  explicit WellFormedChecker(const Signature& sig) : sig_(sig) {}

  std::vector<std::string> run(const Formula& f) {
    visit(f);
    return std::move(out_);
  }

 private:
  const IndexScope* lookup(const std::string& index) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      if (it->name == index) return &*it;
    }
    return nullptr;
  }

  void check_term(const Term& t) {
    switch (t.kind) {
      case Term::Kind::kVariable:
        break;
      case Term::Kind::kConstant:
        if (!sig_.has_constant(t.name)) out_.push_back("unknown constant symbol '" + t.name + "'");
        break;
      case Term::Kind::kIndexedConstant: {
        const IndexScope* s = lookup(t.index);
        if (s == nullptr) {
          out_.push_back("indexed constant " + t.name + t.index + " uses unbound index '" + t.index + "'");
        } else if (!s->max) {
          out_.push_back("indexed constant " + t.name + t.index + " ranges over infinitely many constants");
        } else {
          for (std::int64_t k = s->min; k <= *s->max; ++k) {
            if (!sig_.has_constant(t.name + std::to_string(k))) {
              out_.push_back("indexed constant " + t.name + t.index + " needs missing constant " + t.name +
                             std::to_string(k));
            }
          }
        }
        break;
      }
      case Term::Kind::kApply: {
        const SymbolDecl* f = sig_.find_function(t.name);
        if (f == nullptr) {
          out_.push_back("unknown function symbol '" + t.name + "'");
        } else if (f->arity != t.args.size()) {
          out_.push_back("arity violation: function " + t.name + " expects " + std::to_string(f->arity) +
                         " arguments, got " + std::to_string(t.args.size()));
        }
        for (const auto& a : t.args) check_term(a);
        break;
      }
    }
  }

  // Smallest value the affine expression takes over its index range.
  std::optional<Rational> minimum(const Affine& a) {
    if (a.is_constant()) return a.offset;
    const IndexScope* s = lookup(a.index);
    if (s == nullptr) {
      out_.push_back("meta-expression uses unbound index '" + a.index + "'");
      return std::nullopt;
    }
    return a.coeff < Rational(0) ? std::nullopt : std::optional<Rational>(a.at(s->min));
  }

  void check_affine_nonnegative(const Affine& a, const char* what) {
    if (a.coeff < Rational(0) || a.offset < Rational(0)) {
      out_.push_back(std::string(what) + " must have nonnegative coefficients");
    }
    minimum(a);
  }

  void visit(const Formula& f) {
    // Index-free subformulas are checked once however often they are shared.
    if (f.free_indices().empty() && !visited_.insert(f.id()).second) return;
    std::visit(Overloaded{
                   [&](const DistNode& n) {
                     check_term(n.lhs);
                     check_term(n.rhs);
                   },
                   [&](const PredNode& n) {
                     const SymbolDecl* p = sig_.find_predicate(n.symbol);
                     if (p == nullptr) {
                       out_.push_back("unknown predicate symbol '" + n.symbol + "'");
                     } else if (p->arity != n.args.size()) {
                       out_.push_back("arity violation: predicate " + n.symbol + " expects " +
                                      std::to_string(p->arity) + " arguments, got " + std::to_string(n.args.size()));
                     }
                     for (const auto& a : n.args) check_term(a);
                   },
                   [&](const ConstNode& n) {
                     if (!n.reciprocal) {
                       if (!n.value.is_constant()) {
                         out_.push_back("constant value must not depend on an index; use recip");
                       } else if (n.value.offset < Rational(0) || n.value.offset > Rational(1)) {
                         out_.push_back("constant " + n.value.offset.to_string() + " lies outside [0,1]");
                       }
                       return;
                     }
                     if (n.value.coeff < Rational(0) || n.value.offset < Rational(0)) {
                       out_.push_back("recip expression must have nonnegative coefficients");
                       return;
                     }
                     auto lo = minimum(n.value);
                     if (lo && *lo < Rational(1)) {
                       out_.push_back("recip denominator can be " + lo->to_string() + " < 1, giving a value above 1");
                     }
                   },
                   [&](const BinaryNode& n) {
                     visit(n.lhs);
                     visit(n.rhs);
                   },
                   [&](const ScaleNode& n) {
                     check_affine_nonnegative(n.factor, "scale factor");
                     visit(n.body);
                   },
                   [&](const VarQuantNode& n) {
                     if (sig_.has_constant(n.var)) {
                       out_.push_back("bound variable '" + n.var + "' clashes with a constant symbol");
                     }
                     visit(n.body);
                   },
                   [&](const IdxQuantNode& n) {
                     IndexScope scope{n.index, 1, std::nullopt};
                     switch (n.range.kind) {
                       case IndexRange::Kind::kNaturals:
                         break;
                       case IndexRange::Kind::kUpTo:
                         if (n.range.bound < 1) out_.push_back("index range (upto k) needs k >= 1");
                         scope.max = n.range.bound;
                         break;
                       case IndexRange::Kind::kFrom:
                         if (n.range.from_index.empty()) {
                           if (n.range.bound < 1) out_.push_back("index range (from k) needs k >= 1");
                           scope.min = n.range.bound;
                         } else if (const IndexScope* outer = lookup(n.range.from_index)) {
                           scope.min = outer->min;
                         } else {
                           out_.push_back("tail range refers to '" + n.range.from_index +
                                          "', which is not an enclosing index");
                         }
                         break;
                     }
                     scopes_.push_back(scope);
                     visit(n.body);
                     scopes_.pop_back();
                   },
                   [&](const RhoNode& n) {
                     if (n.slots.size() != n.bound.size()) {
                       out_.push_back("rho has " + std::to_string(n.slots.size()) + " slots but binds " +
                                      std::to_string(n.bound.size()) + " variables");
                     }
                     NameSet seen;
                     for (const auto& y : n.bound) {
                       if (contains(seen, y)) out_.push_back("rho binds '" + y + "' twice");
                       insert_sorted(seen, y);
                     }
                     for (const auto& s : n.slots) check_term(s);
                     visit(n.body);
                   },
               },
               f.node().data);
  }

  const Signature& sig_;
  std::vector<IndexScope> scopes_;
  std::vector<std::string> out_;
  std::unordered_set<const FormulaNode*> visited_;
};

}  // namespace

std::vector<std::string> well_formed(const Signature& sig, const Formula& f) {
  return WellFormedChecker(sig).run(f);
}

std::set<std::string> free_variables(const Formula& f) {
  return {f.free_variables().begin(), f.free_variables().end()};
}

std::set<std::string> term_variables(const Term& t) {
  NameSet v;
  collect_term_vars(t, v);
  return {v.begin(), v.end()};
}

std::set<std::string> all_variables(const Formula& f) {
  std::set<std::string> out;
  std::unordered_set<const FormulaNode*> seen;
  std::function<void(const Formula&)> walk = [&](const Formula& g) {
    if (!seen.insert(g.id()).second) return;
    out.insert(g.free_variables().begin(), g.free_variables().end());
    std::visit(Overloaded{
                   [](const DistNode&) {}, [](const PredNode&) {}, [](const ConstNode&) {},
                   [&](const BinaryNode& n) {
                     walk(n.lhs);
                     walk(n.rhs);
                   },
                   [&](const ScaleNode& n) { walk(n.body); },
                   [&](const VarQuantNode& n) {
                     out.insert(n.var);
                     walk(n.body);
                   },
                   [&](const IdxQuantNode& n) { walk(n.body); },
                   [&](const RhoNode& n) {
                     out.insert(n.bound.begin(), n.bound.end());
                     walk(n.body);
                   },
               },
               g.node().data);
  };
  walk(f);
  return out;
}

// ---------------------------------------------------------------------------
// Substitution

namespace {

Term map_term(const Term& t, const std::function<std::optional<Term>(const Term&)>& leaf) {
  if (auto replaced = leaf(t)) return *replaced;
  if (t.kind != Term::Kind::kApply) return t;
  std::vector<Term> args;
  args.reserve(t.args.size());
  for (const auto& a : t.args) args.push_back(map_term(a, leaf));
  return Term::apply(t.name, std::move(args));
}

std::vector<Term> map_terms(const std::vector<Term>& ts, const std::function<std::optional<Term>(const Term&)>& leaf) {
  std::vector<Term> out;
  out.reserve(ts.size());
  for (const auto& t : ts) out.push_back(map_term(t, leaf));
  return out;
}

std::string primed_fresh(const std::string& base, const std::function<bool(const std::string&)>& taken) {
  std::string name = base + "'";
  while (taken(name)) name += "'";
  return name;
}

class TermSubstituter {
 public:
  TermSubstituter(std::string x, Term t) : x_(std::move(x)), t_(std::move(t)) {
    NameSet v;
    collect_term_vars(t_, v);
    t_vars_ = std::move(v);
  }

  Formula run(const Formula& f) {
    if (!contains(f.free_variables(), x_)) return f;
    if (auto it = memo_.find(f.id()); it != memo_.end()) return it->second;
    Formula out = rebuild(f);
    memo_.emplace(f.id(), out);
    return out;
  }

 private:
  std::optional<Term> leaf(const Term& t) const {
    if (t.kind == Term::Kind::kVariable && t.name == x_) return t_;
    return std::nullopt;
  }

  Term subst(const Term& t) const {
    return map_term(t, [this](const Term& u) { return leaf(u); });
  }

  // Renames binder `v` inside `body` if it would capture a variable of t.
  std::pair<std::string, Formula> unclash(const std::string& v, const Formula& body,
                                          const std::vector<std::string>& extra_avoid) {
    if (!contains(t_vars_, v)) return {v, body};
    std::string fresh = primed_fresh(v, [&](const std::string& name) {
      return name == x_ || contains(t_vars_, name) || contains(body.free_variables(), name) ||
             std::find(extra_avoid.begin(), extra_avoid.end(), name) != extra_avoid.end();
    });
    return {fresh, substitute_term(body, v, Term::variable(fresh))};
  }

  Formula rebuild(const Formula& f) {
    return std::visit(
        Overloaded{
            [&](const DistNode& n) { return Formula::dist(subst(n.lhs), subst(n.rhs)); },
            [&](const PredNode& n) {
              std::vector<Term> args;
              for (const auto& a : n.args) args.push_back(subst(a));
              return Formula::pred(n.symbol, std::move(args));
            },
            [&](const ConstNode&) { return f; },
            [&](const BinaryNode& n) { return Formula::binary(n.op, run(n.lhs), run(n.rhs)); },
            [&](const ScaleNode& n) { return Formula::scale(n.factor, run(n.body)); },
            [&](const VarQuantNode& n) {
              auto [var, body] = unclash(n.var, n.body, {});
              return Formula::quantify(n.quantifier, var, run(body));
            },
            [&](const IdxQuantNode& n) { return Formula::index_quantify(n.quantifier, n.index, n.range, run(n.body)); },
            [&](const RhoNode& n) {
              std::vector<Term> slots;
              for (const auto& s : n.slots) slots.push_back(subst(s));
              bool x_bound = std::find(n.bound.begin(), n.bound.end(), x_) != n.bound.end();
              if (x_bound) return Formula::rho(std::move(slots), n.bound, n.body);
              std::vector<std::string> bound = n.bound;
              Formula body = n.body;
              for (auto& y : bound) {
                auto [fresh, renamed] = unclash(y, body, bound);
                y = fresh;
                body = renamed;
              }
              return Formula::rho(std::move(slots), std::move(bound), run(body));
            },
        },
        f.node().data);
  }

  std::string x_;
  Term t_;
  NameSet t_vars_;
  std::unordered_map<const FormulaNode*, Formula> memo_;
};

// Generic structure-preserving rewrite of terms and meta-expressions, with
// memoization over shared nodes. Binder names are left untouched.
class LeafRewriter {
 public:
  using TermFn = std::function<std::optional<Term>(const Term&)>;
  using AffineFn = std::function<Affine(const Affine&)>;
  using RangeFn = std::function<IndexRange(const IndexRange&)>;
  // Returns false to leave the body of an index binder untouched.
  using EnterFn = std::function<bool(const IdxQuantNode&)>;
  using SkipFn = std::function<bool(const Formula&)>;

  TermFn term;
  AffineFn affine;
  RangeFn range;
  EnterFn enter;
  SkipFn skip;

  Formula run(const Formula& f) {
    if (skip(f)) return f;
    if (auto it = memo_.find(f.id()); it != memo_.end()) return it->second;
    Formula out = std::visit(
        Overloaded{
            [&](const DistNode& n) { return Formula::dist(map_term(n.lhs, term), map_term(n.rhs, term)); },
            [&](const PredNode& n) { return Formula::pred(n.symbol, map_terms(n.args, term)); },
            [&](const ConstNode& n) {
              Affine v = affine(n.value);
              return n.reciprocal ? Formula::recip(v) : Formula::constant(v.offset);
            },
            [&](const BinaryNode& n) { return Formula::binary(n.op, run(n.lhs), run(n.rhs)); },
            [&](const ScaleNode& n) { return Formula::scale(affine(n.factor), run(n.body)); },
            [&](const VarQuantNode& n) { return Formula::quantify(n.quantifier, n.var, run(n.body)); },
            [&](const IdxQuantNode& n) {
              return Formula::index_quantify(n.quantifier, n.index, range(n.range), enter(n) ? run(n.body) : n.body);
            },
            [&](const RhoNode& n) { return Formula::rho(map_terms(n.slots, term), n.bound, run(n.body)); },
        },
        f.node().data);
    memo_.emplace(f.id(), out);
    return out;
  }

 private:
  std::unordered_map<const FormulaNode*, Formula> memo_;
};

}  // namespace

Formula substitute_term(const Formula& f, const std::string& x, const Term& t) {
  return TermSubstituter(x, t).run(f);
}

Formula substitute_constant(const Formula& f, const std::string& c, const std::string& x) {
  if (all_variables(f).count(x) != 0) throw Error("variable '" + x + "' is not fresh");
  LeafRewriter r;
  r.term = [&](const Term& t) -> std::optional<Term> {
    if (t.kind == Term::Kind::kConstant && t.name == c) return Term::variable(x);
    return std::nullopt;
  };
  r.affine = [](const Affine& a) { return a; };
  r.range = [](const IndexRange& g) { return g; };
  r.enter = [](const IdxQuantNode&) { return true; };
  r.skip = [](const Formula& g) { return std::holds_alternative<ConstNode>(g.node().data); };
  return r.run(f);
}

Formula substitute_index(const Formula& f, const std::string& index, std::int64_t value) {
  LeafRewriter r;
  r.term = [&](const Term& t) -> std::optional<Term> {
    if (t.kind == Term::Kind::kIndexedConstant && t.index == index) return Term::constant(t.name + std::to_string(value));
    return std::nullopt;
  };
  r.affine = [&](const Affine& a) {
    if (!a.is_constant() && a.index == index) return Affine::constant(a.at(value));
    return a;
  };
  r.range = [&](const IndexRange& g) {
    if (g.kind == IndexRange::Kind::kFrom && g.from_index == index) return IndexRange::from(value);
    return g;
  };
  r.enter = [&](const IdxQuantNode& n) { return n.index != index; };
  r.skip = [&](const Formula& g) { return !contains(g.free_indices(), index); };
  return r.run(f);
}

Formula instantiate_index(const Formula& f, std::int64_t k) {
  const auto* q = as<IdxQuantNode>(f);
  if (q == nullptr) throw Error("instantiate_index: formula is not an index binder");
  const IndexRange& r = q->range;
  switch (r.kind) {
    case IndexRange::Kind::kNaturals:
      if (k < 1) throw Error("instantiate_index: " + std::to_string(k) + " is not a natural number >= 1");
      break;
    case IndexRange::Kind::kUpTo:
      if (k < 1 || k > r.bound) {
        throw Error("instantiate_index: " + std::to_string(k) + " outside 1.." + std::to_string(r.bound));
      }
      break;
    case IndexRange::Kind::kFrom:
      if (!r.from_index.empty()) {
        throw Error("instantiate_index: range starts at enclosing index '" + r.from_index + "', instantiate it first");
      }
      if (k < r.bound) {
        throw Error("instantiate_index: " + std::to_string(k) + " is below the range start " + std::to_string(r.bound));
      }
      break;
  }
  return substitute_index(q->body, q->index, k);
}

Formula desugar_finite_index(const Formula& f) {
  std::unordered_map<const FormulaNode*, Formula> memo;
  std::vector<Formula> keep_alive;  // memo keys are node addresses
  std::function<Formula(const Formula&)> go = [&](const Formula& g) -> Formula {
    if (auto it = memo.find(g.id()); it != memo.end()) return it->second;
    Formula out = std::visit(
        Overloaded{
            [&](const DistNode&) { return g; }, [&](const PredNode&) { return g; },
            [&](const ConstNode&) { return g; },
            [&](const BinaryNode& n) { return Formula::binary(n.op, go(n.lhs), go(n.rhs)); },
            [&](const ScaleNode& n) { return Formula::scale(n.factor, go(n.body)); },
            [&](const VarQuantNode& n) { return Formula::quantify(n.quantifier, n.var, go(n.body)); },
            [&](const IdxQuantNode& n) {
              if (n.range.kind != IndexRange::Kind::kUpTo) {
                return Formula::index_quantify(n.quantifier, n.index, n.range, go(n.body));
              }
              std::optional<Formula> acc;
              for (std::int64_t k = 1; k <= n.range.bound; ++k) {
                keep_alive.push_back(instantiate_index(g, k));
                Formula item = go(keep_alive.back());
                if (!acc) {
                  acc = item;
                } else {
                  acc = n.quantifier == Quantifier::kSup ? Formula::max(*acc, item) : Formula::min(*acc, item);
                }
              }
              if (!acc) throw Error("desugar_finite_index: empty index range");
              return *acc;
            },
            [&](const RhoNode& n) { return Formula::rho(n.slots, n.bound, go(n.body)); },
        },
        g.node().data);
    memo.emplace(g.id(), out);
    return out;
  };
  return go(f);
}

std::uint64_t tree_size(const Formula& f) {
  std::unordered_map<const FormulaNode*, std::uint64_t> memo;
  constexpr std::uint64_t kCap = std::numeric_limits<std::uint64_t>::max() / 4;
  std::function<std::uint64_t(const Formula&)> go = [&](const Formula& g) -> std::uint64_t {
    if (auto it = memo.find(g.id()); it != memo.end()) return it->second;
    std::uint64_t s = std::visit(Overloaded{
                                     [](const DistNode&) -> std::uint64_t { return 1; },
                                     [](const PredNode&) -> std::uint64_t { return 1; },
                                     [](const ConstNode&) -> std::uint64_t { return 1; },
                                     [&](const BinaryNode& n) { return 1 + go(n.lhs) + go(n.rhs); },
                                     [&](const ScaleNode& n) { return 1 + go(n.body); },
                                     [&](const VarQuantNode& n) { return 1 + go(n.body); },
                                     [&](const IdxQuantNode& n) { return 1 + go(n.body); },
                                     [&](const RhoNode& n) { return 1 + go(n.body); },
                                 },
                                 g.node().data);
    s = std::min(s, kCap);
    memo.emplace(g.id(), s);
    return s;
  };
  return go(f);
}

std::uint64_t dag_size(const Formula& f) {
  std::unordered_set<const FormulaNode*> seen;
  std::function<void(const Formula&)> go = [&](const Formula& g) {
    if (!seen.insert(g.id()).second) return;
    std::visit(Overloaded{
                   [](const DistNode&) {}, [](const PredNode&) {}, [](const ConstNode&) {},
                   [&](const BinaryNode& n) {
                     go(n.lhs);
                     go(n.rhs);
                   },
                   [&](const ScaleNode& n) { go(n.body); }, [&](const VarQuantNode& n) { go(n.body); },
                   [&](const IdxQuantNode& n) { go(n.body); }, [&](const RhoNode& n) { go(n.body); },
               },
               g.node().data);
  };
  go(f);
  return seen.size();
}

}  // namespace inflogic
