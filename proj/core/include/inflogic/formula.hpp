#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "inflogic/rational.hpp"
#include "inflogic/structure.hpp"

namespace inflogic {

/// Object-level term: a variable, a constant symbol, a constant symbol whose
/// name is completed by a meta-index (prefix + value, e.g. "c" + n), or a
/// function application.
struct Term {
  enum class Kind { kVariable, kConstant, kIndexedConstant, kApply };

  Kind kind = Kind::kVariable;
  std::string name;   // variable, constant, constant prefix or function symbol
  std::string index;  // meta-index for kIndexedConstant
  std::vector<Term> args;

  static Term variable(std::string name);
  static Term constant(std::string name);
  static Term indexed_constant(std::string prefix, std::string index);
  static Term apply(std::string function, std::vector<Term> args);

  friend bool operator==(const Term&, const Term&) = default;
};

/// Affine meta-expression coeff * index + offset. A constant expression has a
/// zero coefficient and an empty index name.
struct Affine {
  Rational coeff;
  std::string index;
  Rational offset;

  static Affine constant(Rational value);
  static Affine of_index(std::string index, Rational coeff = Rational(1), Rational offset = Rational(0));

  bool is_constant() const { return coeff.is_zero(); }
  Rational at(std::int64_t index_value) const { return coeff * Rational(index_value) + offset; }

  friend bool operator==(const Affine&, const Affine&) = default;
};

/// Range of a meta-index: all naturals i >= 1, 1..k, or a tail i >= j where j
/// is either an enclosing index name or an already-instantiated integer.
struct IndexRange {
  enum class Kind { kNaturals, kUpTo, kFrom };

  Kind kind = Kind::kNaturals;
  std::int64_t bound = 1;
  std::string from_index;

  static IndexRange naturals();
  static IndexRange up_to(std::int64_t k);
  static IndexRange from(std::string outer_index);
  static IndexRange from(std::int64_t start);

  bool infinite() const { return kind != Kind::kUpTo; }

  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

enum class Connective { kSub, kAdd, kMin, kMax };
enum class Quantifier { kSup, kInf };

struct FormulaNode;

/// Immutable, shareable formula tree. Nodes cache their free variables and
/// free meta-indices; subtrees may be shared, so formulas are DAGs in memory.
class Formula {
 public:
  static Formula dist(Term lhs, Term rhs);
  static Formula pred(std::string symbol, std::vector<Term> args);
  static Formula constant(Rational value);
  static Formula recip(Affine denominator);
  static Formula binary(Connective op, Formula lhs, Formula rhs);
  static Formula sub(Formula lhs, Formula rhs) { return binary(Connective::kSub, std::move(lhs), std::move(rhs)); }
  static Formula add(Formula lhs, Formula rhs) { return binary(Connective::kAdd, std::move(lhs), std::move(rhs)); }
  static Formula min(Formula lhs, Formula rhs) { return binary(Connective::kMin, std::move(lhs), std::move(rhs)); }
  static Formula max(Formula lhs, Formula rhs) { return binary(Connective::kMax, std::move(lhs), std::move(rhs)); }
  static Formula scale(Affine factor, Formula body);
  static Formula quantify(Quantifier q, std::string var, Formula body);
  static Formula sup(std::string var, Formula body) { return quantify(Quantifier::kSup, std::move(var), std::move(body)); }
  static Formula inf(std::string var, Formula body) { return quantify(Quantifier::kInf, std::move(var), std::move(body)); }
  static Formula index_quantify(Quantifier q, std::string index, IndexRange range, Formula body);
  static Formula isup(std::string index, IndexRange range, Formula body);
  static Formula iinf(std::string index, IndexRange range, Formula body);
  static Formula rho(std::vector<Term> slots, std::vector<std::string> bound, Formula body);

  const FormulaNode& node() const { return *node_; }
  const FormulaNode* id() const { return node_.get(); }
  long use_count() const { return node_.use_count(); }

  /// Sorted free object variables.
  const std::vector<std::string>& free_variables() const;
  /// Sorted meta-indices referenced but not bound inside this formula.
  const std::vector<std::string>& free_indices() const;

  /// Structural equality.
  friend bool operator==(const Formula& a, const Formula& b);

 private:
  explicit Formula(std::shared_ptr<const FormulaNode> node) : node_(std::move(node)) {}
  static Formula make(FormulaNode node);

  std::shared_ptr<const FormulaNode> node_;
};

struct DistNode {
  Term lhs, rhs;
};
struct PredNode {
  std::string symbol;
  std::vector<Term> args;
};
/// A rational literal (reciprocal == false, value.is_constant()) or 1/value.
struct ConstNode {
  Affine value;
  bool reciprocal = false;
};
struct BinaryNode {
  Connective op;
  Formula lhs, rhs;
};
/// min(factor * body, 1)
struct ScaleNode {
  Affine factor;
  Formula body;
};
struct VarQuantNode {
  Quantifier quantifier;
  std::string var;
  Formula body;
};
struct IdxQuantNode {
  Quantifier quantifier;
  std::string index;
  IndexRange range;
  Formula body;
};
/// Sup-distance from the slot tuple to the zeroset of body over `bound`.
struct RhoNode {
  std::vector<Term> slots;
  std::vector<std::string> bound;
  Formula body;
};

struct FormulaNode {
  std::variant<DistNode, PredNode, ConstNode, BinaryNode, ScaleNode, VarQuantNode, IdxQuantNode, RhoNode> data;
  std::vector<std::string> free_vars;
  std::vector<std::string> free_idx;
};

template <class T>
const T* as(const Formula& f) {
  return std::get_if<T>(&f.node().data);
}

// Derived forms.

/// The zero-test ind(F) = sup_{n in N} min(n F, 1): 0 where F is 0, else 1.
Formula ind(Formula body);
/// |F - G| as max(F -. G, G -. F).
Formula abs_diff(Formula lhs, Formula rhs);
/// Max over the list; Const(0) when empty.
Formula max_of(std::span<const Formula> items);
/// Min over the list; Const(1) when empty.
Formula min_of(std::span<const Formula> items);
/// max_i d(lhs_i, rhs_i); Const(0) for empty tuples.
Formula sup_distance(std::span<const Term> lhs, std::span<const Term> rhs);
Formula sup_chain(std::span<const std::string> vars, Formula body);
Formula inf_chain(std::span<const std::string> vars, Formula body);

/// Index name not free in any of the given formulas, preferring `base`.
std::string fresh_index(std::span<const Formula> avoid, const std::string& base = "n");

// Operations.

std::vector<std::string> well_formed(const Signature& sig, const Formula& f);
std::set<std::string> free_variables(const Formula& f);
std::set<std::string> term_variables(const Term& t);
/// Every variable name occurring in f, free or bound.
std::set<std::string> all_variables(const Formula& f);

/// Capture-avoiding substitution f[x := t]; clashing binders are renamed with
/// primes (x', x'', ...).
Formula substitute_term(const Formula& f, const std::string& x, const Term& t);
/// Replaces every occurrence of constant symbol c by variable x. Throws Error
/// if x already occurs in f.
Formula substitute_constant(const Formula& f, const std::string& c, const std::string& x);
/// Replaces the free meta-index `index` by a concrete value.
Formula substitute_index(const Formula& f, const std::string& index, std::int64_t value);
/// Body of an outermost index binder with its index set to k. Throws Error if
/// f is not an index binder or k lies outside its range.
Formula instantiate_index(const Formula& f, std::int64_t k);
/// Expands every finite-range index binder into a Max/Min chain.
Formula desugar_finite_index(const Formula& f);

/// Number of nodes of the formula as a tree (shared subtrees counted each time).
std::uint64_t tree_size(const Formula& f);
/// Number of distinct nodes.
std::uint64_t dag_size(const Formula& f);

}  // namespace inflogic
