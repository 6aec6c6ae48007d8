#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "inflogic/formula.hpp"

namespace inflogic {

/// Rho-free equivalent of rho over `bound` at `slots`:
///   inf_y' min(d(slots, y') + ind(body[bound := y']), 1)
/// Bound variables are renamed with primes where they would capture a slot
/// variable. Throws Error if the lengths differ.
Formula build_rho(const Formula& body, std::span<const std::string> bound, std::span<const Term> slots);
/// Same with bound = the free variables of body in sorted order, slots = x̄.
Formula build_rho(const Formula& body, std::span<const std::string> slot_vars);

/// Replaces every rho node, innermost first.
Formula rho_eliminate(const Formula& f);

/// min_i ind(f_i): 0 exactly where some f_i is 0. Const(1) for an empty list.
Formula exact_disjunction(std::span<const Formula> family);
/// inf over the index range of ind(body).
Formula exact_disjunction(const std::string& index, const IndexRange& range, const Formula& body);

/// inf_n ind(1/n -. f): 0 where f > 0 and 1 where f = 0.
Formula exact_negation(const Formula& f);
/// 1 -. f.
Formula approx_negation(const Formula& f);
/// Exact negation of sup_x̄ (exact negation of f): 0 iff some witness makes f 0.
Formula exact_exists(const Formula& f, std::span<const std::string> vars);

/// Connective expression over numbered input slots, possibly depending on
/// the indices of enclosing limits.
struct Skeleton {
  enum class Kind { kSlot, kConst, kRecip, kBinary, kScale };

  Kind kind = Kind::kConst;
  std::size_t slot = 0;  // 1-based, for kSlot
  Affine value;          // kConst value, kRecip denominator, kScale factor
  Connective op = Connective::kMax;
  std::vector<std::shared_ptr<const Skeleton>> args;

  static std::shared_ptr<const Skeleton> input(std::size_t slot);
  static std::shared_ptr<const Skeleton> constant(Rational v);
  static std::shared_ptr<const Skeleton> recip(Affine denominator);
  static std::shared_ptr<const Skeleton> binary(Connective op, std::shared_ptr<const Skeleton> lhs,
                                                std::shared_ptr<const Skeleton> rhs);
  static std::shared_ptr<const Skeleton> scale(Affine factor, std::shared_ptr<const Skeleton> body);
};

/// A function in the Baire hierarchy: a continuous leaf, or the pointwise
/// limit (taken as lim inf_k sup_{m >= k}) of a sequence indexed by `index`.
struct BaireDescription {
  enum class Kind { kLeaf, kLimit };

  Kind kind = Kind::kLeaf;
  std::shared_ptr<const Skeleton> leaf;
  std::string index;
  std::shared_ptr<const BaireDescription> body;

  static BaireDescription make_leaf(std::shared_ptr<const Skeleton> leaf);
  static BaireDescription make_limit(std::string index, BaireDescription body);
};

/// Highest slot number used; compilation needs exactly that many inputs.
std::size_t slot_count(const BaireDescription& u);
/// Number of nested limits.
std::size_t baire_depth(const BaireDescription& u);

/// Syntax: (limit k D) | LEAF, where LEAF is z (slot 1), zK or (slot K),
/// (const q), (recip E), (sub A B), (add A B), (min A B), (max A B) or
/// (scale E A), and E is a meta-expression over enclosing limit indices.
BaireDescription parse_baire(std::string_view text);
std::string print_baire(const BaireDescription& u);

/// Leaf: the skeleton with inputs plugged in. Limit at nesting depth d:
///   iinf k<d> nat (isup m<d> (from k<d>) body[index := m<d>]).
/// Throws Error if inputs.size() != slot_count(u).
Formula borel_compile(const BaireDescription& u, std::span<const Formula> inputs);

}  // namespace inflogic
