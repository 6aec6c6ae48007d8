#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "inflogic/formula.hpp"
#include "inflogic/structure.hpp"

namespace inflogic {

/// Raised for structures outside the scope of Scott analysis (function
/// symbols) or for tuples longer than a table's arity cap.
class ScottError : public Error {
 public:
  using Error::Error;
};

/// A table that some automorphism does not preserve.
class NotInvariantError : public Error {
 public:
  NotInvariantError(const std::string& message, Automorphism witness, Tuple tuple);
  const Automorphism& witness() const { return witness_; }
  /// A tuple whose value differs from the value at its image.
  const Tuple& tuple() const { return tuple_; }

 private:
  Automorphism witness_;
  Tuple tuple_;
};

/// Back-and-forth hierarchy of a structure up to a fixed tuple length.
///
/// For a tuple a of length k the stage formulas phi^m_a have free variables
/// y1..yk. Stage 0 is the largest deviation of any atomic formula
/// (d(yi,yj), d(yi,c), R(yi...)) from its value at a; stage m+1 adds the
/// forth and back conditions
///   max_c inf_{y(k+1)} phi^m_{ac}    and    sup_{y(k+1)} min_c phi^m_{ac}
/// for k below the cap. Values on the structure itself are kept as exact
/// matrices; construction stops at the first stage where no matrix changes.
class BackAndForthTable {
 public:
  std::size_t arity_cap() const { return cap_; }
  /// First stage m* with phi^{m*+1} = phi^{m*} on the structure.
  std::size_t stable_stage() const { return stable_; }
  const FiniteStructure& structure() const { return *m_; }

  /// phi^{m*}_a(b) on the structure.
  Rational value(std::span<const PointId> a, std::span<const PointId> b) const;
  /// phi^{m*}_a.
  const Formula& formula(std::span<const PointId> a) const;
  /// phi^m_a for m <= stable_stage().
  const Formula& stage_formula(std::span<const PointId> a, std::size_t stage) const;

  /// y1..yk.
  static std::vector<std::string> variables(std::size_t k);

 private:
  friend BackAndForthTable bf_tables(const FiniteStructure& m, std::size_t arity_cap);

  std::size_t code(std::span<const PointId> t) const;

  std::shared_ptr<const FiniteStructure> m_;
  std::size_t cap_ = 0;
  std::size_t stable_ = 0;
  std::vector<Rational> levels_;                        // value of each rank
  std::vector<std::vector<std::uint16_t>> ranks_;        // [k][code(a) * n^k + code(b)]
  std::vector<std::vector<std::vector<Formula>>> stages_;  // [m][k][code(a)]
};

/// Throws ScottError if the signature has function symbols.
BackAndForthTable bf_tables(const FiniteStructure& m, std::size_t arity_cap);

/// ind(phi^{m*}_a): {0,1}-valued, 0 exactly on the orbit of a when the table
/// cap is large enough (orbit_cap guarantees it). Throws ScottError if |a|
/// exceeds the cap.
Formula theta_formula(const BackAndForthTable& table, std::span<const PointId> a);
/// Builds a table with the smallest cap whose arity-|a| level matches the
/// automorphism orbits, then returns theta_a.
Formula theta_formula(const FiniteStructure& m, std::span<const PointId> a);

/// A cap that always separates orbits of k-tuples: enough extension rounds
/// to enumerate every point.
std::size_t orbit_cap(const FiniteStructure& m, std::size_t k);
/// Smallest cap >= k whose stabilized arity-k zero pattern equals the orbit
/// relation, and its table.
BackAndForthTable orbit_table(const FiniteStructure& m, std::size_t k);

/// Sentence that is 0 exactly on structures isomorphic to m:
///   max(theta_(), clauses for every tuple a of length k <= |m|)
/// where the clause for a says: wherever theta_a holds, every extension ac
/// is realized (forth) and every new point realizes some ac (back).
Formula scott_sentence(const FiniteStructure& m);

/// sigma_m is 0 on n and sigma_n is 0 on m. False when signatures differ.
bool check_elementary_equivalence(const FiniteStructure& m, const FiniteStructure& n);

/// Formula phi(x1..xk) with P <= phi <= P + 1/grid on the structure, built
/// from theta formulas over the grid eps = j/grid. Throws Error for a table
/// that is not total or not [0,1]-valued, and NotInvariantError when some
/// automorphism moves P.
Formula define_invariant_predicate(const FiniteStructure& m, const TupleTable& p, std::int64_t grid);

struct ParameterDefinition {
  FiniteStructure structure;           // m with a constant for each parameter
  std::vector<std::string> constants;  // names of the new constants, in order
  Formula formula;
};

/// Names each parameter by a fresh constant and defines P over the extended
/// structure; P must be invariant under automorphisms fixing the parameters.
ParameterDefinition define_with_parameters(const FiniteStructure& m, const TupleTable& p,
                                           std::span<const PointId> params, std::int64_t grid);

}  // namespace inflogic
