#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "inflogic/evaluator.hpp"
#include "inflogic/formula.hpp"
#include "inflogic/structure.hpp"
#include "inflogic/syntax.hpp"

namespace inflogic {

// Readable gtest failure output.
inline void PrintTo(const Formula& f, std::ostream* os) { *os << print_formula(f); }

}  // namespace inflogic

namespace inflogic::testing {

// Hand-built reference structures. M1/M2 name their points with constants
// c1, c2 so that the indexed constant "cn" of the proxy sentence resolves.
FiniteStructure tri();
FiniteStructure sym();
FiniteStructure m1();
FiniteStructure m2();

/// Path of a file under tests/fixtures.
std::string fixture_path(const std::string& name);

inline const char* kProxySentence = "(sup x (iinf n (upto 2) (isup R nat (scale R (d x cn)))))";

Rational rat(std::int64_t p, std::int64_t q = 1);

struct CorpusOptions {
  std::size_t min_points = 2;
  std::size_t max_points = 5;
  std::size_t max_constants = 2;
  bool binary_predicates = true;
};

/// A valid structure. Half of the draws use coarse values (distances in
/// {1/2, 1}, predicate values in {0, 1/2, 1}) so that symmetric structures
/// are common; the rest use denominators up to 12.
FiniteStructure random_structure(std::mt19937& rng, const CorpusOptions& options = {});

/// `count` random structures followed by TRI, SYM, M1, M2.
std::vector<FiniteStructure> corpus(std::size_t count, std::uint32_t seed, const CorpusOptions& options = {});

/// Same structure with points permuted and renamed.
FiniteStructure renamed_copy(const FiniteStructure& m, std::mt19937& rng);

/// One predicate entry changed to another legal value; nullopt when no entry
/// can change while keeping the structure valid.
std::optional<FiniteStructure> near_copy(const FiniteStructure& m, std::mt19937& rng);

struct FormulaOptions {
  std::vector<std::string> variables{"x", "y"};
  int max_depth = 4;
  bool quantifiers = true;
  bool rho = false;
  bool zero_test = false;
  bool finite_index = false;
  // Round-trip only: arbitrary infinite ranges, tails, affine factors,
  // indexed constants and function terms.
  bool syntax_only = false;
};

class FormulaGenerator {
 public:
  FormulaGenerator(Signature sig, FormulaOptions options, std::uint32_t seed);
  Formula next();
  std::mt19937& rng() { return rng_; }

 private:
  Formula gen(int depth, std::vector<std::string>& indices);
  Formula leaf(std::vector<std::string>& indices);
  Term term(std::vector<std::string>& indices, int depth);
  Affine affine(const std::vector<std::string>& indices, bool recip);
  Rational small_rational();
  std::string pick(const std::vector<std::string>& items);
  int uniform(int lo, int hi);

  Signature sig_;
  FormulaOptions options_;
  std::mt19937 rng_;
  int index_counter_ = 0;
  std::set<std::string> finite_indices_;  // bound by (upto k), k <= 3
};

/// All maps vars -> points, in lexicographic order.
std::vector<Assignment> all_assignments(const FiniteStructure& m, const std::vector<std::string>& vars);

namespace oracle {

class Unsupported : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Plain recursive semantics by direct enumeration, written independently of
/// the library evaluator. Infinite index families are supported only in the
/// literal zero-test shape sup_{n in N} min((r n + s) F, 1) with F free of
/// n, valued 0 if F = 0 and 1 otherwise; anything else throws Unsupported.
Rational value(const FiniteStructure& m, const Formula& f, const Assignment& env);

/// Distance from `point` to {b : value(body)[bound := b] = 0} in the sup
/// metric, 1 if that set is empty.
Rational zeroset_distance(const FiniteStructure& m, const Formula& body, const std::vector<std::string>& bound,
                          const std::vector<PointId>& point, const Assignment& env);

/// Permutations preserving every table and fixing every constant, by
/// std::next_permutation over the carrier.
std::vector<std::vector<PointId>> automorphisms(const FiniteStructure& m);

/// {g(t) : g automorphism}.
std::set<Tuple> orbit(const FiniteStructure& m, const Tuple& t);

bool isomorphic(const FiniteStructure& m, const FiniteStructure& n);

}  // namespace oracle

}  // namespace inflogic::testing
