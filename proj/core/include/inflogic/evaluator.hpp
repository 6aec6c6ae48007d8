#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "inflogic/formula.hpp"
#include "inflogic/structure.hpp"

namespace inflogic {

class EvalError : public Error {
 public:
  using Error::Error;
};

using Assignment = std::map<std::string, PointId>;

/// Either an exact value or certified bounds lo <= value <= hi obtained by
/// examining the first `budget` members of each unrecognized infinite family.
struct EvalResult {
  enum class Kind { kExact, kBounds };

  Kind kind = Kind::kExact;
  Rational lo;
  Rational hi;
  std::int64_t budget = 0;

  static EvalResult exact(Rational v) { return {Kind::kExact, v, v, 0}; }
  static EvalResult bounds(Rational lo, Rational hi, std::int64_t budget) { return {Kind::kBounds, lo, hi, budget}; }

  bool is_exact() const { return kind == Kind::kExact; }
  /// The exact value; throws EvalError for bounds.
  const Rational& value() const;

  friend bool operator==(const EvalResult&, const EvalResult&) = default;
};

std::string to_string(const EvalResult& r);

/// Evaluates formulas on one structure. Values of shared subformulas are
/// cached per assignment of their free variables, so repeated calls on
/// formulas that share structure (or on the same formula at many tuples)
/// reuse earlier work. Not thread-safe; use one instance per thread.
class Evaluator {
 public:
  explicit Evaluator(const FiniteStructure& m, std::int64_t budget = 64);
  ~Evaluator();
  Evaluator(const Evaluator&) = delete;
  Evaluator& operator=(const Evaluator&) = delete;

  /// Throws EvalError if env misses a free variable of f or names a point
  /// outside the structure.
  EvalResult evaluate(const Formula& f, const Assignment& env);
  /// Binds vars[i] to tuple[i].
  EvalResult evaluate(const Formula& f, std::span<const std::string> vars, std::span<const PointId> tuple);

  const FiniteStructure& structure() const;
  std::int64_t budget() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Throws EvalError if budget < 1 or env is incomplete.
EvalResult evaluate(const FiniteStructure& m, const Formula& f, const Assignment& env, std::int64_t budget = 64);

/// True iff the value is exactly 0. Throws EvalError when evaluation only
/// yields bounds.
bool satisfies(const FiniteStructure& m, const Formula& f, const Assignment& env, std::int64_t budget = 64);

/// F when f is sup_{i in R} min((r i + s) F, 1) with R infinite, r > 0 and F
/// not depending on i; the family then takes the value 0 where F = 0 and 1
/// elsewhere.
std::optional<Formula> recognize_zero_test(const Formula& f);

}  // namespace inflogic
