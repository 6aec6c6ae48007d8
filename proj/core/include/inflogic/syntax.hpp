#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "inflogic/formula.hpp"

namespace inflogic {

/// Syntax error with a 1-based source position.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column);

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  /// Message without the position prefix.
  const std::string& detail() const { return detail_; }

 private:
  std::string detail_;
  std::size_t line_;
  std::size_t column_;
};

/// A formula that parsed but violates well-formedness.
class IllFormedError : public Error {
 public:
  explicit IllFormedError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// Raw S-expression with source positions.
struct SExpr {
  bool is_list = false;
  std::string atom;
  std::vector<SExpr> items;
  std::size_t line = 1;
  std::size_t column = 1;
};

/// Reads exactly one S-expression; ';' starts a comment.
SExpr read_sexpr(std::string_view text);

/// Parses a meta-expression (rational, index, (* c E), (+ E E)); every index
/// must appear in `indices`.
Affine parse_affine(const SExpr& e, std::span<const std::string> indices);

/// Parses the S-expression syntax against a signature:
///
///   (d t u) (P t ...) (const q) (recip E) (sub f g) (add f g) (min f g)
///   (max f g) (scale E f) (sup x f) (inf x f) (isup n R f) (iinf n R f)
///   (rho (s ...) (y ...) f) (rho (y ...) f) (ind f)
///
/// where R is nat, (upto k) or (from j), and E is a rational, an index, or
/// built from (* c E) and (+ E E). Terms are identifiers or (f t ...).
/// The short rho form uses the slot x for one bound variable and x1..xk
/// otherwise. Comments run from ';' to the end of the line.
Formula parse_formula(std::string_view text, const Signature& sig);

struct InferredFormula {
  Formula formula;
  Signature signature;
};

/// Parses without a signature: unknown formula heads become predicates and
/// term heads become functions, each with the arity of its first use and
/// Lipschitz constant 1. Every bare identifier is a variable.
InferredFormula parse_formula_inferring(std::string_view text);

std::string print_term(const Term& t);
std::string print_affine(const Affine& a);
std::string print_range(const IndexRange& r);
/// Canonical single-line form; parse_formula inverts it.
std::string print_formula(const Formula& f);

}  // namespace inflogic
