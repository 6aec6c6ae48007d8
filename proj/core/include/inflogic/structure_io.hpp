#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "inflogic/structure.hpp"

namespace inflogic {

/// Malformed JSON or a document that does not match the structure schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// A structure file that parsed but violates the metric-structure axioms.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

/// Builds a structure from JSON text without validating it. A metric entry
/// given in one direction only is mirrored; d(x,x) defaults to 0.
///
///   {"signature": {"predicates": [{"name": "P", "arity": 1, "lipschitz": "1"}],
///                  "functions": [], "constants": ["c"]},
///    "points": ["a", "b"],
///    "metric": {"a,b": "1/2"},
///    "predicates": {"P": {"a": "0/1", "b": "1/2"}},
///    "functions": {},
///    "constants": {"c": "a"}}
///
/// "metric" may also be an array of ["x", "y", "p/q"] triples.
FiniteStructure read_structure(std::string_view json_text);
/// read_structure followed by validate_structure; throws ValidationError.
FiniteStructure parse_structure(std::string_view json_text);
FiniteStructure load_structure(const std::string& path);

/// Canonical JSON text (sorted keys, every metric pair once, a < b).
std::string save_structure(const FiniteStructure& m);
void write_structure_file(const std::string& path, const FiniteStructure& m);

/// A JSON object mapping tuple keys to "p/q" values. All keys must have the
/// same length; the table need not be total.
TupleTable read_tuple_table(std::string_view json_text, const FiniteStructure& m);
TupleTable load_tuple_table(const std::string& path, const FiniteStructure& m);

std::string read_text_file(const std::string& path);

}  // namespace inflogic
