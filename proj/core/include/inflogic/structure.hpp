#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "inflogic/rational.hpp"

namespace inflogic {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using PointId = std::size_t;
using Tuple = std::vector<PointId>;

/// A predicate or function symbol. The modulus of uniform continuity is
/// restricted to Lipschitz form: delta(eps) = eps / lipschitz.
struct SymbolDecl {
  std::string name;
  std::size_t arity = 1;
  Rational lipschitz = Rational(1);

  friend bool operator==(const SymbolDecl&, const SymbolDecl&) = default;
};

struct Signature {
  std::vector<SymbolDecl> predicates;
  std::vector<SymbolDecl> functions;
  std::vector<std::string> constants;

  const SymbolDecl* find_predicate(std::string_view name) const;
  const SymbolDecl* find_function(std::string_view name) const;
  bool has_constant(std::string_view name) const;
  /// True if `name` is used by any predicate, function or constant.
  bool uses_name(std::string_view name) const;

  friend bool operator==(const Signature&, const Signature&) = default;
};

struct Violation {
  enum class Kind {
    kSignature,
    kMissingEntry,
    kSelfDistance,
    kAsymmetric,
    kNegativeDistance,
    kZeroDistance,
    kDiameter,
    kTriangle,
    kPredicateRange,
    kLipschitz,
    kBadReference,
  };
  Kind kind;
  std::string message;
  std::vector<std::string> points;

  friend bool operator==(const Violation&, const Violation&) = default;
};

std::string_view to_string(Violation::Kind kind);

/// A finite metric structure over a signature. Tables are dense, indexed by
/// mixed-radix tuple codes; unset entries are reported by validation.
class FiniteStructure {
 public:
  FiniteStructure(Signature signature, std::vector<std::string> points);

  const Signature& signature() const { return signature_; }
  std::size_t size() const { return points_.size(); }
  const std::vector<std::string>& points() const { return points_; }
  const std::string& point_name(PointId p) const { return points_.at(p); }
  std::optional<PointId> find_point(std::string_view name) const;

  /// Sets d(a, b) and d(b, a).
  void set_distance(PointId a, PointId b, const Rational& d);
  /// Sets only d(a, b); used by loaders that must detect asymmetric input.
  void set_directed_distance(PointId a, PointId b, const Rational& d);
  const Rational& distance(PointId a, PointId b) const;
  bool has_distance(PointId a, PointId b) const;
  /// Sup-metric on equal-length tuples.
  Rational tuple_distance(std::span<const PointId> a, std::span<const PointId> b) const;

  void set_predicate(std::string_view name, std::span<const PointId> args, const Rational& value);
  const Rational& predicate(std::string_view name, std::span<const PointId> args) const;
  bool has_predicate_entry(std::string_view name, std::span<const PointId> args) const;

  void set_function(std::string_view name, std::span<const PointId> args, PointId value);
  PointId function(std::string_view name, std::span<const PointId> args) const;
  bool has_function_entry(std::string_view name, std::span<const PointId> args) const;

  void set_constant(std::string_view name, PointId p);
  PointId constant(std::string_view name) const;
  bool has_constant_value(std::string_view name) const;

  std::size_t tuple_code(std::span<const PointId> tuple) const;
  Tuple tuple_from_code(std::size_t code, std::size_t arity) const;
  std::size_t tuple_count(std::size_t arity) const;

  /// Comma-joined point names, the key format used in structure files.
  std::string tuple_key(std::span<const PointId> tuple) const;

 private:
  std::size_t predicate_slot(std::string_view name) const;
  std::size_t function_slot(std::string_view name) const;
  std::size_t constant_slot(std::string_view name) const;

  Signature signature_;
  std::vector<std::string> points_;
  std::vector<std::optional<Rational>> distances_;
  std::vector<std::vector<std::optional<Rational>>> predicate_tables_;
  std::vector<std::vector<std::optional<PointId>>> function_tables_;
  std::vector<std::optional<PointId>> constant_values_;
};

/// A [0,1]-valued table on n-tuples of points, e.g. a candidate predicate.
struct TupleTable {
  std::size_t arity = 1;
  std::map<Tuple, Rational> values;
};

/// Every violated structure axiom, with witnessing points. Empty iff valid.
std::vector<Violation> validate_structure(const FiniteStructure& m);

/// A bijection of the carrier, image[p] is the image of point p.
struct Automorphism {
  std::vector<PointId> image;

  Tuple apply(std::span<const PointId> tuple) const;
  bool is_identity() const;
  Automorphism compose(const Automorphism& inner) const;  // this o inner
  Automorphism inverse() const;

  friend auto operator<=>(const Automorphism&, const Automorphism&) = default;
};

/// True iff `perm` preserves distances, predicate and function tables, and
/// fixes every constant.
bool is_automorphism(const FiniteStructure& m, std::span<const PointId> perm);

/// All automorphisms by brute force over bijections, in lexicographic order of
/// the image vector (so the identity comes first).
std::vector<Automorphism> enumerate_automorphisms(const FiniteStructure& m);

std::set<Tuple> orbit(const FiniteStructure& m, std::span<const PointId> tuple);
std::set<Tuple> orbit(std::span<const Automorphism> group, std::span<const PointId> tuple);

/// True iff some bijection carries `m` onto `n` preserving all structure.
/// Structures over different signatures are never isomorphic.
bool brute_force_isomorphic(const FiniteStructure& m, const FiniteStructure& n);

/// Same carrier and tables, with fresh constant symbols naming the given points.
/// Throws Error on a name collision.
FiniteStructure add_constants(const FiniteStructure& m, const std::map<std::string, PointId>& assignment);

}  // namespace inflogic
