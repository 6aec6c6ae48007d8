#include "inflogic/structure.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace inflogic {
namespace {

const SymbolDecl* find_symbol(const std::vector<SymbolDecl>& symbols, std::string_view name) {
  for (const auto& s : symbols) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

std::size_t ipow(std::size_t base, std::size_t exp) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < exp; ++i) r *= base;
  return r;
}

}  // namespace

const SymbolDecl* Signature::find_predicate(std::string_view name) const {
  return find_symbol(predicates, name);
}

const SymbolDecl* Signature::find_function(std::string_view name) const {
  return find_symbol(functions, name);
}

bool Signature::has_constant(std::string_view name) const {
  return std::find(constants.begin(), constants.end(), name) != constants.end();
}

bool Signature::uses_name(std::string_view name) const {
  return find_predicate(name) != nullptr || find_function(name) != nullptr || has_constant(name);
}

std::string_view to_string(Violation::Kind kind) {
  switch (kind) {
    case Violation::Kind::kSignature: return "signature";
    case Violation::Kind::kMissingEntry: return "missing-entry";
    case Violation::Kind::kSelfDistance: return "self-distance";
    case Violation::Kind::kAsymmetric: return "asymmetric";
    case Violation::Kind::kNegativeDistance: return "negative-distance";
    case Violation::Kind::kZeroDistance: return "zero-distance";
    case Violation::Kind::kDiameter: return "diameter";
    case Violation::Kind::kTriangle: return "triangle";
    case Violation::Kind::kPredicateRange: return "predicate-range";
    case Violation::Kind::kLipschitz: return "lipschitz";
    case Violation::Kind::kBadReference: return "bad-reference";
  }
  return "unknown";
}

FiniteStructure::FiniteStructure(Signature signature, std::vector<std::string> points)
    : signature_(std::move(signature)), points_(std::move(points)) {
  const std::size_t n = points_.size();
  distances_.assign(n * n, std::nullopt);
  for (std::size_t i = 0; i < n; ++i) distances_[i * n + i] = Rational(0);
  for (const auto& p : signature_.predicates) {
    predicate_tables_.emplace_back(ipow(n, p.arity));
  }
  for (const auto& f : signature_.functions) {
    function_tables_.emplace_back(ipow(n, f.arity));
  }
  constant_values_.assign(signature_.constants.size(), std::nullopt);
}

std::optional<PointId> FiniteStructure::find_point(std::string_view name) const {
  for (PointId i = 0; i < points_.size(); ++i) {
    if (points_[i] == name) return i;
  }
  return std::nullopt;
}

void FiniteStructure::set_distance(PointId a, PointId b, const Rational& d) {
  set_directed_distance(a, b, d);
  set_directed_distance(b, a, d);
}

void FiniteStructure::set_directed_distance(PointId a, PointId b, const Rational& d) {
  if (a >= size() || b >= size()) throw Error("distance: point out of range");
  distances_[a * size() + b] = d;
}

const Rational& FiniteStructure::distance(PointId a, PointId b) const {
  const auto& d = distances_.at(a * size() + b);
  if (!d) throw Error("distance between " + points_[a] + " and " + points_[b] + " is not set");
  return *d;
}

bool FiniteStructure::has_distance(PointId a, PointId b) const {
  return distances_.at(a * size() + b).has_value();
}

Rational FiniteStructure::tuple_distance(std::span<const PointId> a, std::span<const PointId> b) const {
  if (a.size() != b.size()) throw Error("tuple distance: length mismatch");
  Rational best(0);
  for (std::size_t i = 0; i < a.size(); ++i) best = std::max(best, distance(a[i], b[i]));
  return best;
}

std::size_t FiniteStructure::predicate_slot(std::string_view name) const {
  for (std::size_t i = 0; i < signature_.predicates.size(); ++i) {
    if (signature_.predicates[i].name == name) return i;
  }
  throw Error("unknown predicate symbol '" + std::string(name) + "'");
}

std::size_t FiniteStructure::function_slot(std::string_view name) const {
  for (std::size_t i = 0; i < signature_.functions.size(); ++i) {
    if (signature_.functions[i].name == name) return i;
  }
  throw Error("unknown function symbol '" + std::string(name) + "'");
}

std::size_t FiniteStructure::constant_slot(std::string_view name) const {
  for (std::size_t i = 0; i < signature_.constants.size(); ++i) {
    if (signature_.constants[i] == name) return i;
  }
  throw Error("unknown constant symbol '" + std::string(name) + "'");
}

std::size_t FiniteStructure::tuple_code(std::span<const PointId> tuple) const {
  std::size_t code = 0;
  for (PointId p : tuple) {
    if (p >= size()) throw Error("tuple: point out of range");
    code = code * size() + p;
  }
  return code;
}

Tuple FiniteStructure::tuple_from_code(std::size_t code, std::size_t arity) const {
  Tuple t(arity);
  for (std::size_t i = arity; i-- > 0;) {
    t[i] = code % size();
    code /= size();
  }
  return t;
}

std::size_t FiniteStructure::tuple_count(std::size_t arity) const { return ipow(size(), arity); }

std::string FiniteStructure::tuple_key(std::span<const PointId> tuple) const {
  std::string key;
  for (std::size_t i = 0; i < tuple.size(); ++i) {
    if (i > 0) key += ',';
    key += points_.at(tuple[i]);
  }
  return key;
}

void FiniteStructure::set_predicate(std::string_view name, std::span<const PointId> args,
                                    const Rational& value) {
  std::size_t slot = predicate_slot(name);
  if (args.size() != signature_.predicates[slot].arity) throw Error("predicate arity mismatch");
  predicate_tables_[slot][tuple_code(args)] = value;
}

const Rational& FiniteStructure::predicate(std::string_view name, std::span<const PointId> args) const {
  std::size_t slot = predicate_slot(name);
  if (args.size() != signature_.predicates[slot].arity) throw Error("predicate arity mismatch");
  const auto& v = predicate_tables_[slot][tuple_code(args)];
  if (!v) throw Error("predicate " + std::string(name) + " undefined at (" + tuple_key(args) + ")");
  return *v;
}

bool FiniteStructure::has_predicate_entry(std::string_view name, std::span<const PointId> args) const {
  return predicate_tables_[predicate_slot(name)][tuple_code(args)].has_value();
}

void FiniteStructure::set_function(std::string_view name, std::span<const PointId> args, PointId value) {
  std::size_t slot = function_slot(name);
  if (args.size() != signature_.functions[slot].arity) throw Error("function arity mismatch");
  if (value >= size()) throw Error("function value out of range");
  function_tables_[slot][tuple_code(args)] = value;
}

PointId FiniteStructure::function(std::string_view name, std::span<const PointId> args) const {
  std::size_t slot = function_slot(name);
  if (args.size() != signature_.functions[slot].arity) throw Error("function arity mismatch");
  const auto& v = function_tables_[slot][tuple_code(args)];
  if (!v) throw Error("function " + std::string(name) + " undefined at (" + tuple_key(args) + ")");
  return *v;
}

bool FiniteStructure::has_function_entry(std::string_view name, std::span<const PointId> args) const {
  return function_tables_[function_slot(name)][tuple_code(args)].has_value();
}

void FiniteStructure::set_constant(std::string_view name, PointId p) {
  if (p >= size()) throw Error("constant value out of range");
  constant_values_[constant_slot(name)] = p;
}

PointId FiniteStructure::constant(std::string_view name) const {
  const auto& v = constant_values_[constant_slot(name)];
  if (!v) throw Error("constant " + std::string(name) + " is not interpreted");
  return *v;
}

bool FiniteStructure::has_constant_value(std::string_view name) const {
  return constant_values_[constant_slot(name)].has_value();
}

namespace {

void check_signature(const Signature& sig, std::vector<Violation>& out) {
  std::set<std::string> seen;
  auto note = [&](const std::string& name) {
    if (!seen.insert(name).second) {
      out.push_back({Violation::Kind::kSignature, "symbol name '" + name + "' is declared twice", {}});
    }
  };
  for (const auto* group : {&sig.predicates, &sig.functions}) {
    for (const auto& s : *group) {
      note(s.name);
      if (s.arity == 0) {
        out.push_back({Violation::Kind::kSignature, "symbol '" + s.name + "' has arity 0", {}});
      }
      if (s.lipschitz < Rational(0)) {
        out.push_back({Violation::Kind::kSignature, "symbol '" + s.name + "' has negative Lipschitz constant", {}});
      }
    }
  }
  for (const auto& c : sig.constants) note(c);
}

}  // namespace

std::vector<Violation> validate_structure(const FiniteStructure& m) {
  std::vector<Violation> out;
  check_signature(m.signature(), out);
  const std::size_t n = m.size();
  if (n == 0) {
    out.push_back({Violation::Kind::kSignature, "structure has no points", {}});
    return out;
  }
  {
    std::set<std::string> names;
    for (const auto& p : m.points()) {
      if (!names.insert(p).second) {
        out.push_back({Violation::Kind::kSignature, "point name '" + p + "' is used twice", {p}});
      }
    }
  }

  const auto& pts = m.points();
  bool metric_complete = true;
  for (PointId a = 0; a < n; ++a) {
    for (PointId b = 0; b < n; ++b) {
      if (!m.has_distance(a, b)) {
        metric_complete = false;
        if (a < b || !m.has_distance(b, a)) {
          out.push_back({Violation::Kind::kMissingEntry,
                         "distance d(" + pts[a] + "," + pts[b] + ") is missing", {pts[a], pts[b]}});
        }
      }
    }
  }
  if (metric_complete) {
    for (PointId a = 0; a < n; ++a) {
      if (!m.distance(a, a).is_zero()) {
        out.push_back({Violation::Kind::kSelfDistance, "d(" + pts[a] + "," + pts[a] + ") is not 0", {pts[a]}});
      }
      for (PointId b = a + 1; b < n; ++b) {
        const Rational& d = m.distance(a, b);
        std::vector<std::string> w{pts[a], pts[b]};
        if (d != m.distance(b, a)) {
          out.push_back({Violation::Kind::kAsymmetric,
                         "d(" + pts[a] + "," + pts[b] + ") differs from d(" + pts[b] + "," + pts[a] + ")", w});
        }
        if (d < Rational(0)) {
          out.push_back({Violation::Kind::kNegativeDistance, "d(" + pts[a] + "," + pts[b] + ") is negative", w});
        } else if (d.is_zero()) {
          out.push_back({Violation::Kind::kZeroDistance,
                         "d(" + pts[a] + "," + pts[b] + ") = 0 for distinct points", w});
        }
        if (d > Rational(1)) {
          out.push_back({Violation::Kind::kDiameter,
                         "d(" + pts[a] + "," + pts[b] + ") = " + d.to_string() + " exceeds diameter 1", w});
        }
      }
    }
    for (PointId a = 0; a < n; ++a) {
      for (PointId c = a + 1; c < n; ++c) {
        for (PointId b = 0; b < n; ++b) {
          if (b == a || b == c) continue;
          if (m.distance(a, c) > m.distance(a, b) + m.distance(b, c)) {
            out.push_back({Violation::Kind::kTriangle,
                           "triangle inequality fails: d(" + pts[a] + "," + pts[c] + ") > d(" + pts[a] + "," +
                               pts[b] + ") + d(" + pts[b] + "," + pts[c] + ")",
                           {pts[a], pts[b], pts[c]}});
          }
        }
      }
    }
  }

  for (const auto& p : m.signature().predicates) {
    const std::size_t count = m.tuple_count(p.arity);
    bool complete = true;
    for (std::size_t code = 0; code < count; ++code) {
      Tuple t = m.tuple_from_code(code, p.arity);
      if (!m.has_predicate_entry(p.name, t)) {
        complete = false;
        out.push_back({Violation::Kind::kMissingEntry,
                       "predicate " + p.name + " undefined at (" + m.tuple_key(t) + ")", {m.tuple_key(t)}});
        continue;
      }
      const Rational& v = m.predicate(p.name, t);
      if (v < Rational(0) || v > Rational(1)) {
        out.push_back({Violation::Kind::kPredicateRange,
                       "predicate " + p.name + " at (" + m.tuple_key(t) + ") = " + v.to_string() + " outside [0,1]",
                       {m.tuple_key(t)}});
      }
    }
    if (!complete || !metric_complete) continue;
    for (std::size_t u = 0; u < count; ++u) {
      Tuple tu = m.tuple_from_code(u, p.arity);
      for (std::size_t v = u + 1; v < count; ++v) {
        Tuple tv = m.tuple_from_code(v, p.arity);
        Rational diff = abs(m.predicate(p.name, tu) - m.predicate(p.name, tv));
        Rational d = m.tuple_distance(tu, tv);
        if (diff > p.lipschitz * d) {
          out.push_back({Violation::Kind::kLipschitz,
                         "predicate " + p.name + " is not " + p.lipschitz.to_string() + "-Lipschitz at (" +
                             m.tuple_key(tu) + ") vs (" + m.tuple_key(tv) + "): " + diff.to_string() + " > " +
                             p.lipschitz.to_string() + " * " + d.to_string(),
                         {m.tuple_key(tu), m.tuple_key(tv)}});
        }
      }
    }
  }

  for (const auto& f : m.signature().functions) {
    const std::size_t count = m.tuple_count(f.arity);
    bool complete = true;
    for (std::size_t code = 0; code < count; ++code) {
      Tuple t = m.tuple_from_code(code, f.arity);
      if (!m.has_function_entry(f.name, t)) {
        complete = false;
        out.push_back({Violation::Kind::kMissingEntry,
                       "function " + f.name + " undefined at (" + m.tuple_key(t) + ")", {m.tuple_key(t)}});
      }
    }
    if (!complete || !metric_complete) continue;
    for (std::size_t u = 0; u < count; ++u) {
      Tuple tu = m.tuple_from_code(u, f.arity);
      for (std::size_t v = u + 1; v < count; ++v) {
        Tuple tv = m.tuple_from_code(v, f.arity);
        const Rational& image_d = m.distance(m.function(f.name, tu), m.function(f.name, tv));
        Rational d = m.tuple_distance(tu, tv);
        if (image_d > f.lipschitz * d) {
          out.push_back({Violation::Kind::kLipschitz,
                         "function " + f.name + " is not " + f.lipschitz.to_string() + "-Lipschitz at (" +
                             m.tuple_key(tu) + ") vs (" + m.tuple_key(tv) + ")",
                         {m.tuple_key(tu), m.tuple_key(tv)}});
        }
      }
    }
  }

  for (const auto& c : m.signature().constants) {
    if (!m.has_constant_value(c)) {
      out.push_back({Violation::Kind::kMissingEntry, "constant " + c + " is not interpreted", {}});
    }
  }
  return out;
}

Tuple Automorphism::apply(std::span<const PointId> tuple) const {
  Tuple out;
  out.reserve(tuple.size());
  for (PointId p : tuple) out.push_back(image.at(p));
  return out;
}

bool Automorphism::is_identity() const {
  for (PointId i = 0; i < image.size(); ++i) {
    if (image[i] != i) return false;
  }
  return true;
}

Automorphism Automorphism::compose(const Automorphism& inner) const {
  Automorphism out;
  out.image.reserve(inner.image.size());
  for (PointId p : inner.image) out.image.push_back(image.at(p));
  return out;
}

Automorphism Automorphism::inverse() const {
  Automorphism out;
  out.image.resize(image.size());
  for (PointId i = 0; i < image.size(); ++i) out.image[image[i]] = i;
  return out;
}

namespace {

// Checks that `perm` carries m onto n isomorphically. Both structures must be
// over the same signature and carrier size.
bool preserves(const FiniteStructure& m, const FiniteStructure& n, std::span<const PointId> perm) {
  const std::size_t size = m.size();
  for (const auto& c : m.signature().constants) {
    if (perm[m.constant(c)] != n.constant(c)) return false;
  }
  for (PointId a = 0; a < size; ++a) {
    for (PointId b = a + 1; b < size; ++b) {
      if (m.distance(a, b) != n.distance(perm[a], perm[b])) return false;
    }
  }
  Tuple image;
  for (const auto& p : m.signature().predicates) {
    const std::size_t count = m.tuple_count(p.arity);
    for (std::size_t code = 0; code < count; ++code) {
      Tuple t = m.tuple_from_code(code, p.arity);
      image.clear();
      for (PointId x : t) image.push_back(perm[x]);
      if (m.predicate(p.name, t) != n.predicate(p.name, image)) return false;
    }
  }
  for (const auto& f : m.signature().functions) {
    const std::size_t count = m.tuple_count(f.arity);
    for (std::size_t code = 0; code < count; ++code) {
      Tuple t = m.tuple_from_code(code, f.arity);
      image.clear();
      for (PointId x : t) image.push_back(perm[x]);
      if (perm[m.function(f.name, t)] != n.function(f.name, image)) return false;
    }
  }
  return true;
}

}  // namespace

bool is_automorphism(const FiniteStructure& m, std::span<const PointId> perm) {
  if (perm.size() != m.size()) return false;
  std::vector<bool> hit(m.size(), false);
  for (PointId p : perm) {
    if (p >= m.size() || hit[p]) return false;
    hit[p] = true;
  }
  return preserves(m, m, perm);
}

std::vector<Automorphism> enumerate_automorphisms(const FiniteStructure& m) {
  std::vector<Automorphism> out;
  std::vector<PointId> perm(m.size());
  std::iota(perm.begin(), perm.end(), PointId{0});
  do {
    if (preserves(m, m, perm)) out.push_back(Automorphism{perm});
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

std::set<Tuple> orbit(std::span<const Automorphism> group, std::span<const PointId> tuple) {
  std::set<Tuple> out;
  for (const auto& g : group) out.insert(g.apply(tuple));
  return out;
}

std::set<Tuple> orbit(const FiniteStructure& m, std::span<const PointId> tuple) {
  auto group = enumerate_automorphisms(m);
  return orbit(group, tuple);
}

bool brute_force_isomorphic(const FiniteStructure& m, const FiniteStructure& n) {
  if (m.size() != n.size() || !(m.signature() == n.signature())) return false;
  std::vector<PointId> perm(m.size());
  std::iota(perm.begin(), perm.end(), PointId{0});
  do {
    if (preserves(m, n, perm)) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

FiniteStructure add_constants(const FiniteStructure& m, const std::map<std::string, PointId>& assignment) {
  Signature sig = m.signature();
  for (const auto& [name, point] : assignment) {
    if (sig.uses_name(name)) throw Error("constant name '" + name + "' is already in the signature");
    if (point >= m.size()) throw Error("constant '" + name + "' names a point out of range");
    sig.constants.push_back(name);
  }
  FiniteStructure out(sig, m.points());
  for (PointId a = 0; a < m.size(); ++a) {
    for (PointId b = 0; b < m.size(); ++b) {
      if (m.has_distance(a, b)) out.set_directed_distance(a, b, m.distance(a, b));
    }
  }
  for (const auto& p : m.signature().predicates) {
    for (std::size_t code = 0; code < m.tuple_count(p.arity); ++code) {
      Tuple t = m.tuple_from_code(code, p.arity);
      if (m.has_predicate_entry(p.name, t)) out.set_predicate(p.name, t, m.predicate(p.name, t));
    }
  }
  for (const auto& f : m.signature().functions) {
    for (std::size_t code = 0; code < m.tuple_count(f.arity); ++code) {
      Tuple t = m.tuple_from_code(code, f.arity);
      if (m.has_function_entry(f.name, t)) out.set_function(f.name, t, m.function(f.name, t));
    }
  }
  for (const auto& c : m.signature().constants) {
    if (m.has_constant_value(c)) out.set_constant(c, m.constant(c));
  }
  for (const auto& [name, point] : assignment) out.set_constant(name, point);
  return out;
}

}  // namespace inflogic
