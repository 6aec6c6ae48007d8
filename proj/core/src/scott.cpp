#include "inflogic/scott.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "inflogic/evaluator.hpp"
#include "inflogic/transforms.hpp"

namespace inflogic {

NotInvariantError::NotInvariantError(const std::string& message, Automorphism witness, Tuple tuple)
    : Error(message), witness_(std::move(witness)), tuple_(std::move(tuple)) {}

namespace {

std::size_t ipow(std::size_t base, std::size_t exp) {
  std::size_t r = 1;
  while (exp-- > 0) r *= base;
  return r;
}

void require_relational(const FiniteStructure& m) {
  if (!m.signature().functions.empty()) {
    throw ScottError("Scott analysis needs a signature without function symbols");
  }
}

// Atomic formulas in the variables y1..yk, in a fixed order.
struct Atom {
  enum class Kind { kDist, kConstDist, kPred };
  Kind kind;
  std::size_t i = 0;
  std::size_t j = 0;
  std::string symbol;  // constant or predicate
  std::vector<std::size_t> positions;
};

std::vector<Atom> atoms_for(const Signature& sig, std::size_t k) {
  std::vector<Atom> out;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) out.push_back({Atom::Kind::kDist, i, j, {}, {}});
  }
  for (std::size_t i = 0; i < k; ++i) {
    for (const auto& c : sig.constants) out.push_back({Atom::Kind::kConstDist, i, 0, c, {}});
  }
  for (const auto& p : sig.predicates) {
    std::size_t count = ipow(k, p.arity);
    for (std::size_t code = 0; code < count; ++code) {
      std::vector<std::size_t> pos(p.arity);
      std::size_t c = code;
      for (std::size_t r = p.arity; r-- > 0;) {
        pos[r] = c % k;
        c /= k;
      }
      out.push_back({Atom::Kind::kPred, 0, 0, p.name, std::move(pos)});
    }
  }
  return out;
}

Rational atom_value(const FiniteStructure& m, const Atom& a, std::span<const PointId> t) {
  switch (a.kind) {
    case Atom::Kind::kDist:
      return m.distance(t[a.i], t[a.j]);
    case Atom::Kind::kConstDist:
      return m.distance(t[a.i], m.constant(a.symbol));
    case Atom::Kind::kPred: {
      Tuple args;
      for (auto p : a.positions) args.push_back(t[p]);
      return m.predicate(a.symbol, args);
    }
  }
  return Rational(0);
}

Formula atom_formula(const Atom& a, const std::vector<std::string>& ys) {
  switch (a.kind) {
    case Atom::Kind::kDist:
      return Formula::dist(Term::variable(ys[a.i]), Term::variable(ys[a.j]));
    case Atom::Kind::kConstDist:
      return Formula::dist(Term::variable(ys[a.i]), Term::constant(a.symbol));
    case Atom::Kind::kPred: {
      std::vector<Term> args;
      for (auto p : a.positions) args.push_back(Term::variable(ys[p]));
      return Formula::pred(a.symbol, std::move(args));
    }
  }
  return Formula::constant(Rational(0));
}

}  // namespace

std::vector<std::string> BackAndForthTable::variables(std::size_t k) {
  std::vector<std::string> out;
  for (std::size_t i = 1; i <= k; ++i) out.push_back("y" + std::to_string(i));
  return out;
}

std::size_t BackAndForthTable::code(std::span<const PointId> t) const {
  if (t.size() > cap_) {
    throw ScottError("tuple of length " + std::to_string(t.size()) + " exceeds the table's arity cap " +
                     std::to_string(cap_));
  }
  return m_->tuple_code(t);
}

Rational BackAndForthTable::value(std::span<const PointId> a, std::span<const PointId> b) const {
  if (a.size() != b.size()) throw ScottError("tuples of different lengths");
  std::size_t k = a.size();
  std::size_t index = code(a) * ipow(m_->size(), k) + code(b);
  return levels_[ranks_[k][index]];
}

const Formula& BackAndForthTable::formula(std::span<const PointId> a) const { return stage_formula(a, stable_); }

const Formula& BackAndForthTable::stage_formula(std::span<const PointId> a, std::size_t stage) const {
  if (stage > stable_) throw ScottError("stage " + std::to_string(stage) + " was not built");
  std::size_t c = code(a);
  return stages_[stage][a.size()][c];
}

BackAndForthTable bf_tables(const FiniteStructure& m, std::size_t arity_cap) {
  require_relational(m);
  const std::size_t n = m.size();
  const Signature& sig = m.signature();

  BackAndForthTable t;
  t.m_ = std::make_shared<const FiniteStructure>(m);
  t.cap_ = arity_cap;

  std::vector<std::vector<Atom>> atoms(arity_cap + 1);
  for (std::size_t k = 0; k <= arity_cap; ++k) atoms[k] = atoms_for(sig, k);

  // Every atomic value, then every difference of two; later stages only
  // take max and min, so all values stay in this finite set.
  std::set<Rational> atomic;
  for (PointId a = 0; a < n; ++a) {
    for (PointId b = 0; b < n; ++b) atomic.insert(m.distance(a, b));
  }
  for (const auto& p : sig.predicates) {
    for (std::size_t c = 0; c < m.tuple_count(p.arity); ++c) atomic.insert(m.predicate(p.name, m.tuple_from_code(c, p.arity)));
  }
  std::vector<Rational> values(atomic.begin(), atomic.end());
  std::set<Rational> diffs{Rational(0)};
  for (const auto& u : values) {
    for (const auto& v : values) diffs.insert(abs(u - v));
  }
  t.levels_.assign(diffs.begin(), diffs.end());
  if (t.levels_.size() > 0xFFFF) throw ScottError("too many distinct values for the table encoding");
  std::map<Rational, std::uint16_t> level_of;
  for (std::size_t i = 0; i < t.levels_.size(); ++i) level_of[t.levels_[i]] = static_cast<std::uint16_t>(i);
  const std::size_t vcount = values.size();
  std::vector<std::uint16_t> diff_rank(vcount * vcount);
  for (std::size_t i = 0; i < vcount; ++i) {
    for (std::size_t j = 0; j < vcount; ++j) diff_rank[i * vcount + j] = level_of.at(abs(values[i] - values[j]));
  }
  std::map<Rational, std::uint16_t> value_index;
  for (std::size_t i = 0; i < vcount; ++i) value_index[values[i]] = static_cast<std::uint16_t>(i);

  // Stage 0.
  t.ranks_.resize(arity_cap + 1);
  std::vector<std::vector<std::vector<std::uint16_t>>> profiles(arity_cap + 1);
  for (std::size_t k = 0; k <= arity_cap; ++k) {
    const std::size_t count = ipow(n, k);
    const std::size_t width = atoms[k].size();
    auto& prof = profiles[k];
    prof.assign(count, std::vector<std::uint16_t>(width));
    for (std::size_t c = 0; c < count; ++c) {
      Tuple tup = m.tuple_from_code(c, k);
      for (std::size_t i = 0; i < width; ++i) prof[c][i] = value_index.at(atom_value(m, atoms[k][i], tup));
    }
    auto& r = t.ranks_[k];
    r.assign(count * count, 0);
    for (std::size_t a = 0; a < count; ++a) {
      for (std::size_t b = a + 1; b < count; ++b) {
        std::uint16_t best = 0;
        for (std::size_t i = 0; i < width; ++i) best = std::max(best, diff_rank[prof[a][i] * vcount + prof[b][i]]);
        r[a * count + b] = best;
        r[b * count + a] = best;
      }
    }
  }

  // Successor stages until nothing changes.
  std::size_t stage = 0;
  for (;;) {
    bool changed = false;
    std::vector<std::vector<std::uint16_t>> next = t.ranks_;
    for (std::size_t k = 0; k < arity_cap; ++k) {
      const std::size_t count = ipow(n, k);
      const std::size_t wide = count * n;
      const auto& up = t.ranks_[k + 1];
      auto& cur = next[k];
      for (std::size_t a = 0; a < count; ++a) {
        for (std::size_t b = a; b < count; ++b) {
          std::uint16_t v = cur[a * count + b];
          // forth: max_c min_d, back: max_d min_c of phi_{ac}(bd)
          for (std::size_t c = 0; c < n; ++c) {
            std::uint16_t lo = 0xFFFF;
            for (std::size_t d = 0; d < n && lo > v; ++d) lo = std::min(lo, up[(a * n + c) * wide + b * n + d]);
            v = std::max(v, lo);
          }
          for (std::size_t d = 0; d < n; ++d) {
            std::uint16_t lo = 0xFFFF;
            for (std::size_t c = 0; c < n && lo > v; ++c) lo = std::min(lo, up[(a * n + c) * wide + b * n + d]);
            v = std::max(v, lo);
          }
          if (v != cur[a * count + b]) {
            changed = true;
            cur[a * count + b] = v;
            cur[b * count + a] = v;
          }
        }
      }
    }
    if (!changed) break;
    t.ranks_ = std::move(next);
    ++stage;
  }
  t.stable_ = stage;

  // Formulas for stages 0..m*.
  std::vector<std::vector<std::string>> ys(arity_cap + 2);
  for (std::size_t k = 0; k <= arity_cap + 1; ++k) ys[k] = BackAndForthTable::variables(k);
  t.stages_.resize(stage + 1);
  auto& zero = t.stages_[0];
  zero.resize(arity_cap + 1);
  for (std::size_t k = 0; k <= arity_cap; ++k) {
    const std::size_t count = ipow(n, k);
    std::vector<Formula> atom_formulas;
    for (const auto& a : atoms[k]) atom_formulas.push_back(atom_formula(a, ys[k]));
    zero[k].reserve(count);
    for (std::size_t c = 0; c < count; ++c) {
      std::vector<Formula> parts;
      for (std::size_t i = 0; i < atoms[k].size(); ++i) {
        parts.push_back(abs_diff(atom_formulas[i], Formula::constant(values[profiles[k][c][i]])));
      }
      zero[k].push_back(max_of(parts));
    }
  }
  for (std::size_t s = 1; s <= stage; ++s) {
    const auto& prev = t.stages_[s - 1];
    auto& cur = t.stages_[s];
    cur.resize(arity_cap + 1);
    cur[arity_cap] = prev[arity_cap];
    for (std::size_t k = 0; k < arity_cap; ++k) {
      const std::size_t count = ipow(n, k);
      const std::string& y = ys[k + 1].back();
      cur[k].reserve(count);
      for (std::size_t a = 0; a < count; ++a) {
        std::vector<Formula> forth;
        std::vector<Formula> extensions;
        for (std::size_t c = 0; c < n; ++c) {
          const Formula& ext = prev[k + 1][a * n + c];
          forth.push_back(Formula::inf(y, ext));
          extensions.push_back(ext);
        }
        Formula back = Formula::sup(y, min_of(extensions));
        cur[k].push_back(Formula::max(Formula::max(prev[k][a], max_of(forth)), back));
      }
    }
  }
  return t;
}

Formula theta_formula(const BackAndForthTable& table, std::span<const PointId> a) { return ind(table.formula(a)); }

std::size_t orbit_cap(const FiniteStructure& m, std::size_t k) { return k == 0 ? m.size() : k + m.size() - 1; }

BackAndForthTable orbit_table(const FiniteStructure& m, std::size_t k) {
  require_relational(m);
  const auto group = enumerate_automorphisms(m);
  const std::size_t count = m.tuple_count(k);
  std::vector<std::set<Tuple>> orbits(count);
  for (std::size_t c = 0; c < count; ++c) orbits[c] = orbit(group, m.tuple_from_code(c, k));
  const std::size_t limit = orbit_cap(m, k);
  for (std::size_t cap = std::max<std::size_t>(k, 1);; ++cap) {
    BackAndForthTable t = bf_tables(m, cap);
    if (cap >= limit) return t;
    bool exact = true;
    for (std::size_t a = 0; a < count && exact; ++a) {
      Tuple ta = m.tuple_from_code(a, k);
      for (std::size_t b = 0; b < count && exact; ++b) {
        Tuple tb = m.tuple_from_code(b, k);
        exact = t.value(ta, tb).is_zero() == (orbits[a].count(tb) != 0);
      }
    }
    if (exact) return t;
  }
}

Formula theta_formula(const FiniteStructure& m, std::span<const PointId> a) {
  return theta_formula(orbit_table(m, a.size()), a);
}

Formula scott_sentence(const FiniteStructure& m) {
  require_relational(m);
  const std::size_t n = m.size();
  BackAndForthTable t = bf_tables(m, n + 1);
  std::vector<Formula> clauses{theta_formula(t, Tuple{})};
  for (std::size_t k = 0; k <= n; ++k) {
    const auto ys = BackAndForthTable::variables(k + 1);
    const std::string& y = ys.back();
    const std::vector<std::string> prefix(ys.begin(), ys.end() - 1);
    for (std::size_t c = 0; c < m.tuple_count(k); ++c) {
      Tuple a = m.tuple_from_code(c, k);
      std::vector<Formula> forth;
      std::vector<Formula> extensions;
      for (PointId b = 0; b < n; ++b) {
        Tuple ab = a;
        ab.push_back(b);
        Formula theta_ab = theta_formula(t, ab);
        const std::string* yp = &y;
        forth.push_back(exact_exists(theta_ab, std::span<const std::string>(yp, 1)));
        extensions.push_back(theta_ab);
      }
      Formula realized = Formula::max(max_of(forth), Formula::sup(y, min_of(extensions)));
      Formula clause = Formula::min(approx_negation(theta_formula(t, a)), realized);
      clauses.push_back(sup_chain(prefix, clause));
    }
  }
  return max_of(clauses);
}

bool check_elementary_equivalence(const FiniteStructure& m, const FiniteStructure& n) {
  if (!(m.signature() == n.signature())) return false;
  Formula sm = scott_sentence(m);
  if (!satisfies(n, sm, {})) return false;
  Formula sn = scott_sentence(n);
  return satisfies(m, sn, {});
}

namespace {

void check_table(const FiniteStructure& m, const TupleTable& p) {
  if (p.arity == 0) throw Error("predicate table must have arity at least 1");
  for (std::size_t c = 0; c < m.tuple_count(p.arity); ++c) {
    Tuple t = m.tuple_from_code(c, p.arity);
    auto it = p.values.find(t);
    if (it == p.values.end()) throw Error("predicate table has no value at (" + m.tuple_key(t) + ")");
    if (it->second < Rational(0) || it->second > Rational(1)) {
      throw Error("predicate value " + it->second.to_string() + " at (" + m.tuple_key(t) + ") lies outside [0,1]");
    }
  }
  if (p.values.size() != m.tuple_count(p.arity)) throw Error("predicate table has entries outside the structure");
}

void check_invariant(const FiniteStructure& m, const TupleTable& p) {
  for (const auto& g : enumerate_automorphisms(m)) {
    for (const auto& [t, v] : p.values) {
      Tuple image = g.apply(t);
      const Rational& w = p.values.at(image);
      if (w != v) {
        std::string perm;
        for (PointId q = 0; q < m.size(); ++q) {
          perm += (q ? ", " : "") + m.point_name(q) + "->" + m.point_name(g.image[q]);
        }
        throw NotInvariantError("table is not automorphism-invariant: the automorphism {" + perm + "} maps (" +
                                    m.tuple_key(t) + ") with value " + v.to_string() + " to (" +
                                    m.tuple_key(image) + ") with value " + w.to_string(),
                                g, t);
      }
    }
  }
}

}  // namespace

Formula define_invariant_predicate(const FiniteStructure& m, const TupleTable& p, std::int64_t grid) {
  if (grid < 1) throw Error("grid resolution must be positive");
  require_relational(m);
  check_table(m, p);
  check_invariant(m, p);

  const std::size_t k = p.arity;
  BackAndForthTable table = orbit_table(m, k);

  // Tuples by increasing value; the theta family for eps is a prefix.
  std::vector<std::pair<Rational, Tuple>> by_value;
  for (const auto& [t, v] : p.values) by_value.emplace_back(v, t);
  std::stable_sort(by_value.begin(), by_value.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Formula> prefix_min{Formula::constant(Rational(1))};
  for (std::size_t i = 0; i < by_value.size(); ++i) {
    Formula theta = theta_formula(table, by_value[i].second);
    prefix_min.push_back(i == 0 ? theta : Formula::min(prefix_min.back(), theta));
  }

  std::vector<std::string> xs;
  for (std::size_t i = 1; i <= k; ++i) xs.push_back("x" + std::to_string(i));
  const auto ys = BackAndForthTable::variables(k);
  std::vector<Term> xt;
  std::vector<Term> yt;
  for (std::size_t i = 0; i < k; ++i) {
    xt.push_back(Term::variable(xs[i]));
    yt.push_back(Term::variable(ys[i]));
  }
  Formula distance = sup_distance(xt, yt);

  std::vector<Formula> psis;
  std::map<std::size_t, Formula> sigma_by_count;
  for (std::int64_t j = 1; j < grid; ++j) {
    Rational eps(j, grid);
    std::size_t below = 0;
    while (below < by_value.size() && by_value[below].first < eps) ++below;
    auto it = sigma_by_count.find(below);
    if (it == sigma_by_count.end()) {
      Formula sigma = inf_chain(ys, Formula::max(distance, prefix_min[below]));
      it = sigma_by_count.emplace(below, sigma).first;
    }
    psis.push_back(Formula::max(Formula::constant(eps), ind(it->second)));
  }
  return min_of(psis);
}

ParameterDefinition define_with_parameters(const FiniteStructure& m, const TupleTable& p,
                                           std::span<const PointId> params, std::int64_t grid) {
  std::map<std::string, PointId> names;
  std::vector<std::string> order;
  std::set<PointId> seen;
  std::size_t counter = 0;
  for (PointId q : params) {
    if (q >= m.size()) throw Error("parameter point out of range");
    if (!seen.insert(q).second) continue;
    std::string name;
    do {
      name = "e" + std::to_string(++counter);
    } while (m.signature().uses_name(name));
    names[name] = q;
    order.push_back(name);
  }
  FiniteStructure extended = add_constants(m, names);
  Formula f = define_invariant_predicate(extended, p, grid);
  return ParameterDefinition{std::move(extended), std::move(order), std::move(f)};
}

}  // namespace inflogic
