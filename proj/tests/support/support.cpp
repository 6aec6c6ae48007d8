#include "support.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "inflogic/structure_io.hpp"

namespace inflogic::testing {

Rational rat(std::int64_t p, std::int64_t q) { return Rational(p, q); }

FiniteStructure tri() {
  Signature sig;
  sig.predicates.push_back({"P", 1, rat(1)});
  FiniteStructure m(sig, {"a", "b", "c"});
  m.set_distance(0, 1, rat(1, 2));
  m.set_distance(1, 2, rat(1, 2));
  m.set_distance(0, 2, rat(1));
  m.set_predicate("P", Tuple{0}, rat(0));
  m.set_predicate("P", Tuple{1}, rat(1, 2));
  m.set_predicate("P", Tuple{2}, rat(1));
  return m;
}

FiniteStructure sym() {
  Signature sig;
  sig.predicates.push_back({"Q", 1, rat(1)});
  FiniteStructure m(sig, {"a", "b"});
  m.set_distance(0, 1, rat(1, 2));
  m.set_predicate("Q", Tuple{0}, rat(3, 10));
  m.set_predicate("Q", Tuple{1}, rat(3, 10));
  return m;
}

namespace {

FiniteStructure proxy(std::size_t n) {
  Signature sig;
  sig.constants = {"c1", "c2"};
  std::vector<std::string> points;
  for (std::size_t i = 0; i < n; ++i) points.push_back("p" + std::to_string(i));
  FiniteStructure m(sig, points);
  for (PointId a = 0; a < n; ++a) {
    for (PointId b = a + 1; b < n; ++b) m.set_distance(a, b, rat(1, 2));
  }
  m.set_constant("c1", 0);
  m.set_constant("c2", 1);
  return m;
}

}  // namespace

FiniteStructure m1() { return proxy(2); }
FiniteStructure m2() { return proxy(3); }

std::string fixture_path(const std::string& name) { return std::string(INFLOGIC_FIXTURE_DIR) + "/" + name; }

namespace {

std::vector<Tuple> tuples(std::size_t n, std::size_t k) {
  std::vector<Tuple> out;
  Tuple t(k, 0);
  for (;;) {
    out.push_back(t);
    std::size_t i = k;
    while (i > 0 && ++t[i - 1] == n) t[--i] = 0;
    if (i == 0) break;
  }
  return out;
}

Rational tuple_dist(const FiniteStructure& m, const Tuple& a, const Tuple& b) {
  Rational d(0);
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, m.distance(a[i], b[i]));
  return d;
}

Rational ceil_rational(const Rational& r) {
  std::int64_t q = r.num() / r.den();
  if (Rational(q) < r) ++q;
  return Rational(q);
}

}  // namespace

FiniteStructure random_structure(std::mt19937& rng, const CorpusOptions& options) {
  auto uniform = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  const std::size_t n = uniform(options.min_points, options.max_points);
  const bool coarse = uniform(0, 1) == 0;

  Signature sig;
  const std::size_t npred = uniform(1, 2);
  const char* names[] = {"P", "R"};
  for (std::size_t i = 0; i < npred; ++i) {
    std::size_t arity = options.binary_predicates && uniform(0, 2) == 0 ? 2 : 1;
    sig.predicates.push_back({names[i], arity, rat(1)});
  }
  const std::size_t nconst = uniform(0, options.max_constants);
  for (std::size_t i = 1; i <= nconst; ++i) sig.constants.push_back("k" + std::to_string(i));

  std::vector<std::string> points;
  for (std::size_t i = 0; i < n; ++i) points.push_back(std::string(1, static_cast<char>('a' + i)));

  // Distances: symmetric matrix, then shortest-path closure for the fine case.
  std::vector<std::vector<Rational>> d(n, std::vector<Rational>(n, rat(0)));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      Rational v;
      if (coarse) {
        v = uniform(0, 9) < 7 ? rat(1, 2) : rat(1);
      } else {
        auto q = static_cast<std::int64_t>(uniform(1, 12));
        v = rat(static_cast<std::int64_t>(uniform(1, static_cast<std::size_t>(q))), q);
      }
      d[a][b] = d[b][a] = v;
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) d[a][b] = std::min(d[a][b], d[a][k] + d[k][b]);
    }
  }

  // Predicate values; the declared Lipschitz constant is fixed afterwards.
  std::map<std::string, std::map<Tuple, Rational>> values;
  for (const auto& p : sig.predicates) {
    for (const auto& t : tuples(n, p.arity)) {
      Rational v;
      if (coarse) {
        v = rat(static_cast<std::int64_t>(uniform(0, 2)), 2);
      } else {
        auto q = static_cast<std::int64_t>(uniform(1, 12));
        v = rat(static_cast<std::int64_t>(uniform(0, static_cast<std::size_t>(q))), q);
      }
      values[p.name][t] = v;
    }
  }

  FiniteStructure draft(sig, points);
  for (PointId a = 0; a < n; ++a) {
    for (PointId b = a + 1; b < n; ++b) draft.set_distance(a, b, d[a][b]);
  }
  for (auto& p : sig.predicates) {
    if (coarse) {
      p.lipschitz = rat(2);
      continue;
    }
    Rational need(1);
    const auto& table = values[p.name];
    for (const auto& [s, u] : table) {
      for (const auto& [t, v] : table) {
        if (s == t) continue;
        need = std::max(need, abs(u - v) / tuple_dist(draft, s, t));
      }
    }
    p.lipschitz = ceil_rational(need);
  }

  FiniteStructure m(sig, points);
  for (PointId a = 0; a < n; ++a) {
    for (PointId b = a + 1; b < n; ++b) m.set_distance(a, b, d[a][b]);
  }
  for (const auto& [name, table] : values) {
    for (const auto& [t, v] : table) m.set_predicate(name, t, v);
  }
  for (const auto& c : sig.constants) m.set_constant(c, uniform(0, n - 1));
  auto violations = validate_structure(m);
  if (!violations.empty()) throw std::logic_error("generated invalid structure: " + violations.front().message);
  return m;
}

std::vector<FiniteStructure> corpus(std::size_t count, std::uint32_t seed, const CorpusOptions& options) {
  std::mt19937 rng(seed);
  std::vector<FiniteStructure> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(random_structure(rng, options));
  out.push_back(tri());
  out.push_back(sym());
  out.push_back(m1());
  out.push_back(m2());
  return out;
}

FiniteStructure renamed_copy(const FiniteStructure& m, std::mt19937& rng) {
  const std::size_t n = m.size();
  std::vector<PointId> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back("r" + std::to_string(i));
  FiniteStructure out(m.signature(), names);
  for (PointId a = 0; a < n; ++a) {
    for (PointId b = a + 1; b < n; ++b) out.set_distance(perm[a], perm[b], m.distance(a, b));
  }
  for (const auto& p : m.signature().predicates) {
    for (const auto& t : tuples(n, p.arity)) {
      Tuple image;
      for (auto x : t) image.push_back(perm[x]);
      out.set_predicate(p.name, image, m.predicate(p.name, t));
    }
  }
  for (const auto& f : m.signature().functions) {
    for (const auto& t : tuples(n, f.arity)) {
      Tuple image;
      for (auto x : t) image.push_back(perm[x]);
      out.set_function(f.name, image, perm[m.function(f.name, t)]);
    }
  }
  for (const auto& c : m.signature().constants) out.set_constant(c, perm[m.constant(c)]);
  return out;
}

std::optional<FiniteStructure> near_copy(const FiniteStructure& m, std::mt19937& rng) {
  const auto& preds = m.signature().predicates;
  if (preds.empty()) return std::nullopt;
  for (int attempt = 0; attempt < 40; ++attempt) {
    const auto& p = preds[std::uniform_int_distribution<std::size_t>(0, preds.size() - 1)(rng)];
    auto all = tuples(m.size(), p.arity);
    const Tuple& t = all[std::uniform_int_distribution<std::size_t>(0, all.size() - 1)(rng)];
    auto q = std::uniform_int_distribution<std::int64_t>(1, 12)(rng);
    Rational v(std::uniform_int_distribution<std::int64_t>(0, q)(rng), q);
    if (v == m.predicate(p.name, t)) continue;
    FiniteStructure copy = m;
    copy.set_predicate(p.name, t, v);
    if (validate_structure(copy).empty()) return copy;
  }
  return std::nullopt;
}

std::vector<Assignment> all_assignments(const FiniteStructure& m, const std::vector<std::string>& vars) {
  std::vector<Assignment> out;
  for (const auto& t : tuples(m.size(), vars.size())) {
    Assignment env;
    for (std::size_t i = 0; i < vars.size(); ++i) env[vars[i]] = t[i];
    out.push_back(env);
  }
  return out;
}

// --- formula generation ---------------------------------------------------

FormulaGenerator::FormulaGenerator(Signature sig, FormulaOptions options, std::uint32_t seed)
    : sig_(std::move(sig)), options_(std::move(options)), rng_(seed) {}

int FormulaGenerator::uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

std::string FormulaGenerator::pick(const std::vector<std::string>& items) {
  return items[static_cast<std::size_t>(uniform(0, static_cast<int>(items.size()) - 1))];
}

Rational FormulaGenerator::small_rational() {
  static const Rational choices[] = {rat(0), rat(1, 4), rat(1, 3), rat(1, 2), rat(2, 3), rat(1), rat(5, 12)};
  return choices[uniform(0, 6)];
}

Affine FormulaGenerator::affine(const std::vector<std::string>& indices, bool recip) {
  if (indices.empty() || (!recip && uniform(0, 2) == 0)) {
    if (recip) return Affine::constant(rat(uniform(1, 4)));
    static const Rational factors[] = {rat(1, 2), rat(2), rat(3), rat(1)};
    return Affine::constant(factors[uniform(0, 3)]);
  }
  const std::string& i = pick(indices);
  if (options_.syntax_only) {
    static const Rational coeffs[] = {rat(1), rat(2), rat(1, 2)};
    static const Rational offsets[] = {rat(0), rat(1), rat(3, 2)};
    Rational c = coeffs[uniform(0, 2)];
    Rational s = offsets[uniform(0, 2)];
    if (recip && c < rat(1) && s < rat(1)) s = rat(1);
    return Affine::of_index(i, c, s);
  }
  return Affine::of_index(i, rat(uniform(1, 2)), rat(uniform(0, 1)));
}

Term FormulaGenerator::term(std::vector<std::string>& indices, int depth) {
  int roll = uniform(0, 9);
  if (options_.syntax_only && roll == 0 && !sig_.functions.empty() && depth < 2) {
    const auto& f = sig_.functions[static_cast<std::size_t>(uniform(0, static_cast<int>(sig_.functions.size()) - 1))];
    std::vector<Term> args;
    for (std::size_t i = 0; i < f.arity; ++i) args.push_back(term(indices, depth + 1));
    return Term::apply(f.name, std::move(args));
  }
  if (options_.syntax_only && roll == 1 && sig_.has_constant("c3")) {
    std::vector<std::string> finite;
    for (const auto& i : indices) {
      if (finite_indices_.count(i)) finite.push_back(i);
    }
    if (!finite.empty()) return Term::indexed_constant("c", pick(finite));
  }
  if (roll <= 2 && !sig_.constants.empty()) return Term::constant(pick(sig_.constants));
  return Term::variable(pick(options_.variables));
}

Formula FormulaGenerator::leaf(std::vector<std::string>& indices) {
  int roll = uniform(0, 9);
  if (roll < 4) return Formula::dist(term(indices, 0), term(indices, 0));
  if (roll < 8 && !sig_.predicates.empty()) {
    const auto& p = sig_.predicates[static_cast<std::size_t>(uniform(0, static_cast<int>(sig_.predicates.size()) - 1))];
    std::vector<Term> args;
    for (std::size_t i = 0; i < p.arity; ++i) args.push_back(term(indices, 0));
    return Formula::pred(p.name, std::move(args));
  }
  if (roll == 9 && !indices.empty() && (options_.finite_index || options_.syntax_only)) {
    return Formula::recip(affine(indices, true));
  }
  return Formula::constant(small_rational());
}

Formula FormulaGenerator::gen(int depth, std::vector<std::string>& indices) {
  if (depth <= 0) return leaf(indices);
  for (;;) {
    switch (uniform(0, 9)) {
      case 0:
        return leaf(indices);
      case 1:
      case 2:
      case 3: {
        static const Connective ops[] = {Connective::kSub, Connective::kAdd, Connective::kMin, Connective::kMax};
        Formula lhs = gen(depth - 1, indices);
        Formula rhs = gen(depth - 1, indices);
        return Formula::binary(ops[uniform(0, 3)], lhs, rhs);
      }
      case 4:
        return Formula::scale(affine(indices, false), gen(depth - 1, indices));
      case 5:
        if (!options_.quantifiers) break;
        return Formula::quantify(uniform(0, 1) ? Quantifier::kSup : Quantifier::kInf, pick(options_.variables),
                                 gen(depth - 1, indices));
      case 6:
        if (!options_.zero_test || depth < 2) break;
        {
          std::vector<std::string> none;
          return ind(gen(depth - 2, none));
        }
      case 7: {
        if (!options_.rho) break;
        std::vector<std::string> bound{pick(options_.variables)};
        if (uniform(0, 2) == 0) {
          std::string second = pick(options_.variables);
          if (second != bound.front()) bound.push_back(second);
        }
        std::vector<Term> slots;
        for (std::size_t i = 0; i < bound.size(); ++i) slots.push_back(term(indices, 0));
        return Formula::rho(std::move(slots), std::move(bound), gen(depth - 1, indices));
      }
      case 8:
      case 9: {
        if (!(options_.finite_index || options_.syntax_only) || depth < 2) break;
        std::string i = "i" + std::to_string(++index_counter_);
        IndexRange range = IndexRange::up_to(uniform(1, 3));
        if (options_.syntax_only) {
          int r = uniform(0, 3);
          if (r == 0) range = IndexRange::naturals();
          if (r == 1 && !indices.empty()) range = IndexRange::from(pick(indices));
          if (r == 2) range = IndexRange::from(static_cast<std::int64_t>(uniform(1, 4)));
        }
        if (range.kind == IndexRange::Kind::kUpTo) finite_indices_.insert(i);
        indices.push_back(i);
        Formula body = gen(depth - 2, indices);
        Formula wrapped = uniform(0, 1) ? Formula::scale(Affine::of_index(i, rat(uniform(1, 2)), rat(0)), body)
                                        : Formula::max(body, Formula::recip(Affine::of_index(i, rat(1), rat(uniform(0, 1)))));
        indices.pop_back();
        return Formula::index_quantify(uniform(0, 1) ? Quantifier::kSup : Quantifier::kInf, i, range, wrapped);
      }
    }
  }
}

Formula FormulaGenerator::next() {
  std::vector<std::string> indices;
  return gen(uniform(1, options_.max_depth), indices);
}

// --- oracles ----------------------------------------------------------------

namespace oracle {
namespace {

const Rational kZero(0);
const Rational kOne(1);

struct Context {
  const FiniteStructure& m;
  std::map<std::string, PointId> vars;
  std::map<std::string, std::int64_t> idx;
};

PointId term_value(const Term& t, const Context& c) {
  switch (t.kind) {
    case Term::Kind::kVariable: {
      auto it = c.vars.find(t.name);
      if (it == c.vars.end()) throw std::logic_error("oracle: unassigned variable " + t.name);
      return it->second;
    }
    case Term::Kind::kConstant:
      return c.m.constant(t.name);
    case Term::Kind::kIndexedConstant:
      return c.m.constant(t.name + std::to_string(c.idx.at(t.index)));
    case Term::Kind::kApply: {
      Tuple args;
      for (const auto& a : t.args) args.push_back(term_value(a, c));
      return c.m.function(t.name, args);
    }
  }
  return 0;
}

Rational affine_value(const Affine& a, const Context& c) {
  if (a.coeff.is_zero()) return a.offset;
  return a.coeff * Rational(c.idx.at(a.index)) + a.offset;
}

bool term_mentions(const Term& t, const std::string& i) {
  if (t.kind == Term::Kind::kIndexedConstant && t.index == i) return true;
  return std::any_of(t.args.begin(), t.args.end(), [&](const Term& a) { return term_mentions(a, i); });
}

bool mentions(const Formula& f, const std::string& i) {
  const auto& d = f.node().data;
  if (auto* n = std::get_if<DistNode>(&d)) return term_mentions(n->lhs, i) || term_mentions(n->rhs, i);
  if (auto* n = std::get_if<PredNode>(&d)) {
    return std::any_of(n->args.begin(), n->args.end(), [&](const Term& a) { return term_mentions(a, i); });
  }
  if (auto* n = std::get_if<ConstNode>(&d)) return !n->value.coeff.is_zero() && n->value.index == i;
  if (auto* n = std::get_if<BinaryNode>(&d)) return mentions(n->lhs, i) || mentions(n->rhs, i);
  if (auto* n = std::get_if<ScaleNode>(&d)) {
    return (!n->factor.coeff.is_zero() && n->factor.index == i) || mentions(n->body, i);
  }
  if (auto* n = std::get_if<VarQuantNode>(&d)) return mentions(n->body, i);
  if (auto* n = std::get_if<IdxQuantNode>(&d)) {
    if (n->range.kind == IndexRange::Kind::kFrom && n->range.from_index == i) return true;
    return n->index != i && mentions(n->body, i);
  }
  const auto& r = std::get<RhoNode>(d);
  return std::any_of(r.slots.begin(), r.slots.end(), [&](const Term& a) { return term_mentions(a, i); }) ||
         mentions(r.body, i);
}

Rational eval(const Formula& f, Context& c);

Rational rho_distance(const Formula& body, const std::vector<std::string>& bound, const std::vector<PointId>& point,
                      Context& c) {
  const std::size_t n = c.m.size();
  const std::size_t k = bound.size();
  auto saved = c.vars;
  Rational best(1);
  bool found = false;
  std::vector<PointId> b(k, 0);
  for (;;) {
    for (std::size_t i = 0; i < k; ++i) c.vars[bound[i]] = b[i];
    if (eval(body, c).is_zero()) {
      Rational dist(0);
      for (std::size_t i = 0; i < k; ++i) dist = std::max(dist, c.m.distance(point[i], b[i]));
      if (!found || dist < best) best = dist;
      found = true;
    }
    std::size_t i = k;
    while (i > 0 && ++b[i - 1] == n) b[--i] = 0;
    if (i == 0) break;
  }
  c.vars = saved;
  return found ? best : kOne;
}

Rational eval(const Formula& f, Context& c) {
  const auto& d = f.node().data;
  if (auto* n = std::get_if<DistNode>(&d)) return c.m.distance(term_value(n->lhs, c), term_value(n->rhs, c));
  if (auto* n = std::get_if<PredNode>(&d)) {
    Tuple args;
    for (const auto& a : n->args) args.push_back(term_value(a, c));
    return c.m.predicate(n->symbol, args);
  }
  if (auto* n = std::get_if<ConstNode>(&d)) {
    Rational v = affine_value(n->value, c);
    return n->reciprocal ? kOne / v : v;
  }
  if (auto* n = std::get_if<BinaryNode>(&d)) {
    Rational a = eval(n->lhs, c);
    Rational b = eval(n->rhs, c);
    switch (n->op) {
      case Connective::kSub: return std::max(a - b, kZero);
      case Connective::kAdd: return std::min(a + b, kOne);
      case Connective::kMin: return std::min(a, b);
      case Connective::kMax: return std::max(a, b);
    }
  }
  if (auto* n = std::get_if<ScaleNode>(&d)) return std::min(affine_value(n->factor, c) * eval(n->body, c), kOne);
  if (auto* n = std::get_if<VarQuantNode>(&d)) {
    auto saved = c.vars;
    std::optional<Rational> acc;
    for (PointId p = 0; p < c.m.size(); ++p) {
      c.vars[n->var] = p;
      Rational v = eval(n->body, c);
      if (!acc) {
        acc = v;
      } else {
        acc = n->quantifier == Quantifier::kSup ? std::max(*acc, v) : std::min(*acc, v);
      }
    }
    c.vars = saved;
    return *acc;
  }
  if (auto* n = std::get_if<IdxQuantNode>(&d)) {
    if (n->range.kind == IndexRange::Kind::kUpTo) {
      auto saved = c.idx;
      std::optional<Rational> acc;
      for (std::int64_t i = 1; i <= n->range.bound; ++i) {
        c.idx[n->index] = i;
        Rational v = eval(n->body, c);
        acc = !acc ? v : (n->quantifier == Quantifier::kSup ? std::max(*acc, v) : std::min(*acc, v));
      }
      c.idx = saved;
      return *acc;
    }
    const auto* scale = std::get_if<ScaleNode>(&n->body.node().data);
    if (n->quantifier == Quantifier::kSup && n->range.kind == IndexRange::Kind::kNaturals && scale != nullptr &&
        scale->factor.index == n->index && scale->factor.coeff > kZero && !mentions(scale->body, n->index)) {
      return eval(scale->body, c).is_zero() ? kZero : kOne;
    }
    throw Unsupported("oracle: infinite family outside the zero-test shape");
  }
  const auto& r = std::get<RhoNode>(d);
  std::vector<PointId> point;
  for (const auto& s : r.slots) point.push_back(term_value(s, c));
  return rho_distance(r.body, r.bound, point, c);
}

}  // namespace

Rational value(const FiniteStructure& m, const Formula& f, const Assignment& env) {
  Context c{m, {env.begin(), env.end()}, {}};
  return eval(f, c);
}

Rational zeroset_distance(const FiniteStructure& m, const Formula& body, const std::vector<std::string>& bound,
                          const std::vector<PointId>& point, const Assignment& env) {
  Context c{m, {env.begin(), env.end()}, {}};
  return rho_distance(body, bound, point, c);
}

namespace {

bool preserves(const FiniteStructure& m, const FiniteStructure& n, const std::vector<PointId>& g) {
  const std::size_t size = m.size();
  for (PointId a = 0; a < size; ++a) {
    for (PointId b = 0; b < size; ++b) {
      if (m.distance(a, b) != n.distance(g[a], g[b])) return false;
    }
  }
  for (const auto& p : m.signature().predicates) {
    for (const auto& t : tuples(size, p.arity)) {
      Tuple image;
      for (auto x : t) image.push_back(g[x]);
      if (m.predicate(p.name, t) != n.predicate(p.name, image)) return false;
    }
  }
  for (const auto& f : m.signature().functions) {
    for (const auto& t : tuples(size, f.arity)) {
      Tuple image;
      for (auto x : t) image.push_back(g[x]);
      if (g[m.function(f.name, t)] != n.function(f.name, image)) return false;
    }
  }
  for (const auto& c : m.signature().constants) {
    if (g[m.constant(c)] != n.constant(c)) return false;
  }
  return true;
}

}  // namespace

std::vector<std::vector<PointId>> automorphisms(const FiniteStructure& m) {
  std::vector<PointId> g(m.size());
  std::iota(g.begin(), g.end(), 0);
  std::vector<std::vector<PointId>> out;
  do {
    if (preserves(m, m, g)) out.push_back(g);
  } while (std::next_permutation(g.begin(), g.end()));
  return out;
}

std::set<Tuple> orbit(const FiniteStructure& m, const Tuple& t) {
  std::set<Tuple> out;
  for (const auto& g : automorphisms(m)) {
    Tuple image;
    for (auto x : t) image.push_back(g[x]);
    out.insert(image);
  }
  return out;
}

bool isomorphic(const FiniteStructure& m, const FiniteStructure& n) {
  if (!(m.signature() == n.signature()) || m.size() != n.size()) return false;
  std::vector<PointId> g(m.size());
  std::iota(g.begin(), g.end(), 0);
  do {
    if (preserves(m, n, g)) return true;
  } while (std::next_permutation(g.begin(), g.end()));
  return false;
}

}  // namespace oracle

}  // namespace inflogic::testing
