#include "inflogic/transforms.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>

#include "inflogic/syntax.hpp"

namespace inflogic {

Formula build_rho(const Formula& body, std::span<const std::string> bound, std::span<const Term> slots) {
  if (bound.size() != slots.size()) {
    throw Error("rho: " + std::to_string(slots.size()) + " slots for " + std::to_string(bound.size()) +
                " bound variables");
  }
  std::set<std::string> slot_vars;
  for (const auto& s : slots) {
    auto v = term_variables(s);
    slot_vars.insert(v.begin(), v.end());
  }
  std::set<std::string> taken = slot_vars;
  taken.insert(body.free_variables().begin(), body.free_variables().end());
  taken.insert(bound.begin(), bound.end());

  std::vector<std::string> fresh(bound.begin(), bound.end());
  Formula renamed = body;
  for (auto& y : fresh) {
    if (slot_vars.count(y) == 0) continue;
    std::string name = y + "'";
    while (taken.count(name) != 0) name += "'";
    taken.insert(name);
    renamed = substitute_term(renamed, y, Term::variable(name));
    y = name;
  }

  std::vector<Term> ys;
  for (const auto& y : fresh) ys.push_back(Term::variable(y));
  Formula inner = Formula::min(Formula::add(sup_distance(slots, ys), ind(renamed)), Formula::constant(Rational(1)));
  return inf_chain(fresh, inner);
}

Formula build_rho(const Formula& body, std::span<const std::string> slot_vars) {
  const auto& ys = body.free_variables();
  if (ys.size() != slot_vars.size()) {
    throw Error("rho: formula has " + std::to_string(ys.size()) + " free variables but " +
                std::to_string(slot_vars.size()) + " slots were given");
  }
  std::vector<Term> slots;
  for (const auto& x : slot_vars) slots.push_back(Term::variable(x));
  return build_rho(body, ys, slots);
}

Formula rho_eliminate(const Formula& f) {
  std::unordered_map<const FormulaNode*, Formula> memo;
  std::function<Formula(const Formula&)> go = [&](const Formula& g) -> Formula {
    if (auto it = memo.find(g.id()); it != memo.end()) return it->second;
    Formula out = std::visit(
        [&](const auto& n) -> Formula {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, BinaryNode>) {
            Formula lhs = go(n.lhs);
            Formula rhs = go(n.rhs);
            if (lhs.id() == n.lhs.id() && rhs.id() == n.rhs.id()) return g;
            return Formula::binary(n.op, lhs, rhs);
          } else if constexpr (std::is_same_v<T, ScaleNode>) {
            Formula b = go(n.body);
            return b.id() == n.body.id() ? g : Formula::scale(n.factor, b);
          } else if constexpr (std::is_same_v<T, VarQuantNode>) {
            Formula b = go(n.body);
            return b.id() == n.body.id() ? g : Formula::quantify(n.quantifier, n.var, b);
          } else if constexpr (std::is_same_v<T, IdxQuantNode>) {
            Formula b = go(n.body);
            return b.id() == n.body.id() ? g : Formula::index_quantify(n.quantifier, n.index, n.range, b);
          } else if constexpr (std::is_same_v<T, RhoNode>) {
            return build_rho(go(n.body), n.bound, n.slots);
          } else {
            return g;
          }
        },
        g.node().data);
    memo.emplace(g.id(), out);
    return out;
  };
  return go(f);
}

Formula exact_disjunction(std::span<const Formula> family) {
  std::vector<Formula> tests;
  tests.reserve(family.size());
  for (const auto& f : family) tests.push_back(ind(f));
  return min_of(tests);
}

Formula exact_disjunction(const std::string& index, const IndexRange& range, const Formula& body) {
  return Formula::iinf(index, range, ind(body));
}

Formula exact_negation(const Formula& f) {
  std::string n = fresh_index(std::span<const Formula>(&f, 1));
  return exact_disjunction(n, IndexRange::naturals(), Formula::sub(Formula::recip(Affine::of_index(n)), f));
}

Formula approx_negation(const Formula& f) { return Formula::sub(Formula::constant(Rational(1)), f); }

Formula exact_exists(const Formula& f, std::span<const std::string> vars) {
  return exact_negation(sup_chain(vars, exact_negation(f)));
}

// ---------------------------------------------------------------------------
// Baire descriptions

std::shared_ptr<const Skeleton> Skeleton::input(std::size_t slot) {
  auto s = std::make_shared<Skeleton>();
  s->kind = Kind::kSlot;
  s->slot = slot;
  return s;
}

std::shared_ptr<const Skeleton> Skeleton::constant(Rational v) {
  auto s = std::make_shared<Skeleton>();
  s->kind = Kind::kConst;
  s->value = Affine::constant(v);
  return s;
}

std::shared_ptr<const Skeleton> Skeleton::recip(Affine denominator) {
  auto s = std::make_shared<Skeleton>();
  s->kind = Kind::kRecip;
  s->value = std::move(denominator);
  return s;
}

std::shared_ptr<const Skeleton> Skeleton::binary(Connective op, std::shared_ptr<const Skeleton> lhs,
                                                 std::shared_ptr<const Skeleton> rhs) {
  auto s = std::make_shared<Skeleton>();
  s->kind = Kind::kBinary;
  s->op = op;
  s->args = {std::move(lhs), std::move(rhs)};
  return s;
}

std::shared_ptr<const Skeleton> Skeleton::scale(Affine factor, std::shared_ptr<const Skeleton> body) {
  auto s = std::make_shared<Skeleton>();
  s->kind = Kind::kScale;
  s->value = std::move(factor);
  s->args = {std::move(body)};
  return s;
}

BaireDescription BaireDescription::make_leaf(std::shared_ptr<const Skeleton> leaf) {
  BaireDescription u;
  u.kind = Kind::kLeaf;
  u.leaf = std::move(leaf);
  return u;
}

BaireDescription BaireDescription::make_limit(std::string index, BaireDescription body) {
  BaireDescription u;
  u.kind = Kind::kLimit;
  u.index = std::move(index);
  u.body = std::make_shared<const BaireDescription>(std::move(body));
  return u;
}

namespace {

std::size_t skeleton_slots(const Skeleton& s) {
  std::size_t n = s.kind == Skeleton::Kind::kSlot ? s.slot : 0;
  for (const auto& a : s.args) n = std::max(n, skeleton_slots(*a));
  return n;
}

const char* connective_name(Connective op) {
  switch (op) {
    case Connective::kSub: return "sub";
    case Connective::kAdd: return "add";
    case Connective::kMin: return "min";
    case Connective::kMax: return "max";
  }
  return "?";
}

std::string print_skeleton(const Skeleton& s) {
  switch (s.kind) {
    case Skeleton::Kind::kSlot:
      return "z" + std::to_string(s.slot);
    case Skeleton::Kind::kConst:
      return "(const " + s.value.offset.to_short_string() + ")";
    case Skeleton::Kind::kRecip:
      return "(recip " + print_affine(s.value) + ")";
    case Skeleton::Kind::kBinary:
      return std::string("(") + connective_name(s.op) + " " + print_skeleton(*s.args[0]) + " " +
             print_skeleton(*s.args[1]) + ")";
    case Skeleton::Kind::kScale:
      return "(scale " + print_affine(s.value) + " " + print_skeleton(*s.args[0]) + ")";
  }
  return {};
}

[[noreturn]] void fail_at(const SExpr& e, const std::string& message) { throw ParseError(message, e.line, e.column); }

std::optional<std::size_t> slot_atom(const std::string& atom) {
  if (atom == "z") return 1;
  if (atom.size() < 2 || atom[0] != 'z') return std::nullopt;
  if (!std::all_of(atom.begin() + 1, atom.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    return std::nullopt;
  }
  std::size_t k = std::stoul(atom.substr(1));
  if (k == 0) return std::nullopt;
  return k;
}

std::shared_ptr<const Skeleton> skeleton_from(const SExpr& e, std::vector<std::string>& indices) {
  if (!e.is_list) {
    if (auto k = slot_atom(e.atom)) return Skeleton::input(*k);
    fail_at(e, "expected a slot z1, z2, ... or a connective, got '" + e.atom + "'");
  }
  if (e.items.empty() || e.items[0].is_list) fail_at(e, "expected a connective");
  const std::string& h = e.items[0].atom;
  auto want = [&](std::size_t n) {
    if (e.items.size() != n + 1) fail_at(e, "'" + h + "' takes " + std::to_string(n) + " arguments");
  };
  if (h == "slot") {
    want(1);
    auto r = e.items[1].is_list ? std::nullopt : Rational::parse(e.items[1].atom);
    if (!r || !r->is_integer() || r->num() < 1) fail_at(e.items[1], "slot numbers start at 1");
    return Skeleton::input(static_cast<std::size_t>(r->num()));
  }
  if (h == "const") {
    want(1);
    auto r = e.items[1].is_list ? std::nullopt : Rational::parse(e.items[1].atom);
    if (!r || *r < Rational(0) || *r > Rational(1)) fail_at(e.items[1], "expected a rational in [0,1]");
    return Skeleton::constant(*r);
  }
  if (h == "recip") {
    want(1);
    return Skeleton::recip(parse_affine(e.items[1], indices));
  }
  if (h == "scale") {
    want(2);
    Affine factor = parse_affine(e.items[1], indices);
    return Skeleton::scale(std::move(factor), skeleton_from(e.items[2], indices));
  }
  static const std::map<std::string, Connective> kOps = {
      {"sub", Connective::kSub}, {"add", Connective::kAdd}, {"min", Connective::kMin}, {"max", Connective::kMax}};
  auto it = kOps.find(h);
  if (it == kOps.end()) fail_at(e.items[0], "unknown connective '" + h + "'");
  want(2);
  auto lhs = skeleton_from(e.items[1], indices);
  return Skeleton::binary(it->second, std::move(lhs), skeleton_from(e.items[2], indices));
}

BaireDescription baire_from(const SExpr& e, std::vector<std::string>& indices) {
  if (e.is_list && !e.items.empty() && !e.items[0].is_list && e.items[0].atom == "limit") {
    if (e.items.size() != 3 || e.items[1].is_list || e.items[1].atom.empty() ||
        !std::isalpha(static_cast<unsigned char>(e.items[1].atom[0]))) {
      fail_at(e, "expected (limit INDEX DESCRIPTION)");
    }
    indices.push_back(e.items[1].atom);
    BaireDescription body = baire_from(e.items[2], indices);
    indices.pop_back();
    return BaireDescription::make_limit(e.items[1].atom, std::move(body));
  }
  return BaireDescription::make_leaf(skeleton_from(e, indices));
}

Affine renamed(const Affine& a, const std::map<std::string, std::string>& names) {
  if (a.is_constant()) return a;
  auto it = names.find(a.index);
  if (it == names.end()) throw Error("Baire description uses unknown index '" + a.index + "'");
  return Affine::of_index(it->second, a.coeff, a.offset);
}

Formula plug(const Skeleton& s, std::span<const Formula> inputs, const std::map<std::string, std::string>& names) {
  switch (s.kind) {
    case Skeleton::Kind::kSlot:
      return inputs[s.slot - 1];
    case Skeleton::Kind::kConst:
      return Formula::constant(s.value.offset);
    case Skeleton::Kind::kRecip:
      return Formula::recip(renamed(s.value, names));
    case Skeleton::Kind::kBinary:
      return Formula::binary(s.op, plug(*s.args[0], inputs, names), plug(*s.args[1], inputs, names));
    case Skeleton::Kind::kScale:
      return Formula::scale(renamed(s.value, names), plug(*s.args[0], inputs, names));
  }
  throw Error("corrupt skeleton");
}

Formula compile(const BaireDescription& u, std::span<const Formula> inputs, std::map<std::string, std::string>& names,
                std::size_t depth) {
  if (u.kind == BaireDescription::Kind::kLeaf) return plug(*u.leaf, inputs, names);
  std::string k = "k" + std::to_string(depth);
  std::string m = "m" + std::to_string(depth);
  auto saved = names.find(u.index) == names.end() ? std::nullopt : std::optional<std::string>(names[u.index]);
  names[u.index] = m;
  Formula stage = compile(*u.body, inputs, names, depth + 1);
  if (saved) {
    names[u.index] = *saved;
  } else {
    names.erase(u.index);
  }
  return Formula::iinf(k, IndexRange::naturals(), Formula::isup(m, IndexRange::from(k), stage));
}

}  // namespace

std::size_t slot_count(const BaireDescription& u) {
  return u.kind == BaireDescription::Kind::kLeaf ? skeleton_slots(*u.leaf) : slot_count(*u.body);
}

std::size_t baire_depth(const BaireDescription& u) {
  return u.kind == BaireDescription::Kind::kLeaf ? 0 : 1 + baire_depth(*u.body);
}

BaireDescription parse_baire(std::string_view text) {
  SExpr e = read_sexpr(text);
  std::vector<std::string> indices;
  return baire_from(e, indices);
}

std::string print_baire(const BaireDescription& u) {
  if (u.kind == BaireDescription::Kind::kLeaf) return print_skeleton(*u.leaf);
  return "(limit " + u.index + " " + print_baire(*u.body) + ")";
}

Formula borel_compile(const BaireDescription& u, std::span<const Formula> inputs) {
  std::size_t need = slot_count(u);
  if (inputs.size() != need) {
    throw Error("Baire description has " + std::to_string(need) + " slots but " + std::to_string(inputs.size()) +
                " inputs were given");
  }
  std::map<std::string, std::string> names;
  return compile(u, inputs, names, 1);
}

}  // namespace inflogic
