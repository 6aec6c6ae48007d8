#include "inflogic/syntax.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

namespace inflogic {

ParseError::ParseError(const std::string& message, std::size_t line, std::size_t column)
    : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      detail_(message),
      line_(line),
      column_(column) {}

namespace {

std::string join_violations(const std::vector<std::string>& v) {
  std::string out = "ill-formed formula";
  for (const auto& s : v) out += "; " + s;
  return out;
}

}  // namespace

IllFormedError::IllFormedError(std::vector<std::string> violations)
    : Error(join_violations(violations)), violations_(std::move(violations)) {}

namespace {

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  SExpr read_document() {
    skip_space();
    if (at_end()) fail("empty input");
    SExpr e = read();
    skip_space();
    if (!at_end()) fail("unexpected text after the formula");
    return e;
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }

  [[noreturn]] void fail(const std::string& message) const { throw ParseError(message, line_, column_); }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_space() {
    while (!at_end()) {
      char c = text_[pos_];
      if (c == ';') {
        while (!at_end() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  SExpr read() {
    SExpr e;
    e.line = line_;
    e.column = column_;
    char c = text_[pos_];
    if (c == ')') fail("unexpected ')'");
    if (c == '(') {
      e.is_list = true;
      advance();
      for (;;) {
        skip_space();
        if (at_end()) throw ParseError("unclosed '('", e.line, e.column);
        if (text_[pos_] == ')') {
          advance();
          break;
        }
        e.items.push_back(read());
      }
      return e;
    }
    while (!at_end()) {
      c = text_[pos_];
      if (c == '(' || c == ')' || c == ';' || std::isspace(static_cast<unsigned char>(c))) break;
      e.atom.push_back(c);
      advance();
    }
    return e;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

bool is_identifier(const std::string& s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'' || c == '.';
  });
}

bool is_keyword(const std::string& s) {
  static const char* const kKeywords[] = {"d",   "const", "recip", "sub", "add",  "min",  "max", "scale",
                                          "sup", "inf",   "isup",  "iinf", "rho", "ind", "nat", "upto",
                                          "from"};
  return std::any_of(std::begin(kKeywords), std::end(kKeywords), [&](const char* k) { return s == k; });
}

Affine affine_in(const SExpr& e, std::span<const std::string> indices) {
  auto fail = [](const SExpr& at, const std::string& message) -> void { throw ParseError(message, at.line, at.column); };
  if (!e.is_list) {
    if (auto r = Rational::parse(e.atom)) return Affine::constant(*r);
    if (!is_identifier(e.atom)) fail(e, "expected a rational or an index in meta-expression");
    if (std::find(indices.begin(), indices.end(), e.atom) == indices.end()) {
      fail(e, "'" + e.atom + "' is not an enclosing index");
    }
    return Affine::of_index(e.atom);
  }
  if (e.items.size() != 3 || e.items[0].is_list || (e.items[0].atom != "*" && e.items[0].atom != "+")) {
    fail(e, "meta-expression must be a rational, an index, (* c E) or (+ E E)");
  }
  Affine a = affine_in(e.items[1], indices);
  Affine b = affine_in(e.items[2], indices);
  if (e.items[0].atom == "*") {
    if (!a.is_constant() && !b.is_constant()) fail(e, "meta-expression must stay affine in one index");
    if (!a.is_constant()) std::swap(a, b);
    Rational c = a.offset;
    return Affine::of_index(b.index, b.coeff * c, b.offset * c);
  }
  if (!a.is_constant() && !b.is_constant() && a.index != b.index) {
    fail(e, "meta-expression mixes indices '" + a.index + "' and '" + b.index + "'");
  }
  std::string index = a.is_constant() ? b.index : a.index;
  return Affine::of_index(index, a.coeff + b.coeff, a.offset + b.offset);
}

class Converter {
 public:
  Converter(const Signature* sig, Signature* inferred) : sig_(sig), inferred_(inferred) {}

  Formula formula(const SExpr& e) {
    if (!e.is_list) {
      fail(e, "expected a formula, got '" + e.atom + "'");
    }
    if (e.items.empty()) fail(e, "empty formula");
    const SExpr& head = e.items[0];
    if (head.is_list) fail(head, "formula head must be a symbol");
    const std::string& h = head.atom;
    auto args = [&](std::size_t n) {
      if (e.items.size() != n + 1) {
        fail(e, "'" + h + "' takes " + std::to_string(n) + " argument" + (n == 1 ? "" : "s") + ", got " +
                    std::to_string(e.items.size() - 1));
      }
    };
    if (h == "d") {
      args(2);
      return Formula::dist(term(e.items[1]), term(e.items[2]));
    }
    if (h == "const") {
      args(1);
      return Formula::constant(rational(e.items[1]));
    }
    if (h == "recip") {
      args(1);
      return Formula::recip(affine(e.items[1]));
    }
    if (h == "sub" || h == "add" || h == "min" || h == "max") {
      args(2);
      Connective op = h == "sub" ? Connective::kSub
                      : h == "add" ? Connective::kAdd
                      : h == "min" ? Connective::kMin
                                   : Connective::kMax;
      Formula lhs = formula(e.items[1]);
      return Formula::binary(op, std::move(lhs), formula(e.items[2]));
    }
    if (h == "scale") {
      args(2);
      Affine factor = affine(e.items[1]);
      return Formula::scale(std::move(factor), formula(e.items[2]));
    }
    if (h == "sup" || h == "inf") {
      args(2);
      std::string var = identifier(e.items[1], "variable");
      Quantifier q = h == "sup" ? Quantifier::kSup : Quantifier::kInf;
      bound_vars_.push_back(var);
      Formula body = formula(e.items[2]);
      bound_vars_.pop_back();
      return Formula::quantify(q, var, std::move(body));
    }
    if (h == "isup" || h == "iinf") {
      args(3);
      std::string index = identifier(e.items[1], "index");
      IndexRange r = range(e.items[2]);
      Quantifier q = h == "isup" ? Quantifier::kSup : Quantifier::kInf;
      indices_.push_back(index);
      Formula body = formula(e.items[3]);
      indices_.pop_back();
      return Formula::index_quantify(q, index, std::move(r), std::move(body));
    }
    if (h == "ind") {
      args(1);
      return ind(formula(e.items[1]));
    }
    if (h == "rho") return rho(e);
    return predicate(e);
  }

 private:
  [[noreturn]] static void fail(const SExpr& at, const std::string& message) {
    throw ParseError(message, at.line, at.column);
  }

  std::string identifier(const SExpr& e, const char* what) {
    if (e.is_list || !is_identifier(e.atom)) fail(e, std::string("expected ") + what + " name");
    return e.atom;
  }

  Rational rational(const SExpr& e) {
    if (!e.is_list) {
      if (auto r = Rational::parse(e.atom)) return *r;
    }
    fail(e, "expected a rational p/q");
  }

  std::int64_t positive_integer(const SExpr& e) {
    if (!e.is_list) {
      if (auto r = Rational::parse(e.atom); r && r->is_integer() && r->num() >= 1) return r->num();
    }
    fail(e, "expected a positive integer");
  }

  bool index_in_scope(const std::string& name) const {
    return std::find(indices_.begin(), indices_.end(), name) != indices_.end();
  }
  Affine affine(const SExpr& e) { return parse_affine(e, indices_); }

  IndexRange range(const SExpr& e) {
    if (!e.is_list) {
      if (e.atom == "nat") return IndexRange::naturals();
      fail(e, "expected an index range: nat, (upto k) or (from j)");
    }
    if (e.items.size() != 2 || e.items[0].is_list) fail(e, "expected an index range: nat, (upto k) or (from j)");
    const std::string& kind = e.items[0].atom;
    if (kind == "upto") return IndexRange::up_to(positive_integer(e.items[1]));
    if (kind == "from") {
      const SExpr& j = e.items[1];
      if (!j.is_list && is_identifier(j.atom)) {
        if (!index_in_scope(j.atom)) fail(j, "'" + j.atom + "' is not an enclosing index");
        return IndexRange::from(j.atom);
      }
      return IndexRange::from(positive_integer(j));
    }
    fail(e, "unknown index range '" + kind + "'");
  }

  bool variable_bound(const std::string& name) const {
    return std::find(bound_vars_.begin(), bound_vars_.end(), name) != bound_vars_.end();
  }

  Term atom_term(const SExpr& e) {
    const std::string& name = e.atom;
    if (!is_identifier(name) || is_keyword(name)) fail(e, "expected a term, got '" + name + "'");
    if (sig_ == nullptr || variable_bound(name)) return Term::variable(name);
    if (sig_->has_constant(name)) return Term::constant(name);
    for (auto it = indices_.rbegin(); it != indices_.rend(); ++it) {
      const std::string& idx = *it;
      if (name.size() <= idx.size() || name.compare(name.size() - idx.size(), idx.size(), idx) != 0) continue;
      std::string prefix = name.substr(0, name.size() - idx.size());
      bool family = std::any_of(sig_->constants.begin(), sig_->constants.end(), [&](const std::string& c) {
        return c.size() > prefix.size() && c.compare(0, prefix.size(), prefix) == 0 &&
               std::all_of(c.begin() + static_cast<std::ptrdiff_t>(prefix.size()), c.end(),
                           [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); });
      });
      if (family) return Term::indexed_constant(prefix, idx);
    }
    return Term::variable(name);
  }

  Term term(const SExpr& e) {
    if (!e.is_list) return atom_term(e);
    if (e.items.empty() || e.items[0].is_list) fail(e, "expected a term");
    const std::string& f = e.items[0].atom;
    if (!is_identifier(f) || is_keyword(f)) fail(e.items[0], "expected a function symbol, got '" + f + "'");
    std::vector<Term> args;
    for (std::size_t i = 1; i < e.items.size(); ++i) args.push_back(term(e.items[i]));
    check_symbol(e.items[0], f, args.size(), /*function=*/true);
    return Term::apply(f, std::move(args));
  }

  void check_symbol(const SExpr& at, const std::string& name, std::size_t arity, bool function) {
    const char* kind = function ? "function" : "predicate";
    if (arity == 0) fail(at, std::string(kind) + " '" + name + "' needs at least one argument");
    if (sig_ != nullptr) {
      const SymbolDecl* d = function ? sig_->find_function(name) : sig_->find_predicate(name);
      if (d == nullptr) fail(at, std::string("unknown ") + kind + " symbol '" + name + "'");
      if (d->arity != arity) {
        fail(at, std::string("arity mismatch: ") + kind + " " + name + " expects " + std::to_string(d->arity) +
                     " arguments, got " + std::to_string(arity));
      }
      return;
    }
    auto& own = function ? inferred_->functions : inferred_->predicates;
    auto& other = function ? inferred_->predicates : inferred_->functions;
    if (std::any_of(other.begin(), other.end(), [&](const SymbolDecl& d) { return d.name == name; })) {
      fail(at, "'" + name + "' is used both as a predicate and as a function");
    }
    auto it = std::find_if(own.begin(), own.end(), [&](const SymbolDecl& d) { return d.name == name; });
    if (it == own.end()) {
      own.push_back(SymbolDecl{name, arity, Rational(1)});
    } else if (it->arity != arity) {
      fail(at, std::string("arity mismatch: ") + kind + " " + name + " was first used with " +
                   std::to_string(it->arity) + " arguments");
    }
  }

  Formula predicate(const SExpr& e) {
    const SExpr& head = e.items[0];
    if (!is_identifier(head.atom)) fail(head, "unknown formula head '" + head.atom + "'");
    std::vector<Term> args;
    for (std::size_t i = 1; i < e.items.size(); ++i) args.push_back(term(e.items[i]));
    check_symbol(head, head.atom, args.size(), /*function=*/false);
    return Formula::pred(head.atom, std::move(args));
  }

  Formula rho(const SExpr& e) {
    std::vector<Term> slots;
    const SExpr* bound_list = nullptr;
    const SExpr* body_expr = nullptr;
    if (e.items.size() == 4) {
      if (!e.items[1].is_list) fail(e.items[1], "expected a slot list");
      for (const auto& s : e.items[1].items) slots.push_back(term(s));
      bound_list = &e.items[2];
      body_expr = &e.items[3];
    } else if (e.items.size() == 3) {
      bound_list = &e.items[1];
      body_expr = &e.items[2];
    } else {
      fail(e, "'rho' takes (slots) (bound) body or (bound) body");
    }
    if (!bound_list->is_list) fail(*bound_list, "expected a list of bound variables");
    std::vector<std::string> bound;
    for (const auto& y : bound_list->items) bound.push_back(identifier(y, "variable"));
    if (e.items.size() == 3) {
      if (bound.size() == 1) {
        slots.push_back(Term::variable("x"));
      } else {
        for (std::size_t i = 1; i <= bound.size(); ++i) slots.push_back(Term::variable("x" + std::to_string(i)));
      }
    }
    for (const auto& y : bound) bound_vars_.push_back(y);
    Formula body = formula(*body_expr);
    bound_vars_.resize(bound_vars_.size() - bound.size());
    return Formula::rho(std::move(slots), std::move(bound), std::move(body));
  }

  const Signature* sig_;
  Signature* inferred_;
  std::vector<std::string> indices_;
  std::vector<std::string> bound_vars_;
};

}  // namespace

SExpr read_sexpr(std::string_view text) { return Reader(text).read_document(); }

Affine parse_affine(const SExpr& e, std::span<const std::string> indices) { return affine_in(e, indices); }

Formula parse_formula(std::string_view text, const Signature& sig) {
  SExpr doc = Reader(text).read_document();
  Formula f = Converter(&sig, nullptr).formula(doc);
  if (auto v = well_formed(sig, f); !v.empty()) throw IllFormedError(std::move(v));
  return f;
}

InferredFormula parse_formula_inferring(std::string_view text) {
  SExpr doc = Reader(text).read_document();
  Signature sig;
  Formula f = Converter(nullptr, &sig).formula(doc);
  if (auto v = well_formed(sig, f); !v.empty()) throw IllFormedError(std::move(v));
  return {std::move(f), std::move(sig)};
}

std::string print_term(const Term& t) {
  switch (t.kind) {
    case Term::Kind::kVariable:
    case Term::Kind::kConstant:
      return t.name;
    case Term::Kind::kIndexedConstant:
      return t.name + t.index;
    case Term::Kind::kApply: {
      std::string out = "(" + t.name;
      for (const auto& a : t.args) out += " " + print_term(a);
      return out + ")";
    }
  }
  return {};
}

std::string print_affine(const Affine& a) {
  if (a.is_constant()) return a.offset.to_short_string();
  std::string linear = a.coeff == Rational(1) ? a.index : "(* " + a.coeff.to_short_string() + " " + a.index + ")";
  if (a.offset.is_zero()) return linear;
  return "(+ " + linear + " " + a.offset.to_short_string() + ")";
}

std::string print_range(const IndexRange& r) {
  switch (r.kind) {
    case IndexRange::Kind::kNaturals:
      return "nat";
    case IndexRange::Kind::kUpTo:
      return "(upto " + std::to_string(r.bound) + ")";
    case IndexRange::Kind::kFrom:
      return "(from " + (r.from_index.empty() ? std::to_string(r.bound) : r.from_index) + ")";
  }
  return {};
}

namespace {

void print_into(const Formula& f, std::string& out) {
  const auto& data = f.node().data;
  if (const auto* n = std::get_if<DistNode>(&data)) {
    out += "(d " + print_term(n->lhs) + " " + print_term(n->rhs) + ")";
  } else if (const auto* n = std::get_if<PredNode>(&data)) {
    out += "(" + n->symbol;
    for (const auto& a : n->args) out += " " + print_term(a);
    out += ")";
  } else if (const auto* n = std::get_if<ConstNode>(&data)) {
    out += n->reciprocal ? "(recip " + print_affine(n->value) + ")" : "(const " + n->value.offset.to_short_string() + ")";
  } else if (const auto* n = std::get_if<BinaryNode>(&data)) {
    static const char* const kNames[] = {"sub", "add", "min", "max"};
    out += "(";
    out += kNames[static_cast<int>(n->op)];
    out += " ";
    print_into(n->lhs, out);
    out += " ";
    print_into(n->rhs, out);
    out += ")";
  } else if (const auto* n = std::get_if<ScaleNode>(&data)) {
    out += "(scale " + print_affine(n->factor) + " ";
    print_into(n->body, out);
    out += ")";
  } else if (const auto* n = std::get_if<VarQuantNode>(&data)) {
    out += n->quantifier == Quantifier::kSup ? "(sup " : "(inf ";
    out += n->var + " ";
    print_into(n->body, out);
    out += ")";
  } else if (const auto* n = std::get_if<IdxQuantNode>(&data)) {
    out += n->quantifier == Quantifier::kSup ? "(isup " : "(iinf ";
    out += n->index + " " + print_range(n->range) + " ";
    print_into(n->body, out);
    out += ")";
  } else if (const auto* n = std::get_if<RhoNode>(&data)) {
    out += "(rho (";
    for (std::size_t i = 0; i < n->slots.size(); ++i) out += (i ? " " : "") + print_term(n->slots[i]);
    out += ") (";
    for (std::size_t i = 0; i < n->bound.size(); ++i) out += (i ? " " : "") + n->bound[i];
    out += ") ";
    print_into(n->body, out);
    out += ")";
  }
}

}  // namespace

std::string print_formula(const Formula& f) {
  std::string out;
  print_into(f, out);
  return out;
}

}  // namespace inflogic
