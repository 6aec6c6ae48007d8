#include "inflogic_cli/cli.hpp"

#include <CLI11.hpp>

#include <functional>
#include <optional>
#include <sstream>

#include "inflogic/continuity.hpp"
#include "inflogic/evaluator.hpp"
#include "inflogic/scott.hpp"
#include "inflogic/structure_io.hpp"
#include "inflogic/syntax.hpp"
#include "inflogic/transforms.hpp"

namespace inflogic::cli {

using nlohmann::json;

json CommandResult::to_json() const {
  return json{{"status", ok ? "ok" : "error"}, {"payload", payload}, {"diagnostics", diagnostics}};
}

namespace {

// Misuse of flags that CLI11 cannot see, e.g. a missing formula.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string structure;
  std::string structure2;
  std::vector<std::string> formulas;
  std::string formula_file;
  std::vector<std::string> assign;
  std::int64_t budget = 64;
  std::string pass;
  std::int64_t grid = 0;
  std::string predicate;
  std::string params;
  std::string vars;
  std::string baire;
  std::string tuple;
  std::size_t arity = 1;
  bool emit = false;
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  if (text.empty()) return out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

FiniteStructure need_structure(const std::string& path, const char* flag) {
  if (path.empty()) throw UsageError(std::string("missing ") + flag);
  return load_structure(path);
}

std::vector<std::string> formula_texts(const Options& o) {
  std::vector<std::string> out = o.formulas;
  if (!o.formula_file.empty()) out.push_back(read_text_file(o.formula_file));
  if (out.empty()) throw UsageError("missing --formula or --formula-file");
  return out;
}

std::string single_formula_text(const Options& o) {
  auto texts = formula_texts(o);
  if (texts.size() != 1) throw UsageError("exactly one formula expected");
  return texts.front();
}

struct Parsed {
  Formula formula;
  Signature signature;
};

Parsed parse_with(const std::optional<FiniteStructure>& m, const std::string& text) {
  if (m) return {parse_formula(text, m->signature()), m->signature()};
  auto inferred = parse_formula_inferring(text);
  return {inferred.formula, inferred.signature};
}

PointId point(const FiniteStructure& m, const std::string& name) {
  auto p = m.find_point(name);
  if (!p) throw Error("unknown point '" + name + "'");
  return *p;
}

Tuple parse_tuple(const FiniteStructure& m, const std::string& text) {
  Tuple out;
  for (const auto& name : split(text, ',')) out.push_back(point(m, name));
  return out;
}

Assignment parse_assignment(const FiniteStructure& m, const std::vector<std::string>& items) {
  Assignment env;
  for (const auto& item : items) {
    for (const auto& binding : split(item, ',')) {
      auto eq = binding.find('=');
      if (eq == std::string::npos || eq == 0) throw UsageError("bad --assign entry '" + binding + "', expected x=point");
      env[binding.substr(0, eq)] = point(m, binding.substr(eq + 1));
    }
  }
  return env;
}

json result_json(const EvalResult& r) {
  if (r.is_exact()) return json{{"exact", r.lo.to_string()}};
  return json{{"lo", r.lo.to_string()}, {"hi", r.hi.to_string()}, {"budget", r.budget}};
}

json tuple_list(const FiniteStructure& m, const std::set<Tuple>& tuples) {
  json out = json::array();
  for (const auto& t : tuples) out.push_back(m.tuple_key(t));
  return out;
}

json cmd_validate(const Options& o) {
  if (o.structure.empty()) throw UsageError("missing --structure");
  FiniteStructure m = read_structure(read_text_file(o.structure));
  auto violations = validate_structure(m);
  if (!violations.empty()) throw ValidationError(std::move(violations));
  json payload{{"valid", true}, {"points", m.size()}};
  if (!o.formulas.empty() || !o.formula_file.empty()) {
    Formula f = parse_formula(single_formula_text(o), m.signature());
    payload["formula"] = print_formula(f);
  }
  return payload;
}

json cmd_eval(const Options& o) {
  FiniteStructure m = need_structure(o.structure, "--structure");
  Formula f = parse_formula(single_formula_text(o), m.signature());
  return result_json(evaluate(m, f, parse_assignment(m, o.assign), o.budget));
}

json cmd_satisfies(const Options& o) {
  FiniteStructure m = need_structure(o.structure, "--structure");
  Formula f = parse_formula(single_formula_text(o), m.signature());
  EvalResult r = evaluate(m, f, parse_assignment(m, o.assign), o.budget);
  if (!r.is_exact()) {
    throw EvalError("only bounds [" + r.lo.to_string() + ", " + r.hi.to_string() + "] at budget " +
                    std::to_string(r.budget) + "; satisfaction needs an exact value");
  }
  return json{{"satisfied", r.lo.is_zero()}, {"value", r.lo.to_string()}};
}

json cmd_transform(const Options& o) {
  std::optional<FiniteStructure> m;
  if (!o.structure.empty()) m = load_structure(o.structure);
  std::optional<Formula> out;
  if (o.pass == "borel") {
    if (o.baire.empty()) throw UsageError("--pass borel needs --baire");
    BaireDescription u = parse_baire(o.baire);
    std::vector<Formula> inputs;
    if (!o.formulas.empty() || !o.formula_file.empty()) {
      for (const auto& text : formula_texts(o)) inputs.push_back(parse_with(m, text).formula);
    }
    out = borel_compile(u, inputs);
  } else if (o.pass == "or") {
    std::vector<Formula> family;
    for (const auto& text : formula_texts(o)) family.push_back(parse_with(m, text).formula);
    out = exact_disjunction(family);
  } else {
    Formula f = parse_with(m, single_formula_text(o)).formula;
    if (o.pass == "rho") {
      out = rho_eliminate(f);
    } else if (o.pass == "neg") {
      out = exact_negation(f);
    } else if (o.pass == "nneg") {
      out = approx_negation(f);
    } else if (o.pass == "exists") {
      auto vars = split(o.vars, ',');
      if (vars.empty()) throw UsageError("--pass exists needs --vars");
      out = exact_exists(f, vars);
    } else {
      throw UsageError("unknown pass '" + o.pass + "'");
    }
  }
  return json{{"formula", print_formula(*out)}};
}

json cmd_classify(const Options& o) {
  std::optional<FiniteStructure> m;
  if (!o.structure.empty()) m = load_structure(o.structure);
  Parsed p = parse_with(m, single_formula_text(o));
  json bounds = json::object();
  for (const auto& [v, b] : lipschitz_bounds(p.signature, p.formula).bounds) bounds[v] = to_string(b);
  return json{{"class", std::string(to_string(classify_fragment(p.signature, p.formula)))}, {"lipschitz", bounds}};
}

json cmd_orbits(const Options& o) {
  FiniteStructure m = need_structure(o.structure, "--structure");
  auto group = enumerate_automorphisms(m);
  std::set<Tuple> seen;
  json orbits = json::array();
  for (std::size_t c = 0; c < m.tuple_count(o.arity); ++c) {
    Tuple t = m.tuple_from_code(c, o.arity);
    if (seen.count(t) != 0) continue;
    auto orb = orbit(group, t);
    seen.insert(orb.begin(), orb.end());
    orbits.push_back(tuple_list(m, orb));
  }
  json autos = json::array();
  for (const auto& g : group) {
    json image = json::object();
    for (PointId p = 0; p < m.size(); ++p) image[m.point_name(p)] = m.point_name(g.image[p]);
    autos.push_back(image);
  }
  return json{{"arity", o.arity}, {"automorphisms", autos}, {"orbits", orbits}};
}

json cmd_theta(const Options& o) {
  FiniteStructure m = need_structure(o.structure, "--structure");
  Tuple a = parse_tuple(m, o.tuple);
  BackAndForthTable table = orbit_table(m, a.size());
  std::set<Tuple> zeros;
  for (std::size_t c = 0; c < m.tuple_count(a.size()); ++c) {
    Tuple b = m.tuple_from_code(c, a.size());
    if (table.value(a, b).is_zero()) zeros.insert(b);
  }
  json payload{{"tuple", m.tuple_key(a)},
               {"arity_cap", table.arity_cap()},
               {"stable_stage", table.stable_stage()},
               {"zeroset", tuple_list(m, zeros)}};
  if (o.emit) payload["formula"] = print_formula(theta_formula(table, a));
  return payload;
}

json cmd_scott(const Options& o) {
  FiniteStructure m = need_structure(o.structure, "--structure");
  Formula sigma = scott_sentence(m);
  json payload{{"dag_size", dag_size(sigma)}, {"satisfied", satisfies(m, sigma, {})}};
  if (o.emit) payload["formula"] = print_formula(sigma);
  return payload;
}

json cmd_equiv(const Options& o) {
  FiniteStructure m = need_structure(o.structure, "--structure");
  FiniteStructure n = need_structure(o.structure2, "--structure2");
  return json{{"equivalent", check_elementary_equivalence(m, n)}};
}

json cmd_isomorphic(const Options& o) {
  FiniteStructure m = need_structure(o.structure, "--structure");
  FiniteStructure n = need_structure(o.structure2, "--structure2");
  return json{{"isomorphic", brute_force_isomorphic(m, n)}};
}

json cmd_define(const Options& o, json& error_payload) {
  FiniteStructure m = need_structure(o.structure, "--structure");
  if (o.predicate.empty()) throw UsageError("missing --predicate");
  if (o.grid < 1) throw UsageError("--grid must be a positive integer");
  TupleTable p = load_tuple_table(o.predicate, m);
  try {
    std::optional<Formula> f;
    std::vector<std::string> constants;
    const FiniteStructure* target = &m;
    std::optional<ParameterDefinition> def;
    if (!o.params.empty()) {
      Tuple params = parse_tuple(m, o.params);
      def = define_with_parameters(m, p, params, o.grid);
      f = def->formula;
      constants = def->constants;
      target = &def->structure;
    } else {
      f = define_invariant_predicate(m, p, o.grid);
    }
    std::vector<std::string> xs;
    for (std::size_t i = 1; i <= p.arity; ++i) xs.push_back("x" + std::to_string(i));
    Evaluator ev(*target);
    json values = json::object();
    for (const auto& [t, v] : p.values) {
      values[m.tuple_key(t)] = json{{"P", v.to_string()}, {"phi", result_json(ev.evaluate(*f, xs, t))}};
    }
    return json{{"grid", o.grid},
                {"variables", xs},
                {"constants", constants},
                {"formula", print_formula(*f)},
                {"values", values}};
  } catch (const NotInvariantError& e) {
    json image = json::object();
    for (PointId q = 0; q < m.size(); ++q) image[m.point_name(q)] = m.point_name(e.witness().image[q]);
    error_payload = json{{"witness", image}, {"tuple", m.tuple_key(e.tuple())}};
    throw;
  }
}

void add_structure(CLI::App* sub, Options& o, bool second = false) {
  sub->add_option("--structure", o.structure, "structure JSON file");
  if (second) sub->add_option("--structure2", o.structure2, "second structure JSON file");
}

void add_formula(CLI::App* sub, Options& o) {
  sub->add_option("--formula", o.formulas, "formula S-expression");
  sub->add_option("--formula-file", o.formula_file, "file holding one formula");
}

}  // namespace

CommandResult run(std::span<const std::string> args) {
  CommandResult result;
  Options o;
  CLI::App app{"Infinitary [0,1]-valued logic on finite metric structures", "inflogic"};
  app.require_subcommand(1);

  std::map<std::string, std::function<json()>> handlers;
  json error_payload;

  auto* validate = app.add_subcommand("validate", "check a structure file (and optionally a formula)");
  add_structure(validate, o);
  add_formula(validate, o);
  handlers["validate"] = [&] { return cmd_validate(o); };

  for (const char* name : {"eval", "satisfies"}) {
    auto* sub = app.add_subcommand(name, name == std::string("eval") ? "evaluate a formula"
                                                                      : "test whether a formula evaluates to 0");
    add_structure(sub, o);
    add_formula(sub, o);
    sub->add_option("--assign", o.assign, "variable binding x=point");
    sub->add_option("--budget", o.budget, "indices examined per unrecognized infinite family")
        ->check(CLI::PositiveNumber);
  }
  handlers["eval"] = [&] { return cmd_eval(o); };
  handlers["satisfies"] = [&] { return cmd_satisfies(o); };

  auto* transform = app.add_subcommand("transform", "apply a formula construction");
  add_structure(transform, o);
  add_formula(transform, o);
  transform->add_option("--pass", o.pass, "rho|neg|nneg|or|exists|borel")
      ->required()
      ->check(CLI::IsMember({"rho", "neg", "nneg", "or", "exists", "borel"}));
  transform->add_option("--vars", o.vars, "comma-separated variables for exists");
  transform->add_option("--baire", o.baire, "Baire description for borel");
  handlers["transform"] = [&] { return cmd_transform(o); };

  auto* classify = app.add_subcommand("classify", "fragment class and Lipschitz bounds");
  add_structure(classify, o);
  add_formula(classify, o);
  handlers["classify"] = [&] { return cmd_classify(o); };

  auto* orbits = app.add_subcommand("orbits", "automorphisms and tuple orbits");
  add_structure(orbits, o);
  orbits->add_option("--arity", o.arity, "tuple length");
  handlers["orbits"] = [&] { return cmd_orbits(o); };

  auto* theta = app.add_subcommand("theta", "orbit-defining formula of a tuple");
  add_structure(theta, o);
  theta->add_option("--tuple", o.tuple, "comma-separated points")->required();
  theta->add_flag("--emit", o.emit, "include the formula");
  handlers["theta"] = [&] { return cmd_theta(o); };

  auto* scott = app.add_subcommand("scott", "Scott sentence of a structure");
  add_structure(scott, o);
  scott->add_flag("--emit", o.emit, "include the sentence");
  handlers["scott"] = [&] { return cmd_scott(o); };

  auto* equiv = app.add_subcommand("equiv", "compare two structures by Scott sentences");
  add_structure(equiv, o, true);
  handlers["equiv"] = [&] { return cmd_equiv(o); };

  auto* iso = app.add_subcommand("isomorphic", "brute-force isomorphism test");
  add_structure(iso, o, true);
  handlers["isomorphic"] = [&] { return cmd_isomorphic(o); };

  auto* define = app.add_subcommand("define", "formula approximating an invariant predicate");
  add_structure(define, o);
  define->add_option("--predicate", o.predicate, "JSON table of tuple keys to p/q");
  define->add_option("--grid", o.grid, "grid resolution N")->required();
  define->add_option("--params", o.params, "comma-separated parameter points");
  handlers["define"] = [&] { return cmd_define(o, error_payload); };

  std::vector<std::string> storage{"inflogic"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : storage) argv.push_back(s.c_str());

  auto fail = [&](int code, std::string message) {
    result.ok = false;
    result.exit_code = code;
    result.diagnostics.push_back(std::move(message));
  };

  if (!args.empty() && !args.front().empty() && args.front()[0] != '-' && !handlers.count(args.front())) {
    fail(2, "unknown subcommand '" + args.front() + "'");
    return result;
  }
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    const CLI::App* target = &app;
    for (const auto* sub : app.get_subcommands()) target = sub;
    result.payload = json{{"help", target->help()}};
    return result;
  } catch (const CLI::ParseError& e) {
    fail(2, e.what());
    return result;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    result.payload = handlers.at(name)();
  } catch (const UsageError& e) {
    fail(2, e.what());
  } catch (const ValidationError& e) {
    json list = json::array();
    for (const auto& v : e.violations()) {
      list.push_back(json{{"kind", std::string(to_string(v.kind))}, {"message", v.message}, {"points", v.points}});
      fail(1, v.message);
    }
    result.payload = json{{"valid", false}, {"violations", list}};
  } catch (const IllFormedError& e) {
    for (const auto& v : e.violations()) fail(1, v);
  } catch (const std::exception& e) {
    fail(1, e.what());
    if (!error_payload.is_null()) result.payload = error_payload;
  }
  return result;
}

}  // namespace inflogic::cli
