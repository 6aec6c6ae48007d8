#include "inflogic/structure_io.hpp"

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace inflogic {

using nlohmann::json;

namespace {

std::string summarize(const std::vector<Violation>& v) {
  std::string out = "structure violates " + std::to_string(v.size()) + " axiom" + (v.size() == 1 ? "" : "s");
  for (const auto& x : v) out += "; " + x.message;
  return out;
}

[[noreturn]] void schema(const std::string& message) { throw SchemaError("structure schema: " + message); }

const json& field(const json& obj, const char* name) {
  auto it = obj.find(name);
  if (it == obj.end()) schema(std::string("missing field '") + name + "'");
  return *it;
}

Rational rational_value(const json& v, const std::string& where) {
  if (v.is_string()) {
    if (auto r = Rational::parse(v.get<std::string>())) return *r;
  } else if (v.is_number_integer()) {
    return Rational(v.get<std::int64_t>());
  }
  schema(where + ": expected a rational string \"p/q\"");
}

std::string string_value(const json& v, const std::string& where) {
  if (!v.is_string()) schema(where + ": expected a string");
  return v.get<std::string>();
}

std::vector<SymbolDecl> symbols(const json& sig, const char* kind) {
  std::vector<SymbolDecl> out;
  auto it = sig.find(kind);
  if (it == sig.end()) return out;
  if (!it->is_array()) schema(std::string("signature.") + kind + " must be an array");
  for (const auto& s : *it) {
    if (!s.is_object()) schema(std::string("signature.") + kind + " entries must be objects");
    SymbolDecl d;
    d.name = string_value(field(s, "name"), std::string("signature.") + kind + ".name");
    const json& arity = field(s, "arity");
    if (!arity.is_number_integer() || arity.get<std::int64_t>() < 0) {
      schema("arity of '" + d.name + "' must be a nonnegative integer");
    }
    d.arity = arity.get<std::size_t>();
    d.lipschitz = s.contains("lipschitz") ? rational_value(s["lipschitz"], "lipschitz of '" + d.name + "'")
                                          : Rational(1);
    out.push_back(std::move(d));
  }
  return out;
}

PointId point_ref(const FiniteStructure& m, const std::string& name, const std::string& where) {
  auto p = m.find_point(name);
  if (!p) schema(where + ": unknown point '" + name + "'");
  return *p;
}

Tuple tuple_ref(const FiniteStructure& m, const std::string& key, const std::string& where) {
  Tuple t;
  std::size_t start = 0;
  for (;;) {
    std::size_t comma = key.find(',', start);
    t.push_back(point_ref(m, key.substr(start, comma == std::string::npos ? std::string::npos : comma - start), where));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return t;
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : Error(summarize(violations)), violations_(std::move(violations)) {}

FiniteStructure read_structure(std::string_view json_text) {
  json doc = parse_json(json_text);
  if (!doc.is_object()) schema("top level must be an object");

  Signature sig;
  if (auto it = doc.find("signature"); it != doc.end()) {
    if (!it->is_object()) schema("signature must be an object");
    sig.predicates = symbols(*it, "predicates");
    sig.functions = symbols(*it, "functions");
    if (auto c = it->find("constants"); c != it->end()) {
      if (!c->is_array()) schema("signature.constants must be an array");
      for (const auto& name : *c) sig.constants.push_back(string_value(name, "signature.constants"));
    }
  }

  const json& pts = field(doc, "points");
  if (!pts.is_array()) schema("points must be an array");
  std::vector<std::string> points;
  for (const auto& p : pts) {
    std::string name = string_value(p, "points");
    if (name.empty() || name.find(',') != std::string::npos) schema("point name '" + name + "' is empty or has a comma");
    if (std::find(points.begin(), points.end(), name) != points.end()) schema("point '" + name + "' is listed twice");
    points.push_back(std::move(name));
  }

  FiniteStructure m(sig, points);

  // Directed entries first; reverse directions are filled only where absent.
  std::vector<std::pair<Tuple, Rational>> given;
  if (auto it = doc.find("metric"); it != doc.end()) {
    if (it->is_object()) {
      for (const auto& [key, value] : it->items()) {
        Tuple t = tuple_ref(m, key, "metric");
        if (t.size() != 2) schema("metric key '" + key + "' must name two points");
        given.emplace_back(t, rational_value(value, "metric[" + key + "]"));
      }
    } else if (it->is_array()) {
      for (const auto& e : *it) {
        if (!e.is_array() || e.size() != 3) schema("metric entries must be [\"x\", \"y\", \"p/q\"]");
        Tuple t{point_ref(m, string_value(e[0], "metric"), "metric"), point_ref(m, string_value(e[1], "metric"), "metric")};
        given.emplace_back(t, rational_value(e[2], "metric"));
      }
    } else {
      schema("metric must be an object or an array");
    }
  }
  std::vector<bool> explicit_entry(points.size() * points.size(), false);
  for (const auto& [t, d] : given) {
    std::size_t slot = t[0] * points.size() + t[1];
    if (explicit_entry[slot] && m.distance(t[0], t[1]) != d) {
      schema("metric entry for (" + points[t[0]] + "," + points[t[1]] + ") is given twice with different values");
    }
    explicit_entry[slot] = true;
    m.set_directed_distance(t[0], t[1], d);
  }
  for (const auto& [t, d] : given) {
    if (!explicit_entry[t[1] * points.size() + t[0]]) m.set_directed_distance(t[1], t[0], d);
  }

  if (auto it = doc.find("predicates"); it != doc.end()) {
    if (!it->is_object()) schema("predicates must be an object");
    for (const auto& [name, table] : it->items()) {
      const SymbolDecl* decl = sig.find_predicate(name);
      if (decl == nullptr) schema("predicate table for undeclared symbol '" + name + "'");
      if (!table.is_object()) schema("predicate table '" + name + "' must be an object");
      for (const auto& [key, value] : table.items()) {
        Tuple t = tuple_ref(m, key, "predicates." + name);
        if (t.size() != decl->arity) schema("predicate " + name + " key '" + key + "' has the wrong arity");
        m.set_predicate(name, t, rational_value(value, "predicates." + name + "[" + key + "]"));
      }
    }
  }

  if (auto it = doc.find("functions"); it != doc.end()) {
    if (!it->is_object()) schema("functions must be an object");
    for (const auto& [name, table] : it->items()) {
      const SymbolDecl* decl = sig.find_function(name);
      if (decl == nullptr) schema("function table for undeclared symbol '" + name + "'");
      if (!table.is_object()) schema("function table '" + name + "' must be an object");
      for (const auto& [key, value] : table.items()) {
        Tuple t = tuple_ref(m, key, "functions." + name);
        if (t.size() != decl->arity) schema("function " + name + " key '" + key + "' has the wrong arity");
        m.set_function(name, t, point_ref(m, string_value(value, "functions." + name), "functions." + name));
      }
    }
  }

  if (auto it = doc.find("constants"); it != doc.end()) {
    if (!it->is_object()) schema("constants must be an object");
    for (const auto& [name, value] : it->items()) {
      if (!sig.has_constant(name)) schema("value for undeclared constant '" + name + "'");
      m.set_constant(name, point_ref(m, string_value(value, "constants." + name), "constants." + name));
    }
  }
  return m;
}

FiniteStructure parse_structure(std::string_view json_text) {
  FiniteStructure m = read_structure(json_text);
  if (auto v = validate_structure(m); !v.empty()) throw ValidationError(std::move(v));
  return m;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

FiniteStructure load_structure(const std::string& path) { return parse_structure(read_text_file(path)); }

std::string save_structure(const FiniteStructure& m) {
  const Signature& sig = m.signature();
  json doc;
  auto decls = [](const std::vector<SymbolDecl>& ds) {
    json arr = json::array();
    for (const auto& d : ds) arr.push_back({{"name", d.name}, {"arity", d.arity}, {"lipschitz", d.lipschitz.to_string()}});
    return arr;
  };
  doc["signature"] = {{"predicates", decls(sig.predicates)},
                      {"functions", decls(sig.functions)},
                      {"constants", sig.constants}};
  doc["points"] = m.points();

  json metric = json::object();
  for (PointId a = 0; a < m.size(); ++a) {
    for (PointId b = 0; b < m.size(); ++b) {
      if (a == b || !m.has_distance(a, b)) continue;
      bool mirrored = m.has_distance(b, a) && m.distance(b, a) == m.distance(a, b);
      if (mirrored && b < a) continue;
      metric[m.point_name(a) + "," + m.point_name(b)] = m.distance(a, b).to_string();
    }
    if (!m.distance(a, a).is_zero()) metric[m.point_name(a) + "," + m.point_name(a)] = m.distance(a, a).to_string();
  }
  doc["metric"] = metric;

  json preds = json::object();
  for (const auto& p : sig.predicates) {
    json table = json::object();
    for (std::size_t code = 0; code < m.tuple_count(p.arity); ++code) {
      Tuple t = m.tuple_from_code(code, p.arity);
      if (m.has_predicate_entry(p.name, t)) table[m.tuple_key(t)] = m.predicate(p.name, t).to_string();
    }
    preds[p.name] = table;
  }
  doc["predicates"] = preds;

  json funcs = json::object();
  for (const auto& f : sig.functions) {
    json table = json::object();
    for (std::size_t code = 0; code < m.tuple_count(f.arity); ++code) {
      Tuple t = m.tuple_from_code(code, f.arity);
      if (m.has_function_entry(f.name, t)) table[m.tuple_key(t)] = m.point_name(m.function(f.name, t));
    }
    funcs[f.name] = table;
  }
  doc["functions"] = funcs;

  json consts = json::object();
  for (const auto& c : sig.constants) {
    if (m.has_constant_value(c)) consts[c] = m.point_name(m.constant(c));
  }
  doc["constants"] = consts;
  return doc.dump(2) + "\n";
}

void write_structure_file(const std::string& path, const FiniteStructure& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << save_structure(m);
}

TupleTable read_tuple_table(std::string_view json_text, const FiniteStructure& m) {
  json doc = parse_json(json_text);
  if (!doc.is_object()) throw SchemaError("table must be an object mapping tuple keys to \"p/q\"");
  TupleTable table;
  bool first = true;
  for (const auto& [key, value] : doc.items()) {
    Tuple t = tuple_ref(m, key, "table");
    if (first) {
      table.arity = t.size();
      first = false;
    } else if (t.size() != table.arity) {
      throw SchemaError("table key '" + key + "' has arity " + std::to_string(t.size()) + ", expected " +
                        std::to_string(table.arity));
    }
    table.values[t] = rational_value(value, "table[" + key + "]");
  }
  return table;
}

TupleTable load_tuple_table(const std::string& path, const FiniteStructure& m) {
  return read_tuple_table(read_text_file(path), m);
}

}  // namespace inflogic
