#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "inflogic/syntax.hpp"
#include "inflogic_cli/cli.hpp"
#include "support.hpp"

namespace {

using namespace inflogic;
using namespace inflogic::testing;
using nlohmann::json;

cli::CommandResult run(std::vector<std::string> args) { return cli::run(args); }

std::string temp_file(const std::string& name, const std::string& content) {
  auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << content;
  return path.string();
}

void expect_envelope(const cli::CommandResult& r) {
  json doc = json::parse(r.to_json().dump(2));
  ASSERT_TRUE(doc.contains("status"));
  EXPECT_EQ(doc["status"], r.ok ? "ok" : "error");
  EXPECT_TRUE(doc["diagnostics"].is_array());
  EXPECT_EQ(r.exit_code == 0, r.ok);
}

TEST(Cli, EvalZeroTest) {
  auto r = run({"eval", "--structure", fixture_path("tri.json"), "--formula", "(ind (P x))", "--assign", "x=a"});
  expect_envelope(r);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.payload, json({{"exact", "0/1"}}));
}

TEST(Cli, EvalBounds) {
  auto r = run({"eval", "--structure", fixture_path("tri.json"), "--formula", "(iinf n nat (recip n))", "--budget",
                "8"});
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.payload, json({{"lo", "0/1"}, {"hi", "1/8"}, {"budget", 8}}));
}

TEST(Cli, EvalIsByteIdentical) {
  std::vector<std::string> args{"eval", "--structure", fixture_path("tri.json"), "--formula",
                                "(rho (y) (P y))", "--assign", "x=b"};
  std::string first = run(args).to_json().dump(2);
  EXPECT_EQ(run(args).to_json().dump(2), first);
  EXPECT_EQ(json::parse(first)["payload"], json({{"exact", "1/2"}}));
}

TEST(Cli, TransformRho) {
  auto r = run({"transform", "--pass", "rho", "--formula", "(rho (y) (P y))"});
  expect_envelope(r);
  ASSERT_EQ(r.exit_code, 0);
  std::string out = r.payload["formula"];
  EXPECT_EQ(out.find("rho"), std::string::npos);
  auto parsed = parse_formula_inferring(out);
  EXPECT_EQ(parsed.formula.free_variables(), (std::vector<std::string>{"x"}));
}

TEST(Cli, TransformOtherPasses) {
  for (const char* pass : {"neg", "nneg"}) {
    auto r = run({"transform", "--pass", pass, "--formula", "(P x)"});
    EXPECT_EQ(r.exit_code, 0) << pass;
    EXPECT_TRUE(r.payload["formula"].is_string());
  }
  auto o = run({"transform", "--pass", "or", "--formula", "(P x)", "--formula", "(d x y)"});
  EXPECT_EQ(o.exit_code, 0);
  EXPECT_TRUE(o.payload["formula"].is_string());
  auto e = run({"transform", "--pass", "exists", "--vars", "x", "--formula", "(P x)"});
  EXPECT_EQ(e.exit_code, 0);
  auto b = run({"transform", "--pass", "borel", "--baire", "(limit k (scale k z))", "--formula", "(P x)"});
  EXPECT_EQ(b.exit_code, 0);
  auto bad = run({"transform", "--pass", "bogus", "--formula", "(P x)"});
  EXPECT_EQ(bad.exit_code, 2);
}

TEST(Cli, Equiv) {
  auto r = run({"equiv", "--structure", fixture_path("m1.json"), "--structure2", fixture_path("m2.json")});
  expect_envelope(r);
  EXPECT_EQ(r.payload, json({{"equivalent", false}}));
  auto same = run({"equiv", "--structure", fixture_path("sym.json"), "--structure2", fixture_path("sym.json")});
  EXPECT_EQ(same.payload, json({{"equivalent", true}}));
  auto iso = run({"isomorphic", "--structure", fixture_path("m1.json"), "--structure2", fixture_path("m2.json")});
  EXPECT_EQ(iso.payload, json({{"isomorphic", false}}));
}

TEST(Cli, SatisfiesAndClassify) {
  auto s = run({"satisfies", "--structure", fixture_path("m1.json"), "--formula", kProxySentence});
  EXPECT_EQ(s.payload, json({{"satisfied", true}, {"value", "0/1"}}));
  auto s2 = run({"satisfies", "--structure", fixture_path("m2.json"), "--formula", kProxySentence});
  EXPECT_EQ(s2.payload, json({{"satisfied", false}, {"value", "1/1"}}));
  auto c = run({"classify", "--structure", fixture_path("tri.json"), "--formula", "(max (d x y) (ind (P x)))"});
  EXPECT_EQ(c.payload["class"], "LFull");
  EXPECT_EQ(c.payload["lipschitz"], json({{"x", "inf"}, {"y", "1/1"}}));
}

TEST(Cli, ValidateReportsViolations) {
  auto ok = run({"validate", "--structure", fixture_path("tri.json")});
  EXPECT_EQ(ok.exit_code, 0);
  EXPECT_EQ(ok.payload["valid"], true);
  auto bad = run({"validate", "--structure", fixture_path("tri_bad_diameter.json")});
  expect_envelope(bad);
  EXPECT_EQ(bad.exit_code, 1);
  EXPECT_EQ(bad.payload["valid"], false);
  EXPECT_FALSE(bad.payload["violations"].empty());
}

TEST(Cli, OrbitsThetaScott) {
  auto o = run({"orbits", "--structure", fixture_path("sym.json")});
  EXPECT_EQ(o.payload["orbits"], json::parse(R"([["a", "b"]])"));
  auto t = run({"theta", "--structure", fixture_path("sym.json"), "--tuple", "a"});
  EXPECT_EQ(t.exit_code, 0);
  EXPECT_EQ(t.payload["zeroset"], json::parse(R"(["a", "b"])"));
  auto s = run({"scott", "--structure", fixture_path("sym.json")});
  EXPECT_EQ(s.payload["satisfied"], true);
}

TEST(Cli, Define) {
  auto r = run({"define", "--structure", fixture_path("sym.json"), "--predicate", fixture_path("sym_q.json"), "--grid",
                "10"});
  ASSERT_EQ(r.exit_code, 0);
  for (const char* p : {"a", "b"}) {
    Rational phi = *Rational::parse(r.payload["values"][p]["phi"]["exact"].get<std::string>());
    EXPECT_GE(phi, rat(3, 10));
    EXPECT_LE(phi, rat(2, 5));
  }

  std::string table = temp_file("inflogic_cli_swap.json", R"({"a": "0", "b": "1"})");
  auto bad = run({"define", "--structure", fixture_path("sym.json"), "--predicate", table, "--grid", "10"});
  expect_envelope(bad);
  EXPECT_EQ(bad.exit_code, 1);
  EXPECT_EQ(bad.payload["witness"], json({{"a", "b"}, {"b", "a"}}));

  auto params = run({"define", "--structure", fixture_path("sym.json"), "--predicate", table, "--grid", "10",
                     "--params", "a"});
  EXPECT_EQ(params.exit_code, 0);
  std::filesystem::remove(table);
}

TEST(Cli, UsageErrors) {
  for (auto args : std::vector<std::vector<std::string>>{
           {"frobnicate"}, {"eval", "--nope"}, {}, {"define", "--structure", fixture_path("sym.json")}}) {
    auto r = run(args);
    expect_envelope(r);
    EXPECT_EQ(r.exit_code, 2);
  }
}

TEST(Cli, RuntimeErrors) {
  std::vector<std::vector<std::string>> cases{
      {"eval", "--structure", fixture_path("tri.json"), "--formula", "(P x)"},
      {"eval", "--structure", fixture_path("tri.json"), "--formula", "(P x y)", "--assign", "x=a"},
      {"eval", "--structure", fixture_path("tri.json"), "--formula", "(P x", "--assign", "x=a"},
      {"eval", "--structure", "/nonexistent/file.json", "--formula", "(P x)"},
      {"satisfies", "--structure", fixture_path("tri.json"), "--formula", "(iinf n nat (recip n))"},
      {"eval", "--structure", fixture_path("tri.json"), "--formula", "(P x)", "--assign", "x=zz"},
  };
  for (const auto& args : cases) {
    auto r = run(args);
    expect_envelope(r);
    EXPECT_EQ(r.exit_code, 1) << args[4];
    EXPECT_FALSE(r.diagnostics.empty());
  }
}

}  // namespace
