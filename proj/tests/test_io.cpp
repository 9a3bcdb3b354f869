#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "test_support.hpp"
#include "tworate/model_io.hpp"

using namespace tworate;
namespace fs = std::filesystem;

namespace {

// Writes content to a unique temp file and removes it when the guard dies.
struct TmpFile {
  fs::path path;
  explicit TmpFile(const std::string& content, const char* tag = "io") {
    path = fs::temp_directory_path() /
           (std::string("tworate_test_") + tag + "_" + std::to_string(::getpid()) + ".json");
    std::ofstream out(path);
    out << content;
  }
  ~TmpFile() { std::error_code ec; fs::remove(path, ec); }
};

const char* kGoodModel = R"({
  "variables": [
    {"name": "x", "cardinality": 2},
    {"name": "y", "cardinality": 2},
    {"name": "z", "cardinality": 2}
  ],
  "pmf": [0.36, 0.04, 0.09, 0.01, 0.01, 0.09, 0.04, 0.36],
  "chain": "y-x-z",
  "distortions": {
    "dx": {"matrix": [[0, 1], [1, 0]]},
    "dz": {"recon_cardinality": 2, "matrix": [[0, 1], [1, 0]]}
  }
})";

}  // namespace

TEST_CASE("model file: full discrete model round trip") {
  // pmf is p(x)p(y|x)p(z|x) with p(x)=1/2, crossover 0.2 toward y, 0.1 toward z,
  // laid out row-major over (x,y,z).
  TmpFile f(kGoodModel);
  ModelFile m = read_model_file(f.path);
  REQUIRE(m.model.has_value());
  CHECK(!m.gaussian.has_value());
  CHECK(m.model->chain == ChainDirection::YXZ);
  CHECK(m.model->var("x").cardinality == 2);
  CHECK(m.model->var("y").cardinality == 2);
  CHECK(m.model->var("z").cardinality == 2);
  REQUIRE(m.model->dx.has_value());
  REQUIRE(m.model->dz.has_value());
  CHECK(m.model->dx->recon.cardinality == 2);
  CHECK(m.model->dz->recon.cardinality == 2);
  // Hamming matrix landed in the right order.
  CHECK(m.model->dx->cost == std::vector<double>{0, 1, 1, 0});
}

TEST_CASE("model file: gaussian-only file") {
  TmpFile f(R"({"gaussian": {"var_a": 1.0, "var_b": 0.5, "var_z": 2.0}})");
  ModelFile m = read_model_file(f.path);
  CHECK(!m.model.has_value());
  REQUIRE(m.gaussian.has_value());
  CHECK(m.gaussian->var_a == 1.0);
  CHECK(m.gaussian->var_b == 0.5);
  CHECK(m.gaussian->var_z == 2.0);
}

TEST_CASE("model file: gaussian block alongside a discrete model") {
  std::string text = kGoodModel;
  text.insert(text.rfind('}'), R"(, "gaussian": {"var_a": 1, "var_b": 1, "var_z": 1})");
  TmpFile f(text);
  ModelFile m = read_model_file(f.path);
  CHECK(m.model.has_value());
  CHECK(m.gaussian.has_value());
}

TEST_CASE("model file: parse and validation failures") {
  auto expect_fail = [](const std::string& text, const char* fragment) {
    TmpFile f(text);
    try {
      read_model_file(f.path);
      FAIL_CHECK("expected runtime_error containing '" << fragment << "'");
    } catch (const std::runtime_error& e) {
      std::string msg = e.what();
      CHECK(msg.find(f.path.string()) != std::string::npos);
      CHECK(msg.find(fragment) != std::string::npos);
    }
  };

  CHECK_THROWS_AS(read_model_file("/nonexistent/tworate/model.json"), std::runtime_error);
  expect_fail("{not json", "");
  expect_fail("[1,2,3]", "top level");
  expect_fail("{}", "missing 'variables'");
  expect_fail(R"({"variables": [{"name": "x"}]})", "name and cardinality");
  expect_fail(R"({"variables": [{"name":"x","cardinality":2},{"name":"y","cardinality":2},
                                {"name":"z","cardinality":2}]})",
              "missing 'pmf'");
  expect_fail(R"({"variables": [{"name":"x","cardinality":2},{"name":"y","cardinality":2},
                                {"name":"z","cardinality":2}],
                  "pmf": [0.5, "oops"]})",
              "numbers");

  // Eight weights expected; six given.
  std::string short_pmf = R"({"variables": [{"name":"x","cardinality":2},{"name":"y","cardinality":2},
                                {"name":"z","cardinality":2}],
                  "pmf": [0.2, 0.2, 0.2, 0.2, 0.1, 0.1],
                  "chain": "y-x-z"})";
  expect_fail(short_pmf, "");

  std::string no_chain = kGoodModel;
  no_chain.replace(no_chain.find("\"chain\": \"y-x-z\","), 18, "");
  expect_fail(no_chain, "missing 'chain'");

  std::string bad_chain = kGoodModel;
  bad_chain.replace(bad_chain.find("y-x-z"), 5, "x-y-z");
  expect_fail(bad_chain, "chain must be");

  // y == z exactly, independent of x: conditional dependence breaks y-x-z.
  expect_fail(R"({"variables": [{"name":"x","cardinality":2},{"name":"y","cardinality":2},
                                {"name":"z","cardinality":2}],
                  "pmf": [0.25, 0, 0, 0.25, 0.25, 0, 0, 0.25],
                  "chain": "y-x-z"})",
              "");
}

TEST_CASE("model file: distortion block failures") {
  auto with_dx = [](const char* dx_json) {
    std::string text = kGoodModel;
    const std::string from = R"("dx": {"matrix": [[0, 1], [1, 0]]})";
    text.replace(text.find(from), from.size(), std::string("\"dx\": ") + dx_json);
    return text;
  };
  auto expect_fail = [](const std::string& text, const char* fragment) {
    TmpFile f(text);
    try {
      read_model_file(f.path);
      FAIL_CHECK("expected failure containing '" << fragment << "'");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()).find(fragment) != std::string::npos);
    }
  };

  expect_fail(with_dx("[[0,1],[1,0]]"), "needs a matrix");
  expect_fail(with_dx(R"({"matrix": []})"), "nonempty");
  expect_fail(with_dx(R"({"matrix": [[0,1],[1]]})"), "ragged");
  expect_fail(with_dx(R"({"matrix": [[0,"a"],[1,0]]})"), "non-number");
  // Row count must match the source alphabet (2 here).
  expect_fail(with_dx(R"({"matrix": [[0,1],[1,0],[1,1]]})"), "");
  expect_fail(R"({"gaussian": {"var_a": -1, "var_b": 1, "var_z": 1}})", "gaussian block");

  std::string bad_ds = kGoodModel;
  const std::string from = R"("distortions": {)";
  bad_ds.replace(bad_ds.find(from), from.size() + 1, R"("distortions": [)");
  bad_ds.replace(bad_ds.rfind("}\n}"), 3, "]\n}");
  // Now malformed anyway; just require some runtime_error.
  TmpFile f(bad_ds);
  CHECK_THROWS_AS(read_model_file(f.path), std::runtime_error);
}

TEST_CASE("factors file: plain names default to binary") {
  TmpFile f(R"({"variables": ["a", "b", "c"], "factors": [["a", "b"], ["b", "c"]]})", "factors");
  FactorsFile ff = read_factors_file(f.path);
  CHECK(ff.spec.variables == std::vector<std::string>{"a", "b", "c"});
  CHECK(ff.cardinalities == std::vector<int>{2, 2, 2});
  REQUIRE(ff.spec.factors.size() == 2);
  CHECK(ff.spec.factors[0] == std::vector<std::string>{"a", "b"});
}

TEST_CASE("factors file: object form carries cardinalities") {
  TmpFile f(R"({"variables": [{"name": "a", "cardinality": 3}, "b",
                              {"name": "c"}],
                "factors": [["a", "b", "c"]]})",
            "factors_obj");
  FactorsFile ff = read_factors_file(f.path);
  CHECK(ff.cardinalities == std::vector<int>{3, 2, 2});
}

TEST_CASE("factors file: failures") {
  auto expect_fail = [](const std::string& text) {
    TmpFile f(text, "factors_bad");
    CHECK_THROWS_AS(read_factors_file(f.path), std::runtime_error);
  };
  expect_fail(R"({"variables": ["a"]})");                                  // no factors
  expect_fail(R"({"factors": [["a"]]})");                                  // no variables
  expect_fail(R"({"variables": [7], "factors": [["a"]]})");                // bad variable entry
  expect_fail(R"({"variables": ["a"], "factors": ["a"]})");                // factor not an array
  expect_fail(R"({"variables": ["a"], "factors": [["a", "ghost"]]})");     // unknown scope var
  expect_fail(R"({"variables": ["a", "a"], "factors": [["a"]]})");         // duplicate name
}

TEST_CASE("run config maps onto a search budget") {
  RunConfig cfg;
  cfg.seed = 99;
  cfg.restarts = 5;
  cfg.refinement_rounds = 7;
  cfg.grid_levels = 2;
  cfg.card_u = 3;
  cfg.card_v = 4;
  cfg.card_w = 5;
  SearchBudget b = cfg.budget();
  CHECK(b.seed == 99);
  CHECK(b.restarts == 5);
  CHECK(b.refinement_rounds == 7);
  CHECK(b.grid_levels == 2);
  CHECK(b.card_u == 3);
  CHECK(b.card_v == 4);
  CHECK(b.card_w == 5);

  // Defaults stay aligned with SearchBudget's own defaults.
  RunConfig fresh;
  SearchBudget d = fresh.budget();
  SearchBudget ref;
  CHECK(d.restarts == ref.restarts);
  CHECK(d.refinement_rounds == ref.refinement_rounds);
  CHECK(d.grid_levels == ref.grid_levels);
  CHECK(d.seed == ref.seed);
}

TEST_CASE("frontier csv is deterministic and 9-digit") {
  std::vector<FrontierPoint> pts{{0.0, 1.0, 0.25},
                                 {1.0 / 3.0, 0.123456789123, 0.1},
                                 {0.5, 2e-10, 0.0}};
  std::string csv = frontier_csv(pts);
  CHECK(csv ==
        "r1,r,dx\n"
        "0,1,0.25\n"
        "0.333333333,0.123456789,0.1\n"
        "0.5,2e-10,0\n");
  CHECK(frontier_csv({}) == "r1,r,dx\n");
  CHECK(frontier_csv(pts) == csv);
}
