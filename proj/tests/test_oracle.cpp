#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "test_support.hpp"
#include "tworate/oracle.hpp"

using namespace tworate;
using testsupport::h2;
namespace fs = std::filesystem;

namespace {

SourceModel bsm() { return SourceModel::binary_symmetric(0.5, 0.2, 0.1); }

fs::path temp_file(const char* tag) {
  return fs::temp_directory_path() / (std::string("tworate_test_") + tag + ".csv");
}

}  // namespace

TEST_CASE("simplex lattice: counts, sums, order") {
  auto l1 = simplex_lattice(2, 5);
  CHECK(l1.size() == 5);                       // 0/4 .. 4/4
  auto l2 = simplex_lattice(3, 4);
  CHECK(l2.size() == 10);                      // compositions of 3 into 3 parts
  for (const auto& row : l2) {
    double s = 0;
    for (double x : row) {
      CHECK(x >= 0.0);
      s += x;
    }
    CHECK(std::fabs(s - 1.0) <= 1e-12);
  }
  // lexicographic: all mass on the last cell first, on the first cell last
  CHECK(l2.front() == std::vector<double>{0.0, 0.0, 1.0});
  CHECK(l2.back() == std::vector<double>{1.0, 0.0, 0.0});

  CHECK_THROWS_AS(simplex_lattice(0, 5), std::invalid_argument);
  CHECK_THROWS_AS(simplex_lattice(2, 1), std::invalid_argument);
}

TEST_CASE("mute-helper enumeration collapses to plain side-information coding") {
  auto m = bsm();
  QuantizedKernelSpace space;
  space.card_u = 1;
  space.card_w = 2;
  space.levels = 9;

  // guessing x = z already achieves distortion 0.1, so zero rate suffices
  auto pts = exhaustive_frontier(m, 0.1, space);
  REQUIRE(pts.size() == 1);
  CHECK(pts[0].r1 == 0.0);
  CHECK(pts[0].rate <= 1e-12);
  CHECK(pts[0].distortion <= 0.1 + 1e-12);

  // tighter target needs a real description, but never more than copying x
  auto tight = exhaustive_frontier(m, 0.02, space);
  REQUIRE(tight.size() == 1);
  CHECK(tight[0].rate > 0.1);
  CHECK(tight[0].rate <= h2(0.1) + 1e-12);
  CHECK(tight[0].distortion <= 0.02 + 1e-12);
}

TEST_CASE("pareto structure of the enumerated frontier") {
  auto m = bsm();
  QuantizedKernelSpace space;
  space.card_u = 2;
  space.card_w = 2;
  space.levels = 5;
  auto pts = exhaustive_frontier(m, 0.05, space);
  REQUIRE(pts.size() >= 2);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    CHECK(pts[i].r1 < pts[i + 1].r1);          // strictly increasing helper rate
    CHECK(pts[i].rate > pts[i + 1].rate);      // strictly decreasing description rate
  }
  for (const auto& p : pts) {
    CHECK(p.distortion <= 0.05 + 1e-12);
    CHECK(p.r1 >= 0.0);
    CHECK(p.rate >= 0.0);
  }
}

TEST_CASE("enumeration result does not depend on the worker count") {
  auto m = bsm();
  QuantizedKernelSpace space;
  space.card_u = 2;
  space.card_w = 2;
  space.levels = 5;
  setenv("TWORATE_WORKERS", "1", 1);
  auto serial = exhaustive_frontier(m, 0.05, space);
  setenv("TWORATE_WORKERS", "4", 1);
  auto parallel = exhaustive_frontier(m, 0.05, space);
  unsetenv("TWORATE_WORKERS");
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].r1 == parallel[i].r1);
    CHECK(serial[i].rate == parallel[i].rate);
    CHECK(serial[i].distortion == parallel[i].distortion);
  }
}

TEST_CASE("evaluation cap guards runaway enumerations") {
  auto m = bsm();
  QuantizedKernelSpace space;
  space.card_u = 3;
  space.card_w = 3;
  space.levels = 7;
  space.max_evaluations = 1000;
  CHECK_THROWS_AS(exhaustive_frontier(m, 0.1, space), std::invalid_argument);

  QuantizedKernelSpace bad = space;
  bad.card_u = 0;
  CHECK_THROWS_AS(exhaustive_frontier(m, 0.1, bad), std::invalid_argument);
  CHECK_THROWS_AS(exhaustive_frontier(m, -0.1, space), std::invalid_argument);
}

TEST_CASE("random factor joints: input validation") {
  FactorizationSpec spec{{"a", "b"}, {{"a", "b"}}};
  CHECK_THROWS_AS(random_factor_joint(spec, std::vector<int>{2}, 1), std::invalid_argument);
  CHECK_THROWS_AS(random_factor_joint(spec, std::vector<int>{2, 0}, 1), std::invalid_argument);
  auto j = random_factor_joint(spec, std::vector<int>{2, 3}, 1);
  CHECK(j.size() == 6);
}

TEST_CASE("fixture files survive a write/read round trip bit for bit") {
  OracleFixture fx;
  fx.meta = {"binary_symmetric", 0.5, 0.2, 0.1, 0.05, 7, 2, 3};
  fx.points.push_back({0.0, 1.0 / 3.0, 0.05});
  fx.points.push_back({0.123456789012345678, 0.1, 0.04999999999999999});
  fx.points.push_back({1.0, 0.0, 0.012345678901234567});

  auto path = temp_file("roundtrip");
  write_oracle_fixture(path, fx);
  auto rd = read_oracle_fixture(path);
  fs::remove(path);

  CHECK(rd.meta.instance == fx.meta.instance);
  CHECK(rd.meta.px1 == fx.meta.px1);
  CHECK(rd.meta.fy == fx.meta.fy);
  CHECK(rd.meta.fz == fx.meta.fz);
  CHECK(rd.meta.d == fx.meta.d);
  CHECK(rd.meta.levels == fx.meta.levels);
  CHECK(rd.meta.card_u == fx.meta.card_u);
  CHECK(rd.meta.card_w == fx.meta.card_w);
  REQUIRE(rd.points.size() == fx.points.size());
  for (std::size_t i = 0; i < fx.points.size(); ++i) {
    CHECK(rd.points[i].r1 == fx.points[i].r1);
    CHECK(rd.points[i].rate == fx.points[i].rate);
    CHECK(rd.points[i].distortion == fx.points[i].distortion);
  }
}

TEST_CASE("fixture files reject malformed input") {
  auto path = temp_file("malformed");

  {
    std::ofstream out(path);
    out << "r1,r,dx\n0,0,0\n";               // no version line
  }
  CHECK_THROWS_AS(read_oracle_fixture(path), std::runtime_error);

  {
    std::ofstream out(path);
    out << "# oracle-frontier v1\nwrong,header,here\n";
  }
  CHECK_THROWS_AS(read_oracle_fixture(path), std::runtime_error);

  {
    std::ofstream out(path);
    out << "# oracle-frontier v1\nr1,r,dx\n0.1,0.2\n";   // short row
  }
  CHECK_THROWS_AS(read_oracle_fixture(path), std::runtime_error);

  {
    std::ofstream out(path);
    out << "# oracle-frontier v1\n# instance=binary_symmetric px1=0.5 fy=0.2 fz=0.1\n";
  }
  CHECK_THROWS_AS(read_oracle_fixture(path), std::runtime_error);   // no header

  fs::remove(path);
  CHECK_THROWS_AS(read_oracle_fixture(path), std::runtime_error);   // no file
}

TEST_CASE("fixture metadata rebuilds its model and regenerates its points") {
  OracleFixtureMeta meta{"binary_symmetric", 0.5, 0.2, 0.1, 0.1, 5, 1, 2};
  auto m = fixture_model(meta);
  CHECK(m.pxyz.variable("x").cardinality == 2);

  auto fx = generate_oracle_fixture(meta);
  QuantizedKernelSpace space;
  space.levels = meta.levels;
  space.card_u = meta.card_u;
  space.card_w = meta.card_w;
  auto direct = exhaustive_frontier(fixture_model(meta), meta.d, space);
  REQUIRE(fx.points.size() == direct.size());
  for (std::size_t i = 0; i < direct.size(); ++i) {
    CHECK(fx.points[i].r1 == direct[i].r1);
    CHECK(fx.points[i].rate == direct[i].rate);
  }

  OracleFixtureMeta unknown = meta;
  unknown.instance = "mystery";
  CHECK_THROWS_AS(fixture_model(unknown), std::invalid_argument);
}
