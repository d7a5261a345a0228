#include "nestlab/config.hpp"
#include "nestlab/error.hpp"

#include <doctest.h>

#include <sstream>

using namespace nestlab;

namespace {

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

int error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("sections and keys") {
    const RunConfig cfg = parse(R"(# demo
[fractal]
name = sg
level = 4

[functions]
suite = harmonic:1:0:0, random:9:2
seed = 17

[checks]
names = poincare, coarea
p = 1.5, 2
A = 2
[output]
dir = out-x
)");
    CHECK(cfg.check.fractal == "sg");
    CHECK(cfg.check.level == 4);
    REQUIRE(cfg.check.suite.size() == 2);
    CHECK(cfg.check.suite[1].kind == "random-cellwise");
    CHECK(cfg.check.suite[1].params.seed == 9);
    CHECK(cfg.check.seed == 17);
    CHECK(cfg.checks == std::vector<std::string>{"poincare", "coarea"});
    CHECK(cfg.ps == std::vector<double>{1.5, 2.0});
    CHECK(cfg.check.A == 2.0);
    CHECK(cfg.out_dir == "out-x");
  }

  TEST_CASE("parse errors report the line") {
    CHECK(error_line("[fractal]\nlevel = 3\nbogus = 1\n") == 3);
    CHECK(error_line("[nowhere]\n") == 1);
    CHECK(error_line("level = 3\n") == 1);
    CHECK(error_line("[fractal]\n\nlevel\n") == 3);
    CHECK(error_line("[fractal]\nlevel = three\n") == 2);
    CHECK(error_line("[variation]\nkind = fancy\n") == 2);
    CHECK(error_line("[functions]\nsuite = harmonic, widget:1\n") == 2);
  }

  TEST_CASE("suite items") {
    const SuiteItem h = parse_suite_item("harmonic:1:0:0:0");
    CHECK(h.kind == "harmonic");
    CHECK(h.params.boundary.size() == 4);
    CHECK(h.id == "harmonic-1-0-0-0");
    const SuiteItem ind = parse_suite_item("indicator:2:7");
    CHECK(ind.params.simplex_level == 2);
    CHECK(ind.params.simplex_index == 7);
    CHECK(parse_suite_item("eigenfunction:3").params.eigen_index == 3);
    CHECK(parse_suite_item("coordinate:1").params.axis == 1);
    CHECK_THROWS_AS(parse_suite_item("indicator:2"), UsageError);
  }

  TEST_CASE("config hash tracks settings but not output paths") {
    RunConfig a;
    RunConfig b = a;
    b.out_dir = "elsewhere";
    b.cache_dir = "cache-elsewhere";
    CHECK(config_hash(a) == config_hash(b));
    b.check.seed = a.check.seed + 1;
    CHECK(config_hash(a) != config_hash(b));
    RunConfig c = a;
    c.ps = {1.5};
    CHECK(config_hash(a) != config_hash(c));
    CHECK(hex64(config_hash(a)).size() == 16);
  }

  TEST_CASE("canonical listing round trips") {
    RunConfig a;
    a.check.fractal = "sg";
    a.check.A = 2.5;
    a.ps = {1.25, 2.0};
    const std::string text = canonical_config(a);
    CHECK(text.find("fractal.name = sg") != std::string::npos);
    CHECK(text.find("output.dir") == std::string::npos);
  }

  TEST_CASE("fnv1a reference values") {
    CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(format_double(0.1) == "0.10000000000000001");
  }
}
