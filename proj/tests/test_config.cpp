#include <doctest.h>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "conecalc/commands.hpp"
#include "conecalc/config.hpp"
#include "conecalc/error.hpp"
#include "conecalc/report.hpp"

using namespace conecalc;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> error_fields(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.fields();
  }
  return {};
}

bool names(const std::vector<std::string>& fields, const std::string& name) {
  return std::find(fields.begin(), fields.end(), name) != fields.end();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("conecalc-test-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read(const fs::path& p) {
  std::ifstream in(p);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("minimal config gets the documented defaults") {
  const RunConfig c = parse_config("[operator]\npreset = laplacian\n[cross_section]\nn = 1\n");
  CHECK(c.weight.gamma == 0.0);
  CHECK(c.weight.p == 2.0);
  CHECK(c.grid.points == 512);
  CHECK_FALSE(c.contour.delta.has_value());
  CHECK(c == RunConfig{});
}

TEST_CASE("range errors name the offending fields") {
  CHECK(names(error_fields("[weight]\np = 1\n"), "weight.p"));
  CHECK(names(error_fields("[contour]\ntheta = pi\n"), "contour.theta"));
  const auto many = error_fields("[weight]\np = 0.5\n[grid]\npoints = 3\n[contour]\ntheta = 4\n");
  CHECK(names(many, "weight.p"));
  CHECK(names(many, "grid.points"));
  CHECK(names(many, "contour.theta"));
}

TEST_CASE("unknown keys and sections are hard errors") {
  CHECK(names(error_fields("[weight]\ngamam = 0.5\n"), "weight.gamam"));
  CHECK_FALSE(error_fields("[wieght]\np = 2\n").empty());
  CHECK_FALSE(error_fields("[weight]\np = two\n").empty());
}

TEST_CASE("load_config reports missing files") {
  CHECK_THROWS_AS(load_config("/nonexistent/conecalc.ini"), ConfigError);
  CHECK_THROWS_AS(load_config(fs::path(CONECALC_FIXTURES) / "bad_p.ini"), ConfigError);
}

TEST_CASE("canonical text round-trips") {
  RunConfig c;
  c.op.preset = "custom";
  c.op.shift = 0.25;
  c.op.coeff = {"-nu", "0", "-1"};
  c.cross_section.type = "table";
  c.cross_section.n = 4;
  c.cross_section.eigenvalues = {0.0, -4.0, -10.0};
  c.cross_section.multiplicities = {1, 5, 14};
  c.contour.delta = 0.125;
  c.contour.nray = 300;
  c.scan.radii = {1.0, 10.0, 100.0};
  c.pde.forcing = "random";
  c.run.seed = 42;
  const RunConfig back = parse_config(to_text(c));
  CHECK(back == c);
  CHECK(config_hash(back) == config_hash(c));
  CHECK(config_hash(c) != config_hash(RunConfig{}));
  CHECK(config_hash(c).size() == 16);
  CHECK(parse_config(to_text(RunConfig{})) == RunConfig{});
}

TEST_CASE("operators built from config") {
  SUBCASE("custom coefficients reproduce the Laplacian") {
    RunConfig c;
    c.op.preset = "custom";
    c.op.coeff = {"-nu", "0", "-1"};
    const FuchsOperator custom = build_operator(c);
    const FuchsOperator laplacian = build_operator(RunConfig{});
    for (std::size_t j = 0; j < custom.cross_section.mode_count(); ++j) {
      const auto a = conormal_polynomial(custom, j);
      const auto b = conormal_polynomial(laplacian, j);
      REQUIRE(a.size() == b.size());
      for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == doctest::Approx(b[k]));
    }
  }
  SUBCASE("table cross-section keeps mode_cutoff + 1 eigenvalues") {
    RunConfig c;
    c.cross_section.type = "table";
    c.cross_section.n = 4;
    c.cross_section.eigenvalues = {0.0, -4.0, -10.0, -18.0};
    c.cross_section.mode_cutoff = 1;
    const FuchsOperator op = build_operator(c);
    CHECK(op.cross_section.mode_count() == 2);
    CHECK(op.dimension() == 4);
  }
}

TEST_CASE("reports") {
  SUBCASE("empty results are valid JSON with schema version 1") {
    RunRecord record;
    record.command = "hardy-check";
    record.config_text = to_text(RunConfig{});
    record.config_hash = config_hash(RunConfig{});
    record.reports.push_back(CalculusReport{});
    const auto j = nlohmann::json::parse(to_json(record));
    CHECK(j["schema_version"] == 1);
    CHECK(j["results"].is_array());
    CHECK(j["results"][0]["results"].empty());
  }
  SUBCASE("indicial lists the roots 0, +-1, +-2") {
    const RunRecord r = run("indicial", RunConfig{});
    CHECK(r.pass());
    const Table* roots = nullptr;
    for (const auto& rep : r.reports)
      for (const auto& t : rep.tables)
        if (t.name == "roots") roots = &t;
    REQUIRE(roots != nullptr);
    const auto re = std::find(roots->columns.begin(), roots->columns.end(), "re") - roots->columns.begin();
    std::set<long> found;
    for (const auto& row : roots->rows) found.insert(std::lround(row[static_cast<std::size_t>(re)]));
    for (const long k : {0L, 1L, -1L, 2L, -2L}) CHECK(found.count(k) == 1);
  }
  SUBCASE("reruns are identical with timings masked") {
    RunConfig c;
    c.run.seed = 7;
    const std::string a = to_json(run("hardy-check", c), false);
    const std::string b = to_json(run("hardy-check", c), false);
    CHECK(a == b);
    c.grid.points = 128;
    const std::string s1 = to_json(run("spectrum", c), false);
    const std::string s2 = to_json(run("spectrum", c), false);
    CHECK(s1 == s2);
  }
  SUBCASE("the echoed config re-parses to the same config") {
    RunConfig c;
    c.weight.gamma = 0.5;
    const RunRecord r = run("indicial", c);
    CHECK(parse_config(r.config_text) == c);
  }
  SUBCASE("two commands in one directory do not clobber") {
    const fs::path dir = scratch("clobber");
    RunConfig c;
    const auto a = write_report(run("hardy-check", c), dir);
    const auto b = write_report(run("indicial", c), dir);
    std::set<fs::path> all(a.begin(), a.end());
    for (const auto& p : b) CHECK(all.insert(p).second);
    for (const auto& p : all) {
      CHECK(fs::exists(p));
      CHECK(p.filename().string().find(config_hash(c)) != std::string::npos);
    }
  }
  SUBCASE("bip_scan CSV header") {
    Table t{"bip_scan", {"y", "norm", "e_theta_bound", "ratio"}, {{0.0, 1.0, 1.0, 1.0}}};
    const std::string csv = to_csv(t);
    CHECK(csv.rfind("y,norm,e_theta_bound,ratio\n", 0) == 0);
    RunRecord record;
    record.command = "bip-scan";
    record.config_hash = "0123456789abcdef";
    CalculusReport rep;
    rep.tables.push_back(t);
    record.reports.push_back(rep);
    const fs::path dir = scratch("bip");
    const auto paths = write_report(record, dir);
    bool seen = false;
    for (const auto& p : paths)
      if (p.filename() == "bip-scan-0123456789abcdef.bip_scan.csv") {
        seen = true;
        CHECK(read(p).rfind("y,norm,e_theta_bound,ratio\n", 0) == 0);
      }
    CHECK(seen);
  }
  SUBCASE("module errors become error records") {
    RunConfig c;
    c.grid.kind = "truncated_cone";
    c.grid.rmin = 1.0;
    const RunRecord r = run("spectrum", c);
    CHECK_FALSE(r.pass());
    REQUIRE_FALSE(r.errors.empty());
  }
}
