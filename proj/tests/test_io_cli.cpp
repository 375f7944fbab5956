#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fracneu/cli.hpp"
#include "fracneu/error.hpp"
#include "fracneu/io.hpp"

using namespace fracneu;
namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "fracneu");
  return run_cli(args);
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::current_path() / "io_cli_scratch";
  fs::create_directories(dir);
  return dir / name;
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

}  // namespace

TEST_CASE("domain specs parse and round-trip") {
  for (const char* text : {"interval:0,1,256", "rectangle:0,1,0,2,24,12", "lshape:2,24"}) {
    const auto spec = DomainSpec::parse(text);
    CHECK(spec.to_string() == text);
    CHECK(DomainSpec::parse(spec.to_string()).params == spec.params);
  }
  const auto l = DomainSpec::parse("lshape:2,8");
  CHECK(l.shape == ShapeKind::LShape);
  CHECK(l.build().size() == 48);
  CHECK(DomainSpec::parse("interval:0,2,16").build().diam_euclid() == doctest::Approx(2.0));

  for (const char* bad : {"", "interval", "interval:0,1", "interval:0,1,x", "disk:0,1,4",
                          "interval:1,0,16", "interval:0,1,0", "lshape:2,7", "rectangle:0,1,0,1,4"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(DomainSpec::parse(bad).build(), Error);
  }
  CHECK(parse_metric("geodesic") == MetricKind::Geodesic);
  CHECK_THROWS_AS(parse_metric("manhattan"), ParameterError);
  CHECK(std::string(to_string(MetricKind::Euclidean)) == "euclidean");
}

TEST_CASE("number formatting round-trips") {
  for (double x : {0.1, 1.0 / 3, 9.869604401089358, 1e-300, -2.5e17}) CHECK(std::stod(format_number(x)) == x);
}

TEST_CASE("eigenpair JSON round trip and CSV layout") {
  auto spec = DomainSpec::parse("rectangle:0,1,0,1,6,6");
  const Domain d = spec.build();
  FracParams fp;
  fp.s = 0.5;
  fp.p = 3.0;
  const auto pair = solve(d, fp);
  const double wr = weak_residual(d, pair);
  const std::string text = eigenpair_json(spec, d, pair, wr);
  const auto j = nlohmann::json::parse(text);
  CHECK(j.at("lambda").get<double>() == pair.lambda);
  CHECK(j.at("weak_residual").get<double>() == wr);
  CHECK(j.at("viscosity_regime").get<bool>() == pair.viscosity_regime());
  CHECK(j.at("u").size() == d.size());

  const auto back = parse_eigenpair_json(text);
  CHECK(back.spec.to_string() == spec.to_string());
  CHECK(back.pair.lambda == pair.lambda);
  CHECK(back.pair.u == pair.u);
  CHECK(back.pair.s == 0.5);
  CHECK(back.pair.p == 3.0);
  CHECK_THROWS_AS(parse_eigenpair_json("{\"lambda\": 1}"), ParameterError);
  CHECK_THROWS_AS(parse_eigenpair_json("not json"), ParameterError);

  const std::string csv = eigenfunction_csv(d, pair);
  CHECK(first_line(csv) == "x,y,u");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(d.size() + 1));
  const Domain line = build_interval(0, 1, 8);
  fp.p = 2.0;
  CHECK(first_line(eigenfunction_csv(line, solve(line, fp))) == "x,u");
}

TEST_CASE("sweep and viscosity writers") {
  const auto spec = DomainSpec::parse("interval:0,2,32");
  const Domain d = spec.build();
  const auto r = sweep_p(d, 0.5, std::vector<double>{4, 8, 16});
  CHECK(first_line(sweep_csv(r)) == "param,N,lambda,scaled,reference,rel_error");
  const auto j = nlohmann::json::parse(sweep_json(spec, r));
  CHECK(j.at("records").size() == 3);
  CHECK(j.at("fit_diagnostics").contains("slope"));
  CHECK(j.at("fit_diagnostics").contains("residual"));
  const std::string svg = sweep_svg(r);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("polyline") != std::string::npos);

  std::vector<double> u(d.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = d.nodes()[i][0] - 1;
  const auto rep = viscosity_residual(d, u, 0.5, lambda_inf(d, 0.5));
  CHECK(first_line(viscosity_csv(d, u, rep)) == "node,x,u,class,residual");
  CHECK(nlohmann::json::parse(viscosity_json(spec, rep)).at("per_node").size() == d.size());
}

TEST_CASE("atomic writes leave no temporary behind") {
  const auto path = scratch("atomic.txt");
  write_file_atomic(path, "first");
  write_file_atomic(path, "second");
  CHECK(read_file(path) == "second");
  for (const auto& entry : fs::directory_iterator(path.parent_path())) {
    CHECK(entry.path().extension() != ".tmp");
  }
  CHECK_THROWS_AS(read_file(scratch("missing.json")), Error);
}

TEST_CASE("command line: successful runs write their outputs") {
  const auto prefix = scratch("e").string();
  CHECK(run({"eigen", "--domain", "interval:0,1,32", "--s", "0.5", "--p", "3", "--out", prefix}) == kExitOk);
  CHECK(fs::exists(prefix + ".json"));
  CHECK(fs::exists(prefix + ".csv"));

  const auto vprefix = scratch("v").string();
  CHECK(run({"viscosity", "--input", prefix + ".json", "--out", vprefix}) == kExitOk);
  CHECK(fs::exists(vprefix + ".json"));
  CHECK(fs::exists(vprefix + ".csv"));

  const auto sprefix = scratch("s").string();
  const auto plot = scratch("s.svg").string();
  CHECK(run({"sweep-s", "--domain", "interval:0,1,32", "--s-grid", "0.6,0.8,0.9", "--reference", "pi2",
             "--out", sprefix, "--plot", plot}) == kExitOk);
  CHECK(fs::exists(sprefix + ".csv"));
  CHECK(fs::exists(plot));

  const auto pprefix = scratch("p").string();
  CHECK(run({"sweep-p", "--domain", "lshape:2,6", "--metric", "geodesic", "--s", "0.5", "--p-grid", "4,8",
             "--out", pprefix}) == kExitOk);
  CHECK(nlohmann::json::parse(read_file(pprefix + ".json")).at("records").size() == 2);
}

TEST_CASE("command line: configuration errors exit with 1") {
  CHECK(run({}) == kExitConfig);
  CHECK(run({"eigen", "--domain", "interval:0,1,16", "--p", "3"}) == kExitConfig);
  CHECK(run({"eigen", "--domain", "interval:0,1,16", "--s", "0.5", "--p", "1"}) == kExitConfig);
  CHECK(run({"eigen", "--domain", "blob:1", "--s", "0.5", "--p", "3"}) == kExitConfig);
  CHECK(run({"sweep-p", "--domain", "interval:0,1,16", "--s", "0.5", "--p-grid", ""}) == kExitConfig);
  CHECK(run({"sweep-s", "--domain", "interval:0,1,16", "--s-grid", "0.9,0.6"}) == kExitConfig);
  CHECK(run({"viscosity", "--input", scratch("nope.json").string()}) == kExitConfig);

  // a stored eigenfunction that is constant
  const auto prefix = scratch("flat").string();
  REQUIRE(run({"eigen", "--domain", "interval:0,1,16", "--s", "0.5", "--p", "3", "--out", prefix}) == kExitOk);
  auto j = nlohmann::json::parse(read_file(prefix + ".json"));
  for (auto& x : j.at("u")) x = 0.25;
  write_file_atomic(prefix + ".json", j.dump());
  CHECK(run({"viscosity", "--input", prefix + ".json", "--out", scratch("flatv").string()}) == kExitConfig);
}

TEST_CASE("command line: solver failures exit with 2, failed sweeps with 3") {
  CHECK(run({"eigen", "--domain", "interval:0,1,32", "--s", "0.5", "--p", "4", "--max-iter", "1", "--out",
             scratch("fail").string()}) == kExitSolver);
  CHECK(run({"sweep-p", "--domain", "interval:0,1,32", "--s", "0.5", "--p-grid", "3,4,5", "--max-iter", "1",
             "--out", scratch("partial").string()}) == kExitPartialSweep);
}

TEST_CASE("command line: config file with command-line override") {
  const auto cfg = scratch("run.toml");
  {
    std::ofstream f(cfg);
    f << "[eigen]\ndomain = \"interval:0,1,24\"\ns = 0.5\np = 2.5\n";
  }
  const auto a = scratch("cfg_a").string();
  const auto b = scratch("cfg_b").string();
  REQUIRE(run({"--config", cfg.string(), "eigen", "--out", a}) == kExitOk);
  REQUIRE(run({"--config", cfg.string(), "eigen", "--p", "4", "--out", b}) == kExitOk);
  const auto ja = nlohmann::json::parse(read_file(a + ".json"));
  const auto jb = nlohmann::json::parse(read_file(b + ".json"));
  CHECK(ja.at("p").get<double>() == 2.5);
  CHECK(jb.at("p").get<double>() == 4.0);
  CHECK(ja.at("nodes").get<std::size_t>() == 24);
}
