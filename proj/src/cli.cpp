#include "fracneu/cli.hpp"

#include <cmath>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fracneu/asymptotics.hpp"
#include "fracneu/eigensolve.hpp"
#include "fracneu/error.hpp"
#include "fracneu/holder_infinity.hpp"
#include "fracneu/io.hpp"

namespace fracneu {

namespace {

struct DomainOptions {
  std::string domain;
  std::string metric = "euclidean";
  std::size_t k = 0;

  DomainSpec spec() const {
    DomainSpec spec = DomainSpec::parse(domain);
    spec.metric = parse_metric(metric);
    spec.k = k;
    return spec;
  }
};

struct SolverOptions {
  double tol = 1e-8;
  std::size_t max_iter = 50000;
};

void add_domain_options(CLI::App* app, DomainOptions& o) {
  app->add_option("--domain", o.domain,
                  "interval:a,b,N | rectangle:ax,bx,ay,by,nx,ny | lshape:side,N")
      ->required();
  app->add_option("--metric", o.metric, "euclidean or geodesic")
      ->check(CLI::IsMember({"euclidean", "geodesic"}));
  app->add_option("--k", o.k, "neighbour count of the geodesic graph (0: 2n+1)");
}

void add_solver_options(CLI::App* app, SolverOptions& o) {
  app->add_option("--tol", o.tol, "relative eigenvalue tolerance");
  app->add_option("--max-iter", o.max_iter, "iteration cap of the iterative solver");
}

std::vector<double> parse_grid(const std::string& text, const char* name) {
  std::vector<double> grid;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    const std::string item = text.substr(start, comma - start);
    if (!item.empty()) {
      try {
        std::size_t used = 0;
        grid.push_back(std::stod(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw ParameterError(std::string("bad ") + name + " grid entry '" + item + "'");
      }
    }
    start = comma + 1;
  }
  if (grid.empty()) throw ParameterError(std::string(name) + " grid is empty");
  return grid;
}

std::optional<double> parse_reference(const std::string& text) {
  if (text.empty()) return std::nullopt;
  if (text == "pi2") return std::numbers::pi * std::numbers::pi;
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw ParameterError("--reference takes 'pi2' or a number");
}

void write_sweep(const DomainSpec& spec, const SweepResult& result,
                 const std::string& out, const std::string& plot) {
  write_file_atomic(out + ".json", sweep_json(spec, result));
  write_file_atomic(out + ".csv", sweep_csv(result));
  if (!plot.empty()) write_file_atomic(plot, sweep_svg(result));
}

int sweep_exit(const SweepResult& result) {
  for (const auto& g : result.gaps) {
    std::cerr << "warning: " << to_string(result.kind) << " = " << g.param << ": "
              << g.message << "\n";
  }
  return 2 * result.gaps.size() > result.attempted() ? kExitPartialSweep : kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Neumann eigenvalues of the regional fractional p-Laplacian", "fracneu"};
  app.set_config("--config", "", "key=value config file; flags override it");
  app.require_subcommand(1);

  DomainOptions dom;
  SolverOptions solver;
  std::string plot;

  // eigen
  double s = 0.0;
  double p = 2.0;
  std::string seed = "coordinate";
  auto* eigen = app.add_subcommand("eigen", "first non-zero eigenpair");
  add_domain_options(eigen, dom);
  add_solver_options(eigen, solver);
  eigen->add_option("--s", s, "fractional order in (0,1)")->required();
  eigen->add_option("--p", p, "integrability exponent in (1,inf)")->required();
  eigen->add_option("--seed", seed, "initial guess: coordinate or diameter")
      ->check(CLI::IsMember({"coordinate", "diameter"}));
  std::string eigen_out = "eigen";
  eigen->add_option("--out", eigen_out, "output prefix (.json and .csv)")->capture_default_str();

  // sweep-s
  double sweep_p_value = 2.0;
  std::string s_grid = "0.6,0.7,0.8,0.9,0.95,0.99";
  std::string reference;
  auto* sweep_s_cmd = app.add_subcommand("sweep-s", "s -> 1 sweep of K (1-s) lambda");
  add_domain_options(sweep_s_cmd, dom);
  add_solver_options(sweep_s_cmd, solver);
  sweep_s_cmd->add_option("--p", sweep_p_value, "integrability exponent");
  sweep_s_cmd->add_option("--s-grid", s_grid, "comma-separated increasing s values");
  sweep_s_cmd->add_option("--reference", reference, "limit value: 'pi2' or a number");
  std::string sweep_s_out = "sweep_s";
  sweep_s_cmd->add_option("--out", sweep_s_out, "output prefix (.json and .csv)")->capture_default_str();
  sweep_s_cmd->add_option("--plot", plot, "SVG line plot path");

  // sweep-p
  double sweep_s_value = 0.0;
  std::string p_grid = "4,8,16,32,64";
  auto* sweep_p_cmd = app.add_subcommand("sweep-p", "p -> inf sweep of log lambda");
  add_domain_options(sweep_p_cmd, dom);
  add_solver_options(sweep_p_cmd, solver);
  sweep_p_cmd->add_option("--s", sweep_s_value, "fractional order")->required();
  sweep_p_cmd->add_option("--p-grid", p_grid, "comma-separated increasing p values");
  std::string sweep_p_out = "sweep_p";
  sweep_p_cmd->add_option("--out", sweep_p_out, "output prefix (.json and .csv)")->capture_default_str();
  sweep_p_cmd->add_option("--plot", plot, "SVG line plot path");

  // viscosity
  std::string input;
  std::string lambda_text = "auto";
  double dead_band = 1e-3;
  auto* visc = app.add_subcommand("viscosity", "residual of the limit system for a stored eigenfunction");
  visc->add_option("--input", input, "eigenpair JSON written by 'eigen'")->required();
  visc->add_option("--lambda", lambda_text, "'auto' (2/diam^s) or a number");
  visc->add_option("--dead-band", dead_band, "sign dead band relative to ||u||_inf");
  std::string visc_out = "viscosity";
  visc->add_option("--out", visc_out, "output prefix (.json and .csv)")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitConfig;
  }

  try {
    if (*eigen) {
      const FracParams params{s, p, solver.tol, solver.max_iter};
      params.validate();
      const DomainSpec spec = dom.spec();
      const Domain domain = spec.build();
      EigenPair pair;
      if (seed == "diameter" && p != 2.0) {
        pair = solve_general(domain, params, diameter_seed(domain, p));
      } else {
        pair = solve(domain, params);
      }
      const double wr = weak_residual(domain, pair);
      write_file_atomic(eigen_out + ".json", eigenpair_json(spec, domain, pair, wr));
      write_file_atomic(eigen_out + ".csv", eigenfunction_csv(domain, pair));
      std::cout << "lambda = " << format_number(pair.lambda) << "\n";
      return kExitOk;
    }
    if (*sweep_s_cmd) {
      const std::vector<double> grid = parse_grid(s_grid, "s");
      const DomainSpec spec = dom.spec();
      const Domain domain = spec.build();
      SweepOptions opts{solver.tol, solver.max_iter, parse_reference(reference)};
      const SweepResult result = sweep_s(domain, sweep_p_value, grid, opts);
      write_sweep(spec, result, sweep_s_out, plot);
      std::cout << "extrapolated = " << format_number(result.extrapolated) << "\n";
      return sweep_exit(result);
    }
    if (*sweep_p_cmd) {
      const std::vector<double> grid = parse_grid(p_grid, "p");
      const DomainSpec spec = dom.spec();
      const Domain domain = spec.build();
      SweepOptions opts{solver.tol, solver.max_iter, std::nullopt};
      const SweepResult result = sweep_p(domain, sweep_s_value, grid, opts);
      write_sweep(spec, result, sweep_p_out, plot);
      std::cout << "exp(slope) = " << format_number(result.extrapolated)
                << "  (2/diam^s = " << format_number(*result.reference) << ")\n";
      return sweep_exit(result);
    }
    if (*visc) {
      const StoredEigenPair stored = parse_eigenpair_json(read_file(input));
      const Domain domain = stored.spec.build();
      if (stored.pair.u.size() != domain.size()) {
        throw ParameterError("stored eigenfunction does not match its domain");
      }
      double lambda = 0.0;
      if (lambda_text == "auto") {
        lambda = lambda_inf(domain, stored.pair.s);
      } else {
        try {
          lambda = std::stod(lambda_text);
        } catch (const std::exception&) {
          throw ParameterError("--lambda takes 'auto' or a number");
        }
      }
      const ViscosityReport report =
          viscosity_residual(domain, stored.pair.u, stored.pair.s, lambda, dead_band);
      write_file_atomic(visc_out + ".json", viscosity_json(stored.spec, report));
      write_file_atomic(visc_out + ".csv", viscosity_csv(domain, stored.pair.u, report));
      std::cout << "fraction_within_tol = " << format_number(report.fraction_within_tol)
                << "\n";
      return kExitOk;
    }
  } catch (const ConvergenceError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

int run_cli(int argc, const char* const* argv) {
  return run_cli(std::vector<std::string>(argv, argv + argc));
}

}  // namespace fracneu
