#include "fracneu/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fracneu/error.hpp"
#include "fracneu/holder_infinity.hpp"

namespace fracneu {

namespace {

void require_increasing(std::span<const double> grid, const char* name) {
  if (grid.empty()) throw ParameterError(std::string(name) + " grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw ParameterError(std::string(name) + " grid must be strictly increasing");
    }
  }
}

std::size_t grid_n(const Domain& domain) {
  const Shape& shape = domain.shape();
  return shape.is_grid() ? static_cast<std::size_t>(shape.cells[0]) : domain.size();
}

// Order q of the model f(e) = a + b e^q through three points, or nothing when
// the data admit no such q in (0, 8].
std::optional<double> fitted_order(std::span<const double> e,
                                   std::span<const double> f) {
  const double ratio = (f[0] - f[1]) / (f[1] - f[2]);
  if (!std::isfinite(ratio) || ratio <= 0.0) return std::nullopt;
  auto g = [&](double q) {
    const double a = std::pow(e[0], q);
    const double b = std::pow(e[1], q);
    const double c = std::pow(e[2], q);
    return (a - b) / (b - c) - ratio;
  };
  double lo = 1e-3;
  double hi = 8.0;
  double glo = g(lo);
  if (glo * g(hi) > 0.0) return std::nullopt;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if ((gm > 0.0) == (glo > 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double upper_bound_for(const Domain& domain, double s, double p, std::size_t x0) {
  const std::size_t nodes[] = {x0};
  const ConeReport cone = check_cone_bound(domain, s, p, nodes);
  return cone.entries.front().bound / cone.entries.front().norm;
}

}  // namespace

const char* to_string(SweepKind kind) noexcept {
  return kind == SweepKind::S ? "s" : "p";
}

bool SweepResult::consistent() const {
  if (records.empty()) return false;
  return std::abs(records.back().scaled - extrapolated) <= 0.1 * std::abs(extrapolated);
}

bool SweepResult::monotone_tail() const {
  const std::size_t n = records.size();
  const std::size_t start = n >= 3 ? n - 3 : 0;
  for (std::size_t i = start + 1; i < n; ++i) {
    if (!(records[i].scaled > records[i - 1].scaled)) return false;
  }
  return true;
}

double extrapolate_to_zero(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || x.size() != y.size()) {
    throw ParameterError("extrapolation needs matching, non-empty samples");
  }
  std::vector<double> t(y.begin(), y.end());
  const std::size_t n = t.size();
  for (std::size_t m = 1; m < n; ++m) {
    for (std::size_t i = 0; i + m < n; ++i) {
      t[i] = (x[i + m] * t[i] - x[i] * t[i + 1]) / (x[i + m] - x[i]);
    }
  }
  return t[0];
}

FitDiagnostics fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw ParameterError("line fit needs two points");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  FitDiagnostics fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.points = n;
  fit.p_min = *std::min_element(x.begin(), x.end());
  fit.p_max = *std::max_element(x.begin(), x.end());
  for (std::size_t i = 0; i < n; ++i) {
    fit.residual = std::max(fit.residual, std::abs(y[i] - fit.slope * x[i] - fit.intercept));
  }
  return fit;
}

SweepResult sweep_s(const Domain& domain, double p, std::span<const double> s_grid,
                    const SweepOptions& options) {
  require_increasing(s_grid, "s");
  for (double s : s_grid) validate_exponents(s, p);
  const double k = bbm_constant(domain.dim(), p);

  SweepResult out;
  out.kind = SweepKind::S;
  out.fixed = p;
  out.reference = options.reference;
  for (double s : s_grid) {
    FracParams params{s, p, options.tol, options.max_iter};
    try {
      const EigenPair pair = solve(domain, params);
      SweepRecord r;
      r.param = s;
      r.lambda = pair.lambda;
      r.log_lambda = std::log(pair.lambda);
      r.scaled = k * (1.0 - s) * pair.lambda;
      r.grid_n = grid_n(domain);
      r.iterations = pair.iterations;
      r.weak_residual = weak_residual(domain, pair);
      if (options.reference) {
        r.reference = options.reference;
        r.rel_error = (r.scaled - *options.reference) / *options.reference;
      }
      out.records.push_back(r);
    } catch (const ConvergenceError& e) {
      out.gaps.push_back({s, e.what()});
    }
  }
  if (out.records.empty()) {
    out.extrapolated = std::numeric_limits<double>::quiet_NaN();
    return out;
  }

  const std::size_t n = out.records.size();
  const std::size_t start = n >= 3 ? n - 3 : 0;
  std::vector<double> e;
  std::vector<double> f;
  for (std::size_t i = start; i < n; ++i) {
    e.push_back(1.0 - out.records[i].param);
    f.push_back(out.records[i].scaled);
  }
  out.extrapolated = extrapolate_to_zero(e, f);
  if (e.size() == 3) out.order_estimate = fitted_order(e, f);
  if (out.reference) {
    out.rel_error = (out.extrapolated - *out.reference) / *out.reference;
  }
  return out;
}

SweepResult sweep_p(const Domain& domain, double s, std::span<const double> p_grid,
                    const SweepOptions& options) {
  require_increasing(p_grid, "p");
  for (double p : p_grid) validate_exponents(s, p);
  const double limit = lambda_inf(domain, s);
  const std::size_t centre = central_node(domain);

  SweepResult out;
  out.kind = SweepKind::P;
  out.fixed = s;
  out.reference = limit;
  for (double p : p_grid) {
    FracParams params{s, p, options.tol, options.max_iter};
    try {
      const EigenPair pair = solve(domain, params);
      SweepRecord r;
      r.param = p;
      r.lambda = pair.lambda;
      r.log_lambda = std::log(pair.lambda);
      r.scaled = std::exp(r.log_lambda / p);
      r.grid_n = grid_n(domain);
      r.iterations = pair.iterations;
      r.weak_residual = weak_residual(domain, pair);
      r.reference = limit;
      r.rel_error = (r.scaled - limit) / limit;
      r.upper_bound = upper_bound_for(domain, s, p, centre);
      out.records.push_back(r);
    } catch (const ConvergenceError& e) {
      out.gaps.push_back({p, e.what()});
    }
  }
  const std::size_t n = out.records.size();
  if (n == 0) {
    out.extrapolated = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  if (n == 1) {
    out.extrapolated = out.records.front().scaled;
    out.rel_error = (out.extrapolated - limit) / limit;
    return out;
  }

  // Upper half of the grid; all records when that leaves a single point.
  std::size_t start = n / 2;
  if (n - start < 2) start = 0;
  std::vector<double> ps;
  std::vector<double> logs;
  for (std::size_t i = start; i < n; ++i) {
    ps.push_back(out.records[i].param);
    logs.push_back(out.records[i].log_lambda);
  }
  FitDiagnostics fit = fit_line(ps, logs);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const auto& a = out.records[i - 1];
    const auto& b = out.records[i];
    const auto& c = out.records[i + 1];
    const double left = (b.log_lambda - a.log_lambda) / (b.param - a.param);
    const double right = (c.log_lambda - b.log_lambda) / (c.param - b.param);
    const double scale = std::max(std::abs(left), std::abs(right));
    if (right - left < -1e-9 * scale) fit.convex_or_linear = false;
  }
  out.fit = fit;
  out.extrapolated = std::exp(fit.slope);
  out.rel_error = (out.extrapolated - limit) / limit;
  return out;
}

DesigReport check_desig(const Domain& domain, std::span<const double> u, double p,
                        std::span<const std::pair<double, double>> pairs) {
  DesigReport report;
  for (const auto& [t, s] : pairs) {
    if (!(t > 0.0 && t < s && s < 1.0)) {
      throw ParameterError("each pair needs 0 < t < s < 1");
    }
    validate_exponents(s, p);
    DesigEntry e;
    e.t = t;
    e.s = s;
    e.lhs = (1.0 - t) * std::pow(seminorm_p(domain, u, t, p), p);
    e.rhs = std::pow(2.0, p * (1.0 - t)) * (1.0 - s) * std::pow(seminorm_p(domain, u, s, p), p);
    e.holds = e.lhs <= e.rhs * (1.0 + 1e-12);
    if (!e.holds) ++report.violations;
    report.entries.push_back(e);
  }
  return report;
}

ConeReport check_cone_bound(const Domain& domain, double s, double p,
                            std::span<const std::size_t> x0_nodes, double slack) {
  validate_exponents(s, p);
  const double alpha = p * (1.0 - s);
  const double bound = std::pow(unit_ball_measure(domain.dim()) *
                                    std::pow(diameter(domain), alpha) *
                                    domain.measure() / alpha,
                                1.0 / p);
  const PairKernel kernel(domain, s, p);
  ConeReport report;
  report.slack = slack;
  for (std::size_t x0 : x0_nodes) {
    if (x0 >= domain.size()) throw ParameterError("cone centre is not a node");
    GridFunction w(domain.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = domain.distance(i, x0);
    w = project_constraint(domain, w, p).values;
    ConeEntry e;
    e.node = x0;
    e.seminorm = seminorm_p(domain, w, s, p);
    e.bound = bound;
    e.holds = e.seminorm <= (1.0 + slack) * bound;
    e.rayleigh = rayleigh_quotient(domain, kernel, w);
    e.norm = lp_norm(domain, w, p);
    if (!e.holds) ++report.violations;
    report.entries.push_back(e);
  }
  return report;
}

std::size_t central_node(const Domain& domain) {
  const std::size_t n = domain.size();
  std::size_t best = 0;
  double best_ecc = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    double ecc = 0.0;
    for (std::size_t j = 0; j < n; ++j) ecc = std::max(ecc, domain.distance(i, j));
    if (ecc < best_ecc) {
      best_ecc = ecc;
      best = i;
    }
  }
  return best;
}

}  // namespace fracneu
