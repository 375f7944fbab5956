#include "fracneu/holder_infinity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fracneu/error.hpp"
#include "fracneu/gagliardo.hpp"
#include "fracneu/parallel.hpp"

namespace fracneu {

namespace {

void require_nodes(const Domain& domain, std::span<const double> u) {
  if (domain.size() < 2) throw InvalidDomain("need at least two nodes");
  if (u.size() != domain.size()) {
    throw ParameterError("function length differs from node count");
  }
}

void require_s(double s) {
  if (!(std::isfinite(s) && s > 0.0 && s < 1.0)) {
    throw ParameterError("s must lie in (0, 1)");
  }
}

// Both one-sided extremes of the difference quotient at node i.
std::pair<double, double> quotient_range(const Domain& domain,
                                         std::span<const double> u, double s,
                                         std::size_t i) {
  double hi = -std::numeric_limits<double>::infinity();
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < u.size(); ++j) {
    if (j == i) continue;
    const double q = (u[j] - u[i]) / std::pow(domain.distance(i, j), s);
    hi = std::max(hi, q);
    lo = std::min(lo, q);
  }
  return {hi, lo};
}

double max_abs(std::span<const double> u) {
  double m = 0.0;
  for (double v : u) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

double lplus(const Domain& domain, std::span<const double> u, double s,
             std::size_t i) {
  require_nodes(domain, u);
  require_s(s);
  return quotient_range(domain, u, s, i).first;
}

double lminus(const Domain& domain, std::span<const double> u, double s,
              std::size_t i) {
  require_nodes(domain, u);
  require_s(s);
  return quotient_range(domain, u, s, i).second;
}

double linf(const Domain& domain, std::span<const double> u, double s,
            std::size_t i) {
  require_nodes(domain, u);
  require_s(s);
  const auto [hi, lo] = quotient_range(domain, u, s, i);
  return hi + lo;
}

double seminorm_inf(const Domain& domain, std::span<const double> u, double s) {
  require_nodes(domain, u);
  require_s(s);
  const std::size_t n = u.size();
  std::vector<double> row(n, 0.0);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      double m = 0.0;
      for (std::size_t j = i + 1; j < n; ++j) {
        m = std::max(m, std::abs(u[i] - u[j]) / std::pow(domain.distance(i, j), s));
      }
      row[i] = m;
    }
  });
  return *std::max_element(row.begin(), row.end());
}

double lambda_inf(const Domain& domain, double s) {
  require_s(s);
  return 2.0 / std::pow(diameter(domain), s);
}

VariationalCheck check_variational_inf(const Domain& domain,
                                       std::span<const double> u, double s) {
  require_nodes(domain, u);
  const auto [mn, mx] = std::minmax_element(u.begin(), u.end());
  if (!(*mx > *mn)) throw DegenerateFunction("constant function");
  const double norm = max_abs(u);
  VariationalCheck out;
  out.admissible = std::abs(*mx + *mn) <= 1e-9 * norm;
  out.quotient = seminorm_inf(domain, u, s) / norm;
  return out;
}

const char* to_string(SignClass c) noexcept {
  switch (c) {
    case SignClass::Positive:
      return "positive";
    case SignClass::Negative:
      return "negative";
    case SignClass::Zero:
      break;
  }
  return "zero";
}

ViscosityReport viscosity_residual(const Domain& domain,
                                   std::span<const double> u, double s,
                                   double lambda, double dead_band_rel,
                                   double tol_rel) {
  require_nodes(domain, u);
  require_s(s);
  if (!(lambda > 0.0)) throw ParameterError("lambda must be positive");
  const double norm = max_abs(u);
  if (norm == 0.0 || *std::max_element(u.begin(), u.end()) ==
                         *std::min_element(u.begin(), u.end())) {
    throw DegenerateFunction("constant function");
  }

  ViscosityReport report;
  report.lambda = lambda;
  report.s = s;
  report.dead_band = dead_band_rel * norm;
  report.tolerance = tol_rel * lambda * norm;
  report.per_node.resize(u.size());

  parallel_for(u.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto [hi, lo] = quotient_range(domain, u, s, i);
      NodeResidual& r = report.per_node[i];
      r.node = i;
      if (u[i] > report.dead_band) {
        r.sign = SignClass::Positive;
        r.residual = std::abs(std::max(hi + lo, lo + lambda * u[i]));
      } else if (u[i] < -report.dead_band) {
        r.sign = SignClass::Negative;
        r.residual = std::abs(std::min(hi + lo, hi + lambda * u[i]));
      } else {
        r.sign = SignClass::Zero;
        r.residual = std::abs(hi + lo);
      }
    }
  });

  std::size_t within = 0;
  for (const auto& r : report.per_node) {
    report.max_residual = std::max(report.max_residual, r.residual);
    if (r.residual <= report.tolerance) ++within;
  }
  report.fraction_within_tol =
      static_cast<double>(within) / static_cast<double>(u.size());
  return report;
}

}  // namespace fracneu
