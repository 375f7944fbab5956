#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fracneu/eigensolve.hpp"
#include "fracneu/gagliardo.hpp"
#include "fracneu/geometry.hpp"

namespace fracneu {

enum class SweepKind { S, P };

const char* to_string(SweepKind kind) noexcept;

struct SweepRecord {
  double param = 0.0;  ///< s or p
  double lambda = 0.0;
  /// K(1-s) lambda for s-sweeps, lambda^(1/p) for p-sweeps
  double scaled = 0.0;
  double log_lambda = 0.0;
  std::size_t grid_n = 0;
  std::optional<double> reference;
  std::optional<double> rel_error;
  /// p-sweeps: the explicit cone-competitor bound on lambda^(1/p)
  std::optional<double> upper_bound;
  std::size_t iterations = 0;
  double weak_residual = 0.0;
};

/// A sweep point whose solve failed; the sweep continues without it.
struct SweepGap {
  double param = 0.0;
  std::string message;
};

struct FitDiagnostics {
  double slope = 0.0;
  double intercept = 0.0;
  /// max |log lambda - (slope p + intercept)| over the fitted points
  double residual = 0.0;
  std::size_t points = 0;
  double p_min = 0.0;  ///< fitted range
  double p_max = 0.0;
  /// second divided differences of log lambda vs p are >= 0 (up to rounding)
  bool convex_or_linear = true;
};

struct SweepResult {
  SweepKind kind = SweepKind::S;
  double fixed = 0.0;  ///< p for s-sweeps, s for p-sweeps
  std::vector<SweepRecord> records;  ///< sorted by param
  std::vector<SweepGap> gaps;
  double extrapolated = 0.0;
  std::optional<double> reference;
  std::optional<double> rel_error;
  /// s-sweeps: order q of a fitted error model c (1-s)^q (three records)
  std::optional<double> order_estimate;
  std::optional<FitDiagnostics> fit;  ///< p-sweeps

  std::size_t attempted() const noexcept { return records.size() + gaps.size(); }
  /// s-sweeps: the scaled value at the largest s is within 10% of the
  /// extrapolated one.
  bool consistent() const;
  /// s-sweeps: scaled values increase over the final three records.
  bool monotone_tail() const;
};

struct SweepOptions {
  double tol = 1e-8;
  std::size_t max_iter = 50000;
  std::optional<double> reference;  ///< s-sweeps only
};

/// Solves for every s of the grid and records K(n,p)(1-s) lambda. The
/// extrapolated value is repeated Richardson (Neville) in 1-s through the
/// last three records, which assumes an error expansion in powers of 1-s.
SweepResult sweep_s(const Domain& domain, double p, std::span<const double> s_grid,
                    const SweepOptions& options = {});

/// Solves for every p of the grid and fits log lambda against p by least
/// squares over the upper half of the grid; extrapolated = exp(slope).
SweepResult sweep_p(const Domain& domain, double s, std::span<const double> p_grid,
                    const SweepOptions& options = {});

/// Value at x = 0 of the polynomial through the points (Neville).
double extrapolate_to_zero(std::span<const double> x, std::span<const double> y);

/// Least-squares line y = slope x + intercept.
FitDiagnostics fit_line(std::span<const double> x, std::span<const double> y);

struct DesigEntry {
  double t = 0.0;
  double s = 0.0;
  double lhs = 0.0;  ///< (1-t) [u]^p_{t,p}
  double rhs = 0.0;  ///< 2^(p(1-t)) (1-s) [u]^p_{s,p}
  bool holds = true;
};

struct DesigReport {
  std::vector<DesigEntry> entries;
  std::size_t violations = 0;
};

/// Evaluates (1-t)[u]^p_{t,p} <= 2^(p(1-t)) (1-s) [u]^p_{s,p} for every
/// (t, s) pair. Throws ParameterError unless 0 < t < s < 1.
DesigReport check_desig(const Domain& domain, std::span<const double> u,
                        double p, std::span<const std::pair<double, double>> pairs);

struct ConeEntry {
  std::size_t node = 0;
  double seminorm = 0.0;  ///< [w]_{s,p}
  double bound = 0.0;     ///< (kappa_n diam^(p(1-s)) |Omega| / (p(1-s)))^(1/p)
  bool holds = true;      ///< seminorm <= (1 + slack) bound
  double rayleigh = 0.0;  ///< Rayleigh quotient of w, an upper bound for lambda
  double norm = 0.0;      ///< ||w||_p
};

struct ConeReport {
  std::vector<ConeEntry> entries;
  std::size_t violations = 0;
  double slack = 0.02;
};

/// Cone competitors w = d(., x0) - c with c from project_constraint.
ConeReport check_cone_bound(const Domain& domain, double s, double p,
                            std::span<const std::size_t> x0_nodes,
                            double slack = 0.02);

/// Node minimizing the largest distance to the other nodes.
std::size_t central_node(const Domain& domain);

}  // namespace fracneu
