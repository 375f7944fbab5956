#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "fracneu/gagliardo.hpp"
#include "fracneu/geometry.hpp"

namespace fracneu {

/// First non-zero Neumann eigenpair with solver diagnostics.
struct EigenPair {
  double lambda = 0.0;
  GridFunction u;  ///< normalized to ||u||_p = 1
  double s = 0.0;
  double p = 0.0;
  /// |sum_i w_i |u_i|^(p-2) u_i|
  double constraint_residual = 0.0;
  /// max-norm of the Rayleigh-quotient gradient relative to its two parts
  double stationarity = 0.0;
  std::size_t iterations = 0;
  double final_step = 0.0;
  bool converged = false;

  /// s < 1 - 1/p, under which the continuum eigenfunction is known to be a
  /// viscosity solution. Recorded only.
  bool viscosity_regime() const noexcept { return s < 1.0 - 1.0 / p; }
};

struct ConstraintProjection {
  GridFunction values;  ///< v - shift
  double shift = 0.0;
};

/// Shifts v by the unique c with sum_i w_i |v_i - c|^(p-2) (v_i - c) = 0.
/// Throws DegenerateFunction for constant v.
ConstraintProjection project_constraint(const Domain& domain,
                                        std::span<const double> v, double p);

double constraint_residual(const Domain& domain, std::span<const double> u,
                           double p);

/// The first coordinate function, projected and normalized.
GridFunction default_seed(const Domain& domain, double p);

/// d(., a) - d(., b) for the farthest pair of nodes (a, b), projected and
/// normalized; close to the limit eigenfunction for large p.
GridFunction diameter_seed(const Domain& domain, double p);

/// p = 2 route: dense generalized eigenproblem L u = lambda W u with the
/// constant mode deflated.
EigenPair solve_p2(const Domain& domain, double s);

/// Projected quasi-Newton descent on the Rayleigh quotient for any p.
/// Throws ConvergenceError when max_iter is exhausted.
EigenPair solve_general(const Domain& domain, const FracParams& params,
                        std::optional<GridFunction> seed = std::nullopt);

/// solve_p2 when p == 2, solve_general otherwise.
EigenPair solve(const Domain& domain, const FracParams& params);

/// Twenty smooth test functions sampled at the nodes.
std::vector<GridFunction> default_test_battery(const Domain& domain);

/// Largest normalized defect of the weak eigenvalue equation
///
///   |E(u, phi) - lambda sum_i w_i |u_i|^(p-2) u_i phi_i|
///   / ([phi] [u]^(p-1) + lambda ||u||_p^(p-1) ||phi||_p)
///
/// over the test functions (the default battery when empty).
double weak_residual(const Domain& domain, const EigenPair& pair,
                     std::span<const GridFunction> phis = {});

}  // namespace fracneu
