#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fracneu/geometry.hpp"

namespace fracneu {

// Hoelder infinity-Laplacian pieces on a node cloud. Every sup/inf runs over
// the nodes j != i with the domain's active metric.

/// max_j (u_j - u_i) / d_ij^s
double lplus(const Domain& domain, std::span<const double> u, double s,
             std::size_t i);
/// min_j (u_j - u_i) / d_ij^s
double lminus(const Domain& domain, std::span<const double> u, double s,
              std::size_t i);
/// lplus + lminus
double linf(const Domain& domain, std::span<const double> u, double s,
            std::size_t i);

/// max_{i<j} |u_i - u_j| / d_ij^s
double seminorm_inf(const Domain& domain, std::span<const double> u, double s);

/// 2 / diameter^s with the metric the domain carries (node-cloud diameter
/// for geodesic domains).
double lambda_inf(const Domain& domain, double s);

struct VariationalCheck {
  double quotient = 0.0;  ///< seminorm_inf(u) / ||u||_inf
  bool admissible = false;  ///< |max u + min u| <= 1e-9 ||u||_inf
};

/// Throws DegenerateFunction for constant u.
VariationalCheck check_variational_inf(const Domain& domain,
                                       std::span<const double> u, double s);

enum class SignClass { Positive, Zero, Negative };

const char* to_string(SignClass c) noexcept;

struct NodeResidual {
  std::size_t node = 0;
  SignClass sign = SignClass::Zero;
  double residual = 0.0;
};

struct ViscosityReport {
  std::vector<NodeResidual> per_node;
  double max_residual = 0.0;
  double fraction_within_tol = 0.0;
  double lambda = 0.0;
  double s = 0.0;
  double dead_band = 0.0;  ///< |u_i| <= dead_band counts as the zero class
  double tolerance = 0.0;  ///< residual threshold behind fraction_within_tol
};

/// Per-node defect of the limit system
///
///   max{L u, L- u + lambda u} = 0   where u > 0,
///   L u = 0                         where u = 0,
///   min{L u, L+ u + lambda u} = 0   where u < 0,
///
/// with a sign dead band of dead_band_rel * ||u||_inf and the tolerance
/// tol_rel * lambda * ||u||_inf.
ViscosityReport viscosity_residual(const Domain& domain,
                                   std::span<const double> u, double s,
                                   double lambda, double dead_band_rel = 1e-3,
                                   double tol_rel = 0.1);

}  // namespace fracneu
