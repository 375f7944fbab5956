#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fracneu/geometry.hpp"

namespace fracneu {

/// Nodal values of a function on a Domain.
using GridFunction = std::vector<double>;

/// Fractional order s in (0,1), integrability exponent p in (1,inf) and
/// the iterative solver controls.
struct FracParams {
  double s = 0.5;
  double p = 2.0;
  double tol = 1e-8;
  std::size_t max_iter = 50000;

  /// Throws ParameterError unless 0 < s < 1, 1 < p < inf, tol > 0.
  void validate() const;
};

void validate_exponents(double s, double p);

/// Discrete Gagliardo energy of a domain as a symmetric pair sum,
///
///   E(u) = sum_{i != j} K_ij |u_i - u_j|^p,
///
/// approximating the double integral of |u(x)-u(y)|^p / d(x,y)^(n+sp).
///
/// Grid domains: pairs whose cells are within the near radius carry the exact
/// cell-pair moment  int_{C_i} int_{C_j} |x-y|^(p(1-s)-n)  divided by d_ij^p,
/// distant pairs carry the midpoint weight w_i w_j / d_ij^(n+sp), and the
/// self-cell integral of the linearized integrand is spread over the
/// forward/backward neighbour differences. Point clouds use the midpoint
/// weight for every pair.
class PairKernel {
 public:
  PairKernel(const Domain& domain, double s, double p);

  std::size_t size() const noexcept { return n_; }
  double s() const noexcept { return s_; }
  double p() const noexcept { return p_; }
  double weight(std::size_t i, std::size_t j) const noexcept {
    return k_[i * n_ + j];
  }

  /// E(u).
  double energy(std::span<const double> u) const;

  /// The form E(u, phi) = sum K_ij |du|^(p-2) du dphi; E(u, u) = E(u).
  double form(std::span<const double> u, std::span<const double> phi) const;

  /// E(u) together with its gradient dE/du_k = p E(u, e_k).
  double energy_and_gradient(std::span<const double> u,
                             std::span<double> grad) const;

  /// Dense Hessian of E at u (row-major); needs p >= 2.
  std::vector<double> hessian(std::span<const double> u) const;

  /// Dense symmetric matrix L with u^T L v = E(u, v) at p = 2 (row-major).
  std::vector<double> quadratic_form_matrix() const;

 private:
  std::size_t n_;
  double s_;
  double p_;
  std::vector<double> k_;
};

/// Exact moment int_{C_a} int_{C_b} |x-y|^(alpha-n) dx dy for two grid cells
/// of widths (hx, hy) whose integer offsets are (kx, ky). In 1D pass hy = 0.
double cell_pair_moment(int kx, int ky, double hx, double hy, double alpha);

/// The self-cell moment restricted to directions theta in [theta0, theta1]
/// (2D only): int over pairs (x, y) in one cell with arg(y - x) in range.
double self_cell_sector_moment(double hx, double hy, double alpha,
                               double theta0, double theta1);

/// [u]_{W^{s,p}} = E(u)^(1/p).
double seminorm_p(const Domain& domain, std::span<const double> u, double s,
                  double p);

double energy_form(const Domain& domain, std::span<const double> u,
                   std::span<const double> phi, double s, double p);

/// E(u) / sum_i w_i |u_i|^p. Throws DegenerateFunction when u = 0.
double rayleigh_quotient(const Domain& domain, std::span<const double> u,
                         double s, double p);
double rayleigh_quotient(const Domain& domain, const PairKernel& kernel,
                         std::span<const double> u);

/// Bourgain-Brezis-Mironescu normalization  p / int_{S^{n-1}} |sigma.e|^p,
/// so that  K (1-s) [u]^p_{W^{s,p}} -> ||grad u||_p^p  as s -> 1.
double bbm_constant(int n, double p);

}  // namespace fracneu
