#include "fracneu/gagliardo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fracneu/error.hpp"
#include "fracneu/parallel.hpp"

namespace fracneu {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Cells closer than this (Chebyshev offset) use exact moments in 2D.
constexpr int kNearRadius2D = 2;

// int_{r0}^{r1} r^(g-1) dr for g > 0, written to survive r1 ~ r0.
double power_integral(double g, double r0, double r1) {
  if (r0 <= 0.0) return std::pow(r1, g) / g;
  return std::pow(r0, g) * std::expm1(g * std::log(r1 / r0)) / g;
}

// 1D: int_0^1 int_0^1 |k + a - b|^(alpha-1) da db.
double unit_pair_moment_1d(int k, double alpha) {
  const double beta = alpha + 1.0;
  k = std::abs(k);
  if (k == 0) return 2.0 / (alpha * beta);
  if (k == 1) return 2.0 * std::expm1(alpha * std::numbers::ln2) / (alpha * beta);
  // Second difference of k^beta / (alpha beta) expanded in 1/k^2.
  const double x2 = 1.0 / (static_cast<double>(k) * k);
  double term = 1.0;
  double sum = 1.0;
  for (int m = 2; m < 4000; ++m) {
    term *= (beta - 2 * m + 2) * (beta - 2 * m + 1) /
            (static_cast<double>(2 * m) * (2 * m - 1)) * x2;
    sum += term;
    if (term == 0.0 || std::abs(term) <= 1e-17 * std::abs(sum)) break;
  }
  return std::pow(static_cast<double>(k), alpha - 1.0) * sum;
}

// Length of {x in cell a : x + z in cell b} for two cells of width h whose
// indices differ by k; value and slope in the displacement z.
struct Tent {
  double h;
  int k;
  std::array<double, 2> at(double z) const {
    const double dz = z - k * h;
    if (std::abs(dz) >= h) return {0.0, 0.0};
    return {h - std::abs(dz), dz > 0 ? -1.0 : 1.0};
  }
};

// int_0^inf r^(alpha-1) A(r cos t, r sin t) dr with A the product of tents.
double ray_integral(const Tent& tx, const Tent& ty, double alpha, double t) {
  const double c = std::cos(t);
  const double s = std::sin(t);
  std::array<double, 7> br{};
  std::size_t nb = 0;
  br[nb++] = 0.0;
  for (int a = -1; a <= 1; ++a) {
    if (c != 0.0) {
      const double r = (tx.k + a) * tx.h / c;
      if (r > 0.0) br[nb++] = r;
    }
    if (s != 0.0) {
      const double r = (ty.k + a) * ty.h / s;
      if (r > 0.0) br[nb++] = r;
    }
  }
  std::sort(br.begin(), br.begin() + static_cast<std::ptrdiff_t>(nb));
  double acc = 0.0;
  for (std::size_t q = 0; q + 1 < nb; ++q) {
    const double r0 = br[q];
    const double r1 = br[q + 1];
    if (r1 <= r0) continue;
    const double rm = 0.5 * (r0 + r1);
    const auto fx = tx.at(rm * c);
    const auto fy = ty.at(rm * s);
    // Linear factors a0 + a1 r and b0 + b1 r on this piece.
    const double a1 = fx[1] * c;
    const double a0 = fx[0] - a1 * rm;
    const double b1 = fy[1] * s;
    const double b0 = fy[0] - b1 * rm;
    const double c0 = a0 * b0;
    const double c1 = a0 * b1 + a1 * b0;
    const double c2 = a1 * b1;
    if (c0 == 0.0 && c1 == 0.0 && c2 == 0.0) continue;
    acc += c0 * power_integral(alpha, r0, r1) +
           c1 * power_integral(alpha + 1.0, r0, r1) +
           c2 * power_integral(alpha + 2.0, r0, r1);
  }
  return acc;
}

// Integrates the ray integral over [t0, t1], splitting at every direction
// where the piecewise structure along the ray changes.
double angular_integral(const Tent& tx, const Tent& ty, double alpha,
                        double t0, double t1) {
  std::vector<double> cuts{t0, t1};
  auto add = [&](double t) {
    while (t < t0) t += kTwoPi;
    while (t > t1) t -= kTwoPi;
    if (t > t0 && t < t1) cuts.push_back(t);
  };
  for (int q = 0; q < 4; ++q) add(q * 0.5 * std::numbers::pi);
  for (int a = -1; a <= 1; ++a) {
    for (int b = -1; b <= 1; ++b) {
      const double x = (tx.k + a) * tx.h;
      const double y = (ty.k + b) * ty.h;
      if (x == 0.0 && y == 0.0) continue;
      add(std::atan2(y, x));
    }
  }
  std::sort(cuts.begin(), cuts.end());
  using Gauss = boost::math::quadrature::gauss<double, 30>;
  double acc = 0.0;
  for (std::size_t q = 0; q + 1 < cuts.size(); ++q) {
    const double a = cuts[q];
    const double b = cuts[q + 1];
    if (b - a <= 1e-15) continue;
    const double m = 0.5 * (a + b);
    acc += Gauss::integrate(
        [&](double t) { return ray_integral(tx, ty, alpha, t); }, a, m);
    acc += Gauss::integrate(
        [&](double t) { return ray_integral(tx, ty, alpha, t); }, m, b);
  }
  return acc;
}

struct Direction {
  int dx;
  int dy;
  double weight;  // self-cell moment carried by this direction
};

// Directions used to spread the self-cell integral over neighbour
// differences, each with the moment of its angular sector.
std::vector<Direction> self_cell_directions(const Shape& shape, int dim,
                                            double alpha) {
  const double hx = shape.cell_width(0);
  if (dim == 1) {
    const double half = 0.5 * cell_pair_moment(0, 0, hx, 0.0, alpha);
    return {{1, 0, half}, {-1, 0, half}};
  }
  const double hy = shape.cell_width(1);
  std::vector<Direction> dirs = {{1, 0, 0},  {1, 1, 0},   {0, 1, 0},
                                 {-1, 1, 0}, {-1, 0, 0},  {-1, -1, 0},
                                 {0, -1, 0}, {1, -1, 0}};
  std::vector<double> angle(dirs.size());
  for (std::size_t m = 0; m < dirs.size(); ++m) {
    double t = std::atan2(dirs[m].dy * hy, dirs[m].dx * hx);
    if (t < 0) t += kTwoPi;
    angle[m] = t;
  }
  for (std::size_t m = 0; m < dirs.size(); ++m) {
    const std::size_t prev = (m + dirs.size() - 1) % dirs.size();
    const std::size_t next = (m + 1) % dirs.size();
    double lo = angle[prev];
    double hi = angle[next];
    if (lo > angle[m]) lo -= kTwoPi;
    if (hi < angle[m]) hi += kTwoPi;
    dirs[m].weight = self_cell_sector_moment(hx, hy, alpha,
                                             0.5 * (lo + angle[m]),
                                             0.5 * (angle[m] + hi));
  }
  return dirs;
}

template <class RowFn>
double fixed_order_sum(std::size_t n, RowFn&& row) {
  std::vector<double> partial(n, 0.0);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) partial[i] = row(i);
  });
  CompensatedSum total;
  for (double v : partial) total.add(v);
  return total.value();
}

std::string show(double x) {
  std::ostringstream o;
  o << x;
  return o.str();
}

double abs_pow(double x, double p) {
  const double a = std::abs(x);
  return p == 2.0 ? a * a : std::pow(a, p);
}

}  // namespace

void validate_exponents(double s, double p) {
  if (!(std::isfinite(s) && s > 0.0 && s < 1.0)) {
    throw ParameterError("s must lie in (0, 1), got " + show(s));
  }
  if (!(std::isfinite(p) && p > 1.0)) {
    throw ParameterError("p must exceed 1, got " + show(p));
  }
}

void FracParams::validate() const {
  validate_exponents(s, p);
  if (!(tol > 0.0)) throw ParameterError("tol must be positive");
  if (max_iter == 0) throw ParameterError("max_iter must be positive");
}

double cell_pair_moment(int kx, int ky, double hx, double hy, double alpha) {
  if (!(alpha > 0.0)) throw ParameterError("moment exponent must be positive");
  if (hy == 0.0) {
    return std::pow(hx, alpha + 1.0) * unit_pair_moment_1d(kx, alpha);
  }
  const Tent tx{hx, kx};
  const Tent ty{hy, ky};
  return angular_integral(tx, ty, alpha, 0.0, kTwoPi);
}

double self_cell_sector_moment(double hx, double hy, double alpha,
                               double theta0, double theta1) {
  return angular_integral(Tent{hx, 0}, Tent{hy, 0}, alpha, theta0, theta1);
}

PairKernel::PairKernel(const Domain& domain, double s, double p)
    : n_(domain.size()), s_(s), p_(p), k_(n_ * n_, 0.0) {
  validate_exponents(s, p);
  const int dim = domain.dim();
  const double alpha = p * (1.0 - s);
  const double far_exp = dim + s * p;
  const auto& w = domain.weights();
  const Shape& shape = domain.shape();

  if (!shape.is_grid()) {
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = i + 1; j < n_; ++j) {
        const double v = w[i] * w[j] / std::pow(domain.distance(i, j), far_exp);
        k_[i * n_ + j] = v;
        k_[j * n_ + i] = v;
      }
    }
    return;
  }

  const double hx = shape.cell_width(0);
  const double hy = dim == 2 ? shape.cell_width(1) : 0.0;
  const int radius = dim == 1 ? shape.cells[0] : kNearRadius2D;
  const int span = radius + 1;
  std::vector<double> moment(
      static_cast<std::size_t>(span) * (dim == 2 ? span : 1), 0.0);
  for (int ky = 0; ky < (dim == 2 ? span : 1); ++ky) {
    for (int kx = 0; kx < span; ++kx) {
      if (kx == 0 && ky == 0) continue;
      moment[static_cast<std::size_t>(ky) * span + kx] =
          cell_pair_moment(kx, ky, hx, hy, alpha);
    }
  }

  parallel_for(n_, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto ci = domain.cell(i);
      for (std::size_t j = 0; j < n_; ++j) {
        if (j == i) continue;
        const auto cj = domain.cell(j);
        const int kx = std::abs(cj[0] - ci[0]);
        const int ky = std::abs(cj[1] - ci[1]);
        const double d = domain.distance(i, j);
        double v;
        if (std::max(kx, ky) <= radius) {
          v = moment[static_cast<std::size_t>(ky) * span + kx] / std::pow(d, p);
        } else {
          v = w[i] * w[j] / std::pow(d, far_exp);
        }
        k_[i * n_ + j] = v;
      }
    }
  });

  // Self-cell contributions: node i, direction m adds weight_m |D_m u|^p with
  // D_m u the difference quotient towards the neighbour (or the opposite one
  // at the boundary). Split evenly between the two ordered pairs.
  const auto dirs = self_cell_directions(shape, dim, alpha);
  for (std::size_t i = 0; i < n_; ++i) {
    const auto c = domain.cell(i);
    for (const auto& dir : dirs) {
      auto nb = domain.node_at(c[0] + dir.dx, c[1] + dir.dy);
      if (!nb) nb = domain.node_at(c[0] - dir.dx, c[1] - dir.dy);
      if (!nb) continue;
      const double len = std::hypot(dir.dx * hx, dir.dy * hy);
      const double v = 0.5 * dir.weight / std::pow(len, p);
      k_[i * n_ + *nb] += v;
      k_[*nb * n_ + i] += v;
    }
  }
}

double PairKernel::energy(std::span<const double> u) const {
  return fixed_order_sum(n_, [&](std::size_t i) {
    CompensatedSum row;
    const double* k = k_.data() + i * n_;
    for (std::size_t j = 0; j < n_; ++j) {
      if (j == i) continue;
      row.add(k[j] * abs_pow(u[i] - u[j], p_));
    }
    return row.value();
  });
}

double PairKernel::form(std::span<const double> u,
                        std::span<const double> phi) const {
  return fixed_order_sum(n_, [&](std::size_t i) {
    CompensatedSum row;
    const double* k = k_.data() + i * n_;
    for (std::size_t j = 0; j < n_; ++j) {
      if (j == i) continue;
      const double du = u[j] - u[i];
      const double dphi = phi[j] - phi[i];
      if (du == 0.0) continue;
      const double mag = p_ == 2.0 ? du : std::copysign(std::pow(std::abs(du), p_ - 1.0), du);
      row.add(k[j] * mag * dphi);
    }
    return row.value();
  });
}

double PairKernel::energy_and_gradient(std::span<const double> u,
                                       std::span<double> grad) const {
  std::vector<double> partial(n_, 0.0);
  parallel_for(n_, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      CompensatedSum e;
      CompensatedSum g;
      const double* k = k_.data() + i * n_;
      for (std::size_t j = 0; j < n_; ++j) {
        if (j == i) continue;
        const double d = u[i] - u[j];
        const double a = std::abs(d);
        if (a == 0.0) continue;
        const double t = p_ == 2.0 ? a : std::pow(a, p_ - 1.0);
        e.add(k[j] * t * a);
        g.add(k[j] * std::copysign(t, d));
      }
      partial[i] = e.value();
      grad[i] = 2.0 * p_ * g.value();
    }
  });
  CompensatedSum total;
  for (double v : partial) total.add(v);
  return total.value();
}

std::vector<double> PairKernel::hessian(std::span<const double> u) const {
  const double c = p_ * (p_ - 1.0);
  std::vector<double> h(n_ * n_, 0.0);
  parallel_for(n_, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      CompensatedSum diag;
      for (std::size_t j = 0; j < n_; ++j) {
        if (j == i) continue;
        const double a = std::abs(u[i] - u[j]);
        const double t = (k_[i * n_ + j] + k_[j * n_ + i]) * c *
                         (p_ == 2.0 ? 1.0 : std::pow(a, p_ - 2.0));
        h[i * n_ + j] = -t;
        diag.add(t);
      }
      h[i * n_ + i] = diag.value();
    }
  });
  return h;
}

std::vector<double> PairKernel::quadratic_form_matrix() const {
  std::vector<double> l(n_ * n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    CompensatedSum diag;
    for (std::size_t j = 0; j < n_; ++j) {
      if (j == i) continue;
      const double t = k_[i * n_ + j] + k_[j * n_ + i];
      l[i * n_ + j] = -t;
      diag.add(t);
    }
    l[i * n_ + i] = diag.value();
  }
  return l;
}

double seminorm_p(const Domain& domain, std::span<const double> u, double s,
                  double p) {
  const PairKernel kernel(domain, s, p);
  double m = 0.0;
  for (double v : u) m = std::max(m, std::abs(v));
  if (m == 0.0) return 0.0;
  std::vector<double> scaled(u.begin(), u.end());
  for (double& v : scaled) v /= m;
  return m * std::pow(kernel.energy(scaled), 1.0 / p);
}

double energy_form(const Domain& domain, std::span<const double> u,
                   std::span<const double> phi, double s, double p) {
  return PairKernel(domain, s, p).form(u, phi);
}

double rayleigh_quotient(const Domain& domain, const PairKernel& kernel,
                         std::span<const double> u) {
  double m = 0.0;
  for (double v : u) m = std::max(m, std::abs(v));
  if (m == 0.0) throw DegenerateFunction("Rayleigh quotient of the zero function");
  std::vector<double> scaled(u.begin(), u.end());
  for (double& v : scaled) v /= m;
  const double denom = std::pow(lp_norm(domain, scaled, kernel.p()), kernel.p());
  return kernel.energy(scaled) / denom;
}

double rayleigh_quotient(const Domain& domain, std::span<const double> u,
                         double s, double p) {
  return rayleigh_quotient(domain, PairKernel(domain, s, p), u);
}

double bbm_constant(int n, double p) {
  if (!(std::isfinite(p) && p > 1.0)) throw ParameterError("p must exceed 1");
  if (n == 1) return 0.5 * p;
  if (n != 2) throw ParameterError("BBM constant: dimension must be 1 or 2");
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double quarter = GK::integrate(
      [p](double t) { return std::pow(std::cos(t), p); }, 0.0,
      0.5 * std::numbers::pi, 15, 1e-14);
  return p / (4.0 * quarter);
}

}  // namespace fracneu
