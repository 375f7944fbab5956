#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "fracneu/error.hpp"
#include "fracneu/gagliardo.hpp"

using namespace fracneu;

namespace {

std::vector<double> random_function(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

Domain random_cloud(int dim, std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point> pts(n);
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    pts[i] = {u(rng), dim == 2 ? u(rng) : 0.0};
    w[i] = 0.5 + u(rng);
  }
  return Domain::point_cloud(dim, pts, w, 0, 0);
}

// h^(alpha+1) int_{-1}^{1} (1 - |t|) |k + t|^(alpha-1) dt, by tanh-sinh with
// the singular point as an endpoint.
double moment_1d_quadrature(int k, double h, double alpha) {
  boost::math::quadrature::tanh_sinh<double> ts;
  auto f = [&](double t) { return (1 - std::abs(t)) * std::pow(std::abs(k + t), alpha - 1); };
  double v;
  if (k == 0) {
    // t = v^(1/alpha) removes the t^(alpha-1) singularity
    v = 2 / alpha * ts.integrate([&](double w) { return 1 - std::pow(w, 1 / alpha); }, 0.0, 1.0, 1e-15);
  } else if (k == 1) {
    v = ts.integrate(f, -1.0, 0.0, 1e-15) + ts.integrate(f, 0.0, 1.0, 1e-15);
  } else {
    v = ts.integrate(f, -1.0, 0.0, 1e-15) + ts.integrate(f, 0.0, 1.0, 1e-15);
  }
  return std::pow(h, alpha + 1) * v;
}

// Independent assembly of the 1D grid energy (see PairKernel): exact
// cell-pair moments over d^p, plus the self-cell moment spread over the
// forward and backward differences.
double grid_energy_oracle(const Domain& d, std::span<const double> u, double s, double p) {
  const std::size_t n = d.size();
  const double h = d.shape().cell_width(0);
  const double alpha = p * (1 - s);
  double e = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const int k = std::abs(static_cast<int>(i) - static_cast<int>(j));
      const double dist = k * h;
      e += moment_1d_quadrature(k, h, alpha) / std::pow(dist, p) * std::pow(std::abs(u[i] - u[j]), p);
    }
    const double half = 0.5 * moment_1d_quadrature(0, h, alpha);
    const double fwd = i + 1 < n ? u[i + 1] - u[i] : u[i - 1] - u[i];
    const double bwd = i > 0 ? u[i - 1] - u[i] : u[i + 1] - u[i];
    e += half * (std::pow(std::abs(fwd), p) + std::pow(std::abs(bwd), p)) / std::pow(h, p);
  }
  return e;
}

}  // namespace

TEST_CASE("seminorm of x on (0,1) matches 2/(alpha(alpha+1))") {
  for (std::size_t n : {64u, 1024u}) {
    const Domain d = build_interval(0, 1, n);
    std::vector<double> u(d.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = d.nodes()[i][0];
    for (double s : {0.3, 0.5, 0.9, 0.99}) {
      for (double p : {1.5, 2.0, 4.0}) {
        const double alpha = p * (1 - s);
        const double exact = 2 / (alpha * (alpha + 1));
        CHECK(std::pow(seminorm_p(d, u, s, p), p) == doctest::Approx(exact).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("1D cell moments: closed forms at integer alpha and a quadrature oracle") {
  const double h = 0.125;
  for (int k = 0; k < 6; ++k) {
    CHECK(cell_pair_moment(k, 0, h, 0.0, 1.0) == doctest::Approx(h * h).epsilon(1e-14));
    CHECK(cell_pair_moment(k, 0, h, 0.0, 3.0) ==
          doctest::Approx(h * h * (k * k * h * h + h * h / 6)).epsilon(1e-13));
  }
  for (double alpha : {0.02, 0.3, 1.0, 1.7, 16.0}) {
    for (int k : {0, 1, 2, 3, 7, 40}) {
      CHECK(cell_pair_moment(k, 0, h, 0.0, alpha) ==
            doctest::Approx(moment_1d_quadrature(k, h, alpha)).epsilon(1e-11));
    }
  }
}

TEST_CASE("2D cell moments: closed forms at integer alpha") {
  const double hx = 0.25;
  const double hy = 0.125;
  for (int kx = 0; kx < 3; ++kx) {
    for (int ky = 0; ky < 3; ++ky) {
      const double area2 = hx * hx * hy * hy;
      // |x-y|^0
      CHECK(cell_pair_moment(kx, ky, hx, hy, 2.0) == doctest::Approx(area2).epsilon(1e-12));
      // E|x - y|^2 = |offset|^2 + (hx^2 + hy^2)/6
      const double m2 = kx * kx * hx * hx + ky * ky * hy * hy + (hx * hx + hy * hy) / 6;
      CHECK(cell_pair_moment(kx, ky, hx, hy, 4.0) == doctest::Approx(area2 * m2).epsilon(1e-12));
    }
  }
}

TEST_CASE("2D self moment: splitting a cell into four") {
  // M_self(2h) = 4 M_self(h) + 4 (M(1,0) + M(0,1) + M(1,1)) and
  // M_self(2h) = 2^(alpha+2) M_self(h).
  const double h = 0.1;
  for (double alpha : {0.1, 0.5, 1.0, 2.5}) {
    const double self = cell_pair_moment(0, 0, h, h, alpha);
    const double big = cell_pair_moment(0, 0, 2 * h, 2 * h, alpha);
    const double split = 4 * self + 4 * (cell_pair_moment(1, 0, h, h, alpha) +
                                         cell_pair_moment(0, 1, h, h, alpha) +
                                         cell_pair_moment(1, 1, h, h, alpha));
    CHECK(big == doctest::Approx(split).epsilon(1e-10));
    CHECK(big == doctest::Approx(std::pow(2.0, alpha + 2) * self).epsilon(1e-10));
    double sectors = 0.0;
    for (int q = 0; q < 8; ++q) {
      sectors += self_cell_sector_moment(h, h, alpha, q * std::numbers::pi / 4, (q + 1) * std::numbers::pi / 4);
    }
    CHECK(sectors == doctest::Approx(self).epsilon(1e-10));
  }
}

TEST_CASE("1D grid energy matches an independently assembled oracle") {
  for (std::size_t n : {5u, 16u, 32u}) {
    const Domain d = build_interval(0, 1, n);
    const auto u = random_function(n, 7 + static_cast<unsigned>(n));
    for (double s : {0.2, 0.5, 0.9}) {
      for (double p : {1.5, 2.0, 3.0}) {
        const double e = PairKernel(d, s, p).energy(u);
        CHECK(e == doctest::Approx(grid_energy_oracle(d, u, s, p)).epsilon(1e-11));
      }
    }
  }
}

TEST_CASE("point-cloud seminorm and form match the direct double loop") {
  for (int dim : {1, 2}) {
    const Domain d = random_cloud(dim, 24, 11 + dim);
    const auto u = random_function(d.size(), 3);
    const auto phi = random_function(d.size(), 4);
    for (double s : {0.25, 0.75}) {
      for (double p : {1.5, 2.0, 5.0}) {
        double e = 0.0;
        double f = 0.0;
        for (std::size_t i = 0; i < d.size(); ++i) {
          for (std::size_t j = 0; j < d.size(); ++j) {
            if (i == j) continue;
            const double k = d.weights()[i] * d.weights()[j] / std::pow(d.distance(i, j), dim + s * p);
            const double du = u[i] - u[j];
            e += k * std::pow(std::abs(du), p);
            f += k * std::pow(std::abs(du), p - 2) * du * (phi[i] - phi[j]);
          }
        }
        CHECK(seminorm_p(d, u, s, p) == doctest::Approx(std::pow(e, 1 / p)).epsilon(1e-12));
        CHECK(energy_form(d, u, phi, s, p) == doctest::Approx(f).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("form, gradient and hessian are consistent") {
  const Domain d = build_rectangle(0, 1, 0, 1, 5, 4);
  const auto u = random_function(d.size(), 21);
  const auto phi = random_function(d.size(), 22);
  for (double p : {2.0, 3.0, 4.5}) {
    const PairKernel k(d, 0.6, p);
    CHECK(k.form(u, u) == doctest::Approx(k.energy(u)).epsilon(1e-13));
    std::vector<double> g(d.size());
    const double e = k.energy_and_gradient(u, g);
    CHECK(e == doctest::Approx(k.energy(u)).epsilon(1e-13));
    double dir = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) dir += g[i] * phi[i];
    CHECK(dir == doctest::Approx(p * k.form(u, phi)).epsilon(1e-12));

    const double eps = 1e-6;
    std::vector<double> up(u), um(u);
    for (std::size_t i = 0; i < u.size(); ++i) {
      up[i] += eps * phi[i];
      um[i] -= eps * phi[i];
    }
    CHECK((k.energy(up) - k.energy(um)) / (2 * eps) == doctest::Approx(dir).epsilon(1e-7));

    std::vector<double> gp(d.size()), gm(d.size());
    k.energy_and_gradient(up, gp);
    k.energy_and_gradient(um, gm);
    const auto h = k.hessian(u);
    for (std::size_t i = 0; i < d.size(); ++i) {
      double hv = 0.0;
      for (std::size_t j = 0; j < d.size(); ++j) hv += h[i * d.size() + j] * phi[j];
      CHECK((gp[i] - gm[i]) / (2 * eps) == doctest::Approx(hv).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("quadratic form matrix reproduces the p = 2 energy") {
  const Domain d = build_interval(0, 1, 12);
  const PairKernel k(d, 0.4, 2.0);
  const auto l = k.quadratic_form_matrix();
  const auto u = random_function(d.size(), 5);
  double q = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = 0; j < d.size(); ++j) q += u[i] * l[i * d.size() + j] * u[j];
  CHECK(q == doctest::Approx(k.energy(u)).epsilon(1e-13));
}

TEST_CASE("seminorm invariances") {
  const Domain d = build_rectangle(0, 2, 0, 1, 6, 4);
  const auto u = random_function(d.size(), 9);
  std::vector<double> shifted(u), scaled(u);
  for (double& x : shifted) x += 3.25;
  for (double& x : scaled) x *= -2.5;
  const double base = seminorm_p(d, u, 0.5, 3.0);
  CHECK(seminorm_p(d, shifted, 0.5, 3.0) == doctest::Approx(base).epsilon(1e-12));
  CHECK(seminorm_p(d, scaled, 0.5, 3.0) == doctest::Approx(2.5 * base).epsilon(1e-12));
  CHECK(seminorm_p(d, std::vector<double>(d.size(), 1.0), 0.5, 3.0) == 0.0);
}

TEST_CASE("Rayleigh quotient is scale invariant and rejects zero") {
  const Domain d = build_interval(0, 1, 16);
  auto u = random_function(d.size(), 1);
  const double r = rayleigh_quotient(d, u, 0.5, 3.0);
  for (double& x : u) x *= 1e-3;
  CHECK(rayleigh_quotient(d, u, 0.5, 3.0) == doctest::Approx(r).epsilon(1e-12));
  CHECK_THROWS_AS(rayleigh_quotient(d, std::vector<double>(16, 0.0), 0.5, 3.0), DegenerateFunction);
}

TEST_CASE("BBM constant against the Gamma-function closed form") {
  for (int n : {1, 2}) {
    for (double p : {1.1, 1.5, 2.0, 3.0, 8.0, 64.0}) {
      const double sphere = 2 * std::pow(std::numbers::pi, (n - 1) / 2.0) *
                            std::tgamma((p + 1) / 2) / std::tgamma((n + p) / 2);
      CHECK(bbm_constant(n, p) == doctest::Approx(p / sphere).epsilon(1e-12));
    }
  }
  CHECK(bbm_constant(2, 2.0) == doctest::Approx(2 / std::numbers::pi));
  CHECK_THROWS_AS(bbm_constant(3, 2.0), ParameterError);
}

TEST_CASE("BBM invariant: K (1-s) [x]^p at s = 0.99 against 1/(1 + p(1-s))") {
  const Domain d = build_interval(0, 1, 256);
  std::vector<double> u(d.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = d.nodes()[i][0];
  for (double p : {2.0, 4.0}) {
    const double s = 0.99;
    const double v = bbm_constant(1, p) * (1 - s) * std::pow(seminorm_p(d, u, s, p), p);
    CHECK(v == doctest::Approx(1 / (1 + p * (1 - s))).epsilon(1e-9));
  }
}

TEST_CASE("parameter validation") {
  const Domain d = build_interval(0, 1, 8);
  const std::vector<double> u(8, 0.0);
  CHECK_THROWS_AS(seminorm_p(d, u, 0.0, 2.0), ParameterError);
  CHECK_THROWS_AS(seminorm_p(d, u, 1.0, 2.0), ParameterError);
  CHECK_THROWS_AS(seminorm_p(d, u, 0.5, 1.0), ParameterError);
  CHECK_THROWS_WITH_AS(seminorm_p(d, u, 0.5, 0.5), doctest::Contains("p must exceed 1"), ParameterError);
  FracParams bad;
  bad.tol = 0.0;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
}

TEST_CASE("energy is bit-identical across thread counts") {
  const Domain d = build_rectangle(0, 1, 0, 1, 12, 12);
  const auto u = random_function(d.size(), 77);
  ::setenv("FRACNEU_THREADS", "1", 1);
  const double serial = PairKernel(d, 0.5, 3.0).energy(u);
  ::setenv("FRACNEU_THREADS", "4", 1);
  const double parallel = PairKernel(d, 0.5, 3.0).energy(u);
  ::unsetenv("FRACNEU_THREADS");
  CHECK(serial == parallel);
}
