#include "fracneu/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "fracneu/error.hpp"
#include "fracneu/parallel.hpp"

namespace fracneu {

namespace {

double signed_pow(double x, double e) {
  return std::copysign(std::pow(std::abs(x), e), x);
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
  CompensatedSum acc;
  for (std::size_t i = 0; i < a.size(); ++i) acc.add(a[i] * b[i]);
  return acc.value();
}

void normalize_lp(const Domain& domain, GridFunction& u, double p) {
  const double norm = lp_norm(domain, u, p);
  if (!(norm > 0.0)) throw DegenerateFunction("cannot normalize the zero function");
  for (double& x : u) x /= norm;
}

// Rayleigh quotient and its gradient at a constrained point u.
struct Evaluation {
  double lambda = 0.0;
  GridFunction grad;
  double stationarity = 0.0;
};

Evaluation evaluate(const Domain& domain, const PairKernel& kernel,
                    std::span<const double> u) {
  const std::size_t n = u.size();
  const double p = kernel.p();
  const auto& w = domain.weights();
  Evaluation ev;
  ev.grad.assign(n, 0.0);
  const double energy = kernel.energy_and_gradient(u, ev.grad);
  CompensatedSum mass;
  std::vector<double> mass_grad(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = signed_pow(u[i], p - 1.0);
    mass.add(w[i] * t * u[i]);
    mass_grad[i] = p * w[i] * t;
  }
  const double nn = mass.value();
  ev.lambda = energy / nn;
  double num = 0.0;
  double ge = 0.0;
  double gm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ev.grad[i] - ev.lambda * mass_grad[i];
    num = std::max(num, std::abs(r));
    ge = std::max(ge, std::abs(ev.grad[i]));
    gm = std::max(gm, std::abs(ev.lambda * mass_grad[i]));
    ev.grad[i] = r / nn;
  }
  ev.stationarity = num / (ge + gm);
  return ev;
}

GridFunction retract(const Domain& domain, std::span<const double> v,
                     double p) {
  GridFunction u = project_constraint(domain, v, p).values;
  normalize_lp(domain, u, p);
  return u;
}

}  // namespace

ConstraintProjection project_constraint(const Domain& domain,
                                        std::span<const double> v, double p) {
  if (v.empty()) throw DegenerateFunction("empty function");
  const auto [mn_it, mx_it] = std::minmax_element(v.begin(), v.end());
  const double lo_v = *mn_it;
  const double hi_v = *mx_it;
  if (!(hi_v > lo_v)) {
    throw DegenerateFunction("constant function cannot satisfy the constraint");
  }
  // Affine rescaling to [-1, 1] keeps |v - c|^(p-1) in range for large p.
  const double mid = 0.5 * (lo_v + hi_v);
  const double half = 0.5 * (hi_v - lo_v);
  const auto& w = domain.weights();
  std::vector<double> t(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) t[i] = (v[i] - mid) / half;

  auto f = [&](double c) {
    CompensatedSum acc;
    for (std::size_t i = 0; i < t.size(); ++i) {
      acc.add(w[i] * signed_pow(t[i] - c, p - 1.0));
    }
    return acc.value();
  };
  double lo = -1.0;
  double hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 4e-16; ++it) {
    const double c = 0.5 * (lo + hi);
    if (f(c) > 0.0) {
      lo = c;
    } else {
      hi = c;
    }
  }
  double c = 0.5 * (lo + hi);
  if (p >= 2.0) {
    // Newton polish inside the bracket.
    for (int it = 0; it < 3; ++it) {
      const double fc = f(c);
      CompensatedSum der;
      for (std::size_t i = 0; i < t.size(); ++i) {
        der.add(w[i] * (p - 1.0) * std::pow(std::abs(t[i] - c), p - 2.0));
      }
      if (!(der.value() > 0.0)) break;
      const double next = c + fc / der.value();
      if (next < lo - 1e-15 || next > hi + 1e-15 || std::abs(f(next)) >= std::abs(fc)) {
        break;
      }
      c = next;
    }
  }
  ConstraintProjection out;
  out.shift = mid + half * c;
  out.values.resize(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out.values[i] = half * (t[i] - c);
  return out;
}

double constraint_residual(const Domain& domain, std::span<const double> u,
                           double p) {
  CompensatedSum acc;
  const auto& w = domain.weights();
  for (std::size_t i = 0; i < u.size(); ++i) {
    acc.add(w[i] * signed_pow(u[i], p - 1.0));
  }
  return std::abs(acc.value());
}

GridFunction default_seed(const Domain& domain, double p) {
  GridFunction v(domain.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = domain.nodes()[i][0];
  return retract(domain, v, p);
}

GridFunction diameter_seed(const Domain& domain, double p) {
  const std::size_t n = domain.size();
  const auto d = domain.distances();
  const std::size_t far = static_cast<std::size_t>(
      std::max_element(d.begin(), d.end()) - d.begin());
  const std::size_t a = far / n;
  const std::size_t b = far % n;
  GridFunction v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = domain.distance(i, a) - domain.distance(i, b);
  return retract(domain, v, p);
}

EigenPair solve_p2(const Domain& domain, double s) {
  validate_exponents(s, 2.0);
  const std::size_t n = domain.size();
  const PairKernel kernel(domain, s, 2.0);
  const std::vector<double> l = kernel.quadratic_form_matrix();
  const auto& w = domain.weights();

  Eigen::VectorXd inv_sqrt_w(n);
  Eigen::VectorXd q(n);
  for (std::size_t i = 0; i < n; ++i) {
    inv_sqrt_w[i] = 1.0 / std::sqrt(w[i]);
    q[i] = std::sqrt(w[i]);
  }
  q.normalize();
  Eigen::MatrixXd m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      m(i, j) = l[i * n + j] * inv_sqrt_w[i] * inv_sqrt_w[j];
    }
  }
  // Lift the constant mode (W^(1/2) 1) above the whole spectrum.
  const double shift = m.diagonal().sum() + 1.0;
  m.noalias() += shift * q * q.transpose();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  if (eig.info() != Eigen::Success) {
    throw ConvergenceError("dense symmetric eigensolver failed", 0.0, 1.0, 0);
  }
  const Eigen::VectorXd v = eig.eigenvectors().col(0);

  GridFunction u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = v[i] * inv_sqrt_w[i];
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += w[i] * u[i];
  mean /= domain.measure();
  for (double& x : u) x -= mean;
  normalize_lp(domain, u, 2.0);

  EigenPair pair;
  pair.s = s;
  pair.p = 2.0;
  const Evaluation ev = evaluate(domain, kernel, u);
  pair.lambda = ev.lambda;
  pair.stationarity = ev.stationarity;
  pair.u = std::move(u);
  pair.constraint_residual = constraint_residual(domain, pair.u, 2.0);
  pair.iterations = 1;
  pair.converged = true;
  return pair;
}

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kShrink = 0.5;
constexpr int kStableIterations = 5;

// Limited-memory inverse Hessian for the first-order route (1 < p < 2).
class Lbfgs {
 public:
  static constexpr std::size_t kMemory = 12;

  void clear() {
    pairs_.clear();
    rho_.clear();
  }
  bool empty() const { return pairs_.empty(); }

  GridFunction direction(std::span<const double> grad, double fallback_scale) const {
    GridFunction d(grad.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = -grad[i];
    std::vector<double> alpha(pairs_.size(), 0.0);
    for (std::size_t k = pairs_.size(); k-- > 0;) {
      alpha[k] = rho_[k] * dot(pairs_[k].first, d);
      for (std::size_t i = 0; i < d.size(); ++i) d[i] -= alpha[k] * pairs_[k].second[i];
    }
    double gamma = fallback_scale;
    if (!pairs_.empty()) {
      const auto& [sv, yv] = pairs_.back();
      gamma = dot(sv, yv) / dot(yv, yv);
    }
    for (double& x : d) x *= gamma;
    for (std::size_t k = 0; k < pairs_.size(); ++k) {
      const double beta = rho_[k] * dot(pairs_[k].second, d);
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += (alpha[k] - beta) * pairs_[k].first[i];
    }
    return d;
  }

  void update(GridFunction sv, GridFunction yv) {
    const double sy = dot(sv, yv);
    if (!(sy > 1e-12 * std::sqrt(dot(sv, sv) * dot(yv, yv)))) return;
    pairs_.emplace_back(std::move(sv), std::move(yv));
    rho_.push_back(1.0 / sy);
    if (pairs_.size() > kMemory) {
      pairs_.pop_front();
      rho_.pop_front();
    }
  }

 private:
  std::deque<std::pair<GridFunction, GridFunction>> pairs_;  // (s, y)
  std::deque<double> rho_;
};

// Orthonormal basis Z of the tangent space {d : b1.d = b2.d = 0}, with the
// tangent-space form of a dense symmetric matrix.
class TangentSpace {
 public:
  TangentSpace(const Eigen::VectorXd& b1, const Eigen::VectorXd& b2)
      : qr_(normals(b1, b2)) {}

  Eigen::MatrixXd reduce(const Eigen::MatrixXd& a) const {
    Eigen::MatrixXd m = a;
    m.applyOnTheLeft(qr_.householderQ().adjoint());
    m.applyOnTheRight(qr_.householderQ());
    const Eigen::Index k = a.rows() - 2;
    return m.bottomRightCorner(k, k);
  }
  Eigen::VectorXd reduce(const Eigen::VectorXd& v) const {
    Eigen::VectorXd x = qr_.householderQ().adjoint() * v;
    return x.tail(v.size() - 2);
  }
  Eigen::VectorXd lift(const Eigen::VectorXd& y) const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(y.size() + 2);
    x.tail(y.size()) = y;
    return qr_.householderQ() * x;
  }

 private:
  static Eigen::MatrixXd normals(const Eigen::VectorXd& b1,
                                 const Eigen::VectorXd& b2) {
    Eigen::MatrixXd b(b1.size(), 2);
    b.col(0) = b1.normalized();
    b.col(1) = b2.normalized();
    return b;
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr_;
};

// Search direction of the second-order route (p >= 2): the Newton step of
// the Rayleigh quotient on the tangent space of the constraint set when the
// reduced Hessian is positive definite, otherwise the step preconditioned by
// the energy Hessian alone (a nonlinear inverse iteration). Newton from far
// away is attracted by higher critical points.
GridFunction newton_direction(const Domain& domain, const PairKernel& kernel,
                              std::span<const double> u, double lambda,
                              std::span<const double> grad) {
  const std::size_t n = u.size();
  const double p = kernel.p();
  const auto& w = domain.weights();
  const std::vector<double> h = kernel.hessian(u);
  Eigen::MatrixXd he(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) he(i, j) = h[i * n + j];
  }
  Eigen::VectorXd hn(n);
  Eigen::VectorXd b1(n);
  Eigen::VectorXd b2(n);
  Eigen::VectorXd g(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = p == 2.0 ? 1.0 : std::pow(std::abs(u[i]), p - 2.0);
    hn[i] = p * (p - 1.0) * w[i] * t;
    b1[i] = w[i] * t;
    b2[i] = w[i] * t * u[i];
    g[i] = grad[i];
  }
  const TangentSpace tangent(b1, b2);
  const Eigen::VectorXd gz = tangent.reduce(g);

  auto attempt = [&](const Eigen::MatrixXd& reduced) -> std::optional<GridFunction> {
    const Eigen::LLT<Eigen::MatrixXd> llt(reduced);
    if (llt.info() != Eigen::Success) return std::nullopt;
    const Eigen::VectorXd x = tangent.lift(-llt.solve(gz));
    if (!x.allFinite()) return std::nullopt;
    GridFunction d(x.data(), x.data() + x.size());
    if (!(dot(grad, d) < 0.0)) return std::nullopt;
    return d;
  };

  Eigen::MatrixXd a = he;
  a.diagonal() -= lambda * hn;
  if (auto d = attempt(tangent.reduce(a))) return *d;
  Eigen::MatrixXd e = tangent.reduce(he);
  e.diagonal().array() += 1e-13 * e.diagonal().maxCoeff();
  if (auto d = attempt(e)) return *d;
  GridFunction d(grad.begin(), grad.end());
  for (double& x : d) x = -x;
  return d;
}

}  // namespace

EigenPair solve_general(const Domain& domain, const FracParams& params,
                        std::optional<GridFunction> seed) {
  params.validate();
  const double p = params.p;
  const std::size_t n = domain.size();
  const PairKernel kernel(domain, params.s, p);

  GridFunction u;
  if (seed) {
    if (seed->size() != n) throw ParameterError("seed length differs from node count");
    u = retract(domain, *seed, p);
  } else {
    u = default_seed(domain, p);
  }

  const bool second_order = p >= 2.0;
  const double stationarity_tol = std::max(1e-2 * params.tol, 1e-12);

  Evaluation ev = evaluate(domain, kernel, u);
  Lbfgs memory;
  int stable = 0;
  double last_step = 0.0;
  bool converged = false;
  std::size_t iter = 0;

  for (; iter < params.max_iter; ++iter) {
    GridFunction d;
    double t = 1.0;
    if (second_order) {
      d = newton_direction(domain, kernel, u, ev.lambda, ev.grad);
    } else {
      const double fallback = 0.1 * max_abs(u) / std::max(max_abs(ev.grad), 1e-300);
      d = memory.direction(ev.grad, fallback);
      if (!(dot(ev.grad, d) < 0.0)) {
        memory.clear();
        d = memory.direction(ev.grad, fallback);
      }
    }
    const double slope = dot(ev.grad, d);
    // Keep a single step from moving any value by more than ||u||_inf / p.
    if (p >= 32.0) t = std::min(t, max_abs(u) / (p * std::max(max_abs(d), 1e-300)));

    GridFunction trial(n);
    GridFunction next;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = u[i] + t * d[i];
      try {
        next = retract(domain, trial, p);
        const double next_lambda = rayleigh_quotient(domain, kernel, next);
        if (next_lambda <= ev.lambda + kArmijo * t * slope) {
          accepted = true;
          break;
        }
      } catch (const DegenerateFunction&) {
      }
      t *= kShrink;
    }
    if (!accepted) {
      if (!second_order && !memory.empty()) {
        memory.clear();
        continue;
      }
      // No further decrease representable in floating point.
      converged = ev.stationarity <= 1e3 * stationarity_tol;
      break;
    }

    Evaluation next_ev = evaluate(domain, kernel, next);
    if (!second_order) {
      GridFunction sv(n);
      GridFunction yv(n);
      for (std::size_t i = 0; i < n; ++i) {
        sv[i] = next[i] - u[i];
        yv[i] = next_ev.grad[i] - ev.grad[i];
      }
      memory.update(std::move(sv), std::move(yv));
    }

    const double change = std::abs(ev.lambda - next_ev.lambda) / next_ev.lambda;
    stable = change < params.tol ? stable + 1 : 0;
    last_step = t;
    u = std::move(next);
    ev = std::move(next_ev);
    if (ev.stationarity <= stationarity_tol &&
        (second_order || stable >= kStableIterations)) {
      converged = true;
      ++iter;
      break;
    }
  }

  if (!converged) {
    throw ConvergenceError(
        "projected descent did not converge after " + std::to_string(iter) +
            " iterations (stationarity " + std::to_string(ev.stationarity) + ")",
        ev.lambda, ev.stationarity, iter);
  }

  EigenPair pair;
  pair.s = params.s;
  pair.p = p;
  pair.lambda = rayleigh_quotient(domain, kernel, u);
  pair.stationarity = ev.stationarity;
  pair.u = std::move(u);
  pair.constraint_residual = constraint_residual(domain, pair.u, p);
  pair.iterations = iter;
  pair.final_step = last_step;
  pair.converged = true;
  return pair;
}

EigenPair solve(const Domain& domain, const FracParams& params) {
  params.validate();
  if (params.p == 2.0) return solve_p2(domain, params.s);
  return solve_general(domain, params);
}

std::vector<GridFunction> default_test_battery(const Domain& domain) {
  const auto& x = domain.nodes();
  Point lo = x.front();
  Point hi = x.front();
  for (const auto& pt : x) {
    for (int a = 0; a < 2; ++a) {
      lo[a] = std::min(lo[a], pt[a]);
      hi[a] = std::max(hi[a], pt[a]);
    }
  }
  auto coord = [&](std::size_t i, int a) {
    return hi[a] > lo[a] ? (x[i][a] - lo[a]) / (hi[a] - lo[a]) : 0.0;
  };
  constexpr double pi = std::numbers::pi;
  using Fn = double (*)(double, double);
  std::vector<Fn> fns;
  if (domain.dim() == 1) {
    fns = {
        [](double, double) { return 1.0; },
        [](double t, double) { return t; },
        [](double t, double) { return t * t; },
        [](double t, double) { return t * t * t; },
        [](double t, double) { return std::pow(t, 4); },
        [](double t, double) { return std::pow(t, 5); },
        [](double t, double) { return std::pow(t, 6); },
        [](double t, double) { return std::cos(pi * t); },
        [](double t, double) { return std::cos(2 * pi * t); },
        [](double t, double) { return std::cos(3 * pi * t); },
        [](double t, double) { return std::cos(4 * pi * t); },
        [](double t, double) { return std::cos(5 * pi * t); },
        [](double t, double) { return std::sin(pi * t); },
        [](double t, double) { return std::sin(2 * pi * t); },
        [](double t, double) { return std::sin(3 * pi * t); },
        [](double t, double) { return std::sin(4 * pi * t); },
        [](double t, double) { return std::sin(5 * pi * t); },
        [](double t, double) { return std::exp(t); },
        [](double t, double) { return std::exp(-t); },
        [](double t, double) { return 1.0 / (1.0 + t); },
    };
  } else {
    fns = {
        [](double, double) { return 1.0; },
        [](double t, double) { return t; },
        [](double, double r) { return r; },
        [](double t, double) { return t * t; },
        [](double t, double r) { return t * r; },
        [](double, double r) { return r * r; },
        [](double t, double) { return t * t * t; },
        [](double, double r) { return r * r * r; },
        [](double t, double r) { return t * t * r; },
        [](double t, double r) { return t * r * r; },
        [](double t, double) { return std::cos(pi * t); },
        [](double, double r) { return std::cos(pi * r); },
        [](double t, double r) { return std::cos(pi * t) * std::cos(pi * r); },
        [](double t, double) { return std::sin(pi * t); },
        [](double, double r) { return std::sin(pi * r); },
        [](double t, double) { return std::cos(2 * pi * t); },
        [](double, double r) { return std::cos(2 * pi * r); },
        [](double t, double) { return std::sin(2 * pi * t); },
        [](double, double r) { return std::sin(2 * pi * r); },
        [](double t, double r) { return std::exp(t + r); },
    };
  }
  std::vector<GridFunction> out;
  out.reserve(fns.size());
  for (Fn f : fns) {
    GridFunction phi(domain.size());
    for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = f(coord(i, 0), coord(i, 1));
    out.push_back(std::move(phi));
  }
  return out;
}

double weak_residual(const Domain& domain, const EigenPair& pair,
                     std::span<const GridFunction> phis) {
  std::vector<GridFunction> battery;
  if (phis.empty()) {
    battery = default_test_battery(domain);
    phis = battery;
  }
  const double p = pair.p;
  const PairKernel kernel(domain, pair.s, p);
  const auto& w = domain.weights();
  const double u_semi = std::pow(kernel.energy(pair.u), 1.0 / p);
  const double u_norm = lp_norm(domain, pair.u, p);
  double worst = 0.0;
  for (const auto& phi : phis) {
    const double form = kernel.form(pair.u, phi);
    CompensatedSum rhs;
    for (std::size_t i = 0; i < phi.size(); ++i) {
      rhs.add(w[i] * signed_pow(pair.u[i], p - 1.0) * phi[i]);
    }
    const double phi_semi = std::pow(kernel.energy(phi), 1.0 / p);
    const double scale = phi_semi * std::pow(u_semi, p - 1.0) +
                         pair.lambda * std::pow(u_norm, p - 1.0) *
                             lp_norm(domain, phi, p);
    if (!(scale > 0.0)) continue;
    worst = std::max(worst, std::abs(form - pair.lambda * rhs.value()) / scale);
  }
  return worst;
}

}  // namespace fracneu
