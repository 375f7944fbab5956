#include "fracneu/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <string>
#include <utility>

#include "fracneu/error.hpp"
#include "fracneu/parallel.hpp"

namespace fracneu {

namespace {

bool finite_all(std::initializer_list<double> xs) {
  return std::all_of(xs.begin(), xs.end(),
                     [](double x) { return std::isfinite(x); });
}

double euclid(const Point& a, const Point& b) {
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

// Closed axis-aligned box test for the segment a + t (b - a), t in [0, 1].
bool segment_hits_box(const Point& a, const Point& b, const Point& lo,
                      const Point& hi) {
  double t0 = 0.0;
  double t1 = 1.0;
  for (int axis = 0; axis < 2; ++axis) {
    const double d = b[axis] - a[axis];
    if (d == 0.0) {
      if (a[axis] < lo[axis] || a[axis] > hi[axis]) return false;
      continue;
    }
    double ta = (lo[axis] - a[axis]) / d;
    double tb = (hi[axis] - a[axis]) / d;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  return true;
}

}  // namespace

std::optional<std::size_t> Domain::node_at(int ix, int iy) const {
  if (!shape_.is_grid()) return std::nullopt;
  if (ix < 0 || iy < 0 || ix >= shape_.cells[0] || iy >= shape_.cells[1]) {
    return std::nullopt;
  }
  const auto idx = cell_lookup_[static_cast<std::size_t>(iy) *
                                    static_cast<std::size_t>(shape_.cells[0]) +
                                static_cast<std::size_t>(ix)];
  if (idx < 0) return std::nullopt;
  return static_cast<std::size_t>(idx);
}

bool Domain::segment_inside(const Point& a, const Point& b) const {
  if (shape_.kind != ShapeKind::LShape) return true;
  // The notch is closed; grow it slightly so that segments grazing the
  // reflex corner are rejected regardless of rounding in the node positions.
  const double eps = 1e-9 * (shape_.hi[0] - shape_.lo[0]);
  const Point notch_lo{0.5 * (shape_.lo[0] + shape_.hi[0]) - eps,
                       0.5 * (shape_.lo[1] + shape_.hi[1]) - eps};
  return !segment_hits_box(a, b, notch_lo, shape_.hi);
}

void Domain::fill_euclidean() {
  const std::size_t n = size();
  dist_.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = euclid(nodes_[i], nodes_[j]);
      dist_[i * n + j] = d;
      dist_[j * n + i] = d;
    }
  }
}

Domain Domain::from_grid(int dim, Shape shape, double measure, double diam) {
  Domain d;
  d.dim_ = dim;
  d.shape_ = shape;
  d.measure_ = measure;
  d.diam_euclid_ = diam;
  const int nx = shape.cells[0];
  const int ny = shape.cells[1];
  const double hx = shape.cell_width(0);
  const double hy = dim == 2 ? shape.cell_width(1) : 1.0;
  d.cell_lookup_.assign(static_cast<std::size_t>(nx) * ny, -1);
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      if (shape.kind == ShapeKind::LShape && ix >= nx / 2 && iy >= ny / 2) {
        continue;
      }
      d.cell_lookup_[static_cast<std::size_t>(iy) * nx + ix] =
          static_cast<std::ptrdiff_t>(d.nodes_.size());
      Point x{shape.lo[0] + (ix + 0.5) * hx, 0.0};
      if (dim == 2) x[1] = shape.lo[1] + (iy + 0.5) * hy;
      d.nodes_.push_back(x);
      d.weights_.push_back(dim == 2 ? hx * hy : hx);
      d.cells_.push_back({ix, iy});
    }
  }
  d.fill_euclidean();
  return d;
}

Domain Domain::point_cloud(int dim, std::vector<Point> nodes,
                           std::vector<double> weights, double measure,
                           double diam) {
  if (dim != 1 && dim != 2) throw InvalidDomain("dimension must be 1 or 2");
  if (nodes.size() < 2 || nodes.size() != weights.size()) {
    throw InvalidDomain("point cloud needs >= 2 nodes with one weight each");
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!(weights[i] > 0.0) || !finite_all({nodes[i][0], nodes[i][1]})) {
      throw InvalidDomain("point cloud weights must be positive, nodes finite");
    }
    if (dim == 1) nodes[i][1] = 0.0;
  }
  Domain d;
  d.dim_ = dim;
  d.nodes_ = std::move(nodes);
  d.weights_ = std::move(weights);
  d.cells_.assign(d.nodes_.size(), {0, 0});
  d.fill_euclidean();
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = i + 1; j < d.size(); ++j) {
      if (d.distance(i, j) == 0.0) {
        throw InvalidDomain("point cloud nodes must be distinct");
      }
    }
  }
  if (!(measure > 0.0)) {
    measure = 0.0;
    for (double w : d.weights_) measure += w;
  }
  d.measure_ = measure;
  if (!(diam > 0.0)) diam = *std::max_element(d.dist_.begin(), d.dist_.end());
  d.diam_euclid_ = diam;
  return d;
}

Domain build_interval(double a, double b, std::size_t n) {
  if (!finite_all({a, b}) || !(a < b) || n < 2) {
    throw InvalidDomain("interval needs finite a < b and N >= 2");
  }
  Shape shape{ShapeKind::Interval, {a, 0.0}, {b, 0.0},
              {static_cast<int>(n), 1}};
  return Domain::from_grid(1, shape, b - a, b - a);
}

Domain build_rectangle(double ax, double bx, double ay, double by,
                       std::size_t nx, std::size_t ny) {
  if (!finite_all({ax, bx, ay, by}) || !(ax < bx) || !(ay < by) || nx < 2 ||
      ny < 2) {
    throw InvalidDomain("rectangle needs finite ax < bx, ay < by, Nx, Ny >= 2");
  }
  Shape shape{ShapeKind::Rectangle, {ax, ay}, {bx, by},
              {static_cast<int>(nx), static_cast<int>(ny)}};
  return Domain::from_grid(2, shape, (bx - ax) * (by - ay),
                           std::hypot(bx - ax, by - ay));
}

Domain build_lshape(double side, std::size_t n_per_side) {
  if (!std::isfinite(side) || !(side > 0.0) || n_per_side < 4 ||
      n_per_side % 2 != 0) {
    throw InvalidDomain("L-shape needs side > 0 and an even N_per_side >= 4");
  }
  const int n = static_cast<int>(n_per_side);
  Shape shape{ShapeKind::LShape, {0.0, 0.0}, {side, side}, {n, n}};
  return Domain::from_grid(2, shape, 0.75 * side * side,
                           side * std::numbers::sqrt2);
}

Domain geodesic_distances(const Domain& domain, std::size_t k) {
  const std::size_t n = domain.size();
  if (k < 1) throw ParameterError("neighbour count k must be >= 1");
  const auto& x = domain.nodes();

  // Symmetrized k-NN adjacency over visible candidates.
  std::vector<std::vector<std::pair<std::size_t, double>>> adj(n);
  std::vector<std::pair<double, std::size_t>> cand;
  for (std::size_t i = 0; i < n; ++i) {
    cand.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || !domain.segment_inside(x[i], x[j])) continue;
      cand.emplace_back(euclid(x[i], x[j]), j);
    }
    std::sort(cand.begin(), cand.end());
    if (cand.empty()) continue;
    const double cutoff =
        cand[std::min(k, cand.size()) - 1].first * (1.0 + 1e-12);
    for (const auto& [d, j] : cand) {
      if (d > cutoff) break;
      adj[i].emplace_back(j, d);
      adj[j].emplace_back(i, d);
    }
  }
  for (auto& row : adj) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }

  Domain out = domain;
  out.metric_ = MetricKind::Geodesic;
  out.geodesic_k_ = k;
  constexpr double inf = std::numeric_limits<double>::infinity();
  out.dist_.assign(n * n, inf);

  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    using Item = std::pair<double, std::size_t>;
    for (std::size_t src = begin; src < end; ++src) {
      double* row = out.dist_.data() + src * n;
      std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
      row[src] = 0.0;
      heap.emplace(0.0, src);
      while (!heap.empty()) {
        const auto [d, v] = heap.top();
        heap.pop();
        if (d > row[v]) continue;
        for (const auto& [w, len] : adj[v]) {
          const double nd = d + len;
          if (nd < row[w]) {
            row[w] = nd;
            heap.emplace(nd, w);
          }
        }
      }
    }
  });

  const std::size_t unreachable = static_cast<std::size_t>(
      std::count(out.dist_.begin(), out.dist_.begin() + n, inf));
  if (unreachable > 0) {
    throw ConnectivityError("k-NN graph is disconnected: " +
                                std::to_string(unreachable) +
                                " node(s) unreachable from node 0",
                            unreachable);
  }
  // Exact symmetry; Dijkstra rows can differ in the last ulp.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = std::min(out.dist_[i * n + j], out.dist_[j * n + i]);
      out.dist_[i * n + j] = d;
      out.dist_[j * n + i] = d;
    }
  }
  return out;
}

double diameter(const Domain& domain, DiameterMode mode) {
  if (mode == DiameterMode::Analytic &&
      domain.metric_kind() == MetricKind::Euclidean) {
    return domain.diam_euclid();
  }
  const auto d = domain.distances();
  return *std::max_element(d.begin(), d.end());
}

double unit_ball_measure(int n) {
  switch (n) {
    case 1:
      return 2.0;
    case 2:
      return std::numbers::pi;
    default:
      throw ParameterError("unit ball measure: dimension must be 1 or 2");
  }
}

double lp_norm(const Domain& domain, std::span<const double> u, double p) {
  double m = 0.0;
  for (double v : u) m = std::max(m, std::abs(v));
  if (m == 0.0) return 0.0;
  CompensatedSum acc;
  const auto& w = domain.weights();
  for (std::size_t i = 0; i < u.size(); ++i) {
    acc.add(w[i] * std::pow(std::abs(u[i]) / m, p));
  }
  return m * std::pow(acc.value(), 1.0 / p);
}

}  // namespace fracneu
