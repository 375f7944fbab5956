#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace fracneu {

/// A point in R^n, n <= 2. In 1D the second coordinate is 0.
using Point = std::array<double, 2>;

enum class MetricKind { Euclidean, Geodesic };

enum class ShapeKind { Interval, Rectangle, LShape, PointCloud };

enum class DiameterMode {
  Analytic,  ///< the parametric diameter of the continuum shape
  NodeCloud  ///< max over the pairwise distance matrix
};

/// Parametric description of the continuum shape behind a node cloud.
///
/// Grid shapes are tensor grids of `cells[0] x cells[1]` equal cells over
/// the bounding box `[lo[0], hi[0]] x [lo[1], hi[1]]`; the L-shape drops the
/// cells of the closed upper-right quadrant.
struct Shape {
  ShapeKind kind = ShapeKind::PointCloud;
  Point lo{0.0, 0.0};
  Point hi{0.0, 0.0};
  std::array<int, 2> cells{0, 0};

  bool is_grid() const noexcept { return kind != ShapeKind::PointCloud; }
  double cell_width(int axis) const noexcept {
    return (hi[axis] - lo[axis]) / cells[axis];
  }
};

/// Discretized bounded domain: quadrature nodes and weights plus a metric.
///
/// Immutable once built; share it freely between threads.
class Domain {
 public:
  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  const std::vector<Point>& nodes() const noexcept { return nodes_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  double measure() const noexcept { return measure_; }
  /// Analytic Euclidean diameter of the continuum shape.
  double diam_euclid() const noexcept { return diam_euclid_; }
  MetricKind metric_kind() const noexcept { return metric_; }
  const Shape& shape() const noexcept { return shape_; }
  /// Neighbour count used for the geodesic graph (0 for Euclidean).
  std::size_t geodesic_k() const noexcept { return geodesic_k_; }

  double distance(std::size_t i, std::size_t j) const noexcept {
    return dist_[i * size() + j];
  }
  /// Dense row-major pairwise distance matrix.
  std::span<const double> distances() const noexcept { return dist_; }

  /// Integer cell coordinates of node i (grid shapes only).
  std::array<int, 2> cell(std::size_t i) const noexcept { return cells_[i]; }
  /// Node occupying cell (ix, iy), if that cell belongs to the domain.
  std::optional<std::size_t> node_at(int ix, int iy) const;

  /// True when the open segment [a, b] stays inside the open domain.
  bool segment_inside(const Point& a, const Point& b) const;

  /// Builds a domain from explicit nodes; Euclidean metric, no grid.
  static Domain point_cloud(int dim, std::vector<Point> nodes,
                            std::vector<double> weights, double measure,
                            double diam);

 private:
  friend Domain build_interval(double, double, std::size_t);
  friend Domain build_rectangle(double, double, double, double, std::size_t,
                                std::size_t);
  friend Domain build_lshape(double, std::size_t);
  friend Domain geodesic_distances(const Domain&, std::size_t);

  Domain() = default;
  static Domain from_grid(int dim, Shape shape, double measure, double diam);
  void fill_euclidean();

  int dim_ = 1;
  std::vector<Point> nodes_;
  std::vector<double> weights_;
  std::vector<std::array<int, 2>> cells_;
  std::vector<std::ptrdiff_t> cell_lookup_;  // -1 where the cell is absent
  double measure_ = 0.0;
  double diam_euclid_ = 0.0;
  MetricKind metric_ = MetricKind::Euclidean;
  std::size_t geodesic_k_ = 0;
  Shape shape_;
  std::vector<double> dist_;
};

/// Midpoint grid on (a, b) with n cells.
Domain build_interval(double a, double b, std::size_t n);

/// Tensor midpoint grid on (ax, bx) x (ay, by).
Domain build_rectangle(double ax, double bx, double ay, double by,
                       std::size_t nx, std::size_t ny);

/// (0, side)^2 minus its closed upper-right quadrant, with n_per_side cells
/// along each side of the bounding square (n_per_side even, >= 4).
Domain build_lshape(double side, std::size_t n_per_side);

/// Replaces the metric by shortest-path lengths on the symmetrized k-nearest
/// neighbour graph (ties at the k-th distance included, edges restricted to
/// segments inside the open domain, Euclidean edge lengths).
Domain geodesic_distances(const Domain& domain, std::size_t k);

/// Default neighbour count 2*dim + 1.
inline std::size_t default_geodesic_k(int dim) {
  return static_cast<std::size_t>(2 * dim + 1);
}

double diameter(const Domain& domain,
                DiameterMode mode = DiameterMode::Analytic);

/// Measure of the unit ball in R^n.
double unit_ball_measure(int n);

/// Weighted L^p norm (sum_i w_i |u_i|^p)^(1/p).
double lp_norm(const Domain& domain, std::span<const double> u, double p);

}  // namespace fracneu
