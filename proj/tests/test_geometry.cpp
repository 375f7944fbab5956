#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "fracneu/error.hpp"
#include "fracneu/geometry.hpp"

using namespace fracneu;

namespace {

double weight_sum(const Domain& d) {
  double s = 0.0;
  for (double w : d.weights()) s += w;
  return s;
}

// Independent all-pairs oracle: the same graph rule (visible k nearest with
// ties, symmetrized) solved by Floyd-Warshall.
std::vector<double> floyd_oracle(const Domain& d, std::size_t k) {
  const std::size_t n = d.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> g(n * n, inf);
  for (std::size_t i = 0; i < n; ++i) g[i * n + i] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> dist;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && d.segment_inside(d.nodes()[i], d.nodes()[j])) {
        dist.push_back(std::hypot(d.nodes()[i][0] - d.nodes()[j][0],
                                  d.nodes()[i][1] - d.nodes()[j][1]));
      }
    }
    std::sort(dist.begin(), dist.end());
    const double cut = dist[std::min(k, dist.size()) - 1] * (1 + 1e-12);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || !d.segment_inside(d.nodes()[i], d.nodes()[j])) continue;
      const double e = std::hypot(d.nodes()[i][0] - d.nodes()[j][0],
                                  d.nodes()[i][1] - d.nodes()[j][1]);
      if (e <= cut) {
        g[i * n + j] = std::min(g[i * n + j], e);
        g[j * n + i] = std::min(g[j * n + i], e);
      }
    }
  }
  for (std::size_t m = 0; m < n; ++m)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        g[i * n + j] = std::min(g[i * n + j], g[i * n + m] + g[m * n + j]);
  return g;
}

}  // namespace

TEST_CASE("interval midpoint grid") {
  const Domain d = build_interval(0.0, 2.0, 8);
  CHECK(d.dim() == 1);
  CHECK(d.size() == 8);
  CHECK(d.nodes()[0][0] == doctest::Approx(0.125));
  CHECK(d.nodes()[7][0] == doctest::Approx(1.875));
  CHECK(weight_sum(d) == doctest::Approx(2.0));
  CHECK(d.measure() == 2.0);
  CHECK(diameter(d) == 2.0);
  CHECK(diameter(d, DiameterMode::NodeCloud) == doctest::Approx(1.75));
  CHECK(d.distance(2, 5) == doctest::Approx(0.75));
  CHECK_THROWS_AS(build_interval(1.0, 0.0, 8), InvalidDomain);
  CHECK_THROWS_AS(build_interval(0.0, 1.0, 1), InvalidDomain);
}

TEST_CASE("rectangle and L-shape") {
  const Domain r = build_rectangle(0, 1, 0, 2, 4, 8);
  CHECK(r.size() == 32);
  CHECK(weight_sum(r) == doctest::Approx(2.0));
  CHECK(diameter(r) == doctest::Approx(std::sqrt(5.0)));

  const Domain l = build_lshape(2.0, 8);
  CHECK(l.size() == 48);
  CHECK(l.measure() == doctest::Approx(3.0));
  CHECK(weight_sum(l) == doctest::Approx(3.0));
  CHECK(diameter(l) == doctest::Approx(2.0 * std::numbers::sqrt2));
  for (const auto& x : l.nodes()) CHECK_FALSE((x[0] > 1.0 && x[1] > 1.0));
  CHECK_THROWS_AS(build_lshape(2.0, 7), InvalidDomain);
  CHECK_THROWS_AS(build_lshape(-1.0, 8), InvalidDomain);

  // Segments through the notch, including one grazing the reflex corner.
  CHECK_FALSE(l.segment_inside({0.5, 1.5}, {1.5, 0.5}));
  CHECK_FALSE(l.segment_inside({1.0 / 24, 2 - 1.0 / 24}, {2 - 1.0 / 24, 1.0 / 24}));
  CHECK(l.segment_inside({0.5, 0.5}, {1.5, 0.5}));
}

TEST_CASE("euclidean distances are symmetric with zero diagonal") {
  const Domain d = build_rectangle(0, 1, 0, 1, 5, 5);
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(d.distance(i, i) == 0.0);
    for (std::size_t j = 0; j < d.size(); ++j) CHECK(d.distance(i, j) == d.distance(j, i));
  }
}

TEST_CASE("geodesic metric matches a Floyd-Warshall oracle") {
  for (std::size_t k : {1u, 3u, 5u, 8u}) {
    const Domain l = build_lshape(2.0, 8);
    const Domain g = geodesic_distances(l, k);
    const auto oracle = floyd_oracle(l, k);
    for (std::size_t i = 0; i < g.size() * g.size(); ++i) {
      CHECK(g.distances()[i] == doctest::Approx(oracle[i]).epsilon(1e-12));
    }
    CHECK(g.metric_kind() == MetricKind::Geodesic);
    CHECK(g.geodesic_k() == k);
  }
}

TEST_CASE("geodesic distances dominate euclidean ones") {
  const Domain l = build_lshape(2.0, 12);
  const Domain g = geodesic_distances(l, default_geodesic_k(2));
  for (std::size_t i = 0; i < l.size() * l.size(); ++i) {
    CHECK(g.distances()[i] >= l.distances()[i] * (1 - 1e-14));
  }
  // The arm tips see each other only around the corner.
  CHECK(diameter(g) > diameter(l, DiameterMode::NodeCloud));
}

TEST_CASE("complete visibility graph on a convex domain is euclidean") {
  const Domain sq = build_rectangle(0, 1, 0, 1, 5, 5);
  const Domain g = geodesic_distances(sq, sq.size());
  for (std::size_t i = 0; i < sq.size() * sq.size(); ++i) {
    CHECK(g.distances()[i] == doctest::Approx(sq.distances()[i]).epsilon(1e-14));
  }
}

TEST_CASE("unit square geodesic graph stays within 3% of euclidean at k=16") {
  const Domain sq = build_rectangle(0, 1, 0, 1, 16, 16);
  const Domain g = geodesic_distances(sq, 16);
  double worst = 0.0;
  for (std::size_t i = 0; i < sq.size() * sq.size(); ++i) {
    if (sq.distances()[i] > 0) worst = std::max(worst, g.distances()[i] / sq.distances()[i] - 1);
  }
  CHECK(worst <= 0.03);
  // The octile graph (k = 8) overshoots by sqrt(4 - 2 sqrt 2) - 1 ~ 8% in
  // the worst direction, independently of the grid size.
  const Domain g8 = geodesic_distances(sq, 8);
  double worst8 = 0.0;
  for (std::size_t i = 0; i < sq.size() * sq.size(); ++i) {
    if (sq.distances()[i] > 0) worst8 = std::max(worst8, g8.distances()[i] / sq.distances()[i] - 1);
  }
  CHECK(worst8 > 0.03);
}

TEST_CASE("disconnected graph raises a connectivity error") {
  std::vector<Point> pts{{0, 0}, {0.1, 0}, {5, 0}, {5.1, 0}, {5.2, 0}};
  const Domain cloud = Domain::point_cloud(1, pts, std::vector<double>(5, 0.1), 0, 0);
  try {
    (void)geodesic_distances(cloud, 1);
    FAIL("expected ConnectivityError");
  } catch (const ConnectivityError& e) {
    CHECK(e.isolated_count() == 3);
  }
  CHECK_THROWS_AS((void)geodesic_distances(cloud, 0), ParameterError);
}

TEST_CASE("point cloud validation") {
  CHECK_THROWS_AS(Domain::point_cloud(1, {{0, 0}}, {1.0}, 0, 0), InvalidDomain);
  CHECK_THROWS_AS(Domain::point_cloud(1, {{0, 0}, {0, 0}}, {1.0, 1.0}, 0, 0), InvalidDomain);
  CHECK_THROWS_AS(Domain::point_cloud(1, {{0, 0}, {1, 0}}, {1.0, -1.0}, 0, 0), InvalidDomain);
  const Domain d = Domain::point_cloud(1, {{0, 0}, {0.5, 0}, {1, 0}}, {1, 1, 1}, 0, 0);
  CHECK(d.measure() == 3.0);
  CHECK(diameter(d) == 1.0);
}

TEST_CASE("lp norm") {
  const Domain d = build_interval(0, 1, 4);
  const std::vector<double> u{1, -1, 1, -1};
  CHECK(lp_norm(d, u, 3.0) == doctest::Approx(1.0));
  const std::vector<double> v{2, 0, 0, 0};
  CHECK(lp_norm(d, v, 2.0) == doctest::Approx(1.0));
  // Scaled internally, so huge exponents do not overflow.
  const std::vector<double> big{1e3, 0, 0, 0};
  CHECK(lp_norm(d, big, 200.0) == doctest::Approx(1e3 * std::pow(0.25, 1.0 / 200)));
  CHECK(unit_ball_measure(1) == 2.0);
  CHECK(unit_ball_measure(2) == doctest::Approx(std::numbers::pi));
}
