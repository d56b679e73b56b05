#include "minnaert/eikonal.hpp"

#include "doctest.h"

#include <cmath>
#include <vector>

using namespace minnaert;

namespace {

Grid3d constant_speed(double c, int n, double half_width = 1.0) {
  Grid3d g(Vec3(-half_width, -half_width, -half_width), 2.0 * half_width / (n - 1), Index3(n, n, n));
  g.values.setConstant(c);
  return g;
}

Grid3d bump_speed(int n, double amplitude = 0.1, double width_sq = 0.3) {
  Grid3d g = constant_speed(1.0, n);
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const Vec3 x = g.node(g.unflat(i));
    g.values[i] = 1.0 + amplitude * std::exp(-x.squaredNorm() / width_sq);
  }
  return g;
}

double max_abs_error_vs_distance(const TravelTimeMap& map, double speed) {
  double err = 0.0;
  for (Eigen::Index i = 0; i < map.zeta.size(); ++i) {
    const Vec3 x = map.zeta.node(map.zeta.unflat(i));
    err = std::max(err, std::abs(map.zeta.values[i] - (x - map.seed).norm() / speed));
  }
  return err;
}

double median(std::vector<double> v) {
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  return v[v.size() / 2];
}

// centered-difference Eikonal residual |c^2 |grad z|^2 - 1| over interior nodes
std::vector<double> interior_residuals(const Grid3d& c0, const TravelTimeMap& map) {
  const auto grad = central_gradient(map.zeta);
  std::vector<double> res;
  const Index3 d = c0.dims;
  for (int k = 2; k + 2 < d.z(); ++k)
    for (int j = 2; j + 2 < d.y(); ++j)
      for (int i = 2; i + 2 < d.x(); ++i) {
        const Eigen::Index n = c0.flat(i, j, k);
        const Vec3 x = c0.node(i, j, k);
        if ((x - map.seed).norm() < 4.0 * c0.spacing) continue;
        const double g2 = grad[0].values[n] * grad[0].values[n] + grad[1].values[n] * grad[1].values[n] +
                          grad[2].values[n] * grad[2].values[n];
        res.push_back(std::abs(c0.values[n] * c0.values[n] * g2 - 1.0));
      }
  return res;
}

}  // namespace

TEST_CASE("homogeneous travel time is the distance") {
  std::vector<double> errs;
  for (int n : {33, 65}) {
    const auto c0 = constant_speed(1.0, n);
    const auto map = solve_travel_time(c0, Vec3::Zero());
    errs.push_back(max_abs_error_vs_distance(map, 1.0));
    CHECK(errs.back() < 2.0 * c0.spacing);
  }
  CHECK(errs[0] / errs[1] >= 1.5);  // first-order decay
}

TEST_CASE("constant speed rescales the travel time") {
  const auto c0 = constant_speed(2.0, 33);
  const auto map = solve_travel_time(c0, Vec3::Zero());
  CHECK(max_abs_error_vs_distance(map, 2.0) < c0.spacing);  // O(dx), halved by the speed
}

TEST_CASE("linear speed gradient matches the 1-D ray integral") {
  const int n = 41;
  Grid3d c0 = constant_speed(1.0, n);
  for (Eigen::Index i = 0; i < c0.size(); ++i) c0.values[i] = 1.0 + 0.1 * c0.node(c0.unflat(i)).x();
  const auto map = solve_travel_time(c0, Vec3::Zero());
  // along the x1 axis: zeta(x) = int_0^x ds/(1 + 0.1 s) = 10 log(1 + 0.1 x)
  for (double x : {0.4, 0.6, 0.8}) {
    const double expected = 10.0 * std::log1p(0.1 * x);
    CHECK(interpolate(map.zeta, Vec3(x, 0, 0)) == doctest::Approx(expected).epsilon(0.01));
  }
}

TEST_CASE("solver rejects bad inputs") {
  auto c0 = constant_speed(1.0, 9);
  CHECK_THROWS_AS(solve_travel_time(c0, Vec3(5, 0, 0)), std::invalid_argument);
  c0.values[3] = -1.0;
  CHECK_THROWS_AS(solve_travel_time(c0, Vec3::Zero()), std::invalid_argument);
}

TEST_CASE("speed recovery inverts analytic travel-time fields") {
  Grid3d zeta(Vec3(-1, -1, -1), 2.0 / 24.0, Index3(25, 25, 25));
  TravelTimeMap map;
  map.seed = Vec3::Zero();
  for (double scale : {1.0, 2.0}) {
    for (Eigen::Index i = 0; i < zeta.size(); ++i) zeta.values[i] = scale * zeta.node(zeta.unflat(i)).norm();
    map.zeta = zeta;
    const auto c0 = speed_from_travel_time(map);
    int checked = 0;
    for (Eigen::Index i = 0; i < c0.size(); ++i) {
      if (!std::isfinite(c0.values[i])) continue;
      const Vec3 x = c0.node(c0.unflat(i));
      if (x.norm() < 0.3 || (x.cwiseAbs().maxCoeff() > 0.9)) continue;
      CHECK(c0.values[i] == doctest::Approx(1.0 / scale).epsilon(0.02));
      ++checked;
    }
    CHECK(checked > 1000);
  }
}

TEST_CASE("seed neighbourhood is masked in speed recovery") {
  const auto c0 = constant_speed(1.0, 17);
  const auto map = solve_travel_time(c0, Vec3::Zero());
  const auto rec = speed_from_travel_time(map);
  CHECK(!std::isfinite(interpolate(rec, Vec3::Zero())));
}

TEST_CASE("round trip through solve and recovery on a bump medium") {
  const auto c0 = bump_speed(41);
  const auto map = solve_travel_time(c0, Vec3(-0.95, -0.95, -0.95));
  const auto rec = speed_from_travel_time(map);
  double sq = 0.0;
  int count = 0;
  for (Eigen::Index i = 0; i < c0.size(); ++i) {
    if (!std::isfinite(rec.values[i])) continue;
    const Vec3 x = c0.node(c0.unflat(i));
    if (x.cwiseAbs().maxCoeff() > 0.8) continue;
    const double rel = (rec.values[i] - c0.values[i]) / c0.values[i];
    sq += rel * rel;
    ++count;
  }
  CHECK(count > 5000);
  CHECK(std::sqrt(sq / count) < 0.03);
}

TEST_CASE("eikonal residual decays at first order") {
  std::vector<double> med;
  for (int n : {21, 41}) {
    const auto c0 = bump_speed(n);
    const auto map = solve_travel_time(c0, Vec3(-0.95, -0.95, -0.95));
    med.push_back(median(interior_residuals(c0, map)));
  }
  CHECK(med[0] / med[1] >= 1.7);
}

TEST_CASE("travel time is symmetric in seed and evaluation point") {
  const Vec3 a(-0.6, -0.3, 0.2), b(0.5, 0.4, -0.3);
  const auto homog = constant_speed(1.0, 33);
  const auto map_a = solve_travel_time(homog, a);
  const double node_err = max_abs_error_vs_distance(map_a, 1.0);
  const auto map_b = solve_travel_time(homog, b);
  CHECK(std::abs(interpolate(map_a.zeta, b) - interpolate(map_b.zeta, a)) <= 2.0 * std::max(node_err, 1e-6));

  const auto bump = bump_speed(33);
  const auto bump_a = solve_travel_time(bump, a);
  const auto bump_b = solve_travel_time(bump, b);
  CHECK(std::abs(interpolate(bump_a.zeta, b) - interpolate(bump_b.zeta, a)) <= 4.0 * std::max(node_err, 1e-6));
}

TEST_CASE("marching accepts values in nondecreasing order") {
  const auto c0 = bump_speed(25);
  double prev = -1.0;
  bool monotone = true;
  EikonalOptions opts;
  opts.on_accept = [&](double v) {
    if (v < prev - 1e-12) monotone = false;
    prev = v;
  };
  solve_travel_time(c0, Vec3(0.1, 0.0, -0.2), opts);
  CHECK(monotone);
}

TEST_CASE("travel-time sandwich holds with discretization slack") {
  const auto c0 = bump_speed(33);
  const Vec3 seed(-0.4, 0.2, 0.1);
  const auto map = solve_travel_time(c0, seed);
  const double d1 = 1.0 / c0.values.maxCoeff();
  const double d2 = 1.0 / c0.values.minCoeff();
  const double slack = c0.spacing;  // first-order marching overshoots on diagonals
  for (Eigen::Index i = 0; i < map.zeta.size(); ++i) {
    const double r = (map.zeta.node(map.zeta.unflat(i)) - seed).norm();
    CHECK(map.zeta.values[i] >= d1 * r - 1e-9);
    CHECK(map.zeta.values[i] <= d2 * r + slack);
  }
}

TEST_CASE("riemannian data is flat for homogeneous media") {
  const auto c0 = constant_speed(1.0, 65, 1.6);
  EikonalOptions opts;
  opts.second_order = true;
  opts.init_radius_cells = 12.0;  // resolve the source-curvature region
  EikonalCache cache(c0, opts);
  const auto r1 = riemannian_metric_data(cache, Vec3(1, 0, 0), Vec3::Zero());
  CHECK(r1.eta.x() == doctest::Approx(1.0).epsilon(0.02));
  CHECK(std::abs(r1.eta.y()) < 0.02);
  CHECK(std::abs(r1.eta.z()) < 0.02);
  CHECK(r1.jac_det == doctest::Approx(1.0).epsilon(0.02));

  const auto r2 = riemannian_metric_data(cache, Vec3(0.5, 0, 0), Vec3::Zero());
  CHECK(r2.eta.x() == doctest::Approx(0.5).epsilon(0.02));
  CHECK(r2.jac_det == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("jacobian determinant is stable under stencil halving") {
  const auto c0 = bump_speed(41);
  EikonalCache cache(c0);
  const Vec3 x0(0.7, 0.0, 0.0), z(-0.2, 0.1, 0.0);
  const double h = c0.spacing;
  const auto coarse = riemannian_metric_data(cache, x0, z, 4.0 * h);
  const auto fine = riemannian_metric_data(cache, x0, z, 2.0 * h);
  CHECK(std::abs(coarse.jac_det - fine.jac_det) <= 0.1 * fine.jac_det);
}

TEST_CASE("degenerate stencil placement is rejected") {
  const auto c0 = constant_speed(1.0, 17);
  EikonalCache cache(c0);
  CHECK_THROWS_AS(riemannian_metric_data(cache, Vec3(0.99, 0, 0), Vec3::Zero()), std::out_of_range);
}
