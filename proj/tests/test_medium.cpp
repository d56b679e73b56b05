#include "minnaert/medium.hpp"

#include "doctest.h"

#include <random>

using namespace minnaert;

namespace {

PhantomDescriptor base_descriptor() {
  PhantomDescriptor d;
  d.grid_origin = Vec3(-0.8, -0.8, -0.8);
  d.grid_spacing = 0.05;  // 33 nodes: the origin is a lattice node
  d.grid_dims = Index3(33, 33, 33);
  d.omega = Box3(Vec3(-0.5, -0.5, -0.5), Vec3(0.5, 0.5, 0.5));
  return d;
}

}  // namespace

TEST_CASE("homogeneous descriptor gives identity medium") {
  auto d = base_descriptor();
  d.kind = MediumKind::homogeneous;
  const auto m = build_phantom(d);
  CHECK(m.constant_coefficient);
  const auto s = eval_medium(m, Vec3(0.13, -0.2, 0.31));
  CHECK(s.k0 == doctest::Approx(1.0));
  CHECK(s.rho0 == doctest::Approx(1.0));
  CHECK(s.c0 == doctest::Approx(1.0));
  CHECK(m.c_bounds.first == doctest::Approx(1.0));
  CHECK(m.c_bounds.second == doctest::Approx(1.0));
}

TEST_CASE("gaussian bump peaks at sqrt(1.2)") {
  auto d = base_descriptor();
  d.kind = MediumKind::bumps;
  d.k0_bumps = {{0.2, Vec3::Zero(), 0.1}};
  const auto m = build_phantom(d);
  const auto s = eval_medium(m, Vec3::Zero());
  CHECK(s.k0 == doctest::Approx(1.2).epsilon(1e-6));
  CHECK(s.c0 == doctest::Approx(std::sqrt(1.2)).epsilon(1e-6));
  CHECK(m.c_bounds.second == doctest::Approx(std::sqrt(1.2)).epsilon(1e-4));
}

TEST_CASE("contrast bound violation is rejected") {
  auto d = base_descriptor();
  d.kind = MediumKind::bumps;
  d.contrast_bound = 10.0;
  d.k0_bumps = {{1.0e3, Vec3::Zero(), 0.1}};
  CHECK_THROWS_WITH_AS(build_phantom(d), doctest::Contains("contrast bound exceeded"), std::invalid_argument);
}

TEST_CASE("omega outside grid is rejected") {
  auto d = base_descriptor();
  d.kind = MediumKind::bumps;
  d.omega = Box3(Vec3(-2, -2, -2), Vec3(2, 2, 2));
  CHECK_THROWS_AS(build_phantom(d), std::invalid_argument);
}

TEST_CASE("medium is exactly one outside omega") {
  auto d = base_descriptor();
  d.kind = MediumKind::bumps;
  d.k0_bumps = {{0.2, Vec3(0.1, 0.0, -0.1), 0.2}};
  d.rho0_bumps = {{-0.1, Vec3(-0.1, 0.1, 0.0), 0.15}};
  const auto m = build_phantom(d);

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  int checked = 0;
  while (checked < 500) {
    const Vec3 x(u(rng), u(rng), u(rng));
    if (m.omega.contains(x) || !m.k0.contains(x)) continue;
    const auto s = eval_medium(m, x);
    CHECK(s.k0 == 1.0);
    CHECK(s.rho0 == 1.0);
    CHECK(s.c0 == 1.0);
    ++checked;
  }
}

TEST_CASE("c0 equals sqrt(k0/rho0) at every query") {
  auto d = base_descriptor();
  d.kind = MediumKind::bumps;
  d.k0_bumps = {{0.15, Vec3::Zero(), 0.3}};
  d.rho0_bumps = {{0.1, Vec3(0.2, 0, 0), 0.2}};
  const auto m = build_phantom(d);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-0.7, 0.7);
  for (int t = 0; t < 300; ++t) {
    const Vec3 x(u(rng), u(rng), u(rng));
    const auto s = eval_medium(m, x);
    CHECK(s.c0 == std::sqrt(s.k0 / s.rho0));
  }
}

TEST_CASE("uniform test medium spans the whole grid") {
  auto d = base_descriptor();
  d.kind = MediumKind::uniform;
  d.k0_value = 4.0;
  const auto m = build_phantom(d);
  CHECK(m.constant_coefficient);
  CHECK(eval_medium(m, Vec3(0.7, 0.7, 0.7)).c0 == doctest::Approx(2.0));
}

TEST_CASE("plateau blends to one inside the collar") {
  auto d = base_descriptor();
  d.kind = MediumKind::plateau;
  d.k0_value = 2.0;
  const auto m = build_phantom(d);
  CHECK(eval_medium(m, Vec3::Zero()).k0 == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(eval_medium(m, Vec3(0.75, 0, 0)).k0 == 1.0);
  // value transitions inside omega only
  CHECK(eval_medium(m, Vec3(0.45, 0, 0)).k0 > 1.0 - 1e-12);
  CHECK(eval_medium(m, Vec3(0.45, 0, 0)).k0 < 2.0);
}
