#include "minnaert/bubble.hpp"

#include "doctest.h"

#include <algorithm>
#include <vector>

using namespace minnaert;

TEST_CASE("ball geometry constant is analytic") {
  BubbleSpec spec;
  spec.radius = 0.05;
  const auto c = geometry_constant(spec);
  CHECK(c.a_dD == doctest::Approx(4.0 * M_PI * 0.0025 / 3.0).epsilon(1e-12));
  CHECK(c.vol_D == doctest::Approx(4.0 * M_PI / 3.0 * std::pow(0.05, 3)).epsilon(1e-12));
  CHECK(c.area_dD == doctest::Approx(4.0 * M_PI * 0.0025).epsilon(1e-12));
}

TEST_CASE("geometry constant scales as eps^2") {
  BubbleSpec a, b;
  a.radius = 0.05;
  b.radius = 0.10;
  CHECK(geometry_constant(b).a_dD == doctest::Approx(4.0 * geometry_constant(a).a_dD).epsilon(1e-13));
}

TEST_CASE("chord quadrature reproduces the unit ball potential") {
  const auto ref = ellipsoid_reference(Vec3(1, 1, 1), 1e-3);
  CHECK(ref.a_dB == doctest::Approx(4.0 * M_PI / 3.0).epsilon(5e-3));
  CHECK(ref.area == doctest::Approx(4.0 * M_PI).epsilon(1e-3));
}

TEST_CASE("ellipsoid stays inside the geometry bracket") {
  const auto ref = ellipsoid_reference(Vec3(0.8, 1.0, 0.9));
  BubbleSpec spec;
  spec.radius = 0.05;
  spec.shape = BubbleShape::tabulated;
  spec.ref = ref;
  const auto c = geometry_constant(spec);
  const double eps2 = spec.radius * spec.radius;
  CHECK(c.a_dD >= 2.0 * M_PI / 3.0 * eps2);
  CHECK(c.a_dD <= 8.0 * M_PI * eps2);
}

TEST_CASE("minnaert frequency of the ball is eps-free") {
  BubbleSpec spec;
  spec.kappa_k = 1.0;
  std::vector<double> omegas;
  for (double eps : {0.02, 0.04, 0.08}) {
    spec.radius = eps;
    omegas.push_back(bubble_constants(spec, 1.0).omega_M);
  }
  const double expected = std::sqrt(3.0 / (2.0 * M_PI));
  for (double w : omegas) CHECK(w == doctest::Approx(expected).epsilon(1e-12));
  const double spread = (*std::max_element(omegas.begin(), omegas.end()) -
                         *std::min_element(omegas.begin(), omegas.end())) /
                        omegas.front();
  CHECK(spread < 1e-12);
}

TEST_CASE("minnaert frequency scalings") {
  const double base = minnaert_frequency(1.0, 1e-4, 1e-3);
  CHECK(minnaert_frequency(4.0, 1e-4, 1e-3) == doctest::Approx(0.5 * base).epsilon(1e-13));
  CHECK(minnaert_frequency(1.0, 4e-4, 1e-3) == doctest::Approx(2.0 * base).epsilon(1e-13));
  CHECK_THROWS_AS(minnaert_frequency(-1.0, 1e-4, 1e-3), std::invalid_argument);
  CHECK_THROWS_AS(minnaert_frequency(1.0, 0.0, 1e-3), std::invalid_argument);
}

TEST_CASE("degenerate shapes are rejected") {
  BubbleSpec spec;
  spec.shape = BubbleShape::tabulated;
  spec.ref.volume = 0.0;
  CHECK_THROWS_AS(geometry_constant(spec), std::invalid_argument);
  spec.radius = 0.0;
  CHECK_THROWS_AS(geometry_constant(spec), std::invalid_argument);
}
