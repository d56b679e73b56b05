#include "minnaert/volterra.hpp"

#include "doctest.h"

#include <cmath>

using namespace minnaert;

namespace {

// ball bubble, kappa_k = 1, rho0(z) = 1, homogeneous medium, |x0 - z| = 1
struct HomSetup {
  BubbleSpec spec;
  BubbleConstants consts;
  TimeGrid tg{1e-3, 3000};
  VolterraKernel kernel;

  explicit HomSetup(double eps = 0.05) {
    spec.radius = eps;
    consts = bubble_constants(spec, 1.0);
    kernel = build_kernel(consts, 1.0, 1.0, 1.0, nullptr, tg);
  }
};

double rel_l2(const Series& a, const Series& b) {
  return std::sqrt((a - b).square().sum() / b.square().sum());
}

}  // namespace

TEST_CASE("alpha coefficient closed forms") {
  HomSetup s;
  const double alpha = alpha_coefficient(s.consts.vol_D, s.consts.a_dD, 1.0, 1.0, 1.0);
  CHECK(alpha == doctest::Approx(0.05 / (2.0 * M_PI)).epsilon(1e-12));
  CHECK(alpha_coefficient(s.consts.vol_D, s.consts.a_dD, 1.0, 1.0, 2.0) == doctest::Approx(0.5 * alpha).epsilon(1e-13));
  CHECK(alpha_coefficient(s.consts.vol_D, s.consts.a_dD, 2.0, 1.0, 1.0) == doctest::Approx(2.0 * alpha).epsilon(1e-13));
  CHECK_THROWS_AS(alpha_coefficient(-1.0, 1.0, 1.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("homogeneous kernel is the minnaert sine") {
  HomSetup s;
  const double omega = s.consts.omega_M;
  const double alpha = s.kernel.alpha;
  CHECK(s.kernel.samples[0] == 0.0);
  const double t_quarter = M_PI / (2.0 * omega);
  const int i = static_cast<int>(std::round(t_quarter / s.tg.dt));
  CHECK(s.kernel.samples[i] == doctest::Approx(-alpha * omega * std::sin(omega * s.tg.time(i))).epsilon(1e-12));
  CHECK(s.kernel.samples.minCoeff() >= -alpha * omega * (1.0 + 1e-12));
}

TEST_CASE("kernel scales linearly in eps") {
  HomSetup a(0.05), b(0.10);
  CHECK(b.kernel.alpha == doctest::Approx(2.0 * a.kernel.alpha).epsilon(1e-12));
  for (int i : {10, 500, 1500})
    CHECK(b.kernel.samples[i] == doctest::Approx(2.0 * a.kernel.samples[i]).epsilon(1e-12));
}

TEST_CASE("apply reduces to alpha scaling for a zero kernel") {
  HomSetup s;
  VolterraKernel k = s.kernel;
  k.samples.setZero();
  Series f(s.tg.size());
  for (int i = 0; i <= s.tg.n_steps; ++i) f[i] = std::sin(3.0 * s.tg.time(i));
  const Series out = apply_kalpha(k, f);
  CHECK(rel_l2(out, (k.alpha * f).eval()) < 1e-14);
}

TEST_CASE("apply of a unit step gives alpha cos(omega t)") {
  HomSetup s;
  Series step = Series::Ones(s.tg.size());
  const Series out = apply_kalpha(s.kernel, step);
  Series expected(s.tg.size());
  for (int i = 0; i <= s.tg.n_steps; ++i)
    expected[i] = s.kernel.alpha * std::cos(s.consts.omega_M * s.tg.time(i));
  CHECK(rel_l2(out, expected) < 1e-5);
}

TEST_CASE("apply is linear to machine precision") {
  HomSetup s;
  Series f(s.tg.size()), g(s.tg.size());
  for (int i = 0; i <= s.tg.n_steps; ++i) {
    const double t = s.tg.time(i);
    f[i] = t * t;
    g[i] = std::sin(2.0 * t);
  }
  const Series lhs = apply_kalpha(s.kernel, (f + g).eval());
  const Series rhs = apply_kalpha(s.kernel, f) + apply_kalpha(s.kernel, g);
  CHECK(rel_l2(lhs, rhs) < 1e-13);
}

TEST_CASE("invert is the exact discrete inverse of apply") {
  HomSetup s;
  Series f(s.tg.size());
  for (int i = 0; i <= s.tg.n_steps; ++i) {
    const double t = s.tg.time(i);
    f[i] = (t > 0.3) ? std::pow(t - 0.3, 4) * std::exp(-t) : 0.0;
  }
  const Series back = invert_kalpha(s.kernel, apply_kalpha(s.kernel, f));
  CHECK(rel_l2(back, f) < 1e-10);
}

TEST_CASE("invert of alpha f with a zero kernel recovers f") {
  HomSetup s;
  VolterraKernel k = s.kernel;
  k.samples.setZero();
  Series f(s.tg.size());
  for (int i = 0; i <= s.tg.n_steps; ++i) f[i] = std::cos(2.0 * s.tg.time(i));
  CHECK(rel_l2(invert_kalpha(k, (k.alpha * f).eval()), f) < 1e-13);
}

TEST_CASE("invert of alpha cos(omega t) is the unit step") {
  HomSetup s;
  Series y(s.tg.size());
  for (int i = 0; i <= s.tg.n_steps; ++i) y[i] = s.kernel.alpha * std::cos(s.consts.omega_M * s.tg.time(i));
  const Series f = invert_kalpha(s.kernel, y);
  CHECK((f - 1.0).abs().maxCoeff() < 1e-4);
}

TEST_CASE("causality is preserved by apply and invert") {
  HomSetup s;
  Series f = Series::Zero(s.tg.size());
  const int onset = 400;
  for (int i = onset; i <= s.tg.n_steps; ++i) f[i] = std::pow(s.tg.time(i) - s.tg.time(onset), 2);
  CHECK(first_support_index(apply_kalpha(s.kernel, f)) >= onset);
  CHECK(first_support_index(invert_kalpha(s.kernel, f)) >= onset);
}

TEST_CASE("neumann series agrees with the triangular solve") {
  HomSetup s;
  Series y(s.tg.size());
  for (int i = 0; i <= s.tg.n_steps; ++i) {
    const double t = s.tg.time(i);
    y[i] = s.kernel.alpha * t * t * std::exp(-0.5 * t);
  }
  const Series direct = invert_kalpha(s.kernel, y);
  const Series series = neumann_series_inverse(s.kernel, y, 20);
  CHECK(rel_l2(series, direct) < 1e-8);
}

TEST_CASE("factorial tail bound holds with slack") {
  HomSetup s;
  TimeGrid tg(1e-3, 1000);  // T = 1
  VolterraKernel k = build_kernel(s.consts, 1.0, 1.0, 1.0, nullptr, tg);
  Series f = Series::Ones(tg.size());
  const auto report = tail_bound_check(k, f, 8);
  CHECK(report.ok);
  REQUIRE(report.rows.size() == 8);
  CHECK(report.rows[2].n == 3);
  CHECK(report.rows[2].ratio < 1.0);
  for (std::size_t i = 1; i < report.rows.size(); ++i) CHECK(report.rows[i].ratio <= report.rows[i - 1].ratio);

  VolterraKernel zero = k;
  zero.samples.setZero();
  const auto zr = tail_bound_check(zero, f, 4);
  CHECK(zr.ok);
  for (const auto& row : zr.rows) CHECK(row.norm == 0.0);

  CHECK_THROWS_AS(tail_bound_check(k, f, 13), std::invalid_argument);
}

TEST_CASE("second-kind dominance guard trips on oversized kernels") {
  HomSetup s;
  VolterraKernel k = s.kernel;
  k.samples[0] = 20.0;  // dt K(0)/2 = 1e-2 overwhelms alpha/10 ~ 8e-4
  Series y = Series::Ones(s.tg.size());
  CHECK_THROWS_AS(invert_kalpha(k, y), InversionError);
}
