#include "minnaert/wave.hpp"

#include "doctest.h"

#include <cmath>

using namespace minnaert;

namespace {

PhantomDescriptor cube_descriptor(int n, double half_width = 0.8) {
  PhantomDescriptor d;
  d.grid_origin = Vec3(-half_width, -half_width, -half_width);
  d.grid_spacing = 2.0 * half_width / (n - 1);
  d.grid_dims = Index3(n, n, n);
  d.omega = Box3(Vec3(-0.5, -0.5, -0.5), Vec3(0.5, 0.5, 0.5));
  return d;
}

SeparablePowerSource narrow_bump_source(double width_sq, int p = 1) {
  SeparablePowerSource s;
  s.p = p;
  s.phi.base = 0.0;
  s.phi.bumps = {{1.0, Vec3::Zero(), width_sq}};
  s.psi = {10.0, 12.0};  // no cutoff within the runs below
  return s;
}

double rel_l2(const Series& a, const Series& b, int from, int to) {
  double num = 0.0, den = 0.0;
  for (int i = from; i < to; ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / den);
}

// least-squares fit of log w = log c + q log(t - t0)
std::pair<double, double> fit_power_law(const Series& w, const TimeGrid& tg, double t0, double lo, double hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (int i = 0; i <= tg.n_steps; ++i) {
    const double t = tg.time(i) - t0;
    if (t < lo || t > hi || w[i] <= 0.0) continue;
    const double x = std::log(t), y = std::log(w[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / n;
  return {slope, std::exp(intercept)};
}

}  // namespace

TEST_CASE("zero source produces zero traces") {
  auto d = cube_descriptor(24);
  d.kind = MediumKind::homogeneous;
  const auto m = build_phantom(d);
  SeparablePowerSource s = narrow_bump_source(0.02);
  s.phi.bumps.clear();  // phi == 0
  const TimeGrid tg(0.8 * cfl_max_dt(m), 60);
  const auto traces = fdtd_run(m, SourceModel(s), {Vec3(0.3, 0, 0)}, tg);
  CHECK((traces.series.abs() < 1e-300).all());
}

TEST_CASE("cfl violation is rejected") {
  auto d = cube_descriptor(24);
  d.kind = MediumKind::homogeneous;
  const auto m = build_phantom(d);
  const TimeGrid tg(10.0 * cfl_max_dt(m), 10);
  CHECK_THROWS_WITH_AS(fdtd_run(m, SourceModel(narrow_bump_source(0.02)), {Vec3(0.3, 0, 0)}, tg),
                       doctest::Contains("CFL"), std::invalid_argument);
}

TEST_CASE("wavefront in a k0=4 medium travels at speed 2") {
  auto d = cube_descriptor(48);
  d.kind = MediumKind::uniform;
  d.k0_value = 4.0;
  const auto m = build_phantom(d);
  const double h = m.k0.spacing;
  const double dt = 0.9 * cfl_max_dt(m);
  const TimeGrid tg(dt, static_cast<int>(std::ceil(0.5 / dt)));
  // pulse peak transit time between two receivers on the same ray
  const double W = 8.0 * dt;
  auto chi = [W](double t) {
    const double u = (t - W) / W;
    if (std::abs(u) >= 1.0) return 0.0;
    return (0.42 + 0.5 * std::cos(M_PI * u) + 0.08 * std::cos(2.0 * M_PI * u)) / (0.84 * W);
  };
  const auto inj = mollified_point(m.k0, Vec3::Zero(), chi);
  const auto traces = fdtd_run_injection(m, inj, {Vec3(0.25, 0, 0), Vec3(0.5, 0, 0)}, tg);
  auto peak_time = [&](const Series& v) {
    int imax = 0;
    for (int i = 1; i <= tg.n_steps; ++i)
      if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
    // parabolic refinement around the sample maximum
    const double y0 = v[imax - 1], y1 = v[imax], y2 = v[imax + 1];
    return tg.time(imax) + 0.5 * tg.dt * (y0 - y2) / (y0 - 2.0 * y1 + y2);
  };
  const double delay = peak_time(traces.trace(1)) - peak_time(traces.trace(0));
  CHECK(std::abs(delay - 0.25 / 2.0) <= h);
}

TEST_CASE("fdtd matches the retarded potential oracle") {
  auto d = cube_descriptor(48);
  d.kind = MediumKind::homogeneous;
  const auto m = build_phantom(d);
  const SourceModel s{narrow_bump_source(0.03)};
  const Vec3 receiver(0.35, 0.0, 0.0);
  const TimeGrid tg(0.9 * cfl_max_dt(m), static_cast<int>(std::ceil(0.8 / (0.9 * cfl_max_dt(m)))));
  const auto traces = fdtd_run(m, s, {receiver}, tg);
  const Series oracle = homogeneous_reference_trace(receiver, tg, s);
  const int from = 0;
  const int to = tg.size();
  CHECK(rel_l2(traces.trace(0), oracle, from, to) < 0.03);
}

TEST_CASE("fdtd converges at second order against the oracle") {
  const SourceModel s{narrow_bump_source(0.05)};
  const Vec3 receiver(0.3, 0.0, 0.0);
  std::vector<double> errs;
  for (int n : {49, 97}) {
    auto d = cube_descriptor(n, 0.75);
    d.kind = MediumKind::homogeneous;
    const auto m = build_phantom(d);
    const double dt = 0.28 * m.k0.spacing;  // fixed Courant ratio across grids
    const TimeGrid tg(dt, static_cast<int>(std::ceil(0.7 / dt)));
    const auto traces = fdtd_run(m, s, {receiver}, tg);
    const Series oracle = homogeneous_reference_trace(receiver, tg, s);
    errs.push_back(rel_l2(traces.trace(0), oracle, 0, tg.size()));
  }
  CHECK(errs[0] / errs[1] >= 3.5);
}

TEST_CASE("traces are causal") {
  auto d = cube_descriptor(40);
  d.kind = MediumKind::homogeneous;
  const auto m = build_phantom(d);
  const double width_sq = 0.01;
  const SourceModel s{narrow_bump_source(width_sq)};
  const Vec3 receiver(0.45, 0.0, 0.0);
  const TimeGrid tg(0.9 * cfl_max_dt(m), static_cast<int>(std::ceil(0.6 / (0.9 * cfl_max_dt(m)))));
  const auto traces = fdtd_run(m, s, {receiver}, tg);
  const Series v = traces.trace(0);
  const double peak = v.abs().maxCoeff();
  const double support_radius = std::sqrt(width_sq * std::log(1e8));
  const double t_first = receiver.norm() - support_radius;
  for (int i = 0; tg.time(i) < t_first - 2.0 * tg.dt; ++i) CHECK(std::abs(v[i]) <= 1e-6 * peak);
}

TEST_CASE("interior energy is non-increasing after source shutoff") {
  auto d = cube_descriptor(32);
  d.kind = MediumKind::homogeneous;
  const auto m = build_phantom(d);
  SeparablePowerSource s = narrow_bump_source(0.02);
  s.psi = {0.1, 0.2};  // shut off early
  FdtdOptions opts;
  opts.energy_every = 5;
  const TimeGrid tg(0.9 * cfl_max_dt(m), 150);
  const auto traces = fdtd_run(m, SourceModel(s), {Vec3(0.3, 0, 0)}, tg, opts);
  REQUIRE(traces.energy.size() > 10);
  // skip samples while the source is active (t <= 0.2)
  std::size_t start = 0;
  while (start < traces.energy.size() && (start + 1) * 5 * tg.dt <= 0.25) ++start;
  for (std::size_t i = start; i + 1 < traces.energy.size(); ++i)
    CHECK(traces.energy[i + 1] <= traces.energy[i] * (1.0 + 1e-9));
}

TEST_CASE("sponge reflection stays below one percent in band") {
  auto d = cube_descriptor(48);
  d.kind = MediumKind::homogeneous;
  const auto m = build_phantom(d);
  const double h = m.k0.spacing;
  const double dt = 0.9 * cfl_max_dt(m);
  const TimeGrid tg(dt, static_cast<int>(std::ceil(1.6 / dt)));
  // tone burst whose wavelength the 12-cell layer can absorb
  const double period = 6.0 * h, duration = 2.5 * period;
  auto burst = [period, duration](double t) {
    if (t <= 0.0 || t >= duration) return 0.0;
    const double env = 0.42 - 0.5 * std::cos(2.0 * M_PI * t / duration) + 0.08 * std::cos(4.0 * M_PI * t / duration);
    return std::sin(2.0 * M_PI * t / period) * env;
  };
  const auto inj = mollified_point(m.k0, Vec3::Zero(), burst);
  const auto traces = fdtd_run_injection(m, inj, {Vec3(0.1, 0, 0)}, tg);
  const Series v = traces.trace(0);
  double direct = 0.0, reflected = 0.0;
  for (int i = 0; i <= tg.n_steps; ++i) {
    const double t = tg.time(i);
    if (t < 0.65) direct = std::max(direct, std::abs(v[i]));
    if (t > 0.75) reflected = std::max(reflected, std::abs(v[i]));
  }
  CHECK(reflected < 0.01 * direct);
}

TEST_CASE("interior point sees the (p+3) onset power law") {
  auto d = cube_descriptor(32);
  d.kind = MediumKind::homogeneous;
  const auto m = build_phantom(d);
  SeparablePowerSource s;
  s.p = 1;
  s.phi.base = 0.0;
  s.phi.bumps = {{1.0, Vec3::Zero(), 0.25}};
  s.phi.has_support = true;
  s.phi.support = d.omega;
  s.psi = {10.0, 12.0};
  const double dt = 0.9 * cfl_max_dt(m);
  const TimeGrid tg(dt, static_cast<int>(std::ceil(0.4 / dt)));
  const auto traces = fdtd_run(m, SourceModel(s), {Vec3::Zero()}, tg);
  const auto [slope, coeff] = fit_power_law(traces.trace(0), tg, 0.0, 3.0 * dt, 0.35);
  CHECK(slope == doctest::Approx(4.0).epsilon(0.05));
  CHECK(coeff == doctest::Approx(1.0 / 12.0).epsilon(0.05));
}

TEST_CASE("retarded potential oracle basics") {
  SeparablePowerSource s;
  s.p = 1;
  s.phi.base = 0.0;
  s.phi.bumps = {{2.0, Vec3::Zero(), 1.0}};
  s.psi = {10.0, 12.0};
  const SourceModel src{s};

  // small-time beta-integral expansion at the bump center: v = phi(0) t^4 / 12
  const double t = 0.1;
  CHECK(homogeneous_reference(Vec3::Zero(), t, src) ==
        doctest::Approx(2.0 * std::pow(t, 4) / 12.0).epsilon(0.02));

  // finite propagation speed
  SeparablePowerSource far = s;
  far.phi.bumps = {{1.0, Vec3(3.0, 0, 0), 0.001}};
  CHECK(homogeneous_reference(Vec3::Zero(), 1.0, SourceModel(far)) == doctest::Approx(0.0).epsilon(1e-12));

  // zero profile
  SeparablePowerSource zero = s;
  zero.phi.bumps.clear();
  CHECK(homogeneous_reference(Vec3::Zero(), 1.0, SourceModel(zero)) == 0.0);

  // point source closed form
  PointSource ps;
  ps.p = 1;
  ps.psi = {10.0, 12.0};
  ps.location = Vec3(1.0, 0, 0);
  const double tt = 1.5;
  CHECK(homogeneous_reference(Vec3::Zero(), tt, SourceModel(ps)) ==
        doctest::Approx(std::pow(tt - 1.0, 2) / (4.0 * M_PI)).epsilon(1e-10));
}
