#include "minnaert/greens.hpp"

namespace minnaert {

GreensAmplitude amplitude_m(const MediumPhantom& m, EikonalCache& cache, const Vec3& x, const Vec3& y) {
  if ((x - y).norm() < 1e-12) throw std::invalid_argument("amplitude_m: x == y");
  GreensAmplitude out;
  const MediumSample at_y = eval_medium(m, y);
  if (m.constant_coefficient) {
    out.sigma_value = 1.0;
    out.zeta_value = (x - y).norm() / at_y.c0;
  } else {
    const RiemannianData riem = riemannian_metric_data(cache, x, y);
    const MediumSample at_x = eval_medium(m, x);
    out.sigma_value = std::sqrt(riem.jac_det) * std::sqrt(at_y.k0 / at_x.k0);
    out.zeta_value = interpolate(cache.solve(x).zeta, y);
  }
  out.m_value = out.sigma_value * at_y.k0 / std::pow(at_y.c0, 3);
  return out;
}

RegularPartPulse regular_part_pulse(const MediumPhantom& m, EikonalCache& cache, const Vec3& z, const Vec3& x0,
                                    const PulseDescriptor& pulse, const TimeGrid& tg, const FdtdOptions& opts) {
  const double h = m.k0.spacing;
  if ((z - x0).norm() < 5.0 * h)
    throw std::invalid_argument("regular_part_pulse: receiver too close to the mollifier support");
  if (pulse.half_width < 4.0 * tg.dt)
    throw std::invalid_argument("regular_part_pulse: pulse too broadband for the grid");

  // causal delay aligned to the sample lattice so the shift back is exact
  const int delay_steps = static_cast<int>(std::ceil(pulse.half_width / tg.dt));
  const double t_d = delay_steps * tg.dt;
  auto chi = [&pulse, t_d](double t) { return pulse.eval(t - t_d); };

  const TimeGrid run_tg(tg.dt, tg.n_steps + delay_steps);
  const auto inj = mollified_point(m.k0, z, chi);
  const auto traces = fdtd_run_injection(m, inj, {x0}, run_tg, opts);
  const Series raw = traces.trace(0);

  // singular contribution superposed over the mollifier nodes
  const GreensAmplitude amp = amplitude_m(m, cache, x0, z);
  const TravelTimeMap* from_x0 = m.constant_coefficient ? nullptr : &cache.solve(x0);
  const double c0_z = eval_medium(m, z).c0;
  const double inv_h3_comp = h * h * h;  // injection weights carry 1/h^3

  RegularPartPulse out;
  out.tg = tg;
  out.pulse = pulse;
  out.arrival = amp.zeta_value;
  out.z = z;
  out.x0 = x0;
  out.samples = Series::Zero(tg.size());
  for (int n = 0; n <= tg.n_steps; ++n) {
    const double t = tg.time(n) + t_d;
    double singular = 0.0;
    for (const auto& [idx, w] : inj.weights) {
      const Vec3 y = m.k0.node(m.k0.unflat(idx));
      const double zeta_i =
          from_x0 ? interpolate(from_x0->zeta, y) : (x0 - y).norm() / c0_z;
      singular += (w * inv_h3_comp) * amp.m_value / (4.0 * M_PI * zeta_i) * pulse.eval(t - t_d - zeta_i);
    }
    out.samples[n] = raw[n + delay_steps] - singular;
  }
  return out;
}

}  // namespace minnaert
