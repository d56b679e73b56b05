#include "minnaert/forward.hpp"

#include "minnaert/wave.hpp"

#include <random>

namespace minnaert {

namespace {

double flux_coefficient(const BubbleConstants& consts, double rho1, double rho0_z) {
  return 2.0 * rho1 * consts.vol_D / (rho0_z * consts.a_dD);
}

}  // namespace

Series neumann_average(const Series& v_z, const BubbleConstants& consts, double rho1, double rho0_z,
                       const TimeGrid& tg) {
  if (v_z.size() != tg.size()) throw std::invalid_argument("neumann_average: grid mismatch");
  const double omega = consts.omega_M;
  Series sine(tg.size());
  for (int n = 0; n <= tg.n_steps; ++n) sine[n] = std::sin(omega * tg.time(n));
  return flux_coefficient(consts, rho1, rho0_z) * (v_z - omega * causal_convolve(sine, v_z, tg.dt));
}

Series neumann_average_ode_residual(const Series& u, const Series& v_z, const BubbleConstants& consts, double rho1,
                                    double rho0_z, const TimeGrid& tg) {
  const double omega = consts.omega_M;
  return second_time_derivative(u, tg.dt) + omega * omega * u -
         flux_coefficient(consts, rho1, rho0_z) * second_time_derivative(v_z, tg.dt);
}

VolterraKernel measurement_kernel(const MediumPhantom& m, const BubbleSpec& spec, const Vec3& x0, const TimeGrid& tg,
                                  EikonalCache& cache, const RegularPartPulse* g_pulse) {
  const MediumSample at_z = eval_medium(m, spec.center);
  const BubbleConstants consts = bubble_constants(spec, at_z.rho0);
  const GreensAmplitude amp = amplitude_m(m, cache, x0, spec.center);
  return build_kernel(consts, amp.m_value, at_z.rho0, amp.zeta_value, g_pulse, tg);
}

Series smooth_causal_noise(const TimeGrid& tg, double t_gate, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Series white(tg.size());
  for (int n = 0; n <= tg.n_steps; ++n) white[n] = gauss(rng);

  // low-pass: Blackman smoothing over +-4 samples
  const int half = 4;
  Series smooth = Series::Zero(tg.size());
  for (int n = 0; n <= tg.n_steps; ++n) {
    double acc = 0.0, wsum = 0.0;
    for (int j = -half; j <= half; ++j) {
      const int q = n + j;
      if (q < 0 || q > tg.n_steps) continue;
      const double u = static_cast<double>(j) / (half + 1);
      const double w = 0.42 + 0.5 * std::cos(M_PI * u) + 0.08 * std::cos(2.0 * M_PI * u);
      acc += w * white[q];
      wsum += w;
    }
    smooth[n] = acc / wsum;
  }
  // causal gate with a smooth ramp over a few samples
  const double ramp = 4.0 * tg.dt;
  for (int n = 0; n <= tg.n_steps; ++n) {
    const double t = tg.time(n);
    if (t <= t_gate)
      smooth[n] = 0.0;
    else
      smooth[n] *= smoothstep5((t - t_gate) / ramp);
  }
  const double peak = smooth.abs().maxCoeff();
  if (peak > 0.0) smooth /= peak;
  return smooth;
}

SynthesizedMeasurement synthesize_measurement(const MediumPhantom& m, const BubbleSpec& spec,
                                              const SourceModel& source, const Vec3& x0, const TimeGrid& tg,
                                              EikonalCache& cache, const SynthOptions& opts) {
  if (!m.omega.contains(spec.center)) throw std::invalid_argument("synthesize_measurement: z outside Omega");
  if (!m.constant_coefficient && !opts.omit_regular_part && opts.g_pulse == nullptr)
    throw std::invalid_argument("synthesize_measurement: missing regular-part data for a variable phantom");

  const MediumSample at_z = eval_medium(m, spec.center);
  const BubbleConstants consts = bubble_constants(spec, at_z.rho0);
  const GreensAmplitude amp = amplitude_m(m, cache, x0, spec.center);

  Series v_local;
  const Series* v_z = opts.v_z;
  if (v_z == nullptr) {
    if (!m.constant_coefficient || std::abs(at_z.c0 - 1.0) > 1e-12 || std::abs(at_z.k0 - 1.0) > 1e-12)
      throw std::invalid_argument("synthesize_measurement: v(z,.) trace required for this medium");
    v_local = homogeneous_reference_trace(spec.center, tg, source);
    v_z = &v_local;
  }
  if (v_z->size() != tg.size()) throw std::invalid_argument("synthesize_measurement: v(z,.) grid mismatch");

  const VolterraKernel kernel =
      build_kernel(consts, amp.m_value, at_z.rho0, amp.zeta_value, opts.omit_regular_part ? nullptr : opts.g_pulse, tg);

  const Series v_shifted = shift_forward(*v_z, amp.zeta_value, tg.dt);

  SynthesizedMeasurement out;
  out.w_d = apply_kalpha(kernel, v_shifted);
  out.w = out.w_d;
  out.z = spec.center;
  out.x0 = x0;
  out.arrival = amp.zeta_value;
  out.alpha = kernel.alpha;
  out.omega_M = consts.omega_M;
  out.eps = spec.radius;
  out.noise_scale = opts.noise_scale;
  out.g_omitted = opts.omit_regular_part && !m.constant_coefficient;
  if (opts.noise_scale > 0.0) {
    // remainder amplitude eps^2 in the units where w_d is O(eps): one order
    // below the dominant part, i.e. eps * max|w_d|
    const double scale = opts.noise_scale * spec.radius * out.w_d.abs().maxCoeff();
    out.w += scale * smooth_causal_noise(tg, amp.zeta_value, opts.seed);
  }
  return out;
}

}  // namespace minnaert
