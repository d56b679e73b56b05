#include "minnaert/volterra.hpp"

#include <limits>

namespace minnaert {

double alpha_coefficient(double vol_D, double a_dD, double m_x0z, double rho0_z, double zeta_x0z) {
  if (!(vol_D > 0.0) || !(a_dD > 0.0) || !(m_x0z > 0.0) || !(rho0_z > 0.0) || !(zeta_x0z > 0.0))
    throw std::invalid_argument("alpha_coefficient: inputs must be positive");
  return vol_D / (2.0 * M_PI * a_dD) * m_x0z / (rho0_z * zeta_x0z);
}

VolterraKernel build_kernel(const BubbleConstants& consts, double m_x0z, double rho0_z, double zeta_x0z,
                            const RegularPartPulse* g_pulse, const TimeGrid& tg) {
  if (!(consts.omega_M > 0.0)) throw std::invalid_argument("build_kernel: omega_M not set");
  VolterraKernel k;
  k.dt = tg.dt;
  k.alpha = alpha_coefficient(consts.vol_D, consts.a_dD, m_x0z, rho0_z, zeta_x0z);
  const double omega = consts.omega_M;
  const double coeff_g = 2.0 * consts.vol_D / (rho0_z * consts.a_dD);

  Series sine(tg.size());
  for (int n = 0; n <= tg.n_steps; ++n) sine[n] = std::sin(omega * tg.time(n));

  k.samples = -k.alpha * omega * sine;
  if (g_pulse) {
    if (g_pulse->samples.size() != tg.size() || std::abs(g_pulse->tg.dt - tg.dt) > 1e-12 * tg.dt)
      throw std::invalid_argument("build_kernel: time grid mismatch with the regular-part data");
    const Series g_shifted = shift_back(g_pulse->samples, zeta_x0z, tg.dt);
    k.samples += coeff_g * g_shifted;
    k.samples -= coeff_g * omega * causal_convolve(sine, g_shifted, tg.dt);
  }
  k.meta.omega_M = omega;
  k.meta.coeff_g = coeff_g;
  k.meta.coeff_sin = k.alpha * omega;
  if (g_pulse) {
    k.meta.z = g_pulse->z;
    k.meta.x0 = g_pulse->x0;
  }
  return k;
}

Series apply_kalpha(const VolterraKernel& kernel, const Series& f) {
  if (f.size() != kernel.samples.size()) throw std::invalid_argument("apply_kalpha: grid mismatch");
  return kernel.alpha * f + causal_convolve(kernel.samples, f, kernel.dt);
}

Series invert_kalpha(const VolterraKernel& kernel, const Series& y) {
  if (y.size() != kernel.samples.size()) throw std::invalid_argument("invert_kalpha: grid mismatch");
  const double alpha = kernel.alpha;
  if (alpha < 1e-14) throw InversionError("invert_kalpha: alpha below threshold");
  const double dt = kernel.dt;
  const Series& K = kernel.samples;
  const double diag = alpha + 0.5 * dt * K[0];
  if (std::abs(0.5 * dt * K[0]) >= 0.1 * alpha)
    throw InversionError("invert_kalpha: dt K(0)/2 not small against alpha, shrink dt");

  const Eigen::Index n = y.size();
  Series f = Series::Zero(n);
  f[0] = y[0] / alpha;
  for (Eigen::Index i = 1; i < n; ++i) {
    double acc = 0.5 * K[i] * f[0];
    for (Eigen::Index j = 1; j < i; ++j) acc += K[i - j] * f[j];
    f[i] = (y[i] - dt * acc) / diag;
  }
  return f;
}

Series neumann_series_inverse(const VolterraKernel& kernel, const Series& y, int terms) {
  const double inv_alpha = 1.0 / kernel.alpha;
  Series term = inv_alpha * y;
  Series acc = term;
  for (int k = 1; k <= terms; ++k) {
    term = -inv_alpha * causal_convolve(kernel.samples, term, kernel.dt);
    acc += term;
  }
  return acc;
}

TailBoundReport tail_bound_check(const VolterraKernel& kernel, const Series& f, int n_max, double slack) {
  if (n_max > 12) throw std::invalid_argument("tail_bound_check: n_max > 12 (factorial guard)");
  TailBoundReport report;
  const double dt = kernel.dt;
  const double T = dt * static_cast<double>(f.size() - 1);
  const double k_inf = kernel.samples.abs().maxCoeff();
  const double f_norm = l2_norm(f, dt);
  Series iter = f;
  double factorial = 1.0;
  for (int n = 1; n <= n_max; ++n) {
    iter = causal_convolve(kernel.samples, iter, dt);
    factorial *= n;
    const double bound = std::pow(k_inf, n) * f_norm * std::pow(T, n) / (std::pow(2.0, 0.5 * n) * std::sqrt(factorial));
    const double norm = l2_norm(iter, dt);
    const double ratio = (bound > 0.0) ? norm / bound : (norm > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    report.rows.push_back({n, norm, bound, ratio});
    if (norm > bound * (1.0 + slack)) report.ok = false;
  }
  return report;
}

}  // namespace minnaert
