#ifndef MINNAERT_VOLTERRA_HPP
#define MINNAERT_VOLTERRA_HPP

#include "minnaert/bubble.hpp"
#include "minnaert/greens.hpp"
#include "minnaert/time_grid.hpp"

#include <stdexcept>
#include <vector>

namespace minnaert {

/// Convolution kernel K(t) and weight alpha of the second-kind Volterra
/// operator alpha I + K* relating the shifted wave field to the measurement.
struct VolterraKernel {
  double alpha = 0.0;
  Series samples;
  double dt = 0.0;
  struct Meta {
    Vec3 z = Vec3::Zero();
    Vec3 x0 = Vec3::Zero();
    double omega_M = 0.0;
    double coeff_g = 0.0;    // 2|D| / (rho0(z) A_dD), weight of the g term
    double coeff_sin = 0.0;  // alpha * omega_M, magnitude of the sine term
  } meta;
};

class InversionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// alpha(x0,z) = |D| m(x0,z) / (2 pi A_dD rho0(z) zeta(x0,z)).
double alpha_coefficient(double vol_D, double a_dD, double m_x0z, double rho0_z, double zeta_x0z);

/// Assembles K(t); pass g_pulse = nullptr only for constant-coefficient
/// media (g == 0), otherwise the pulse-resolved regular part is required.
VolterraKernel build_kernel(const BubbleConstants& consts, double m_x0z, double rho0_z, double zeta_x0z,
                            const RegularPartPulse* g_pulse, const TimeGrid& tg);

/// alpha f + K * f (trapezoidal causal convolution).
Series apply_kalpha(const VolterraKernel& kernel, const Series& f);

/// Exact discrete inverse of apply_kalpha (forward substitution on the
/// lower-triangular system).
Series invert_kalpha(const VolterraKernel& kernel, const Series& y);

/// Truncated Neumann series alpha^{-1} sum_k (-K/alpha)^k y; cross-check of
/// the triangular solve.
Series neumann_series_inverse(const VolterraKernel& kernel, const Series& y, int terms);

/// ||K^n f||_{L2(0,T)} against ||K||_inf^n ||f|| T^n / (2^{n/2} sqrt(n!)).
struct TailBoundReport {
  struct Row {
    int n;
    double norm;
    double bound;
    double ratio;
  };
  std::vector<Row> rows;
  bool ok = true;
};

TailBoundReport tail_bound_check(const VolterraKernel& kernel, const Series& f, int n_max, double slack = 0.05);

}  // namespace minnaert

#endif
