#ifndef MINNAERT_GREENS_HPP
#define MINNAERT_GREENS_HPP

#include "minnaert/eikonal.hpp"
#include "minnaert/medium.hpp"
#include "minnaert/time_grid.hpp"
#include "minnaert/wave.hpp"

namespace minnaert {

/// Coefficient data of the singular part m(x,y)/(4 pi zeta) delta(t - tau - zeta).
struct GreensAmplitude {
  double m_value = 1.0;      // sigma * k0(y) * c0(y)^-3
  double sigma_value = 1.0;  // |grad_x eta|^{1/2} sqrt(k0(y)/k0(x))
  double zeta_value = 0.0;   // travel time x <-> y
};

/// Constant-coefficient media evaluate in closed form (sigma = 1); otherwise
/// the Jacobian comes from the cached Eikonal stencil.
GreensAmplitude amplitude_m(const MediumPhantom& m, EikonalCache& cache, const Vec3& x, const Vec3& y);

/// Unit-area Blackman pulse supported on [-half_width, half_width].
struct PulseDescriptor {
  double half_width = 0.0;

  double eval(double t) const {
    const double u = t / half_width;
    if (std::abs(u) >= 1.0) return 0.0;
    return (0.42 + 0.5 * std::cos(M_PI * u) + 0.08 * std::cos(2.0 * M_PI * u)) / (0.84 * half_width);
  }
};

/// Pulse-resolved regular part: samples[n] ~ (g * chi)(x0, t_n; z) with the
/// pulse centroid as time origin, so there is no spurious group delay.
struct RegularPartPulse {
  Series samples;
  TimeGrid tg;
  PulseDescriptor pulse;
  double arrival = 0.0;  // zeta(x0, z)
  Vec3 z = Vec3::Zero();
  Vec3 x0 = Vec3::Zero();
};

/// FDTD run with a mollified point source chi(t) delta_h(x - z), recorded at
/// x0, minus the analytic (mollifier-spread) singular contribution.
RegularPartPulse regular_part_pulse(const MediumPhantom& m, EikonalCache& cache, const Vec3& z, const Vec3& x0,
                                    const PulseDescriptor& pulse, const TimeGrid& tg, const FdtdOptions& opts = {});

}  // namespace minnaert

#endif
