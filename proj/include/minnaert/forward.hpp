#ifndef MINNAERT_FORWARD_HPP
#define MINNAERT_FORWARD_HPP

#include "minnaert/bubble.hpp"
#include "minnaert/eikonal.hpp"
#include "minnaert/greens.hpp"
#include "minnaert/medium.hpp"
#include "minnaert/source.hpp"
#include "minnaert/time_grid.hpp"
#include "minnaert/volterra.hpp"

namespace minnaert {

/// Boundary-flux average U(t) of the bubble: the driven-oscillator solution
/// U = C [v(z,t) - omega_M int_0^t sin(omega_M (t-s)) v(z,s) ds] with
/// C = 2 rho1 |D| / (rho0(z) A_dD).
Series neumann_average(const Series& v_z, const BubbleConstants& consts, double rho1, double rho0_z,
                       const TimeGrid& tg);

/// Discrete residual U'' + omega_M^2 U - C v'' (endpoints excluded by callers).
Series neumann_average_ode_residual(const Series& u, const Series& v_z, const BubbleConstants& consts, double rho1,
                                    double rho0_z, const TimeGrid& tg);

struct SynthOptions {
  double noise_scale = 0.0;           // remainder amplitude: noise_scale * eps * max|w_d|
  unsigned long long seed = 0;        // noise reproducibility
  bool omit_regular_part = false;     // drop the g terms (onset-exact approximation)
  const Series* v_z = nullptr;        // v(z, .); required unless the medium is the identity
  const RegularPartPulse* g_pulse = nullptr;
};

struct SynthesizedMeasurement {
  Series w_d;  // dominant four-term expansion
  Series w;    // w_d plus the modeled O(eps^2) remainder
  Vec3 z = Vec3::Zero();
  Vec3 x0 = Vec3::Zero();
  double arrival = 0.0;  // zeta(x0, z)
  double alpha = 0.0;
  double omega_M = 0.0;
  double eps = 0.0;
  double noise_scale = 0.0;
  bool g_omitted = false;
};

/// Assembles the dominant measurement w_d(x0, .) = alpha vshift + K * vshift
/// for a bubble at spec.center, where vshift is v(z, .) delayed by the travel
/// time, plus an optional smooth causal O(eps^2) remainder.
SynthesizedMeasurement synthesize_measurement(const MediumPhantom& m, const BubbleSpec& spec,
                                              const SourceModel& source, const Vec3& x0, const TimeGrid& tg,
                                              EikonalCache& cache, const SynthOptions& opts = {});

/// The kernel and coefficient used by a synthesis with the same inputs.
VolterraKernel measurement_kernel(const MediumPhantom& m, const BubbleSpec& spec, const Vec3& x0, const TimeGrid& tg,
                                  EikonalCache& cache, const RegularPartPulse* g_pulse);

/// Smooth causal noise: low-pass filtered Gaussian samples, zero before
/// t_gate, normalized to unit maximum amplitude.
Series smooth_causal_noise(const TimeGrid& tg, double t_gate, unsigned long long seed);

}  // namespace minnaert

#endif
