#ifndef MINNAERT_SOURCE_HPP
#define MINNAERT_SOURCE_HPP

#include "minnaert/grid.hpp"
#include "minnaert/medium.hpp"
#include "minnaert/time_grid.hpp"

#include <variant>
#include <vector>

namespace minnaert {

/// phi(x) = base + sum of Gaussian bumps, optionally tapered to zero outside
/// a support box by a smooth collar; evaluable anywhere.
struct SpatialProfile {
  double base = 0.0;
  std::vector<GaussianBump> bumps;
  bool has_support = false;
  Box3 support;
  double support_collar = 0.1;  // collar width as a fraction of diam(support)

  double eval(const Vec3& x) const {
    double s = base;
    for (const auto& b : bumps) s += b.eval(x);
    if (has_support) {
      const double width = support_collar * support.diagonal().norm();
      s *= smoothstep5(box_inside_distance(support, x) / width);
    }
    return s;
  }
};

/// C^inf cutoff: 1 on (-inf, t_flat], 0 on [t_cut, inf).
struct SmoothCutoff {
  double t_flat = 1.0;
  double t_cut = 2.0;

  double eval(double t) const;
};

/// J(x,t) = t^{p+1} psi(t) phi(x) for t > 0, zero otherwise.
struct SeparablePowerSource {
  int p = 1;
  SpatialProfile phi;
  SmoothCutoff psi;
};

/// J(x,t) = lambda(t) delta(x - location) with lambda(t) = scale * t^{p+1} psi(t).
struct PointSource {
  Vec3 location = Vec3::Zero();
  int p = 1;
  SmoothCutoff psi;
  double scale = 1.0;

  double lambda(double t) const;
};

/// Nodal values per time frame, linear interpolation in time.
struct TabulatedSource {
  TimeGrid tg;
  std::vector<Grid3d> frames;
};

using SourceModel = std::variant<SeparablePowerSource, PointSource, TabulatedSource>;

/// J(x, t); zero for t <= 0 (causality). For the point kind this returns
/// lambda(t) when x coincides with the source location and zero elsewhere;
/// solvers inject the mollified delta themselves.
double eval_source(const SourceModel& s, const Vec3& x, double t);

/// Smallest p with nonvanishing d^{p+1}_t J(., 0).
int source_order(const SourceModel& s);

/// d^{p+1}_t J(x, 0); equals (p+1)! phi(x) for the separable family.
double source_dtp1_at_zero(const SourceModel& s, const Vec3& x);

}  // namespace minnaert

#endif
