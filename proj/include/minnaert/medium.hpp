#ifndef MINNAERT_MEDIUM_HPP
#define MINNAERT_MEDIUM_HPP

#include "minnaert/grid.hpp"

#include <utility>
#include <vector>

namespace minnaert {

/// amplitude * exp(-|x - center|^2 / width_sq)
struct GaussianBump {
  double amplitude = 0.0;
  Vec3 center = Vec3::Zero();
  double width_sq = 1.0;

  double eval(const Vec3& x) const { return amplitude * std::exp(-(x - center).squaredNorm() / width_sq); }
};

enum class MediumKind {
  homogeneous,  // k0 = rho0 = 1 everywhere
  uniform,      // constant values on the whole grid (test medium; Omega = grid box)
  plateau,      // constant values inside Omega, blended to 1 in the collar
  bumps,        // 1 + sum of Gaussian bumps inside Omega, blended to 1 in the collar
  tabulated,    // externally supplied nodal fields
};

struct PhantomDescriptor {
  MediumKind kind = MediumKind::homogeneous;

  Vec3 grid_origin = Vec3::Zero();
  double grid_spacing = 0.0;
  Index3 grid_dims = Index3::Zero();

  Box3 omega;                     // imaging domain; must be inside the grid
  double collar_fraction = 0.1;   // collar width as a fraction of diam(Omega)
  double contrast_bound = 10.0;   // admissible range [1/c, c] for k0 and rho0

  double k0_value = 1.0;   // uniform / plateau
  double rho0_value = 1.0;

  std::vector<GaussianBump> k0_bumps;
  std::vector<GaussianBump> rho0_bumps;

  Grid3d k0_table;  // tabulated only
  Grid3d rho0_table;
};

/// Gridded background medium: bulk modulus k0, mass density rho0, both equal
/// to 1 outside Omega, wave speed c0 = sqrt(k0/rho0).
struct MediumPhantom {
  Grid3d k0;
  Grid3d rho0;
  Box3 omega;
  double contrast_bound = 10.0;
  std::pair<double, double> c_bounds{1.0, 1.0};  // [min c0, max c0] over the grid
  bool constant_coefficient = false;             // k0, rho0 spatially constant (regular part g == 0)

  double max_speed() const { return c_bounds.second; }
};

struct MediumSample {
  double k0 = 1.0;
  double rho0 = 1.0;
  double c0 = 1.0;
};

MediumPhantom build_phantom(const PhantomDescriptor& d);

/// Grid enlarged by replicating the outermost nodes (exact for media that
/// are constant outside Omega); used to push sponge artifacts out of
/// auxiliary solver runs.
MediumPhantom pad_phantom(const MediumPhantom& m, int cells);

/// Trilinear interpolation of the stored fields; c0 = sqrt(k0/rho0).
MediumSample eval_medium(const MediumPhantom& m, const Vec3& x);

/// Quintic ramp: 0 for u <= 0, 1 for u >= 1, C^2 in between.
double smoothstep5(double u);

/// Signed inside-distance to the boundary of a box (negative outside).
double box_inside_distance(const Box3& b, const Vec3& x);

}  // namespace minnaert

#endif
