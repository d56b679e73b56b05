#ifndef MINNAERT_BUBBLE_HPP
#define MINNAERT_BUBBLE_HPP

#include "minnaert/grid.hpp"

namespace minnaert {

enum class BubbleShape { ball, tabulated };

/// Shape constants of the unit-scale reference domain B:
/// a_dB is the boundary average of the Newtonian potential int_B dx/|x-y|.
struct ReferenceShape {
  double a_dB = 4.0 * M_PI / 3.0;  // unit ball
  double volume = 4.0 * M_PI / 3.0;
  double area = 4.0 * M_PI;
};

/// Injected contrast agent D = center + radius * B with
/// k1 = kappa_k * radius^2, rho1 = kappa_rho * radius^2.
struct BubbleSpec {
  Vec3 center = Vec3::Zero();
  double radius = 0.05;
  BubbleShape shape = BubbleShape::ball;
  ReferenceShape ref;  // used when shape == tabulated
  double kappa_k = 1.0;
  double kappa_rho = 1.0;

  double k1() const { return kappa_k * radius * radius; }
  double rho1() const { return kappa_rho * radius * radius; }
};

struct BubbleConstants {
  double a_dD = 0.0;     // boundary-averaged Newtonian potential of D
  double vol_D = 0.0;    // |D|
  double area_dD = 0.0;  // |dD|
  double omega_M = 0.0;  // Minnaert angular frequency (0 until density is known)
};

/// Geometric constants of D. For the ball a_dD = 4 pi eps^2 / 3 analytically;
/// tabulated shapes scale the reference constants by the appropriate powers
/// of eps. omega_M is left unset.
BubbleConstants geometry_constant(const BubbleSpec& spec);

/// omega_M = sqrt(2 k1 / (rho0(z) a_dD)).
double minnaert_frequency(double rho0_z, double k1, double a_dD);

/// geometry_constant plus the Minnaert frequency for the local density.
BubbleConstants bubble_constants(const BubbleSpec& spec, double rho0_z);

/// Chord-quadrature evaluation of the reference constants for an ellipsoid
/// with the given semi-axes. Refined until the boundary average is stable to
/// rel_tol.
ReferenceShape ellipsoid_reference(const Vec3& semi_axes, double rel_tol = 5e-3);

}  // namespace minnaert

#endif
