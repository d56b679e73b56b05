#ifndef MINNAERT_EIKONAL_HPP
#define MINNAERT_EIKONAL_HPP

#include "minnaert/grid.hpp"
#include "minnaert/medium.hpp"

#include <functional>
#include <map>
#include <memory>
#include <mutex>

namespace minnaert {

/// First-arrival travel time zeta(seed, .) on the speed grid, with the upwind
/// gradient of the marching solution.
struct TravelTimeMap {
  Vec3 seed = Vec3::Zero();
  Grid3d zeta;
  VectorGrid3d grad;
};

struct EikonalOptions {
  /// Nodes within this many cells of the seed are initialized analytically
  /// (two-point trapezoid of the slowness along the straight ray).
  double init_radius_cells = 3.0;
  /// One-sided second-order upwind differences where two accepted neighbors
  /// are available. Needed when zeta is differentiated afterwards.
  bool second_order = false;
  /// Called with each accepted value in acceptance order (diagnostics).
  std::function<void(double)> on_accept;
};

/// Godunov upwind fast marching, first order.
TravelTimeMap solve_travel_time(const Grid3d& c0, const Vec3& seed, const EikonalOptions& opts = {});

struct SpeedRecoveryOptions {
  double mask_radius_cells = 3.0;  // ball around the seed where grad(zeta) is singular
  double min_grad = 1e-6;          // below this the node is flagged unreliable
};

/// c0 = 1 / |grad zeta| by centered differences; masked/unreliable nodes are NaN.
Grid3d speed_from_travel_time(const TravelTimeMap& map, const SpeedRecoveryOptions& opts = {});

/// Riemannian normal coordinates of x0 about z and the geometric-spreading
/// Jacobian determinant |grad_x eta(x0, z)|.
struct RiemannianData {
  Vec3 eta = Vec3::Zero();
  double jac_det = 1.0;
};

/// Memoizes Eikonal solves keyed by seed; safe for concurrent lookups.
/// Solves run with second-order upwinding: downstream consumers (Riemannian
/// coordinates, Green amplitudes) differentiate zeta.
class EikonalCache {
 public:
  explicit EikonalCache(const Grid3d& c0) : c0_(&c0) {
    opts_.second_order = true;
    opts_.init_radius_cells = 8.0;
  }
  EikonalCache(const Grid3d& c0, const EikonalOptions& opts) : c0_(&c0), opts_(opts) {}

  const TravelTimeMap& solve(const Vec3& seed);
  double zeta(const Vec3& seed, const Vec3& x);
  const Grid3d& speed() const { return *c0_; }
  std::size_t entries() const;

 private:
  const Grid3d* c0_;
  EikonalOptions opts_;
  mutable std::mutex mutex_;
  std::map<std::array<double, 3>, std::shared_ptr<const TravelTimeMap>> cache_;
};

/// eta(x0, z) = -1/2 c0(z)^2 grad_z zeta^2(x0, z), centered differences at step h.
Vec3 riemannian_eta(const TravelTimeMap& from_x0, const Vec3& z, double c0_z, double step);

/// eta and the Jacobian determinant of x -> eta(x, z) at x = x0, from a
/// 7-point stencil of perturbed seeds (one Eikonal solve each, cached).
RiemannianData riemannian_metric_data(EikonalCache& cache, const Vec3& x0, const Vec3& z, double stencil_step = 0.0);

}  // namespace minnaert

#endif
