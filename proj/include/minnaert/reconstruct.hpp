#ifndef MINNAERT_RECONSTRUCT_HPP
#define MINNAERT_RECONSTRUCT_HPP

#include "minnaert/bubble.hpp"
#include "minnaert/eikonal.hpp"
#include "minnaert/time_grid.hpp"
#include "minnaert/volterra.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace minnaert {

/// Detected jump time with the resolution window of the eps^{1/(p+3)} bound.
struct ArrivalEstimate {
  double t_star = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double threshold_used = 0.0;
  double noise_floor = 0.0;
};

struct DetectOptions {
  double kappa = 10.0;         // jump threshold kappa * eps^2 * max|w|
  int sustain = 3;             // samples the crossing must persist
  double floor_fraction = 0.1; // leading fraction of the trace used for the noise floor
  int onset_exponent = -1;     // override; default p+3
};

class SilentTraceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Step 1: first sustained crossing of the jump threshold, back-projected by
/// fitting the onset power law c (t - t0)^{p+3}.
ArrivalEstimate detect_arrival(const Series& w, const TimeGrid& tg, double eps, int p,
                               const DetectOptions& opts = {});

/// Regular sub-grid of bubble positions.
struct ScanGrid {
  Vec3 origin = Vec3::Zero();
  double spacing = 0.0;
  Index3 dims = Index3::Zero();

  Vec3 point(const Index3& ijk) const {
    return origin + spacing * Vec3(static_cast<double>(ijk.x()), static_cast<double>(ijk.y()),
                                   static_cast<double>(ijk.z()));
  }
};

struct ScanArrivals {
  Grid3d zeta;                           // zeta(x0, .) sampled on the scan grid
  std::vector<uint8_t> ok;               // per node: detection succeeded
  std::vector<ArrivalEstimate> estimates;  // per node (defaulted when silent)
  int n_silent = 0;
};

/// Step 2 (data side): per-position arrival detection over the scan;
/// silent traces are inpainted travel-time-consistently; aborts when more
/// than 10% of the scan is silent.
ScanArrivals scan_travel_time(const std::vector<Series>& w_per_node, const ScanGrid& scan, const TimeGrid& tg,
                              double eps, int p, const DetectOptions& opts = {});

/// Step 2 (field side): c0 = 1/|grad zeta| on the scan grid.
Grid3d recover_speed(const ScanArrivals& arrivals, const Vec3& x0, const SpeedRecoveryOptions& opts = {});

/// Leading onset coefficient of c (t - t*)^{p+3}.
struct SlopeFit {
  double leading_coeff = 0.0;  // c
  int exponent = 0;            // pinned exponent p+3
  double window_lo = 0.0;      // offsets from t* bounding the fitted samples
  double window_hi = 0.0;
  double residual = 0.0;       // relative rms misfit inside the window
  double free_exponent = 0.0;  // exponent of an unconstrained fit (diagnostic)
};

struct FitOptions {
  double residual_cap = 0.05;
  double exponent_tolerance = 0.3;
  int min_samples = 20;
};

/// Step 3 (data side): log-log regression with the exponent pinned to p+3;
/// the window grows adaptively while a free-exponent fit stays near p+3.
SlopeFit fit_leading_coefficient(const Series& w_d, const TimeGrid& tg, const ArrivalEstimate& arrival, int p,
                                 const FitOptions& opts = {});

struct ConstantAOptions {
  int refine_cells = 64;   // local grid nodes per axis
  int n_times = 8;         // fit samples
  double t_max = 0.0;      // largest sub-level time; 0 picks from the local box
};

/// A = lim_{t->0+} d_t^{p+3} int_{zeta < t} (t - zeta(z,y))^{p+1} / zeta(z,y) dy,
/// by quadrature over sub-level sets of a local Eikonal solve on c0.
double constant_A(const Grid3d& c0, const Vec3& z, int p, const ConstantAOptions& opts = {});

/// Step 3 (algebra): k0(z) from the fitted coefficient via
/// alpha m(z,z) = 4 pi c (p+3)! (p+1)! / (d_t^{p+1}J(z,0) A)  and
/// k0^{3/2} = alpha m * 2 pi A_dD c0^4 zeta / (|D| jac_det^{1/2}).
double recover_bulk(const SlopeFit& fit, double A, double dtp1J_z0, const BubbleConstants& consts, double jac_det,
                    double zeta_x0z, double c0_z);

/// rho0 = k0 / c0^2 nodewise; NaNs propagate.
Grid3d recover_density(const Grid3d& k0_rec, const Grid3d& c0_rec);

/// Step 4: v(z, t) = (alpha I + K)^{-1} w evaluated at t + zeta(x0, z).
Series recover_wavefield(const Series& w, const VolterraKernel& kernel, double zeta_x0z);

/// Recovered space-time source on the scan grid.
struct SourceField {
  ScanGrid grid;
  TimeGrid tg;
  Eigen::ArrayXXd values;  // (time, node)
};

/// J = k0^{-1} v_tt - div(rho0^{-1} grad v) by centered second differences;
/// boundary scan nodes carry no estimate (zero rows).
SourceField recover_source(const std::vector<Series>& v_rec, const ScanGrid& scan, const Grid3d& k0_rec,
                           const Grid3d& rho0_rec, const TimeGrid& tg);

/// Active point-source mode: two-leg arrivals give zeta(z, x0) ~ t*/2 with an
/// O(|xc - x0|) error bound.
struct PointScanResult {
  Grid3d zeta;
  std::vector<uint8_t> ok;
  double error_bound = 0.0;  // |xc - x0| / 2 plus the detection resolution
};

PointScanResult point_source_travel_time(const std::vector<Series>& w_per_node, const ScanGrid& scan,
                                         const TimeGrid& tg, const Vec3& x0, const Vec3& xc, double eps, int p,
                                         const DetectOptions& opts = {});

}  // namespace minnaert

#endif
