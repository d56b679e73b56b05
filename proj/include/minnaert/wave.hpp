#ifndef MINNAERT_WAVE_HPP
#define MINNAERT_WAVE_HPP

#include "minnaert/medium.hpp"
#include "minnaert/source.hpp"
#include "minnaert/time_grid.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace minnaert {

/// Receiver time series recorded by a solver run.
struct TraceSet {
  std::vector<Vec3> receivers;
  TimeGrid tg;
  Eigen::ArrayXXd series;          // (n_steps+1) x n_receivers
  std::vector<double> energy;      // discrete energy samples (if requested)
  int energy_every = 0;

  Series trace(int r) const { return series.col(r); }
};

struct FdtdOptions {
  int sponge_cells = 12;
  double sponge_strength = 3.0;  // tuned so a 12-cell layer reflects < 1% in band
  double cfl_margin = 0.10;
  int nan_check_every = 25;
  int energy_every = 0;  // 0: do not record
};

/// Largest stable time step for the phantom under the configured CFL margin.
double cfl_max_dt(const MediumPhantom& m, double cfl_margin = 0.10);

/// Second-order leapfrog FDTD for k0^{-1} v_tt = div(rho0^{-1} grad v) + J
/// on the phantom grid, with an exponential sponge layer at the outer cells.
/// Traces are trilinear samples of v at the receivers each step.
TraceSet fdtd_run(const MediumPhantom& m, const SourceModel& source, const std::vector<Vec3>& receivers,
                  const TimeGrid& tg, const FdtdOptions& opts = {});

/// Point injection smeared over 4^3 cells with a tensor-product cubic
/// B-spline (weights integrate to one against the cell volume).
struct SparseInjection {
  std::vector<std::pair<Eigen::Index, double>> weights;
  std::function<double(double)> amplitude;  // time factor
};

SparseInjection mollified_point(const Grid3d& ref, const Vec3& z, std::function<double(double)> amplitude);

TraceSet fdtd_run_injection(const MediumPhantom& m, const SparseInjection& inj, const std::vector<Vec3>& receivers,
                            const TimeGrid& tg, const FdtdOptions& opts = {});

struct HomRefOptions {
  double rel_tol = 1e-7;
  int max_refine = 14;
};

/// Retarded volume potential (1/4pi) int J(y, t-|x-y|)/|x-y| dy for a
/// homogeneous background (c0 = 1), by adaptive quadrature. Point sources
/// evaluate in closed form.
double homogeneous_reference(const Vec3& x, double t, const SourceModel& source, const HomRefOptions& opts = {});

Series homogeneous_reference_trace(const Vec3& x, const TimeGrid& tg, const SourceModel& source,
                                   const HomRefOptions& opts = {});

}  // namespace minnaert

#endif
