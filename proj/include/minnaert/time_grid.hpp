#ifndef MINNAERT_TIME_GRID_HPP
#define MINNAERT_TIME_GRID_HPP

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace minnaert {

/// Sampled time series on a TimeGrid; index n corresponds to t = n*dt.
using Series = Eigen::ArrayXd;

/// Uniform time axis t_n = n*dt, n = 0..n_steps (n_steps+1 samples, horizon T = dt*n_steps).
struct TimeGrid {
  double dt = 0.0;
  int n_steps = 0;

  TimeGrid() = default;
  TimeGrid(double dt_, int n_steps_) : dt(dt_), n_steps(n_steps_) {
    if (!(dt > 0.0) || n_steps < 1) throw std::invalid_argument("TimeGrid: dt > 0 and n_steps >= 1 required");
  }
  static TimeGrid from_horizon(double dt_, double horizon) {
    return TimeGrid(dt_, static_cast<int>(std::ceil(horizon / dt_ - 1e-12)));
  }

  double horizon() const { return dt * n_steps; }
  int size() const { return n_steps + 1; }
  double time(int n) const { return dt * n; }
  Series times() const { return Series::LinSpaced(size(), 0.0, horizon()); }
};

/// Index of the first sample with |f| > tol; returns f.size() if none.
inline Eigen::Index first_support_index(const Series& f, double tol = 0.0) {
  for (Eigen::Index n = 0; n < f.size(); ++n)
    if (std::abs(f[n]) > tol) return n;
  return f.size();
}

/// Causal trapezoidal convolution (K * f)(t_n) = int_0^{t_n} K(t_n - s) f(s) ds.
Series causal_convolve(const Series& kernel, const Series& f, double dt);

/// Trapezoid-weighted L2(0,T) norm.
double l2_norm(const Series& f, double dt);

/// Samples f(t_n - delay); zero for query times outside [0, T].
/// Band-limited fractional-delay interpolation (8-tap Blackman-windowed sinc);
/// integer sample delays reduce to exact shifts.
Series shift_forward(const Series& f, double delay, double dt);

/// Samples f(t_n + advance); zero past the end of the data.
Series shift_back(const Series& f, double advance, double dt);

/// Second central difference in time (one-sided second differences at the ends).
Series second_time_derivative(const Series& f, double dt);

}  // namespace minnaert

#endif
