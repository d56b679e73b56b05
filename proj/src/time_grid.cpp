#include "minnaert/time_grid.hpp"

#include <algorithm>

namespace minnaert {

Series causal_convolve(const Series& kernel, const Series& f, double dt) {
  if (kernel.size() != f.size()) throw std::invalid_argument("causal_convolve: size mismatch");
  const Eigen::Index n = f.size();
  Series out = Series::Zero(n);
  // trapezoid: endpoints K(t_n)f(0) and K(0)f(t_n) carry weight 1/2
  for (Eigen::Index i = 1; i < n; ++i) {
    double acc = 0.5 * (kernel[i] * f[0] + kernel[0] * f[i]);
    for (Eigen::Index j = 1; j < i; ++j) acc += kernel[i - j] * f[j];
    out[i] = acc * dt;
  }
  return out;
}

double l2_norm(const Series& f, double dt) {
  const Eigen::Index n = f.size();
  if (n < 2) return 0.0;
  double acc = 0.5 * (f[0] * f[0] + f[n - 1] * f[n - 1]);
  for (Eigen::Index i = 1; i < n - 1; ++i) acc += f[i] * f[i];
  return std::sqrt(acc * dt);
}

namespace {

constexpr int kTapsHalf = 4;  // 8-tap interpolator

double blackman(double u) {
  // centered Blackman window on [-1, 1]
  if (std::abs(u) >= 1.0) return 0.0;
  return 0.42 + 0.5 * std::cos(M_PI * u) + 0.08 * std::cos(2.0 * M_PI * u);
}

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = M_PI * x;
  return std::sin(px) / px;
}

// Evaluates f at continuous sample coordinate mu; f is treated as zero
// outside its sample range (causal zero-fill on the left).
double sample_at(const Series& f, double mu) {
  const Eigen::Index n = f.size();
  if (mu < -1e-12 || mu > static_cast<double>(n - 1) + 1e-12) return 0.0;
  const double rounded = std::round(mu);
  if (std::abs(mu - rounded) < 1e-9) {
    const Eigen::Index idx = static_cast<Eigen::Index>(rounded);
    return (idx >= 0 && idx < n) ? f[idx] : 0.0;
  }
  const int base = static_cast<int>(std::floor(mu));
  double acc = 0.0, wsum = 0.0;
  for (int j = base - kTapsHalf + 1; j <= base + kTapsHalf; ++j) {
    const double d = mu - j;
    const double w = sinc(d) * blackman(d / kTapsHalf);
    wsum += w;
    if (j >= 0 && j < n) acc += w * f[j];
  }
  // renormalize so that constants are reproduced exactly
  return (wsum != 0.0) ? acc / wsum : 0.0;
}

}  // namespace

Series shift_forward(const Series& f, double delay, double dt) {
  const Eigen::Index n = f.size();
  Series out = Series::Zero(n);
  const double s = delay / dt;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mu = static_cast<double>(i) - s;
    if (mu <= 0.0) continue;  // t <= delay stays exactly zero (causal shift)
    out[i] = sample_at(f, mu);
  }
  return out;
}

Series shift_back(const Series& f, double advance, double dt) {
  const Eigen::Index n = f.size();
  Series out = Series::Zero(n);
  const double s = advance / dt;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mu = static_cast<double>(i) + s;
    if (mu > static_cast<double>(n - 1)) break;
    out[i] = sample_at(f, mu);
  }
  return out;
}

Series second_time_derivative(const Series& f, double dt) {
  const Eigen::Index n = f.size();
  Series out = Series::Zero(n);
  if (n < 3) return out;
  const double inv = 1.0 / (dt * dt);
  for (Eigen::Index i = 1; i + 1 < n; ++i) out[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) * inv;
  out[0] = (f[2] - 2.0 * f[1] + f[0]) * inv;
  out[n - 1] = (f[n - 1] - 2.0 * f[n - 2] + f[n - 3]) * inv;
  return out;
}

}  // namespace minnaert
