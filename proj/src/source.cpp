#include "minnaert/source.hpp"

namespace minnaert {

namespace {

double bump_arg(double u) { return (u > 0.0) ? std::exp(-1.0 / u) : 0.0; }

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

double SmoothCutoff::eval(double t) const {
  if (t <= t_flat) return 1.0;
  if (t >= t_cut) return 0.0;
  const double u = (t - t_flat) / (t_cut - t_flat);
  const double a = bump_arg(u), b = bump_arg(1.0 - u);
  return b / (a + b);
}

double PointSource::lambda(double t) const {
  if (t <= 0.0) return 0.0;
  return scale * std::pow(t, p + 1) * psi.eval(t);
}

double eval_source(const SourceModel& s, const Vec3& x, double t) {
  if (t <= 0.0) return 0.0;
  return std::visit(
      [&](const auto& src) -> double {
        using T = std::decay_t<decltype(src)>;
        if constexpr (std::is_same_v<T, SeparablePowerSource>) {
          return std::pow(t, src.p + 1) * src.psi.eval(t) * src.phi.eval(x);
        } else if constexpr (std::is_same_v<T, PointSource>) {
          return ((x - src.location).norm() < 1e-12) ? src.lambda(t) : 0.0;
        } else {
          const auto& tab = static_cast<const TabulatedSource&>(src);
          if (tab.frames.empty()) return 0.0;
          if (t >= tab.tg.horizon()) return interpolate(tab.frames.back(), x);
          const double mu = t / tab.tg.dt;
          const int n0 = std::min(static_cast<int>(std::floor(mu)), tab.tg.n_steps - 1);
          const double f = mu - n0;
          return (1.0 - f) * interpolate(tab.frames[n0], x) + f * interpolate(tab.frames[n0 + 1], x);
        }
      },
      s);
}

int source_order(const SourceModel& s) {
  return std::visit(
      [](const auto& src) -> int {
        using T = std::decay_t<decltype(src)>;
        if constexpr (std::is_same_v<T, SeparablePowerSource>)
          return src.p;
        else if constexpr (std::is_same_v<T, PointSource>)
          return src.p;
        else
          return 0;
      },
      s);
}

double source_dtp1_at_zero(const SourceModel& s, const Vec3& x) {
  return std::visit(
      [&](const auto& src) -> double {
        using T = std::decay_t<decltype(src)>;
        if constexpr (std::is_same_v<T, SeparablePowerSource>) {
          return factorial(src.p + 1) * src.phi.eval(x);
        } else if constexpr (std::is_same_v<T, PointSource>) {
          return factorial(src.p + 1) * src.scale;
        } else {
          throw std::invalid_argument("source_dtp1_at_zero: not defined for tabulated sources");
        }
      },
      s);
}

}  // namespace minnaert
