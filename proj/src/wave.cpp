#include "minnaert/wave.hpp"

#include <algorithm>
#include <sstream>

namespace minnaert {

double cfl_max_dt(const MediumPhantom& m, double cfl_margin) {
  return (1.0 - cfl_margin) * m.k0.spacing / (std::sqrt(3.0) * m.c_bounds.second);
}

namespace {

struct ReceiverStencil {
  std::array<Eigen::Index, 8> idx;
  std::array<double, 8> w;
};

ReceiverStencil receiver_stencil(const Grid3d& g, const Vec3& r) {
  if (!g.contains(r)) throw std::invalid_argument("fdtd_run: receiver outside grid");
  const Vec3 c = g.lattice_coords(r);
  const int i0 = std::clamp(static_cast<int>(std::floor(c.x())), 0, g.dims.x() - 2);
  const int j0 = std::clamp(static_cast<int>(std::floor(c.y())), 0, g.dims.y() - 2);
  const int k0 = std::clamp(static_cast<int>(std::floor(c.z())), 0, g.dims.z() - 2);
  const double fx = c.x() - i0, fy = c.y() - j0, fz = c.z() - k0;
  ReceiverStencil s;
  int n = 0;
  for (int dk = 0; dk <= 1; ++dk)
    for (int dj = 0; dj <= 1; ++dj)
      for (int di = 0; di <= 1; ++di) {
        s.idx[n] = g.flat(i0 + di, j0 + dj, k0 + dk);
        s.w[n] = (di ? fx : 1 - fx) * (dj ? fy : 1 - fy) * (dk ? fz : 1 - fz);
        ++n;
      }
  return s;
}

// Per-step nodal source amplitude: either a dense profile times a time
// factor, or a sparse stencil times a time factor.
struct StepSource {
  Eigen::ArrayXd profile;  // dense (may be empty)
  std::vector<std::pair<Eigen::Index, double>> sparse;
  std::function<double(double)> tau;
};

StepSource make_step_source(const MediumPhantom& m, const SourceModel& src) {
  StepSource out;
  const Grid3d& ref = m.k0;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SeparablePowerSource>) {
          out.profile.resize(ref.size());
          for (Eigen::Index n = 0; n < ref.size(); ++n) out.profile[n] = s.phi.eval(ref.node(ref.unflat(n)));
          const auto psi = s.psi;
          const int p = s.p;
          out.tau = [psi, p](double t) { return (t > 0.0) ? std::pow(t, p + 1) * psi.eval(t) : 0.0; };
        } else if constexpr (std::is_same_v<T, PointSource>) {
          auto inj = mollified_point(ref, s.location, {});
          out.sparse = std::move(inj.weights);
          out.tau = [s](double t) { return s.lambda(t); };
        } else {
          const auto& tab = static_cast<const TabulatedSource&>(s);
          if (tab.frames.empty() || tab.frames.front().dims != ref.dims)
            throw std::invalid_argument("fdtd_run: tabulated source grid mismatch");
          // handled per step in the caller via frame interpolation
          out.tau = nullptr;
        }
      },
      src);
  return out;
}

class LeapfrogSolver {
 public:
  LeapfrogSolver(const MediumPhantom& m, const TimeGrid& tg, const FdtdOptions& opts)
      : m_(m), tg_(tg), opts_(opts), dims_(m.k0.dims), h_(m.k0.spacing) {
    const double dt_max = cfl_max_dt(m, opts.cfl_margin);
    if (tg.dt > dt_max) {
      std::ostringstream os;
      os << "fdtd_run: CFL violation, dt=" << tg.dt << " exceeds " << dt_max;
      throw std::invalid_argument(os.str());
    }
    const Eigen::Index n = m.k0.size();
    v_.setZero(n);
    v_prev_.setZero(n);
    scratch_.setZero(n);

    // face coefficients: mean inverse density (harmonic mean of rho0)
    const auto inv_rho = m.rho0.values.inverse().eval();
    fx_.setZero(n);
    fy_.setZero(n);
    fz_.setZero(n);
    const Eigen::Index sx = 1, sy = dims_.x(), sz = static_cast<Eigen::Index>(dims_.x()) * dims_.y();
    for (Eigen::Index i = 0; i < n; ++i) {
      const Index3 ijk = m.k0.unflat(i);
      if (ijk.x() + 1 < dims_.x()) fx_[i] = 0.5 * (inv_rho[i] + inv_rho[i + sx]);
      if (ijk.y() + 1 < dims_.y()) fy_[i] = 0.5 * (inv_rho[i] + inv_rho[i + sy]);
      if (ijk.z() + 1 < dims_.z()) fz_[i] = 0.5 * (inv_rho[i] + inv_rho[i + sz]);
    }

    make_sponge();
  }

  // source(t, out): adds nodal J values at time t into out
  TraceSet run(const std::vector<Vec3>& receivers, const std::function<void(double, Eigen::ArrayXd&)>& add_source) {
    TraceSet ts;
    ts.receivers = receivers;
    ts.tg = tg_;
    ts.series.setZero(tg_.size(), static_cast<Eigen::Index>(receivers.size()));
    ts.energy_every = opts_.energy_every;

    std::vector<ReceiverStencil> stencils;
    stencils.reserve(receivers.size());
    for (const auto& r : receivers) stencils.push_back(receiver_stencil(m_.k0, r));

    const double dt2 = tg_.dt * tg_.dt;
    const Eigen::Index sx = 1, sy = dims_.x(), sz = static_cast<Eigen::Index>(dims_.x()) * dims_.y();
    const double inv_h2 = 1.0 / (h_ * h_);
    const auto& k0 = m_.k0.values;

    for (int step = 0; step < tg_.n_steps; ++step) {
      const double t = tg_.time(step);

      scratch_.setZero();
      if (add_source) add_source(t, scratch_);

      // v_next (stored into v_prev_) = [2v - (1 - kappa dt) v_prev + dt^2 k0 (L v + J)] / (1 + kappa dt)
      double* vp = v_prev_.data();
      const double* v = v_.data();
      const double* J = scratch_.data();
      const double* fx = fx_.data();
      const double* fy = fy_.data();
      const double* fz = fz_.data();
      const double* sa = sponge_a_.data();
      const double* sb = sponge_b_.data();
      for (int k = 1; k + 1 < dims_.z(); ++k)
        for (int j = 1; j + 1 < dims_.y(); ++j) {
          Eigen::Index idx = m_.k0.flat(1, j, k);
          for (int i = 1; i + 1 < dims_.x(); ++i, ++idx) {
            const double lap = (fx[idx] * (v[idx + sx] - v[idx]) - fx[idx - sx] * (v[idx] - v[idx - sx]) +
                                fy[idx] * (v[idx + sy] - v[idx]) - fy[idx - sy] * (v[idx] - v[idx - sy]) +
                                fz[idx] * (v[idx + sz] - v[idx]) - fz[idx - sz] * (v[idx] - v[idx - sz])) *
                               inv_h2;
            vp[idx] = sa[idx] * (2.0 * v[idx] - sb[idx] * vp[idx] + dt2 * k0[idx] * (lap + J[idx]));
          }
        }
      v_.swap(v_prev_);  // v_ now holds v^{n+1}

      for (std::size_t r = 0; r < stencils.size(); ++r) {
        double acc = 0.0;
        for (int q = 0; q < 8; ++q) acc += stencils[r].w[q] * v_[stencils[r].idx[q]];
        ts.series(step + 1, static_cast<Eigen::Index>(r)) = acc;
      }

      if (opts_.nan_check_every > 0 && (step + 1) % opts_.nan_check_every == 0) {
        if (!v_.allFinite()) {
          std::ostringstream os;
          os << "fdtd_run: NaN detected at step " << step + 1;
          throw std::runtime_error(os.str());
        }
      }
      if (opts_.energy_every > 0 && (step + 1) % opts_.energy_every == 0) ts.energy.push_back(discrete_energy());
    }
    return ts;
  }

 private:
  // viscous sponge: kappa = strength * c_max / layer_width * depth^3
  void make_sponge() {
    const Eigen::Index n = m_.k0.size();
    sponge_a_ = Eigen::ArrayXd::Ones(n);
    sponge_b_ = Eigen::ArrayXd::Ones(n);
    const int L = opts_.sponge_cells;
    if (L <= 0) return;
    const double kappa_scale = opts_.sponge_strength * m_.c_bounds.second / (L * h_);
    for (Eigen::Index idx = 0; idx < n; ++idx) {
      const Index3 ijk = m_.k0.unflat(idx);
      int border = dims_.minCoeff();
      for (int a = 0; a < 3; ++a) border = std::min({border, ijk[a], dims_[a] - 1 - ijk[a]});
      if (border < L) {
        const double depth = static_cast<double>(L - border) / L;
        const double kdt = kappa_scale * depth * depth * depth * tg_.dt;
        sponge_a_[idx] = 1.0 / (1.0 + kdt);
        sponge_b_[idx] = 1.0 - kdt;
      }
    }
  }

  // Leapfrog-conserved energy of the (v^{n}, v^{n+1}) pair.
  double discrete_energy() const {
    const double dt = tg_.dt;
    const double h3 = h_ * h_ * h_;
    const Eigen::Index sx = 1, sy = dims_.x(), sz = static_cast<Eigen::Index>(dims_.x()) * dims_.y();
    double kin = 0.0, pot = 0.0;
    const auto& k0 = m_.k0.values;
    for (Eigen::Index idx = 0; idx < v_.size(); ++idx) {
      const double dv = (v_[idx] - v_prev_[idx]) / dt;
      kin += dv * dv / k0[idx];
    }
    const double inv_h2 = 1.0 / (h_ * h_);
    for (int k = 0; k < dims_.z(); ++k)
      for (int j = 0; j < dims_.y(); ++j)
        for (int i = 0; i < dims_.x(); ++i) {
          const Eigen::Index idx = m_.k0.flat(i, j, k);
          if (i + 1 < dims_.x()) pot += fx_[idx] * (v_[idx + sx] - v_[idx]) * (v_prev_[idx + sx] - v_prev_[idx]) * inv_h2;
          if (j + 1 < dims_.y()) pot += fy_[idx] * (v_[idx + sy] - v_[idx]) * (v_prev_[idx + sy] - v_prev_[idx]) * inv_h2;
          if (k + 1 < dims_.z()) pot += fz_[idx] * (v_[idx + sz] - v_[idx]) * (v_prev_[idx + sz] - v_prev_[idx]) * inv_h2;
        }
    return 0.5 * h3 * (kin + pot);
  }

  const MediumPhantom& m_;
  TimeGrid tg_;
  FdtdOptions opts_;
  Index3 dims_;
  double h_;
  Eigen::ArrayXd v_, v_prev_, scratch_, fx_, fy_, fz_, sponge_a_, sponge_b_;
};

}  // namespace

SparseInjection mollified_point(const Grid3d& ref, const Vec3& z, std::function<double(double)> amplitude) {
  if (!ref.contains(z)) throw std::invalid_argument("mollified_point: location outside grid");
  const Vec3 c = ref.lattice_coords(z);
  std::array<std::array<double, 4>, 3> b{};
  std::array<int, 3> base{};
  for (int a = 0; a < 3; ++a) {
    int i0 = static_cast<int>(std::floor(c[a]));
    i0 = std::clamp(i0, 1, ref.dims[a] - 3);
    const double u = c[a] - i0;
    b[a][0] = (1 - u) * (1 - u) * (1 - u) / 6.0;
    b[a][1] = (3 * u * u * u - 6 * u * u + 4) / 6.0;
    b[a][2] = (-3 * u * u * u + 3 * u * u + 3 * u + 1) / 6.0;
    b[a][3] = u * u * u / 6.0;
    base[a] = i0 - 1;
  }
  SparseInjection inj;
  inj.amplitude = std::move(amplitude);
  const double inv_h3 = 1.0 / (ref.spacing * ref.spacing * ref.spacing);
  for (int dk = 0; dk < 4; ++dk)
    for (int dj = 0; dj < 4; ++dj)
      for (int di = 0; di < 4; ++di) {
        const double w = b[0][di] * b[1][dj] * b[2][dk];
        if (w == 0.0) continue;
        inj.weights.emplace_back(ref.flat(base[0] + di, base[1] + dj, base[2] + dk), w * inv_h3);
      }
  return inj;
}

TraceSet fdtd_run(const MediumPhantom& m, const SourceModel& source, const std::vector<Vec3>& receivers,
                  const TimeGrid& tg, const FdtdOptions& opts) {
  LeapfrogSolver solver(m, tg, opts);

  if (std::holds_alternative<TabulatedSource>(source)) {
    const auto& tab = std::get<TabulatedSource>(source);
    if (tab.frames.empty() || tab.frames.front().dims != m.k0.dims)
      throw std::invalid_argument("fdtd_run: tabulated source grid mismatch");
    auto add = [&tab](double t, Eigen::ArrayXd& out) {
      if (t <= 0.0) return;
      const double mu = std::min(t / tab.tg.dt, static_cast<double>(tab.tg.n_steps));
      const int n0 = std::min(static_cast<int>(std::floor(mu)), tab.tg.n_steps - 1);
      const double f = mu - n0;
      out += (1.0 - f) * tab.frames[static_cast<std::size_t>(n0)].values +
             f * tab.frames[static_cast<std::size_t>(n0 + 1)].values;
    };
    return solver.run(receivers, add);
  }

  StepSource src = make_step_source(m, source);
  auto add = [&src](double t, Eigen::ArrayXd& out) {
    const double a = src.tau ? src.tau(t) : 0.0;
    if (a == 0.0) return;
    if (src.profile.size() > 0)
      out += a * src.profile;
    else
      for (const auto& [idx, w] : src.sparse) out[idx] += a * w;
  };
  return solver.run(receivers, add);
}

TraceSet fdtd_run_injection(const MediumPhantom& m, const SparseInjection& inj, const std::vector<Vec3>& receivers,
                            const TimeGrid& tg, const FdtdOptions& opts) {
  LeapfrogSolver solver(m, tg, opts);
  auto add = [&inj](double t, Eigen::ArrayXd& out) {
    const double a = inj.amplitude ? inj.amplitude(t) : 0.0;
    if (a == 0.0) return;
    for (const auto& [idx, w] : inj.weights) out[idx] += a * w;
  };
  return solver.run(receivers, add);
}

namespace {

// Angular average of phi over the sphere |y - x| = r (times 4 pi).
double angular_integral(const SpatialProfile& phi, const Vec3& x, double r, int n_polar) {
  if (!phi.has_support) {
    // closed form for Gaussian bumps: int_{S^2} exp(-|x + r w - c|^2/w2) dW
    double acc = 4.0 * M_PI * phi.base;
    for (const auto& bump : phi.bumps) {
      const double d = (x - bump.center).norm();
      const double w2 = bump.width_sq;
      const double q = 2.0 * r * d / w2;
      double shape;
      if (q < 1e-8)
        shape = 4.0 * M_PI * std::exp(-(d * d + r * r) / w2) * (1.0 + q * q / 6.0);
      else
        // exp(-(d^2+r^2)/w2) sinh(q)/q written overflow-free
        shape = 4.0 * M_PI * (std::exp(-(d - r) * (d - r) / w2) - std::exp(-(d + r) * (d + r) / w2)) / (2.0 * q);
      acc += bump.amplitude * shape;
    }
    return acc;
  }
  // numeric product rule (Gauss in cos(theta) x trapezoid in phi)
  double prev = 0.0;
  for (int n = n_polar;; n *= 2) {
    double acc = 0.0;
    const int n_phi = 2 * n;
    for (int iu = 0; iu < n; ++iu) {
      // midpoint rule in cos(theta): adequate here and reuse-friendly
      const double u = -1.0 + (iu + 0.5) * (2.0 / n);
      const double su = std::sqrt(std::max(0.0, 1.0 - u * u));
      for (int ip = 0; ip < n_phi; ++ip) {
        const double a = 2.0 * M_PI * ip / n_phi;
        const Vec3 w(su * std::cos(a), su * std::sin(a), u);
        acc += phi.eval(x + r * w);
      }
    }
    acc *= (2.0 / n) * (2.0 * M_PI / n_phi);
    if (n > n_polar && std::abs(acc - prev) <= 1e-8 + 1e-6 * std::abs(acc)) return acc;
    if (n >= 256) return acc;
    prev = acc;
  }
}

// Tabulated angular integral: Phi(r) is t-independent, so traces reuse it.
class RadialProfile {
 public:
  RadialProfile(const SpatialProfile& phi, const Vec3& x, double r_max, int n = 1025)
      : phi_(&phi), x_(x), r_max_(r_max) {
    if (!phi.has_support) return;  // closed form, no table needed
    table_.resize(n);
    dr_ = r_max / (n - 1);
    for (int i = 0; i < n; ++i) table_[i] = angular_integral(phi, x, i * dr_, 8);
  }

  double operator()(double r) const {
    if (table_.empty()) return angular_integral(*phi_, x_, r, 8);
    if (r >= r_max_) return table_.back();
    const double mu = r / dr_;
    const int i0 = std::min(static_cast<int>(mu), static_cast<int>(table_.size()) - 2);
    const double f = mu - i0;
    return (1.0 - f) * table_[i0] + f * table_[i0 + 1];
  }

 private:
  const SpatialProfile* phi_;
  Vec3 x_;
  double r_max_;
  double dr_ = 1.0;
  std::vector<double> table_;
};

double radial_integrand(const SeparablePowerSource& s, const RadialProfile& profile, double t, double r) {
  const double tau = t - r;
  if (tau <= 0.0) return 0.0;
  const double temporal = std::pow(tau, s.p + 1) * s.psi.eval(tau);
  if (temporal == 0.0) return 0.0;
  return r * temporal * profile(r);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                        double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, 0.5 * tol, depth - 1);
}

}  // namespace

namespace {

double reference_value(const SeparablePowerSource& s, const RadialProfile& profile, const Vec3& x, double t,
                       const HomRefOptions& opts) {
  // v(x,t) = (1/4pi) int_0^t r * tau(t-r) * [angular integral of phi] dr
  const double a = std::max(0.0, t - s.psi.t_cut);
  const double b = t;
  if (b <= a) return 0.0;
  auto f = [&](double r) { return radial_integrand(s, profile, t, r); };

  // panel boundaries at the radii where narrow bumps or the psi roll-off sit,
  // so the adaptive rule cannot step over them
  std::vector<double> cuts{a, b};
  for (const auto& bump : s.phi.bumps) {
    const double d = (x - bump.center).norm();
    const double sigma = std::sqrt(bump.width_sq);
    for (double r : {d - 2.0 * sigma, d, d + 2.0 * sigma})
      if (r > a && r < b) cuts.push_back(r);
  }
  if (t - s.psi.t_flat > a && t - s.psi.t_flat < b) cuts.push_back(t - s.psi.t_flat);
  std::sort(cuts.begin(), cuts.end());

  double integral = 0.0;
  for (std::size_t q = 0; q + 1 < cuts.size(); ++q) {
    const double lo = cuts[q], hi = cuts[q + 1];
    if (hi - lo < 1e-15) continue;
    const double flo = f(lo), fhi = f(hi), fmid = f(0.5 * (lo + hi));
    const double scale = std::max({std::abs(flo), std::abs(fmid), std::abs(fhi), 1e-300});
    integral += adaptive_simpson(f, lo, hi, flo, fmid, fhi, opts.rel_tol * scale * (hi - lo), opts.max_refine);
  }
  return integral / (4.0 * M_PI);
}

}  // namespace

double homogeneous_reference(const Vec3& x, double t, const SourceModel& source, const HomRefOptions& opts) {
  if (t <= 0.0) return 0.0;
  if (std::holds_alternative<PointSource>(source)) {
    const auto& ps = std::get<PointSource>(source);
    const double r = (x - ps.location).norm();
    if (r < 1e-12) throw std::invalid_argument("homogeneous_reference: evaluation at the point source");
    return ps.lambda(t - r) / (4.0 * M_PI * r);
  }
  if (!std::holds_alternative<SeparablePowerSource>(source))
    throw std::invalid_argument("homogeneous_reference: unsupported source kind");
  const auto& s = std::get<SeparablePowerSource>(source);
  const RadialProfile profile(s.phi, x, t);
  return reference_value(s, profile, x, t, opts);
}

Series homogeneous_reference_trace(const Vec3& x, const TimeGrid& tg, const SourceModel& source,
                                   const HomRefOptions& opts) {
  Series out = Series::Zero(tg.size());
  if (std::holds_alternative<SeparablePowerSource>(source)) {
    const auto& s = std::get<SeparablePowerSource>(source);
    const RadialProfile profile(s.phi, x, tg.horizon(), 2049);
    for (int n = 1; n <= tg.n_steps; ++n) out[n] = reference_value(s, profile, x, tg.time(n), opts);
    return out;
  }
  for (int n = 0; n <= tg.n_steps; ++n) out[n] = homogeneous_reference(x, tg.time(n), source, opts);
  return out;
}

}  // namespace minnaert
