#include "minnaert/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace minnaert {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// linear least squares y = a + b x
std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double a = (sy - b * sx) / n;
  return {a, b};
}

}  // namespace

ArrivalEstimate detect_arrival(const Series& w, const TimeGrid& tg, double eps, int p, const DetectOptions& opts) {
  if (w.size() != tg.size()) throw std::invalid_argument("detect_arrival: grid mismatch");
  const int q = (opts.onset_exponent > 0) ? opts.onset_exponent : p + 3;
  const double peak = w.abs().maxCoeff();
  if (peak <= 0.0) throw SilentTraceError("detect_arrival: silent trace");

  // noise floor from the leading pre-signal samples
  const int n_floor = std::max(4, static_cast<int>(opts.floor_fraction * tg.size()));
  std::vector<double> lead(w.data(), w.data() + n_floor);
  for (auto& v : lead) v = std::abs(v);
  std::nth_element(lead.begin(), lead.begin() + lead.size() / 2, lead.end());
  const double floor = 1.4826 * lead[lead.size() / 2];

  const double threshold = std::max(5.0 * floor, opts.kappa * eps * eps * peak);

  int cross = -1;
  for (int i = 0; i + opts.sustain <= tg.n_steps + 1; ++i) {
    bool sustained = true;
    for (int j = 0; j < opts.sustain; ++j) sustained = sustained && (std::abs(w[i + j]) > threshold);
    if (sustained) {
      cross = i;
      break;
    }
  }
  if (cross < 0) throw SilentTraceError("detect_arrival: silent trace");

  // back-project the onset power law: w^{1/q} is linear in t. The second
  // pass refits closer to the onset where the power-law model is unbiased.
  auto root_fit = [&](double level, double t_floor, int fit_len) -> double {
    std::vector<double> ts, ys;
    for (int i = 0; i <= tg.n_steps && static_cast<int>(ts.size()) < fit_len; ++i) {
      if (tg.time(i) <= t_floor || std::abs(w[i]) <= level) continue;
      ts.push_back(tg.time(i));
      ys.push_back(std::pow(std::abs(w[i]), 1.0 / q));
    }
    if (ts.size() < 3) return std::numeric_limits<double>::quiet_NaN();
    const auto [a, b] = linear_fit(ts, ys);
    if (!(b > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    const double t0 = -a / b;
    return (t0 > 0.0 && t0 <= ts.front()) ? t0 : std::numeric_limits<double>::quiet_NaN();
  };
  double t_star = tg.time(cross);
  const double pass1 = root_fit(threshold, 0.0, std::max(8, 3 * opts.sustain));
  if (std::isfinite(pass1)) t_star = pass1;
  const double refined_level = std::max(6.0 * floor, 1e-8 * peak);
  const double pass2 = root_fit(refined_level, t_star, 16);
  if (std::isfinite(pass2)) t_star = pass2;

  ArrivalEstimate est;
  est.t_star = t_star;
  est.threshold_used = threshold;
  est.noise_floor = floor;
  const double resolution = std::pow(eps, 1.0 / q) + 2.0 * tg.dt;
  est.lo = t_star - 0.5 * resolution;
  est.hi = t_star + 0.5 * resolution;
  return est;
}

ScanArrivals scan_travel_time(const std::vector<Series>& w_per_node, const ScanGrid& scan, const TimeGrid& tg,
                              double eps, int p, const DetectOptions& opts) {
  const Eigen::Index n_nodes = static_cast<Eigen::Index>(scan.dims.x()) * scan.dims.y() * scan.dims.z();
  if (static_cast<Eigen::Index>(w_per_node.size()) != n_nodes)
    throw std::invalid_argument("scan_travel_time: measurement count does not match the scan grid");

  ScanArrivals out;
  out.zeta = Grid3d(scan.origin, scan.spacing, scan.dims);
  out.ok.assign(static_cast<std::size_t>(n_nodes), 0);
  out.estimates.assign(static_cast<std::size_t>(n_nodes), ArrivalEstimate{});
  for (Eigen::Index i = 0; i < n_nodes; ++i) {
    try {
      const auto est = detect_arrival(w_per_node[static_cast<std::size_t>(i)], tg, eps, p, opts);
      out.estimates[static_cast<std::size_t>(i)] = est;
      out.zeta.values[i] = est.t_star;
      out.ok[static_cast<std::size_t>(i)] = 1;
    } catch (const SilentTraceError&) {
      out.zeta.values[i] = std::numeric_limits<double>::quiet_NaN();
      ++out.n_silent;
    }
  }
  if (out.n_silent > 0.1 * static_cast<double>(n_nodes))
    throw std::runtime_error("scan_travel_time: more than 10% silent traces");

  if (out.n_silent > 0) {
    // empirical Lipschitz rate from valid neighbor pairs
    std::vector<double> rates;
    for (Eigen::Index i = 0; i < n_nodes; ++i) {
      if (!out.ok[static_cast<std::size_t>(i)]) continue;
      const Index3 a = out.zeta.unflat(i);
      for (int axis = 0; axis < 3; ++axis) {
        Index3 b = a;
        b[axis] += 1;
        if (b[axis] >= scan.dims[axis]) continue;
        const Eigen::Index j = out.zeta.flat(b.x(), b.y(), b.z());
        if (out.ok[static_cast<std::size_t>(j)])
          rates.push_back(std::abs(out.zeta.values[j] - out.zeta.values[i]) / scan.spacing);
      }
    }
    double rate = 1.0;
    if (!rates.empty()) {
      std::nth_element(rates.begin(), rates.begin() + rates.size() / 2, rates.end());
      rate = rates[rates.size() / 2];
    }
    // travel-time-consistent nearest-neighbor fill
    for (Eigen::Index i = 0; i < n_nodes; ++i) {
      if (out.ok[static_cast<std::size_t>(i)]) continue;
      const Vec3 xi = out.zeta.node(out.zeta.unflat(i));
      double best = std::numeric_limits<double>::infinity(), fill = 0.0;
      for (Eigen::Index j = 0; j < n_nodes; ++j) {
        if (!out.ok[static_cast<std::size_t>(j)]) continue;
        const double d = (out.zeta.node(out.zeta.unflat(j)) - xi).norm();
        if (d < best) {
          best = d;
          fill = out.zeta.values[j] + rate * d;
        }
      }
      out.zeta.values[i] = fill;
    }
  }
  return out;
}

Grid3d recover_speed(const ScanArrivals& arrivals, const Vec3& x0, const SpeedRecoveryOptions& opts) {
  TravelTimeMap map;
  map.seed = x0;
  map.zeta = arrivals.zeta;
  return speed_from_travel_time(map, opts);
}

SlopeFit fit_leading_coefficient(const Series& w_d, const TimeGrid& tg, const ArrivalEstimate& arrival, int p,
                                 const FitOptions& opts) {
  const int q = p + 3;
  const double t_star = arrival.t_star;

  // candidate samples: after t* + 2dt, above the remainder floor (early
  // sub-floor samples are noise- or roundoff-dominated), positive throughout
  const double peak = w_d.abs().maxCoeff();
  const double gate = std::max(6.0 * arrival.noise_floor, 1e-8 * peak);
  std::vector<double> tau, val;
  bool crossed = false;
  for (int i = 0; i <= tg.n_steps; ++i) {
    const double off = tg.time(i) - t_star;
    if (off <= 2.0 * tg.dt) continue;
    if (!crossed) {
      if (w_d[i] <= gate) continue;
      crossed = true;
    }
    if (w_d[i] <= 0.0) break;  // onset window must stay signal-dominated
    tau.push_back(off);
    val.push_back(w_d[i]);
  }
  if (static_cast<int>(tau.size()) < opts.min_samples)
    throw FitError("fit_leading_coefficient: fewer than the required samples in the onset window");

  // windows where the free-exponent fit stays near p+3
  std::vector<double> lt(tau.size()), lv(tau.size());
  for (std::size_t i = 0; i < tau.size(); ++i) {
    lt[i] = std::log(tau[i]);
    lv[i] = std::log(val[i]);
  }
  std::vector<std::pair<int, double>> candidates;  // window size, free exponent
  for (int n = opts.min_samples; n <= static_cast<int>(tau.size()); ++n) {
    const std::vector<double> xs(lt.begin(), lt.begin() + n), ys(lv.begin(), lv.begin() + n);
    const auto [a, b] = linear_fit(xs, ys);
    (void)a;
    if (std::abs(b - q) <= opts.exponent_tolerance) candidates.emplace_back(n, b);
  }
  if (candidates.empty()) throw FitError("fit_leading_coefficient: onset exponent mismatch, check p");

  // pinned-exponent fit with a small arrival correction delta: the detected
  // t* carries a fraction-of-a-sample bias that would dominate the earliest
  // relative misfits
  auto pinned_fit = [&](int n, double delta, double& c_out) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += lv[i] - q * std::log(tau[i] - delta);
    c_out = std::exp(acc / n);
    double res = 0.0;
    for (int i = 0; i < n; ++i) {
      const double model = c_out * std::pow(tau[i] - delta, q);
      res += std::pow(val[i] / model - 1.0, 2);
    }
    return std::sqrt(res / n);
  };

  // among exponent-valid windows pick the one the model explains best: with
  // clean data the shortest (least curvature bias) wins, with noise the
  // per-sample scatter pushes the choice to wider windows
  const double dmax = std::min(3.0 * tg.dt, 0.9 * tau.front());
  SlopeFit best;
  double best_res = 1e300;
  for (const auto& [n, free_b] : candidates) {
    for (int s = -30; s <= 30; ++s) {
      const double delta = dmax * s / 30.0;
      double c = 0.0;
      const double res = pinned_fit(n, delta, c);
      if (res < best_res) {
        best_res = res;
        best.leading_coeff = c;
        best.exponent = q;
        best.window_lo = tau.front() - delta;
        best.window_hi = tau[n - 1] - delta;
        best.residual = res;
        best.free_exponent = free_b;
      }
    }
  }
  if (best_res > opts.residual_cap) throw FitError("fit_leading_coefficient: fit residual above cap");
  return best;
}

double constant_A(const Grid3d& c0, const Vec3& z, int p, const ConstantAOptions& opts) {
  if (!c0.contains(z)) throw std::invalid_argument("constant_A: z outside the speed grid");
  const Box3 b = c0.bounds();
  double r_avail = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) r_avail = std::min({r_avail, z[a] - b.min()[a], b.max()[a] - z[a]});
  if (r_avail <= 0.0) throw std::invalid_argument("constant_A: z on the grid boundary");

  // local speed sampling around z
  const double c_z = interpolate(c0, z);
  double c_max = c_z;
  {
    const int probe = 8;
    for (int k = -probe; k <= probe; ++k)
      for (int j = -probe; j <= probe; ++j)
        for (int i = -probe; i <= probe; ++i) {
          const Vec3 x = z + (r_avail / probe) * Vec3(i, j, k) / 1.0;
          if (c0.contains(x) && (x - z).norm() <= r_avail) c_max = std::max(c_max, interpolate(c0, x));
        }
  }
  const double t_max = (opts.t_max > 0.0) ? opts.t_max : 0.6 * r_avail / c_max;
  const double radius = std::min(1.05 * t_max * c_max, r_avail);

  const int n = opts.refine_cells | 1;  // odd: z is a lattice node
  Grid3d local(z - Vec3::Constant(radius), 2.0 * radius / (n - 1), Index3(n, n, n));
  for (Eigen::Index i = 0; i < local.size(); ++i) {
    const Vec3 x = local.node(local.unflat(i));
    local.values[i] = c0.contains(x) ? interpolate(c0, x) : c_z;
  }

  EikonalOptions eo;
  eo.second_order = true;
  eo.init_radius_cells = 0.3 * n;  // the local box is small: the straight-ray
                                   // Simpson rule resolves a wide seed region
  const TravelTimeMap map = solve_travel_time(local, z, eo);

  const double h = local.spacing;
  const double h3 = h * h * h;
  const double r0 = 2.0 * h;  // seed ball handled analytically below

  std::vector<double> lts, lis;
  for (int j = 1; j <= opts.n_times; ++j) {
    const double t = t_max * (0.5 + 0.5 * j / opts.n_times);
    double integral = 0.0;
    for (Eigen::Index i = 0; i < local.size(); ++i) {
      const double zeta = map.zeta.values[i];
      if (!(zeta < t)) continue;
      const Vec3 x = local.node(local.unflat(i));
      const double r = (x - z).norm();
      if (r <= r0) continue;
      integral += std::pow(t - zeta, p + 1) / zeta * h3;
    }
    // seed ball: zeta ~ r / c(z), integrated in spherical shells
    {
      const int m = 64;
      double corr = 0.0;
      for (int s = 0; s < m; ++s) {
        const double r = (s + 0.5) * r0 / m;
        const double zeta = r / c_z;
        if (zeta < t) corr += std::pow(t - zeta, p + 1) / zeta * 4.0 * M_PI * r * r * (r0 / m);
      }
      integral += corr;
    }
    if (integral <= 0.0) throw FitError("constant_A: quadrature failed near the singularity");
    lts.push_back(std::log(t));
    lis.push_back(std::log(integral));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < lts.size(); ++i) acc += lis[i] - (p + 3) * lts[i];
  const double coeff = std::exp(acc / lts.size());
  return coeff * factorial(p + 3);
}

double recover_bulk(const SlopeFit& fit, double A, double dtp1J_z0, const BubbleConstants& consts, double jac_det,
                    double zeta_x0z, double c0_z) {
  if (std::abs(dtp1J_z0) < 1e-14)
    throw std::invalid_argument("recover_bulk: vanishing d^{p+1}J(z,0)");
  if (!(A > 0.0) || !(jac_det > 0.0) || !(zeta_x0z > 0.0) || !(c0_z > 0.0))
    throw std::invalid_argument("recover_bulk: nonpositive geometric input");
  const int p = fit.exponent - 3;
  // lim d_t^{p+3} w_d = c (p+3)! = alpha m(z,z) / (4 pi (p+1)!) * d^{p+1}J(z,0) * A
  const double alpha_m =
      4.0 * M_PI * fit.leading_coeff * factorial(p + 3) * factorial(p + 1) / (dtp1J_z0 * A);
  const double k32 = alpha_m * 2.0 * M_PI * consts.a_dD * std::pow(c0_z, 4) * zeta_x0z /
                     (consts.vol_D * std::sqrt(jac_det));
  if (!(k32 > 0.0)) throw std::runtime_error("recover_bulk: nonpositive intermediate");
  return std::pow(k32, 2.0 / 3.0);
}

Grid3d recover_density(const Grid3d& k0_rec, const Grid3d& c0_rec) {
  if (k0_rec.dims != c0_rec.dims) throw std::invalid_argument("recover_density: grid mismatch");
  Grid3d rho(k0_rec.origin, k0_rec.spacing, k0_rec.dims);
  for (Eigen::Index i = 0; i < rho.size(); ++i) {
    const double k = k0_rec.values[i], c = c0_rec.values[i];
    if (std::isfinite(k) && std::isfinite(c)) {
      if (k <= 0.0 || c <= 0.0) throw std::invalid_argument("recover_density: nonpositive input node");
      rho.values[i] = k / (c * c);
    } else {
      rho.values[i] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return rho;
}

Series recover_wavefield(const Series& w, const VolterraKernel& kernel, double zeta_x0z) {
  return shift_back(invert_kalpha(kernel, w), zeta_x0z, kernel.dt);
}

SourceField recover_source(const std::vector<Series>& v_rec, const ScanGrid& scan, const Grid3d& k0_rec,
                           const Grid3d& rho0_rec, const TimeGrid& tg) {
  const Index3 dims = scan.dims;
  const Eigen::Index n_nodes = static_cast<Eigen::Index>(dims.x()) * dims.y() * dims.z();
  if (static_cast<Eigen::Index>(v_rec.size()) != n_nodes)
    throw std::invalid_argument("recover_source: trace count does not match the scan grid");
  if (k0_rec.dims != dims || rho0_rec.dims != dims)
    throw std::invalid_argument("recover_source: field grids must live on the scan grid");
  if (dims.minCoeff() < 3) throw std::invalid_argument("recover_source: scan too sparse for second differences");

  SourceField out;
  out.grid = scan;
  out.tg = tg;
  out.values = Eigen::ArrayXXd::Zero(tg.size(), n_nodes);

  const double inv_h2 = 1.0 / (scan.spacing * scan.spacing);
  Grid3d ref(scan.origin, scan.spacing, dims);  // index helper
  const auto inv_rho = rho0_rec.values.inverse().eval();

  for (int k = 1; k + 1 < dims.z(); ++k)
    for (int j = 1; j + 1 < dims.y(); ++j)
      for (int i = 1; i + 1 < dims.x(); ++i) {
        const Eigen::Index c = ref.flat(i, j, k);
        const Series vtt = second_time_derivative(v_rec[static_cast<std::size_t>(c)], tg.dt);
        Series div = Series::Zero(tg.size());
        for (int axis = 0; axis < 3; ++axis) {
          Index3 ap(i, j, k), am(i, j, k);
          ap[axis] += 1;
          am[axis] -= 1;
          const Eigen::Index np = ref.flat(ap.x(), ap.y(), ap.z());
          const Eigen::Index nm = ref.flat(am.x(), am.y(), am.z());
          const double fp = 0.5 * (inv_rho[c] + inv_rho[np]);
          const double fm = 0.5 * (inv_rho[c] + inv_rho[nm]);
          div += inv_h2 * (fp * (v_rec[static_cast<std::size_t>(np)] - v_rec[static_cast<std::size_t>(c)]) -
                           fm * (v_rec[static_cast<std::size_t>(c)] - v_rec[static_cast<std::size_t>(nm)]));
        }
        out.values.col(c) = vtt / k0_rec.values[c] - div;
      }
  return out;
}

PointScanResult point_source_travel_time(const std::vector<Series>& w_per_node, const ScanGrid& scan,
                                         const TimeGrid& tg, const Vec3& x0, const Vec3& xc, double eps, int p,
                                         const DetectOptions& opts) {
  const Eigen::Index n_nodes = static_cast<Eigen::Index>(scan.dims.x()) * scan.dims.y() * scan.dims.z();
  if (static_cast<Eigen::Index>(w_per_node.size()) != n_nodes)
    throw std::invalid_argument("point_source_travel_time: measurement count mismatch");

  DetectOptions local = opts;
  if (local.onset_exponent <= 0) local.onset_exponent = p + 1;  // near-source onset order

  PointScanResult out;
  out.zeta = Grid3d(scan.origin, scan.spacing, scan.dims);
  out.ok.assign(static_cast<std::size_t>(n_nodes), 0);
  double resolution = 0.0;
  for (Eigen::Index i = 0; i < n_nodes; ++i) {
    const auto est = detect_arrival(w_per_node[static_cast<std::size_t>(i)], tg, eps, p, local);
    out.zeta.values[i] = 0.5 * est.t_star;  // two-leg arrival zeta(xc,z) + zeta(z,x0)
    out.ok[static_cast<std::size_t>(i)] = 1;
    resolution = std::max(resolution, 0.5 * (est.hi - est.lo));
  }
  out.error_bound = 0.5 * (xc - x0).norm() + 0.5 * resolution;
  return out;
}

}  // namespace minnaert
