#include "minnaert/eikonal.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <vector>

namespace minnaert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class State : uint8_t { far, trial, accepted };

struct HeapEntry {
  double value;
  Eigen::Index idx;
  bool operator>(const HeapEntry& o) const { return value > o.value; }
};

struct AxisTerm {
  double alpha;  // difference weight (1/h^2 first order, 9/(4h^2) second order)
  double a;      // effective upwind value
  double a1;     // nearest accepted neighbor (causality witness)
};

// Godunov update: largest T solving sum_d alpha_d (T - a_d)^2 = s^2 over the
// available upwind terms, dropping terms that violate T >= a_d.
double godunov_update(std::array<AxisTerm, 3> terms, int m, double slowness) {
  std::sort(terms.begin(), terms.begin() + m, [](const AxisTerm& x, const AxisTerm& y) { return x.a < y.a; });
  const double s2 = slowness * slowness;
  for (int j = m; j >= 1; --j) {
    double A = 0.0, B = 0.0, C = -s2;
    for (int d = 0; d < j; ++d) {
      A += terms[d].alpha;
      B -= 2.0 * terms[d].alpha * terms[d].a;
      C += terms[d].alpha * terms[d].a * terms[d].a;
    }
    const double disc = B * B - 4.0 * A * C;
    if (disc < 0.0) continue;
    const double t = (-B + std::sqrt(disc)) / (2.0 * A);
    if (j == 1 || t >= terms[j - 1].a) return t;
  }
  return terms[0].a1 + slowness / std::sqrt(terms[0].alpha);
}

}  // namespace

TravelTimeMap solve_travel_time(const Grid3d& c0, const Vec3& seed, const EikonalOptions& opts) {
  if ((c0.values <= 0.0).any()) throw std::invalid_argument("solve_travel_time: nonpositive speed node");
  if (!c0.contains(seed)) throw std::invalid_argument("solve_travel_time: seed outside grid");

  const Index3 dims = c0.dims;
  const double h = c0.spacing;
  const Eigen::Index n = c0.size();

  TravelTimeMap map;
  map.seed = seed;
  map.zeta = Grid3d(c0.origin, h, dims);
  map.zeta.values.setConstant(kInf);

  std::vector<State> state(static_cast<std::size_t>(n), State::far);
  std::vector<uint8_t> frozen(static_cast<std::size_t>(n), 0);
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<HeapEntry>> heap;

  const double slowness_seed = 1.0 / interpolate(c0, seed);

  // Analytic initialization in a ball around the seed (straight-ray Simpson
  // rule on the slowness); the marching stencil cannot represent the
  // point-source singularity. Frozen: non-monotone second-order updates must
  // not overwrite these values.
  {
    const double r0 = std::max(opts.init_radius_cells, 1.0) * h;
    const Index3 c = nearest_node(c0, seed);
    const int reach = static_cast<int>(std::ceil(r0 / h)) + 1;
    for (int dk = -reach; dk <= reach; ++dk)
      for (int dj = -reach; dj <= reach; ++dj)
        for (int di = -reach; di <= reach; ++di) {
          const int i = c.x() + di, j = c.y() + dj, k = c.z() + dk;
          if (i < 0 || j < 0 || k < 0 || i >= dims.x() || j >= dims.y() || k >= dims.z()) continue;
          const Vec3 x = c0.node(i, j, k);
          const double r = (x - seed).norm();
          if (r > r0 && !(di == 0 && dj == 0 && dk == 0)) continue;
          const Eigen::Index idx = c0.flat(i, j, k);
          const double s_mid = 1.0 / interpolate(c0, 0.5 * (x + seed));
          const double s = (1.0 / c0.values[idx] + 4.0 * s_mid + slowness_seed) / 6.0;
          map.zeta.values[idx] = r * s;
          state[static_cast<std::size_t>(idx)] = State::trial;
          frozen[static_cast<std::size_t>(idx)] = 1;
          heap.push({map.zeta.values[idx], idx});
        }
  }
  if (heap.empty()) throw std::logic_error("solve_travel_time: empty initialization");

  const Eigen::Index stride[3] = {1, dims.x(), static_cast<Eigen::Index>(dims.x()) * dims.y()};

  const double inv_h2 = 1.0 / (h * h);

  auto relax = [&](Eigen::Index idx, const Index3& ijk) {
    if (frozen[static_cast<std::size_t>(idx)]) return;
    std::array<AxisTerm, 3> terms{};
    int m = 0;
    for (int axis = 0; axis < 3; ++axis) {
      double best = kInf;
      int dir = 0;
      if (ijk[axis] > 0) {
        const Eigen::Index nb = idx - stride[axis];
        if (state[static_cast<std::size_t>(nb)] == State::accepted) {
          best = map.zeta.values[nb];
          dir = -1;
        }
      }
      if (ijk[axis] < dims[axis] - 1) {
        const Eigen::Index nb = idx + stride[axis];
        if (state[static_cast<std::size_t>(nb)] == State::accepted && map.zeta.values[nb] < best) {
          best = map.zeta.values[nb];
          dir = +1;
        }
      }
      if (dir == 0) continue;
      AxisTerm term{inv_h2, best, best};
      if (opts.second_order) {
        const int pos2 = ijk[axis] + 2 * dir;
        if (pos2 >= 0 && pos2 < dims[axis]) {
          const Eigen::Index nb2 = idx + 2 * dir * stride[axis];
          if (state[static_cast<std::size_t>(nb2)] == State::accepted && map.zeta.values[nb2] <= best) {
            term.alpha = 9.0 / (4.0 * h * h);
            term.a = (4.0 * best - map.zeta.values[nb2]) / 3.0;
          }
        }
      }
      terms[m++] = term;
    }
    if (m == 0) return;
    const double t = godunov_update(terms, m, 1.0 / c0.values[idx]);
    if (t < map.zeta.values[idx]) {
      map.zeta.values[idx] = t;
      state[static_cast<std::size_t>(idx)] = State::trial;
      heap.push({t, idx});
    }
  };

  while (!heap.empty()) {
    const HeapEntry top = heap.top();
    heap.pop();
    if (state[static_cast<std::size_t>(top.idx)] == State::accepted) continue;
    if (top.value > map.zeta.values[top.idx] + 1e-15) continue;  // stale entry
    state[static_cast<std::size_t>(top.idx)] = State::accepted;
    if (opts.on_accept) opts.on_accept(map.zeta.values[top.idx]);

    const Index3 ijk = c0.unflat(top.idx);
    for (int axis = 0; axis < 3; ++axis)
      for (int dir = -1; dir <= 1; dir += 2) {
        Index3 nb = ijk;
        nb[axis] += dir;
        if (nb[axis] < 0 || nb[axis] >= dims[axis]) continue;
        const Eigen::Index nidx = top.idx + dir * stride[axis];
        if (state[static_cast<std::size_t>(nidx)] != State::accepted) relax(nidx, nb);
      }
  }

  // Upwind gradient: one-sided difference toward the smaller neighbor.
  for (int a = 0; a < 3; ++a) map.grad[a] = Grid3d(c0.origin, h, dims);
  for (int k = 0; k < dims.z(); ++k)
    for (int j = 0; j < dims.y(); ++j)
      for (int i = 0; i < dims.x(); ++i) {
        const Eigen::Index idx = c0.flat(i, j, k);
        const Index3 ijk(i, j, k);
        for (int axis = 0; axis < 3; ++axis) {
          const double lo = (ijk[axis] > 0) ? map.zeta.values[idx - stride[axis]] : kInf;
          const double hi = (ijk[axis] < dims[axis] - 1) ? map.zeta.values[idx + stride[axis]] : kInf;
          double gval;
          if (lo <= hi)
            gval = (map.zeta.values[idx] - lo) / h;
          else
            gval = (hi - map.zeta.values[idx]) / h;
          map.grad[axis].values[idx] = std::isfinite(gval) ? gval : 0.0;
        }
      }
  return map;
}

Grid3d speed_from_travel_time(const TravelTimeMap& map, const SpeedRecoveryOptions& opts) {
  const Grid3d& z = map.zeta;
  const double h = z.spacing;
  Grid3d c0(z.origin, h, z.dims);
  const VectorGrid3d grad = central_gradient(z);
  const double mask_r = opts.mask_radius_cells * h;
  for (Eigen::Index n = 0; n < z.size(); ++n) {
    const Index3 ijk = z.unflat(n);
    const Vec3 x = z.node(ijk);
    if ((x - map.seed).norm() <= mask_r) {
      c0.values[n] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    const double gnorm = std::sqrt(grad[0].values[n] * grad[0].values[n] + grad[1].values[n] * grad[1].values[n] +
                                   grad[2].values[n] * grad[2].values[n]);
    c0.values[n] = (gnorm > opts.min_grad) ? 1.0 / gnorm : std::numeric_limits<double>::quiet_NaN();
  }
  return c0;
}

const TravelTimeMap& EikonalCache::solve(const Vec3& seed) {
  const std::array<double, 3> key{seed.x(), seed.y(), seed.z()};
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return *it->second;
  }
  EikonalOptions opts = opts_;
  opts.on_accept = nullptr;
  auto map = std::make_shared<const TravelTimeMap>(solve_travel_time(*c0_, seed, opts));
  std::lock_guard<std::mutex> lock(mutex_);
  auto [it, inserted] = cache_.emplace(key, std::move(map));
  return *it->second;
}

double EikonalCache::zeta(const Vec3& seed, const Vec3& x) { return interpolate(solve(seed).zeta, x); }

std::size_t EikonalCache::entries() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return cache_.size();
}

Vec3 riemannian_eta(const TravelTimeMap& from_x0, const Vec3& z, double c0_z, double step) {
  Vec3 eta;
  for (int a = 0; a < 3; ++a) {
    Vec3 zp = z, zm = z;
    zp[a] += step;
    zm[a] -= step;
    const double fp = interpolate(from_x0.zeta, zp);
    const double fm = interpolate(from_x0.zeta, zm);
    eta[a] = -0.5 * c0_z * c0_z * (fp * fp - fm * fm) / (2.0 * step);
  }
  return eta;
}

RiemannianData riemannian_metric_data(EikonalCache& cache, const Vec3& x0, const Vec3& z, double stencil_step) {
  const Grid3d& c0 = cache.speed();
  const double h = (stencil_step > 0.0) ? stencil_step : 2.0 * c0.spacing;
  if ((x0 - z).norm() < 1e-12) throw std::invalid_argument("riemannian_metric_data: x0 == z");
  for (int a = 0; a < 3; ++a) {
    Vec3 p = x0, m = x0, zp = z, zm = z;
    p[a] += h;
    m[a] -= h;
    zp[a] += h;
    zm[a] -= h;
    if (!c0.contains(p) || !c0.contains(m) || !c0.contains(zp) || !c0.contains(zm))
      throw std::out_of_range("riemannian_metric_data: stencil leaves grid");
  }
  const double c0_z = interpolate(c0, z);

  RiemannianData out;
  out.eta = riemannian_eta(cache.solve(x0), z, c0_z, h);

  Eigen::Matrix3d jac;
  for (int a = 0; a < 3; ++a) {
    Vec3 p = x0, m = x0;
    p[a] += h;
    m[a] -= h;
    const Vec3 ep = riemannian_eta(cache.solve(p), z, c0_z, h);
    const Vec3 em = riemannian_eta(cache.solve(m), z, c0_z, h);
    jac.col(a) = (ep - em) / (2.0 * h);
  }
  const double det = jac.determinant();
  if (!(det > 0.0)) throw std::runtime_error("riemannian_metric_data: degenerate Jacobian determinant");
  out.jac_det = det;
  return out;
}

}  // namespace minnaert
