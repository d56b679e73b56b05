#include "minnaert/medium.hpp"

#include <algorithm>
#include <limits>

namespace minnaert {

double smoothstep5(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

double box_inside_distance(const Box3& b, const Vec3& x) {
  double d = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) d = std::min(d, std::min(x[a] - b.min()[a], b.max()[a] - x[a]));
  return d;
}

namespace {

double sum_bumps(const std::vector<GaussianBump>& bumps, const Vec3& x) {
  double s = 0.0;
  for (const auto& b : bumps) s += b.eval(x);
  return s;
}

void check_contrast(const Grid3d& g, double c, const char* name) {
  const double lo = 1.0 / c, hi = c;
  if ((g.values < lo).any() || (g.values > hi).any())
    throw std::invalid_argument(std::string("build_phantom: contrast bound exceeded for ") + name);
}

}  // namespace

MediumPhantom build_phantom(const PhantomDescriptor& d) {
  if (!(d.grid_spacing > 0.0) || d.grid_dims.minCoeff() < 2)
    throw std::invalid_argument("build_phantom: invalid grid descriptor");

  MediumPhantom m;
  m.contrast_bound = d.contrast_bound;
  m.k0 = Grid3d(d.grid_origin, d.grid_spacing, d.grid_dims);
  m.rho0 = Grid3d(d.grid_origin, d.grid_spacing, d.grid_dims);
  const Box3 grid_box = m.k0.bounds();

  if (d.kind == MediumKind::homogeneous || d.kind == MediumKind::uniform) {
    // Test media are constant on the whole grid; Omega degenerates to the grid
    // box so the exterior-equals-one invariant is vacuous.
    m.omega = grid_box;
    m.k0.values.setConstant(d.kind == MediumKind::uniform ? d.k0_value : 1.0);
    m.rho0.values.setConstant(d.kind == MediumKind::uniform ? d.rho0_value : 1.0);
    m.constant_coefficient = true;
  } else if (d.kind == MediumKind::tabulated) {
    m.omega = d.omega;
    if (d.k0_table.dims != d.grid_dims || d.rho0_table.dims != d.grid_dims)
      throw std::invalid_argument("build_phantom: tabulated field dims mismatch");
    m.k0.values = d.k0_table.values;
    m.rho0.values = d.rho0_table.values;
    m.constant_coefficient = false;
  } else {
    m.omega = d.omega;
    if (!grid_box.contains(d.omega))
      throw std::invalid_argument("build_phantom: Omega box not contained in grid");

    // Collar: fields stay exactly 1 outside Omega and within a margin of
    // 1.5 cells inside it, so every grid cell touching the exterior is
    // all-ones and trilinear interpolation is exactly 1 outside Omega.
    const double diam = d.omega.diagonal().norm();
    const double margin = 1.5 * d.grid_spacing;
    const double width = std::max(d.collar_fraction * diam, d.grid_spacing);

    for (int k = 0; k < d.grid_dims.z(); ++k)
      for (int j = 0; j < d.grid_dims.y(); ++j)
        for (int i = 0; i < d.grid_dims.x(); ++i) {
          const Vec3 x = m.k0.node(i, j, k);
          const double blend = smoothstep5((box_inside_distance(d.omega, x) - margin) / width);
          const Eigen::Index n = m.k0.flat(i, j, k);
          if (d.kind == MediumKind::plateau) {
            m.k0.values[n] = 1.0 + (d.k0_value - 1.0) * blend;
            m.rho0.values[n] = 1.0 + (d.rho0_value - 1.0) * blend;
          } else {
            m.k0.values[n] = 1.0 + sum_bumps(d.k0_bumps, x) * blend;
            m.rho0.values[n] = 1.0 + sum_bumps(d.rho0_bumps, x) * blend;
          }
        }
    m.constant_coefficient = false;
  }

  check_contrast(m.k0, d.contrast_bound, "k0");
  check_contrast(m.rho0, d.contrast_bound, "rho0");

  const auto c0 = (m.k0.values / m.rho0.values).sqrt();
  m.c_bounds = {c0.minCoeff(), c0.maxCoeff()};
  return m;
}

MediumPhantom pad_phantom(const MediumPhantom& m, int cells) {
  if (cells <= 0) return m;
  MediumPhantom out;
  out.omega = m.omega;
  out.contrast_bound = m.contrast_bound;
  out.c_bounds = m.c_bounds;
  out.constant_coefficient = m.constant_coefficient;
  const double h = m.k0.spacing;
  const Index3 dims = m.k0.dims + Index3::Constant(2 * cells);
  const Vec3 origin = m.k0.origin - Vec3::Constant(cells * h);
  out.k0 = Grid3d(origin, h, dims);
  out.rho0 = Grid3d(origin, h, dims);
  for (int k = 0; k < dims.z(); ++k)
    for (int j = 0; j < dims.y(); ++j)
      for (int i = 0; i < dims.x(); ++i) {
        const int si = std::clamp(i - cells, 0, m.k0.dims.x() - 1);
        const int sj = std::clamp(j - cells, 0, m.k0.dims.y() - 1);
        const int sk = std::clamp(k - cells, 0, m.k0.dims.z() - 1);
        out.k0.at(i, j, k) = m.k0.at(si, sj, sk);
        out.rho0.at(i, j, k) = m.rho0.at(si, sj, sk);
      }
  return out;
}

MediumSample eval_medium(const MediumPhantom& m, const Vec3& x) {
  MediumSample s;
  s.k0 = interpolate(m.k0, x);
  s.rho0 = interpolate(m.rho0, x);
  s.c0 = std::sqrt(s.k0 / s.rho0);
  return s;
}

}  // namespace minnaert
