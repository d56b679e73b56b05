#ifndef MINNAERT_GRID_HPP
#define MINNAERT_GRID_HPP

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <array>
#include <cmath>
#include <stdexcept>

namespace minnaert {

using Vec3 = Eigen::Vector3d;
using Index3 = Eigen::Vector3i;
using Box3 = Eigen::AlignedBox3d;

/// Scalar samples on the nodes of a uniform Cartesian lattice.
/// Node (i,j,k) sits at origin + spacing*(i,j,k); storage is x-fastest.
template <typename Scalar>
struct Grid3 {
  using Values = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  Vec3 origin = Vec3::Zero();
  Scalar spacing = Scalar(1);
  Index3 dims = Index3::Zero();
  Values values;

  Grid3() = default;
  Grid3(const Vec3& origin_, Scalar spacing_, const Index3& dims_)
      : origin(origin_), spacing(spacing_), dims(dims_) {
    if (!(spacing > Scalar(0))) throw std::invalid_argument("Grid3: spacing must be positive");
    if (dims.minCoeff() < 2) throw std::invalid_argument("Grid3: need at least 2 nodes per axis");
    values = Values::Zero(static_cast<Eigen::Index>(dims.x()) * dims.y() * dims.z());
  }

  Eigen::Index size() const { return values.size(); }

  Eigen::Index flat(int i, int j, int k) const {
    return static_cast<Eigen::Index>(i) + static_cast<Eigen::Index>(dims.x()) * (j + static_cast<Eigen::Index>(dims.y()) * k);
  }
  Index3 unflat(Eigen::Index n) const {
    const int i = static_cast<int>(n % dims.x());
    const int j = static_cast<int>((n / dims.x()) % dims.y());
    const int k = static_cast<int>(n / (static_cast<Eigen::Index>(dims.x()) * dims.y()));
    return Index3(i, j, k);
  }

  Scalar& at(int i, int j, int k) { return values[flat(i, j, k)]; }
  Scalar at(int i, int j, int k) const { return values[flat(i, j, k)]; }

  Vec3 node(int i, int j, int k) const {
    return origin + spacing * Vec3(static_cast<double>(i), static_cast<double>(j), static_cast<double>(k));
  }
  Vec3 node(const Index3& idx) const { return node(idx.x(), idx.y(), idx.z()); }

  /// Axis-aligned box spanned by the outermost nodes.
  Box3 bounds() const {
    return Box3(origin, origin + spacing * (dims.template cast<double>() - Vec3::Ones()));
  }

  bool contains(const Vec3& x, double tol = 0.0) const {
    const Box3 b = bounds();
    return (x.array() >= b.min().array() - tol).all() && (x.array() <= b.max().array() + tol).all();
  }

  /// Continuous lattice coordinates of a point (node units).
  Vec3 lattice_coords(const Vec3& x) const { return (x - origin) / spacing; }
};

using Grid3d = Grid3<double>;

/// One Grid3 per Cartesian component; used for gradients and coordinate maps.
template <typename Scalar>
using VectorGrid3 = std::array<Grid3<Scalar>, 3>;
using VectorGrid3d = VectorGrid3<double>;

/// Trilinear interpolation. Throws if x lies outside the node hull.
template <typename Scalar>
Scalar interpolate(const Grid3<Scalar>& g, const Vec3& x) {
  if (!g.contains(x, 1e-12 * g.spacing)) throw std::out_of_range("interpolate: point outside grid");
  Vec3 c = g.lattice_coords(x);
  int i0 = std::min(static_cast<int>(std::floor(c.x())), g.dims.x() - 2);
  int j0 = std::min(static_cast<int>(std::floor(c.y())), g.dims.y() - 2);
  int k0 = std::min(static_cast<int>(std::floor(c.z())), g.dims.z() - 2);
  i0 = std::max(i0, 0);
  j0 = std::max(j0, 0);
  k0 = std::max(k0, 0);
  const double fx = c.x() - i0, fy = c.y() - j0, fz = c.z() - k0;
  auto v = [&](int di, int dj, int dk) { return static_cast<double>(g.at(i0 + di, j0 + dj, k0 + dk)); };
  const double c00 = v(0, 0, 0) * (1 - fx) + v(1, 0, 0) * fx;
  const double c10 = v(0, 1, 0) * (1 - fx) + v(1, 1, 0) * fx;
  const double c01 = v(0, 0, 1) * (1 - fx) + v(1, 0, 1) * fx;
  const double c11 = v(0, 1, 1) * (1 - fx) + v(1, 1, 1) * fx;
  const double c0 = c00 * (1 - fy) + c10 * fy;
  const double c1 = c01 * (1 - fy) + c11 * fy;
  return static_cast<Scalar>(c0 * (1 - fz) + c1 * fz);
}

/// Nearest lattice node to a point (clamped to the grid).
template <typename Scalar>
Index3 nearest_node(const Grid3<Scalar>& g, const Vec3& x) {
  Vec3 c = g.lattice_coords(x);
  Index3 idx;
  for (int a = 0; a < 3; ++a) idx[a] = std::clamp(static_cast<int>(std::lround(c[a])), 0, g.dims[a] - 1);
  return idx;
}

/// Centered-difference gradient (one-sided at faces).
template <typename Scalar>
VectorGrid3<Scalar> central_gradient(const Grid3<Scalar>& g) {
  VectorGrid3<Scalar> grad{Grid3<Scalar>(g.origin, g.spacing, g.dims), Grid3<Scalar>(g.origin, g.spacing, g.dims),
                           Grid3<Scalar>(g.origin, g.spacing, g.dims)};
  const Scalar inv2h = Scalar(1) / (Scalar(2) * g.spacing);
  const Scalar invh = Scalar(1) / g.spacing;
  for (int k = 0; k < g.dims.z(); ++k)
    for (int j = 0; j < g.dims.y(); ++j)
      for (int i = 0; i < g.dims.x(); ++i) {
        const Eigen::Index n = g.flat(i, j, k);
        auto diff = [&](int axis, int pos, int len) -> Scalar {
          Index3 a(i, j, k), b(i, j, k);
          if (pos > 0 && pos < len - 1) {
            a[axis] -= 1;
            b[axis] += 1;
            return (g.values[g.flat(b.x(), b.y(), b.z())] - g.values[g.flat(a.x(), a.y(), a.z())]) * inv2h;
          }
          if (pos == 0) {
            b[axis] += 1;
            return (g.values[g.flat(b.x(), b.y(), b.z())] - g.values[n]) * invh;
          }
          a[axis] -= 1;
          return (g.values[n] - g.values[g.flat(a.x(), a.y(), a.z())]) * invh;
        };
        grad[0].values[n] = diff(0, i, g.dims.x());
        grad[1].values[n] = diff(1, j, g.dims.y());
        grad[2].values[n] = diff(2, k, g.dims.z());
      }
  return grad;
}

}  // namespace minnaert

#endif
