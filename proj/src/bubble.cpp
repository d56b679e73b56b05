#include "minnaert/bubble.hpp"

#include <vector>

namespace minnaert {

namespace {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (t * p1 - p0) / (t * t - 1.0);
      const double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    x[i] = -t;
    x[n - 1 - i] = t;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
}

// int_B dx/|x-y| for y on the surface of the ellipsoid, via exact radial
// integration along chords: A(y) = 1/2 int_{S^2} R(omega)^2 dOmega with the
// direction quadrature polar axis aligned with the inward normal (chords
// exist exactly on the inward half of directions).
double chord_potential(const Vec3& y, const Vec3& inv_s2, int n_dir) {
  Vec3 nrm = (y.array() * inv_s2.array()).matrix().normalized();
  Vec3 t1 = nrm.unitOrthogonal();
  Vec3 t2 = nrm.cross(t1);

  std::vector<double> xu, wu;
  gauss_legendre(n_dir, xu, wu);

  const int n_phi = 2 * n_dir;
  double acc = 0.0;
  for (int iu = 0; iu < n_dir; ++iu) {
    const double cu = 0.5 * (xu[iu] - 1.0);  // map [-1,1] -> [-1,0]
    const double su = std::sqrt(std::max(0.0, 1.0 - cu * cu));
    for (int ip = 0; ip < n_phi; ++ip) {
      const double phi = 2.0 * M_PI * ip / n_phi;
      const Vec3 omega = cu * nrm + su * (std::cos(phi) * t1 + std::sin(phi) * t2);
      const double gamma = (omega.array().square() * inv_s2.array()).sum();
      const double beta = (y.array() * omega.array() * inv_s2.array()).sum();
      const double r = -2.0 * beta / gamma;
      if (r > 0.0) acc += wu[iu] * r * r;
    }
  }
  // cos-theta weight carries the 1/2 Jacobian of the half-interval map;
  // phi is a uniform (periodic) rule.
  return 0.5 * acc * 0.5 * (2.0 * M_PI / n_phi);
}

struct EllipsoidAverages {
  double a_dB;
  double area;
};

EllipsoidAverages ellipsoid_pass(const Vec3& s, int n_surf, int n_dir) {
  const Vec3 inv_s2 = s.array().square().inverse();
  std::vector<double> xu, wu;
  gauss_legendre(n_surf, xu, wu);
  const int n_phi = 2 * n_surf;

  double num = 0.0, den = 0.0;
  for (int iu = 0; iu < n_surf; ++iu) {
    const double u = xu[iu];  // cos(theta)
    const double st = std::sqrt(std::max(0.0, 1.0 - u * u));
    for (int ip = 0; ip < n_phi; ++ip) {
      const double phi = 2.0 * M_PI * ip / n_phi;
      const Vec3 y(s.x() * st * std::cos(phi), s.y() * st * std::sin(phi), s.z() * u);
      // dS = E du dphi with the sin(theta) of the area element absorbed
      const double E = std::sqrt(s.y() * s.y() * s.z() * s.z() * st * st * std::cos(phi) * std::cos(phi) +
                                 s.x() * s.x() * s.z() * s.z() * st * st * std::sin(phi) * std::sin(phi) +
                                 s.x() * s.x() * s.y() * s.y() * u * u);
      const double wq = wu[iu] * (2.0 * M_PI / n_phi) * E;
      num += wq * chord_potential(y, inv_s2, n_dir);
      den += wq;
    }
  }
  return {num / den, den};
}

}  // namespace

ReferenceShape ellipsoid_reference(const Vec3& semi_axes, double rel_tol) {
  if (semi_axes.minCoeff() <= 0.0) throw std::invalid_argument("ellipsoid_reference: degenerate shape");
  ReferenceShape ref;
  ref.volume = 4.0 * M_PI / 3.0 * semi_axes.prod();

  double prev = 0.0;
  for (int n = 8; n <= 64; n *= 2) {
    const auto pass = ellipsoid_pass(semi_axes, n, n);
    ref.a_dB = pass.a_dB;
    ref.area = pass.area;
    if (n > 8 && std::abs(pass.a_dB - prev) <= rel_tol * std::abs(pass.a_dB)) break;
    prev = pass.a_dB;
  }
  return ref;
}

BubbleConstants geometry_constant(const BubbleSpec& spec) {
  if (!(spec.radius > 0.0)) throw std::invalid_argument("geometry_constant: radius must be positive");
  const double eps = spec.radius;
  BubbleConstants c;
  if (spec.shape == BubbleShape::ball) {
    // Newtonian potential of a ball evaluated on its own surface: 4 pi eps^2 / 3.
    c.a_dD = 4.0 * M_PI / 3.0 * eps * eps;
    c.vol_D = 4.0 * M_PI / 3.0 * eps * eps * eps;
    c.area_dD = 4.0 * M_PI * eps * eps;
  } else {
    if (!(spec.ref.volume > 0.0)) throw std::invalid_argument("geometry_constant: degenerate reference shape");
    c.a_dD = spec.ref.a_dB * eps * eps;
    c.vol_D = spec.ref.volume * eps * eps * eps;
    c.area_dD = spec.ref.area * eps * eps;
  }
  return c;
}

double minnaert_frequency(double rho0_z, double k1, double a_dD) {
  if (!(rho0_z > 0.0) || !(k1 > 0.0) || !(a_dD > 0.0))
    throw std::invalid_argument("minnaert_frequency: inputs must be positive");
  return std::sqrt(2.0 * k1 / (rho0_z * a_dD));
}

BubbleConstants bubble_constants(const BubbleSpec& spec, double rho0_z) {
  BubbleConstants c = geometry_constant(spec);
  c.omega_M = minnaert_frequency(rho0_z, spec.k1(), c.a_dD);
  return c;
}

}  // namespace minnaert
