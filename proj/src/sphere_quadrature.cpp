#include "slabkin/sphere_quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace slabkin {

namespace {

// Gauss-Legendre nodes/weights on [-1,1] by Newton on P_n.
void gauss_legendre(int n, Eigen::VectorXd& x, Eigen::VectorXd& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double p0, p1, dp;
    for (int it = 0; it < 100; ++it) {
      p0 = 1.0;
      p1 = t;
      for (int j = 2; j <= n; ++j) {
        double p2 = ((2 * j - 1) * t * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (t * p1 - p0) / (t * t - 1.0);
      double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    x(i) = t;
    w(i) = 2.0 / ((1.0 - t * t) * dp * dp);
  }
}

}  // namespace

SphereQuadrature build_sphere(int n_polar, int n_azimuth) {
  if (n_polar < 1 || n_azimuth < 2)
    throw std::invalid_argument("sphere quadrature order too small");
  Eigen::VectorXd gx, gw;
  gauss_legendre(n_polar, gx, gw);

  SphereQuadrature sq;
  sq.n_polar = n_polar;
  sq.n_azimuth = n_azimuth;
  const int nm = 2 * n_polar * n_azimuth;
  sq.directions.resize(3, nm);
  sq.weights.resize(nm);
  const double wphi = 2.0 * std::numbers::pi / n_azimuth;
  int m = 0;
  for (int panel = 0; panel < 2; ++panel) {
    // map [-1,1] -> [0,1] (panel 0) or [-1,0] (panel 1)
    for (int i = 0; i < n_polar; ++i) {
      double mu = panel == 0 ? 0.5 * (gx(i) + 1.0) : 0.5 * (gx(i) - 1.0);
      double wmu = 0.5 * gw(i);
      double s = std::sqrt(std::max(0.0, 1.0 - mu * mu));
      for (int j = 0; j < n_azimuth; ++j) {
        double phi = 2.0 * std::numbers::pi * j / n_azimuth;
        sq.directions.col(m) =
            Eigen::Vector3d(s * std::cos(phi), s * std::sin(phi), mu);
        sq.weights(m) = wmu * wphi;
        ++m;
      }
    }
  }
  return sq;
}

std::pair<Eigen::Vector3d, Eigen::Vector3d> post_collision(
    const Eigen::Vector3d& v, const Eigen::Vector3d& u,
    const Eigen::Vector3d& omega) {
  if (std::abs(omega.norm() - 1.0) > 1e-12)
    throw std::invalid_argument("omega must be a unit vector");
  const double proj = (u - v).dot(omega);
  return {v + proj * omega, u - proj * omega};
}

void orthonormal_frame(const Eigen::Vector3d& z, Eigen::Vector3d& e,
                       Eigen::Vector3d& t1, Eigen::Vector3d& t2) {
  e = z.normalized();
  Eigen::Vector3d a = std::abs(e(0)) < 0.9 ? Eigen::Vector3d::UnitX()
                                           : Eigen::Vector3d::UnitY();
  t1 = e.cross(a).normalized();
  t2 = e.cross(t1);
}

}  // namespace slabkin
