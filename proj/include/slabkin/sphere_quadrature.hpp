#ifndef SLABKIN_SPHERE_QUADRATURE_HPP
#define SLABKIN_SPHERE_QUADRATURE_HPP

#include <Eigen/Dense>
#include <utility>

namespace slabkin {

// Product rule on S^2: two-panel Gauss-Legendre in cos(theta) over [-1,0] and
// [0,1] (so |cos(theta)| is integrated exactly), uniform in phi. Antipodally
// symmetric; weights sum to 4*pi.
struct SphereQuadrature {
  Eigen::Matrix3Xd directions;
  Eigen::VectorXd weights;
  int n_polar = 0;    // Gauss-Legendre points per panel
  int n_azimuth = 0;

  int size() const { return static_cast<int>(weights.size()); }
};

SphereQuadrature build_sphere(int n_polar, int n_azimuth);

// omega-representation of the post-collision pair.
std::pair<Eigen::Vector3d, Eigen::Vector3d> post_collision(
    const Eigen::Vector3d& v, const Eigen::Vector3d& u,
    const Eigen::Vector3d& omega);

// Orthonormal frame (e, t1, t2) with e = z/|z|; used to rotate the sphere
// rule's polar axis onto a relative velocity so |z . omega| is resolved exactly.
void orthonormal_frame(const Eigen::Vector3d& z, Eigen::Vector3d& e,
                       Eigen::Vector3d& t1, Eigen::Vector3d& t2);

}  // namespace slabkin

#endif
