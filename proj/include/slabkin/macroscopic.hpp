#ifndef SLABKIN_MACROSCOPIC_HPP
#define SLABKIN_MACROSCOPIC_HPP

#include <complex>
#include <memory>

#include <Eigen/Dense>

#include "slabkin/velocity_grid.hpp"

namespace slabkin {

struct Moments {
  std::complex<double> a;
  std::complex<double> b[3];
  std::complex<double> c;
};

// Orthogonal projection onto span{sqrt_mu, v_i sqrt_mu, (|v|^2-3)/2 sqrt_mu}
// under the discrete weighted inner product. Coefficients come from the Gram
// solve so idempotence and orthogonality hold to rounding.
class Projector {
 public:
  explicit Projector(std::shared_ptr<const VelocityGrid> grid);

  const VelocityGrid& grid() const { return *grid_; }
  // raw (non-orthonormalized) basis columns: order a, b1, b2, b3, c
  const Eigen::MatrixXd& basis() const { return basis_; }
  // same columns orthonormalized in the weighted inner product
  const Eigen::MatrixXd& orthonormal_basis() const { return onb_; }

  Eigen::VectorXcd coefficients(const Eigen::Ref<const Eigen::VectorXcd>& f) const;
  Eigen::VectorXcd project(const Eigen::Ref<const Eigen::VectorXcd>& f) const;
  Eigen::VectorXd project(const Eigen::Ref<const Eigen::VectorXd>& f) const;

 private:
  std::shared_ptr<const VelocityGrid> grid_;
  Eigen::MatrixXd basis_;   // Nv x 5
  Eigen::MatrixXd wbasis_;  // weights * basis, so <psi_i, f> = wbasis.col(i).dot(f)
  Eigen::MatrixXd onb_;
  Eigen::LLT<Eigen::Matrix<double, 5, 5>> gram_;
};

// (a, b, c) with the c-normalization 2/3 that makes moments consistent with
// the orthogonal projection.
Moments moments(const VelocityGrid& grid, const Eigen::Ref<const Eigen::VectorXcd>& f);

std::complex<double> theta_ij(const VelocityGrid& grid,
                              const Eigen::Ref<const Eigen::VectorXcd>& f,
                              int i, int j);

std::complex<double> lambda_j(const VelocityGrid& grid,
                              const Eigen::Ref<const Eigen::VectorXcd>& f,
                              int j);

// weighted inner products / norms on the velocity grid
double dot_v(const VelocityGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& f,
             const Eigen::Ref<const Eigen::VectorXd>& g);
std::complex<double> dot_v(const VelocityGrid& grid,
                           const Eigen::Ref<const Eigen::VectorXcd>& f,
                           const Eigen::Ref<const Eigen::VectorXcd>& g);
double norm_v(const VelocityGrid& grid, const Eigen::Ref<const Eigen::VectorXcd>& f);

}  // namespace slabkin

#endif
