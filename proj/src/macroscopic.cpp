#include "slabkin/macroscopic.hpp"

namespace slabkin {

Projector::Projector(std::shared_ptr<const VelocityGrid> grid)
    : grid_(std::move(grid)) {
  const int nv = grid_->size();
  basis_.resize(nv, 5);
  for (int m = 0; m < nv; ++m) {
    const Eigen::Vector3d v = grid_->nodes.col(m);
    const double sm = grid_->sqrt_mu(m);
    basis_(m, 0) = sm;
    basis_(m, 1) = v(0) * sm;
    basis_(m, 2) = v(1) * sm;
    basis_(m, 3) = v(2) * sm;
    basis_(m, 4) = 0.5 * (v.squaredNorm() - 3.0) * sm;
  }
  wbasis_ = grid_->weights.asDiagonal() * basis_;
  Eigen::Matrix<double, 5, 5> gram = wbasis_.transpose() * basis_;
  gram_.compute(gram);

  // Gram-Schmidt in the weighted inner product
  onb_ = basis_;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < i; ++j) {
      double proj = (grid_->weights.asDiagonal() * onb_.col(j)).dot(onb_.col(i));
      onb_.col(i) -= proj * onb_.col(j);
    }
    double nrm = std::sqrt((grid_->weights.asDiagonal() * onb_.col(i)).dot(onb_.col(i)));
    onb_.col(i) /= nrm;
  }
}

Eigen::VectorXcd Projector::coefficients(
    const Eigen::Ref<const Eigen::VectorXcd>& f) const {
  Eigen::VectorXcd rhs = wbasis_.transpose() * f;
  Eigen::VectorXcd out(5);
  Eigen::VectorXd re = gram_.solve(rhs.real());
  Eigen::VectorXd im = gram_.solve(rhs.imag());
  for (int i = 0; i < 5; ++i) out(i) = {re(i), im(i)};
  return out;
}

Eigen::VectorXcd Projector::project(
    const Eigen::Ref<const Eigen::VectorXcd>& f) const {
  return basis_ * coefficients(f);
}

Eigen::VectorXd Projector::project(
    const Eigen::Ref<const Eigen::VectorXd>& f) const {
  Eigen::VectorXd rhs = wbasis_.transpose() * f;
  return basis_ * gram_.solve(rhs);
}

Moments moments(const VelocityGrid& grid,
                const Eigen::Ref<const Eigen::VectorXcd>& f) {
  Moments m{};
  std::complex<double> acc[5] = {};
  for (int i = 0; i < grid.size(); ++i) {
    const Eigen::Vector3d v = grid.nodes.col(i);
    const std::complex<double> wf = grid.weights(i) * grid.sqrt_mu(i) * f(i);
    acc[0] += wf;
    acc[1] += v(0) * wf;
    acc[2] += v(1) * wf;
    acc[3] += v(2) * wf;
    acc[4] += 0.5 * (v.squaredNorm() - 3.0) * wf;
  }
  m.a = acc[0];
  m.b[0] = acc[1];
  m.b[1] = acc[2];
  m.b[2] = acc[3];
  m.c = (2.0 / 3.0) * acc[4];
  return m;
}

std::complex<double> theta_ij(const VelocityGrid& grid,
                              const Eigen::Ref<const Eigen::VectorXcd>& f,
                              int i, int j) {
  std::complex<double> acc = 0.0;
  for (int m = 0; m < grid.size(); ++m) {
    const Eigen::Vector3d v = grid.nodes.col(m);
    acc += grid.weights(m) * (v(i) * v(j) - 1.0) * grid.sqrt_mu(m) * f(m);
  }
  return acc;
}

std::complex<double> lambda_j(const VelocityGrid& grid,
                              const Eigen::Ref<const Eigen::VectorXcd>& f,
                              int j) {
  std::complex<double> acc = 0.0;
  for (int m = 0; m < grid.size(); ++m) {
    const Eigen::Vector3d v = grid.nodes.col(m);
    acc += grid.weights(m) * (v.squaredNorm() - 5.0) * v(j) * grid.sqrt_mu(m) * f(m);
  }
  return 0.1 * acc;
}

double dot_v(const VelocityGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& f,
             const Eigen::Ref<const Eigen::VectorXd>& g) {
  return (grid.weights.array() * f.array() * g.array()).sum();
}

std::complex<double> dot_v(const VelocityGrid& grid,
                           const Eigen::Ref<const Eigen::VectorXcd>& f,
                           const Eigen::Ref<const Eigen::VectorXcd>& g) {
  return (grid.weights.array().cast<std::complex<double>>() *
          f.array().conjugate() * g.array())
      .sum();
}

double norm_v(const VelocityGrid& grid,
              const Eigen::Ref<const Eigen::VectorXcd>& f) {
  return std::sqrt((grid.weights.array() * f.array().abs2()).sum());
}

}  // namespace slabkin
