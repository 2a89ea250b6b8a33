#include "slabkin/boundary.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace slabkin {

DiffuseWall::DiffuseWall(std::shared_ptr<const VelocityGrid> grid)
    : grid_(std::move(grid)) {
  for (int m = 0; m < grid_->size(); ++m) {
    const double v3 = grid_->nodes(2, m);
    if (v3 > 0.0)
      up_.push_back(m);
    else if (v3 < 0.0)
      down_.push_back(m);
    // v3 == 0 nodes (grazing set) never interact with the walls; the even
    // cartesian grid contains none by construction
  }
  if (up_.empty() || down_.empty())
    throw std::invalid_argument("degenerate half-grid: a wall has no incoming nodes");

  // normalize so the discrete half-flux of c_mu * mu * |v3| is exactly 1;
  // by v -> -v symmetry the same constant serves both walls
  double half_flux = 0.0;
  for (int m : up_) {
    const double mu_m = grid_->sqrt_mu(m) * grid_->sqrt_mu(m);
    half_flux += grid_->weights(m) * mu_m * std::abs(grid_->nodes(2, m));
  }
  c_mu_ = 1.0 / half_flux;
}

double DiffuseWall::c_mu_gap() const {
  const double exact = std::sqrt(2.0 * std::numbers::pi);
  return std::abs(c_mu_ - exact) / exact;
}

std::complex<double> DiffuseWall::wall_flux_moment(
    const Eigen::Ref<const Eigen::VectorXcd>& trace, Wall w) const {
  std::complex<double> acc = 0.0;
  for (int m : toward(w))
    acc += grid_->weights(m) * grid_->sqrt_mu(m) *
           std::abs(grid_->nodes(2, m)) * trace(m);
  return acc;
}

Eigen::VectorXcd DiffuseWall::p_gamma(
    const Eigen::Ref<const Eigen::VectorXcd>& trace, Wall w) const {
  const std::complex<double> m0 = wall_flux_moment(trace, w);
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(grid_->size());
  for (int m : away(w)) out(m) = c_mu_ * grid_->sqrt_mu(m) * m0;
  return out;
}

std::pair<Eigen::VectorXcd, Eigen::VectorXcd> DiffuseWall::trace_split(
    const Eigen::Ref<const Eigen::VectorXcd>& trace, Wall w) const {
  const std::complex<double> m0 = wall_flux_moment(trace, w);
  Eigen::VectorXcd pg = Eigen::VectorXcd::Zero(grid_->size());
  Eigen::VectorXcd rest = Eigen::VectorXcd::Zero(grid_->size());
  for (int m : toward(w)) {
    pg(m) = c_mu_ * grid_->sqrt_mu(m) * m0;
    rest(m) = trace(m) - pg(m);
  }
  return {pg, rest};
}

double DiffuseWall::dissipation(const Eigen::Ref<const Eigen::VectorXcd>& trace,
                                Wall w) const {
  const std::complex<double> m0 = wall_flux_moment(trace, w);
  double acc = 0.0;
  for (int m : toward(w)) {
    const std::complex<double> r =
        trace(m) - c_mu_ * grid_->sqrt_mu(m) * m0;
    acc += grid_->weights(m) * std::abs(grid_->nodes(2, m)) * std::norm(r);
  }
  return acc;
}

std::complex<double> DiffuseWall::mass_flux(
    const Eigen::Ref<const Eigen::VectorXcd>& trace) const {
  std::complex<double> acc = 0.0;
  for (int m = 0; m < grid_->size(); ++m)
    acc += grid_->weights(m) * grid_->sqrt_mu(m) * grid_->nodes(2, m) * trace(m);
  return acc;
}

}  // namespace slabkin
