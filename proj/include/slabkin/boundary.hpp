#ifndef SLABKIN_BOUNDARY_HPP
#define SLABKIN_BOUNDARY_HPP

#include <memory>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "slabkin/velocity_grid.hpp"

namespace slabkin {

enum class Wall { Bottom, Top };  // x3 = -1 and x3 = +1

// Trace of a distribution at one wall, split by sign(v3) relative to the
// wall normal. "incoming" moves toward the wall (gamma_+ there), "outgoing"
// moves back into the slab (gamma_-).
struct TraceField {
  Wall wall = Wall::Bottom;
  Eigen::VectorXcd values;  // full velocity-grid vector at the wall cell
};

// Diffuse-reflection wall operator with the discretely renormalized c_mu, so
// the half-flux of c_mu * mu * |v3| is exactly 1 and the post-reflection wall
// mass flux vanishes to rounding.
class DiffuseWall {
 public:
  explicit DiffuseWall(std::shared_ptr<const VelocityGrid> grid);

  const VelocityGrid& grid() const { return *grid_; }
  double c_mu_discrete() const { return c_mu_; }
  double c_mu_gap() const;  // relative gap to sqrt(2*pi)

  // node indices moving toward / away from the given wall
  const std::vector<int>& toward(Wall w) const {
    return w == Wall::Bottom ? down_ : up_;
  }
  const std::vector<int>& away(Wall w) const {
    return w == Wall::Bottom ? up_ : down_;
  }

  // incoming half-flux sum_{toward w} f sqrt_mu |v3| weight
  std::complex<double> wall_flux_moment(
      const Eigen::Ref<const Eigen::VectorXcd>& trace, Wall w) const;

  // diffuse re-emission: full-length vector supported on the away(w) nodes
  Eigen::VectorXcd p_gamma(const Eigen::Ref<const Eigen::VectorXcd>& trace,
                           Wall w) const;

  // P_gamma f and (I - P_gamma) f on the toward-the-wall half-grid
  std::pair<Eigen::VectorXcd, Eigen::VectorXcd> trace_split(
      const Eigen::Ref<const Eigen::VectorXcd>& trace, Wall w) const;

  // |(I-P_gamma) f|^2 with the |v3|-weighted half-grid norm at one wall
  double dissipation(const Eigen::Ref<const Eigen::VectorXcd>& trace,
                     Wall w) const;

  // total mass flux int v3 f sqrt_mu dv of the full trace
  std::complex<double> mass_flux(
      const Eigen::Ref<const Eigen::VectorXcd>& trace) const;

 private:
  std::shared_ptr<const VelocityGrid> grid_;
  std::vector<int> up_, down_;  // node indices with v3 > 0 / v3 < 0
  double c_mu_ = 0.0;
};

}  // namespace slabkin

#endif
