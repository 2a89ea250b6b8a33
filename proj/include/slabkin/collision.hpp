#ifndef SLABKIN_COLLISION_HPP
#define SLABKIN_COLLISION_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "slabkin/macroscopic.hpp"
#include "slabkin/sphere_quadrature.hpp"
#include "slabkin/velocity_grid.hpp"

namespace slabkin {

struct CollisionBuildOptions {
  int sphere_polar = 8;
  int sphere_azimuth = 16;
  // Symmetrize K and deflate the five collision invariants out of L, so the
  // structural identities hold to rounding. The raw quadrature defects are
  // measured first and kept in the metadata either way.
  bool structure_fix = true;
};

struct CollisionMeta {
  int n_per_axis = 0;
  double v_max = 0.0;
  int sphere_polar = 0;
  int sphere_azimuth = 0;
  bool structure_fix = true;
  double raw_null_residual = 0.0;  // max over the 5 invariants, relative
  double raw_symmetry_residual = 0.0;
  double fallback_rate = 0.0;      // fraction of scatter weight off-grid
  double nu_fit = 0.0;             // min over nodes of nu / sqrt(1+|v|^2)
};

class CollisionOperator {
 public:
  CollisionOperator(std::shared_ptr<const VelocityGrid> grid,
                    Eigen::VectorXd nu, Eigen::MatrixXd K, CollisionMeta meta);

  const VelocityGrid& grid() const { return *grid_; }
  std::shared_ptr<const VelocityGrid> grid_ptr() const { return grid_; }
  const Projector& projector() const { return *proj_; }
  const Eigen::VectorXd& nu() const { return nu_; }
  const Eigen::MatrixXd& K() const { return K_; }
  const CollisionMeta& meta() const { return meta_; }

  Eigen::VectorXd apply_K(const Eigen::Ref<const Eigen::VectorXd>& f) const;
  Eigen::VectorXd apply_L(const Eigen::Ref<const Eigen::VectorXd>& f) const;
  Eigen::VectorXcd apply_L(const Eigen::Ref<const Eigen::VectorXcd>& f) const;

 private:
  std::shared_ptr<const VelocityGrid> grid_;
  std::shared_ptr<const Projector> proj_;
  Eigen::VectorXd nu_;
  Eigen::MatrixXd K_;
  CollisionMeta meta_;
};

CollisionOperator build_collision(std::shared_ptr<const VelocityGrid> grid,
                                  const CollisionBuildOptions& opt = {});

// nu at an arbitrary velocity, using the identity int_{S^2}|z.w|dw = 2pi|z|
double nu_at(const VelocityGrid& grid, const Eigen::Vector3d& v);

// literal double quadrature of nu over grid x sphere rule (cross-check path)
Eigen::VectorXd collision_frequency(const VelocityGrid& grid,
                                    const SphereQuadrature& sq);

// Bilinear term Gamma(f,g), projected onto the orthogonal complement of
// ker L so the discrete weak-form conservation holds to rounding; the raw
// projection defect is returned through raw_defect when non-null.
Eigen::VectorXd gamma(const CollisionOperator& op,
                      const Eigen::Ref<const Eigen::VectorXd>& f,
                      const Eigen::Ref<const Eigen::VectorXd>& g,
                      double* raw_defect = nullptr);
Eigen::VectorXcd gamma(const CollisionOperator& op,
                       const Eigen::Ref<const Eigen::VectorXcd>& f,
                       const Eigen::Ref<const Eigen::VectorXcd>& g,
                       double* raw_defect = nullptr);

// Centered lattice of retained tangential modes.
struct ModeLattice {
  std::vector<Eigen::Vector2d> ks;
  double spacing = 1.0;  // Delta-ell of the convolution
  int find(const Eigen::Vector2d& k) const;  // -1 when absent
};

// Truncated mode convolution; fields indexed like lattice.ks, each an
// arbitrary-column complex matrix over velocity rows (columns = x3 cells).
std::vector<Eigen::MatrixXcd> gamma_hat(
    const CollisionOperator& op, const ModeLattice& lattice,
    const std::vector<Eigen::MatrixXcd>& fhat,
    const std::vector<Eigen::MatrixXcd>& ghat, int* dropped_pairs = nullptr);

struct KthetaReport {
  double N = 0.0;
  double tail_bound = 0.0;        // max_v sum over {|u|>N or |v-u|<=1/N}
  double bounded_region_sup = 0.0;  // sup of k_theta over |v-u|>1/N
  double row_sum_bound = 0.0;     // max_v (1+|v|) sum_u k_theta
};

KthetaReport ktheta_truncation_check(const CollisionOperator& op,
                                     const WeightFunction& wf, double N);

std::string collision_cache_key(const VelocityGrid& grid,
                                const CollisionBuildOptions& opt);
void save_collision_cache(const CollisionOperator& op, const std::string& path);
std::optional<CollisionOperator> load_collision_cache(
    std::shared_ptr<const VelocityGrid> grid, const CollisionBuildOptions& opt,
    const std::string& path);

// Build with cache lookup under dir (or SLABKIN_CACHE_DIR when dir empty).
CollisionOperator build_collision_cached(
    std::shared_ptr<const VelocityGrid> grid, const CollisionBuildOptions& opt,
    std::string dir = "");

}  // namespace slabkin

#endif
