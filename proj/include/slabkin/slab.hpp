#ifndef SLABKIN_SLAB_HPP
#define SLABKIN_SLAB_HPP

#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "slabkin/boundary.hpp"
#include "slabkin/collision.hpp"
#include "slabkin/config.hpp"
#include "slabkin/macroscopic.hpp"

namespace slabkin {

struct NumericError : std::runtime_error {
  NumericError(const std::string& msg, long step) : std::runtime_error(msg), step(step) {}
  long step = -1;
};

// One tangential mode: complex distribution over velocity rows x cell columns
struct SlabState {
  Eigen::Vector2d k{0.0, 0.0};
  double time = 0.0;
  Eigen::MatrixXcd values;  // Nv x Nx
  int nx = 0;
  double dx = 0.0;

  double x_center(int i) const { return -1.0 + (i + 0.5) * dx; }
};

struct TrajectorySample {
  double t = 0.0;
  double l2_norm = 0.0;             // ||f||_{L2_{x3,v}}
  double micro_dissipation = 0.0;   // ||(I-P)f||_nu
  double boundary_dissipation = 0.0;
  double energy_defect = 0.0;       // per-step identity defect at this step
  std::vector<Moments> probe_moments;
  // stored profiles for conservation-law residuals (rows over x3 columns)
  Eigen::MatrixXcd moment_profiles;  // 5 x Nx: a, b1, b2, b3, c
  Eigen::MatrixXcd theta_profiles;   // 9 x Nx: Theta_ij of (I-P)f, row 3i+j
  Eigen::MatrixXcd lambda_profiles;  // 3 x Nx: Lambda_j of (I-P)f
};

struct Trajectory {
  Eigen::Vector2d k{0.0, 0.0};
  int nx = 0;
  double dx = 0.0;
  double dt = 0.0;
  std::vector<double> probes;
  std::vector<TrajectorySample> samples;
  std::vector<std::pair<double, Eigen::MatrixXcd>> snapshots;
  double initial_weighted_sup = 0.0;  // ||w f0||_inf
  double min_F = 1.0;  // monitored minimum of mu + sqrt(mu) Re(f), k=0 only
  std::vector<double> step_defects;   // every step, not just sampled ones
};

class SlabSolver {
 public:
  // op may be null when cfg.collision is false
  SlabSolver(RunConfig cfg, std::shared_ptr<const VelocityGrid> grid,
             std::shared_ptr<const CollisionOperator> op);

  const RunConfig& cfg() const { return cfg_; }
  const VelocityGrid& grid() const { return *grid_; }
  std::shared_ptr<const VelocityGrid> grid_ptr() const { return grid_; }
  const CollisionOperator* op() const { return op_.get(); }
  const DiffuseWall& wall() const { return wall_; }
  const Projector& projector() const { return proj_; }

  SlabState init_state(const Eigen::Vector2d& k) const;

  // one Strang step: phase(dt/2), transport(dt), collision(dt), phase(dt/2);
  // gamma_term (Nv x Nx) is held fixed over the step, may be null
  void step(SlabState& s, const Eigen::MatrixXcd* gamma_term = nullptr) const;

  std::vector<Trajectory> simulate() const;

  // equation right-hand side with the solver's spatial stencil
  Eigen::MatrixXcd time_derivative(const SlabState& s,
                                   const Eigen::MatrixXcd* gamma_term = nullptr) const;

  // flux-form v3 d_x3 with diffuse-wall inflow (the term as it appears moved
  // to the right-hand side is the negative of this)
  Eigen::MatrixXcd transport_term(const SlabState& s) const;

  double energy(const SlabState& s) const;       // ||f||^2_{x3,v}
  double dissipation(const SlabState& s) const;  // 2<Lf,f> + boundary part
  double micro_dissipation(const SlabState& s) const;
  double boundary_dissipation(const SlabState& s) const;

 private:
  void phase_half(SlabState& s) const;
  void transport_step(SlabState& s) const;
  void collision_step(SlabState& s, const Eigen::MatrixXcd* gamma_term) const;

  RunConfig cfg_;
  std::shared_ptr<const VelocityGrid> grid_;
  std::shared_ptr<const CollisionOperator> op_;
  DiffuseWall wall_;
  Projector proj_;
};

// Inverse Fourier assembly at tangential probe points xbar; returns one
// (Nv x Nx) field per probe. With require_real the mode set must be closed
// under k -> -k with conjugate states.
std::vector<Eigen::MatrixXcd> assemble_physical(
    const std::vector<SlabState>& states, double spacing, int dim,
    const std::vector<Eigen::Vector2d>& xbar, bool require_real);

struct DuhamelStats {
  int requested = 0;
  int evaluated = 0;
  int skipped_grazing = 0;
  double median = 0.0;
  double mean = 0.0;
  double max = 0.0;
};

// Mild-formulation residual on random (t, x3, v) samples of a linear run
// whose trajectory stored snapshots. zero_K drops the K integral term (for
// runs that evolved with collision off).
DuhamelStats duhamel_residual(const SlabSolver& solver, const Trajectory& traj,
                              int nsamples, std::uint64_t seed,
                              bool zero_K = false);

}  // namespace slabkin

#endif
