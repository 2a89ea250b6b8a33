#ifndef SLABKIN_VELOCITY_GRID_HPP
#define SLABKIN_VELOCITY_GRID_HPP

#include <Eigen/Dense>
#include <string>

namespace slabkin {

enum class GridScheme { UniformCartesian, GaussHermiteTensor };

// Truncated 3D velocity grid. Immutable after construction; share freely.
struct VelocityGrid {
  Eigen::Matrix3Xd nodes;    // one column per node
  Eigen::VectorXd weights;   // positive quadrature weights
  Eigen::VectorXd sqrt_mu;   // cached sqrt of the Maxwellian at the nodes
  double v_max = 0.0;
  GridScheme scheme = GridScheme::UniformCartesian;
  int n_per_axis = 0;
  double eps_quad = 0.0;     // |sum_i w_i mu(v_i) - 1|

  // cartesian lattice metadata (unused for the hermite scheme)
  double h = 0.0;            // spacing
  Eigen::VectorXd axis;      // 1D node coordinates, shared by all three axes
  Eigen::VectorXi neg_index; // index of -v for each node

  int size() const { return static_cast<int>(weights.size()); }
  int flat(int i, int j, int l) const {
    return (i * n_per_axis + j) * n_per_axis + l;
  }
};

double maxwellian(const Eigen::Vector3d& v);

struct WeightFunction {
  double theta = 0.1;  // must lie strictly inside (0, 1/4)
};

double weight_w(const Eigen::Vector3d& v, const WeightFunction& wf);

enum class GaussianFunctional { M10, M35, M5, M10c };

double gaussian_functional(const VelocityGrid& grid, GaussianFunctional which);

VelocityGrid build_grid(int n_per_axis, double v_max, GridScheme scheme);

// Trilinear interpolation stencil on a cartesian grid; zero extension outside
// the hull of cell centers. inside==false means the point fell outside.
struct TrilinearStencil {
  int idx[8];
  double coef[8];
  bool inside = false;
};

TrilinearStencil trilinear_stencil(const VelocityGrid& grid,
                                   const Eigen::Vector3d& p);

}  // namespace slabkin

#endif
