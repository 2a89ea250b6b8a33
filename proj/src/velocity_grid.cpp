#include "slabkin/velocity_grid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace slabkin {

double maxwellian(const Eigen::Vector3d& v) {
  const double c = std::pow(2.0 * std::numbers::pi, -1.5);
  return c * std::exp(-0.5 * v.squaredNorm());
}

double weight_w(const Eigen::Vector3d& v, const WeightFunction& wf) {
  if (!(wf.theta > 0.0 && wf.theta < 0.25))
    throw std::invalid_argument("weight theta must lie in (0, 1/4)");
  return std::exp(wf.theta * v.squaredNorm());
}

namespace {

// Golub-Welsch for Gauss-Hermite with weight exp(-x^2); rescaled below.
void gauss_hermite(int n, Eigen::VectorXd& x, Eigen::VectorXd& w) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    double b = std::sqrt(i / 2.0);
    J(i, i - 1) = b;
    J(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  x = es.eigenvalues();
  w.resize(n);
  const double mu0 = std::sqrt(std::numbers::pi);
  for (int i = 0; i < n; ++i) {
    double v0 = es.eigenvectors()(0, i);
    w(i) = mu0 * v0 * v0;
  }
}

}  // namespace

VelocityGrid build_grid(int n_per_axis, double v_max, GridScheme scheme) {
  if (n_per_axis <= 0) throw std::invalid_argument("n_per_axis must be positive");
  if (v_max < 4.0) throw std::invalid_argument("v_max must be >= 4");
  if (scheme == GridScheme::UniformCartesian && n_per_axis % 2 != 0)
    throw std::invalid_argument("n_per_axis must be even on the cartesian scheme");

  VelocityGrid g;
  g.scheme = scheme;
  g.n_per_axis = n_per_axis;
  g.v_max = v_max;

  const int n = n_per_axis;
  Eigen::VectorXd ax(n), aw(n);
  if (scheme == GridScheme::UniformCartesian) {
    g.h = 2.0 * v_max / n;
    for (int i = 0; i < n; ++i) ax(i) = -v_max + (i + 0.5) * g.h;
    aw.setConstant(g.h);
  } else {
    // nodes of exp(-x^2) rescaled to the unit Gaussian; weights converted to
    // plain dv weights so the same quadrature formulas apply to both schemes
    Eigen::VectorXd hx, hw;
    gauss_hermite(n, hx, hw);
    const double s = std::numbers::sqrt2;
    for (int i = 0; i < n; ++i) {
      ax(i) = s * hx(i);
      aw(i) = s * hw(i) * std::exp(hx(i) * hx(i));
    }
  }
  g.axis = ax;

  const int nv = n * n * n;
  g.nodes.resize(3, nv);
  g.weights.resize(nv);
  g.sqrt_mu.resize(nv);
  g.neg_index.resize(nv);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) {
        int m = g.flat(i, j, l);
        g.nodes.col(m) = Eigen::Vector3d(ax(i), ax(j), ax(l));
        g.weights(m) = aw(i) * aw(j) * aw(l);
        g.sqrt_mu(m) = std::sqrt(maxwellian(g.nodes.col(m)));
        g.neg_index(m) = g.flat(n - 1 - i, n - 1 - j, n - 1 - l);
      }

  double mass = 0.0;
  for (int m = 0; m < nv; ++m) mass += g.weights(m) * maxwellian(g.nodes.col(m));
  g.eps_quad = std::abs(mass - 1.0);
  return g;
}

double gaussian_functional(const VelocityGrid& grid, GaussianFunctional which) {
  double acc = 0.0;
  for (int m = 0; m < grid.size(); ++m) {
    const Eigen::Vector3d v = grid.nodes.col(m);
    const double s2 = v.squaredNorm();
    const double v12 = v(0) * v(0);
    double integrand = 0.0;
    switch (which) {
      case GaussianFunctional::M10: integrand = v12 * (s2 - 10.0); break;
      case GaussianFunctional::M35: integrand = v12 * 0.5 * (s2 - 3.0) * (s2 - 5.0); break;
      case GaussianFunctional::M5: integrand = v12 * (s2 - 5.0); break;
      case GaussianFunctional::M10c: integrand = v12 * (s2 - 10.0) * 0.5 * (s2 - 3.0); break;
    }
    acc += grid.weights(m) * integrand * maxwellian(v);
  }
  return acc;
}

TrilinearStencil trilinear_stencil(const VelocityGrid& grid,
                                   const Eigen::Vector3d& p) {
  TrilinearStencil st;
  if (grid.scheme != GridScheme::UniformCartesian)
    throw std::logic_error("trilinear interpolation requires a cartesian grid");
  const int n = grid.n_per_axis;
  const double lo = grid.axis(0), hi = grid.axis(n - 1);
  int base[3];
  double frac[3];
  for (int a = 0; a < 3; ++a) {
    if (p(a) < lo || p(a) > hi) return st;  // zero extension
    double t = (p(a) - lo) / grid.h;
    int i = static_cast<int>(t);
    if (i > n - 2) i = n - 2;
    base[a] = i;
    frac[a] = t - i;
  }
  int c = 0;
  for (int di = 0; di < 2; ++di)
    for (int dj = 0; dj < 2; ++dj)
      for (int dl = 0; dl < 2; ++dl) {
        st.idx[c] = grid.flat(base[0] + di, base[1] + dj, base[2] + dl);
        st.coef[c] = (di ? frac[0] : 1.0 - frac[0]) *
                     (dj ? frac[1] : 1.0 - frac[1]) *
                     (dl ? frac[2] : 1.0 - frac[2]);
        ++c;
      }
  st.inside = true;
  return st;
}

}  // namespace slabkin
