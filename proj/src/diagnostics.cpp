#include "slabkin/diagnostics.hpp"

#include <cmath>
#include <sstream>

namespace slabkin {

double rhs_weight_value(RhsWeight w, double kabs) {
  const double k2 = kabs * kabs;
  switch (w) {
    case RhsWeight::KK1: return k2 / (1.0 + k2);
    case RhsWeight::KSqrt1: return kabs / std::sqrt(1.0 + k2);
    case RhsWeight::KHalf: return std::sqrt(kabs) / std::pow(1.0 + k2, 0.25);
    case RhsWeight::Unweighted: return 1.0;
  }
  return 1.0;
}

namespace {

struct Pattern {
  double c0;  // zeroth-order coefficient
  double c2;  // multiplies -d^2/dx^2
  double sgn; // sign in front of the weighted rhs
  bool neumann;
};

Pattern pattern_for(EllipticKind kind, const Eigen::Vector2d& k) {
  const double k1 = k(0), k2 = k(1);
  const double kk = k.squaredNorm();
  switch (kind) {
    case EllipticKind::ANeumann: return {kk, 1.0, -1.0, true};
    case EllipticKind::B1Dirichlet: return {2 * k1 * k1 + k2 * k2, 1.0, 1.0, false};
    case EllipticKind::B2Dirichlet: return {k1 * k1 + 2 * k2 * k2, 1.0, 1.0, false};
    case EllipticKind::B3Dirichlet: return {kk, 2.0, 1.0, false};
    case EllipticKind::CDirichlet: return {kk, 1.0, 1.0, false};
  }
  return {0, 1, 1, false};
}

double trapezoid_norm(const Eigen::VectorXcd& f, double dx) {
  double acc = 0.0;
  const int n = static_cast<int>(f.size());
  for (int i = 0; i < n; ++i)
    acc += (i == 0 || i == n - 1 ? 0.5 : 1.0) * dx * std::norm(f(i));
  return std::sqrt(acc);
}

}  // namespace

EllipticSolution elliptic_solve(const EllipticProblem& p, int nx) {
  if (nx < 8) throw std::invalid_argument("elliptic solve needs Nx >= 8");
  const int nn = nx + 1;
  if (p.rhs.size() != nn)
    throw std::invalid_argument("elliptic rhs must have Nx+1 node values");
  const double dx = 2.0 / nx;
  const Pattern pat = pattern_for(p.kind, p.k);
  const double W = rhs_weight_value(p.weight, p.k.norm());
  Eigen::VectorXcd g = (pat.sgn * W) * p.rhs;

  Eigen::VectorXcd phi = Eigen::VectorXcd::Zero(nn);
  const double idx2 = 1.0 / (dx * dx);

  if (!pat.neumann) {
    const int ni = nx - 1;  // interior unknowns
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(ni, ni);
    for (int i = 0; i < ni; ++i) {
      A(i, i) = pat.c0 + 2.0 * pat.c2 * idx2;
      if (i > 0) A(i, i - 1) = -pat.c2 * idx2;
      if (i + 1 < ni) A(i, i + 1) = -pat.c2 * idx2;
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    Eigen::VectorXd re = lu.solve(g.segment(1, ni).real());
    Eigen::VectorXd im = lu.solve(g.segment(1, ni).imag());
    for (int i = 0; i < ni; ++i) phi(1 + i) = {re(i), im(i)};
  } else {
    // second-order Neumann closure via mirrored ghost nodes
    const bool singular = pat.c0 == 0.0;
    if (singular) {
      std::complex<double> mean = 0.0;
      for (int i = 0; i < nn; ++i)
        mean += (i == 0 || i == nn - 1 ? 0.5 : 1.0) * dx * g(i);
      const double scale = g.cwiseAbs().maxCoeff();
      if (std::abs(mean) > 1e-12 * std::max(scale, 1e-300) + 1e-300)
        throw std::invalid_argument(
            "a-neumann at k=0 requires a zero-mean rhs (solvability)");
    }
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nn + (singular ? 1 : 0), nn);
    for (int i = 0; i < nn; ++i) {
      A(i, i) = pat.c0 + 2.0 * pat.c2 * idx2;
      if (i == 0)
        A(i, 1) = -2.0 * pat.c2 * idx2;
      else if (i == nn - 1)
        A(i, nn - 2) = -2.0 * pat.c2 * idx2;
      else {
        A(i, i - 1) = -pat.c2 * idx2;
        A(i, i + 1) = -pat.c2 * idx2;
      }
    }
    if (singular) {
      for (int i = 0; i < nn; ++i)
        A(nn, i) = (i == 0 || i == nn - 1 ? 0.5 : 1.0) * dx;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    Eigen::VectorXd bre = Eigen::VectorXd::Zero(A.rows());
    Eigen::VectorXd bim = Eigen::VectorXd::Zero(A.rows());
    bre.head(nn) = g.real();
    bim.head(nn) = g.imag();
    Eigen::VectorXd re = qr.solve(bre);
    Eigen::VectorXd im = qr.solve(bim);
    for (int i = 0; i < nn; ++i) phi(i) = {re(i), im(i)};
  }

  EllipticSolution sol;
  sol.phi = phi;
  sol.dphi.resize(nn);
  for (int i = 1; i < nn - 1; ++i) sol.dphi(i) = (phi(i + 1) - phi(i - 1)) / (2 * dx);
  sol.dphi(0) = (-3.0 * phi(0) + 4.0 * phi(1) - phi(2)) / (2 * dx);
  sol.dphi(nn - 1) = (3.0 * phi(nn - 1) - 4.0 * phi(nn - 2) + phi(nn - 3)) / (2 * dx);
  sol.d2phi = (pat.c0 * phi - g) / pat.c2;
  sol.norm_kphi = p.k.norm() * trapezoid_norm(phi, dx);
  sol.norm_dphi = trapezoid_norm(sol.dphi, dx);
  sol.norm_d2phi = trapezoid_norm(sol.d2phi, dx);
  return sol;
}

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& value,
                   DecayModel model, int i0, int i1) {
  if (t.size() != value.size()) throw std::invalid_argument("series length mismatch");
  if (i1 < 0) i1 = static_cast<int>(t.size());
  if (i0 < 0 || i1 > static_cast<int>(t.size()) || i1 - i0 < 8)
    throw std::invalid_argument("fit window must contain at least 8 samples");
  const int n = i1 - i0;
  Eigen::VectorXd x(n), y(n);
  for (int i = 0; i < n; ++i) {
    const double v = value[i0 + i];
    if (!(v > 0.0))
      throw std::invalid_argument("nonpositive value in fit window at index " +
                                  std::to_string(i0 + i));
    x(i) = model == DecayModel::Exponential ? t[i0 + i] : std::log1p(t[i0 + i]);
    y(i) = std::log(v);
  }
  const double xm = x.mean(), ym = y.mean();
  const double sxx = (x.array() - xm).square().sum();
  const double sxy = ((x.array() - xm) * (y.array() - ym)).sum();
  const double slope = sxy / sxx;
  DecayFit fit;
  fit.model = model;
  fit.rate = -slope;
  fit.i0 = i0;
  fit.i1 = i1;
  const Eigen::ArrayXd res = y.array() - ym - slope * (x.array() - xm);
  fit.residual = std::sqrt(res.square().sum() / n);
  const double sst = (y.array() - ym).square().sum();
  fit.r_squared = sst > 0.0 ? 1.0 - res.square().sum() / sst : 1.0;
  return fit;
}

std::vector<DissipationRow> dissipation_report(const Trajectory& traj,
                                               double sigma) {
  std::vector<DissipationRow> rows;
  const double kabs = traj.k.norm();
  const double kk = kabs * kabs;
  for (const auto& s : traj.samples) {
    if (s.moment_profiles.size() == 0)
      throw std::invalid_argument(
          "trajectory lacks stored moment profiles for the dissipation report");
    DissipationRow r;
    r.t = s.t;
    r.micro = s.micro_dissipation;
    r.boundary = std::sqrt(s.boundary_dissipation);
    double macro2 = 0.0, b32 = 0.0, c2 = 0.0, b122 = 0.0;
    for (int i = 0; i < s.moment_profiles.cols(); ++i) {
      const double dx = traj.dx;
      macro2 += dx * (std::norm(s.moment_profiles(0, i)) +
                      std::norm(s.moment_profiles(1, i)) +
                      std::norm(s.moment_profiles(2, i)) +
                      std::norm(s.moment_profiles(3, i)) +
                      std::norm(s.moment_profiles(4, i)));
      b32 += dx * std::norm(s.moment_profiles(3, i));
      c2 += dx * std::norm(s.moment_profiles(4, i));
      b122 += dx * (std::norm(s.moment_profiles(1, i)) +
                    std::norm(s.moment_profiles(2, i)));
    }
    r.macro_weighted = kabs / std::sqrt(1.0 + kk) * std::sqrt(macro2);
    r.b3_refined = std::sqrt(kabs) / std::pow(1.0 + kk, 0.25) * std::sqrt(b32);
    r.c_refined = std::pow(kabs, 0.25) / std::pow(1.0 + kk, 0.125) * std::sqrt(c2);
    r.b12_unweighted = std::sqrt(b122);
    r.time_weight = std::pow(1.0 + s.t, 0.5 * sigma);
    rows.push_back(r);
  }
  return rows;
}

std::string dissipation_csv(const std::vector<DissipationRow>& rows) {
  std::ostringstream ss;
  ss << "t,micro,boundary,macro_weighted,b3_refined,c_refined,b12_unweighted,"
        "time_weight\n";
  ss.precision(17);
  for (const auto& r : rows)
    ss << r.t << ',' << r.micro << ',' << r.boundary << ',' << r.macro_weighted
       << ',' << r.b3_refined << ',' << r.c_refined << ',' << r.b12_unweighted
       << ',' << r.time_weight << "\n";
  return ss.str();
}

ConservationResiduals conservation_residuals(const Trajectory& traj,
                                             const Eigen::Vector2d& k) {
  const int ns = static_cast<int>(traj.samples.size());
  if (ns < 3)
    throw std::invalid_argument("need at least 3 stored samples for residuals");
  for (const auto& s : traj.samples)
    if (s.moment_profiles.size() == 0 || s.theta_profiles.size() == 0 ||
        s.lambda_profiles.size() == 0)
      throw std::invalid_argument(
          "trajectory lacks stored series: moment_profiles, theta_profiles, "
          "lambda_profiles");

  const int nx = traj.nx;
  const double dx = traj.dx;
  const std::complex<double> I(0.0, 1.0);
  ConservationResiduals out;

  // x3 derivative: centered differences on interior cells; the residual norm
  // is taken over cells 1..nx-2 to keep the stencil uniform
  auto ddx = [&](const Eigen::RowVectorXcd& prof, int i) {
    return (prof(i + 1) - prof(i - 1)) / (2.0 * dx);
  };

  for (int m = 1; m + 1 < ns; ++m) {
    const auto& sm = traj.samples[m];
    const auto& sp = traj.samples[m + 1];
    const auto& sq = traj.samples[m - 1];
    const double dt2 = sp.t - sq.t;
    double rm = 0.0, rb = 0.0, rc = 0.0;
    for (int i = 1; i + 1 < nx; ++i) {
      // mass
      std::complex<double> r =
          (sp.moment_profiles(0, i) - sq.moment_profiles(0, i)) / dt2 +
          I * k(0) * sm.moment_profiles(1, i) +
          I * k(1) * sm.moment_profiles(2, i) +
          ddx(sm.moment_profiles.row(3), i);
      rm += dx * std::norm(r);
      // momentum; the paper's c-normalization is half the projection
      // coefficient, so a + 2c_paper = a + c here
      for (int d = 0; d < 3; ++d) {
        std::complex<double> grad_ac =
            d == 2 ? ddx((sm.moment_profiles.row(0) + sm.moment_profiles.row(4))
                             .eval(),
                         i)
                   : I * k(d) * (sm.moment_profiles(0, i) +
                                 sm.moment_profiles(4, i));
        std::complex<double> theta_div =
            I * k(0) * sm.theta_profiles(3 * d + 0, i) +
            I * k(1) * sm.theta_profiles(3 * d + 1, i) +
            ddx(sm.theta_profiles.row(3 * d + 2), i);
        std::complex<double> rbi =
            (sp.moment_profiles(1 + d, i) - sq.moment_profiles(1 + d, i)) / dt2 +
            grad_ac + theta_div;
        rb += dx * std::norm(rbi);
      }
      // energy, in the paper's c-normalization (c_paper = c/2); the Lambda
      // coefficient 5/3 carries Lambda's own 1/10 prefactor
      std::complex<double> re =
          0.5 * (sp.moment_profiles(4, i) - sq.moment_profiles(4, i)) / dt2 +
          (1.0 / 3.0) * (I * k(0) * sm.moment_profiles(1, i) +
                         I * k(1) * sm.moment_profiles(2, i) +
                         ddx(sm.moment_profiles.row(3), i)) +
          (5.0 / 3.0) * (I * k(0) * sm.lambda_profiles(0, i) +
                         I * k(1) * sm.lambda_profiles(1, i) +
                         ddx(sm.lambda_profiles.row(2), i));
      rc += dx * std::norm(re);
    }
    out.t.push_back(sm.t);
    out.mass.push_back(std::sqrt(rm));
    out.momentum.push_back(std::sqrt(rb));
    out.energy.push_back(std::sqrt(rc));
  }
  return out;
}

}  // namespace slabkin
