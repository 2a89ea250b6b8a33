#ifndef SLABKIN_DIAGNOSTICS_HPP
#define SLABKIN_DIAGNOSTICS_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "slabkin/slab.hpp"

namespace slabkin {

enum class EllipticKind { ANeumann, B1Dirichlet, B2Dirichlet, B3Dirichlet, CDirichlet };

enum class RhsWeight {
  KK1,        // |k|^2 / (1+|k|^2)
  KSqrt1,     // |k| / sqrt(1+|k|^2)
  KHalf,      // |k|^{1/2} / (1+|k|^2)^{1/4}
  Unweighted
};

double rhs_weight_value(RhsWeight w, double kabs);

struct EllipticProblem {
  EllipticKind kind = EllipticKind::CDirichlet;
  Eigen::Vector2d k{0.0, 0.0};
  Eigen::VectorXcd rhs;  // on the Nx+1 solve nodes
  RhsWeight weight = RhsWeight::Unweighted;
};

struct EllipticSolution {
  Eigen::VectorXcd phi, dphi, d2phi;
  double norm_kphi = 0.0;   // || |k| phi ||
  double norm_dphi = 0.0;
  double norm_d2phi = 0.0;
};

// Second-order finite differences on the uniform node grid x_j = -1 + 2j/Nx.
// The a-kind equation reads (|k|^2 - d^2) phi = -W(k) rhs with zero Neumann
// data; the b/c kinds solve (pattern) phi = W(k) rhs with zero Dirichlet data.
EllipticSolution elliptic_solve(const EllipticProblem& p, int nx);

enum class DecayModel { Exponential, PowerLaw };

struct DecayFit {
  DecayModel model = DecayModel::Exponential;
  double rate = 0.0;      // lambda of e^{-lambda t}, or p of (1+t)^{-p}
  double residual = 0.0;  // rms log residual over the window
  double r_squared = 0.0;
  int i0 = 0, i1 = 0;     // fitted window [i0, i1)
};

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& value,
                   DecayModel model, int i0 = 0, int i1 = -1);

struct DissipationRow {
  double t = 0.0;
  double micro = 0.0;          // ||(I-P)f||_nu
  double boundary = 0.0;       // |(I-P_gamma) f|_{gamma+}
  double macro_weighted = 0.0;  // (|k|/sqrt(1+|k|^2)) ||(a,b,c)||_{x3}
  double b3_refined = 0.0;     // sqrt(|k|)/(1+|k|^2)^{1/4} ||b3||
  double c_refined = 0.0;      // |k|^{1/4}/(1+|k|^2)^{1/8} ||c||
  double b12_unweighted = 0.0;
  double time_weight = 0.0;    // (1+t)^{sigma/2}
};

std::vector<DissipationRow> dissipation_report(const Trajectory& traj,
                                               double sigma);
std::string dissipation_csv(const std::vector<DissipationRow>& rows);

struct ConservationResiduals {
  std::vector<double> t;       // interior sample times (centered differences)
  std::vector<double> mass;    // residual norms over x3
  std::vector<double> momentum;
  std::vector<double> energy;
};

// Residuals of the mass/momentum/energy conservation laws evaluated from the
// stored moment and (I-P)f functional profiles of a trajectory.
ConservationResiduals conservation_residuals(const Trajectory& traj,
                                             const Eigen::Vector2d& k);

}  // namespace slabkin

#endif
