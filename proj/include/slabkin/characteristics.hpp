#ifndef SLABKIN_CHARACTERISTICS_HPP
#define SLABKIN_CHARACTERISTICS_HPP

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace slabkin {

struct ExitPoint {
  double t_b = 0.0;
  int x_b = 0;  // -1 or +1
};

// Backward exit of the characteristic through (x3, v3).
ExitPoint backward_exit(double x3, double v3);

// One diffuse re-emission draw from d(sigma) = sqrt(2*pi) mu(v) |v3| dv:
// v1, v2 standard normal, |v3| Rayleigh, sign pointing into the slab from
// the wall at x3 = wall_sign. Draws with |v3| < 1e-8 are resampled.
Eigen::Vector3d sample_diffuse(int wall_sign, std::mt19937_64& rng,
                               long* resamples = nullptr);

enum class SurvivalMethod { Auto, Direct, Importance };

struct SurvivalEstimate {
  double T0 = 0.0;
  int n = 0;
  long samples = 0;
  double p_hat = 0.0;       // may underflow to 0 for deep-tail points
  double stderr_rel = 0.0;  // relative standard error of p_hat
  double log2_p = 0.0;
  double log2_stderr = 0.0;
  long resamples = 0;
  bool importance_sampled = false;
  double tilt_lambda = 0.0;
};

// Probability that a stochastic cycle of n wall bounces (each consuming
// 2/|v3| of backward time) still has time left out of the budget T0. The
// deep-tail points use an exponentially tilted bounce-time proposal sampled
// through a tabulated inverse CDF, with exact per-bounce likelihood weights,
// so the estimator remains unbiased Monte Carlo.
SurvivalEstimate cycle_survival(double T0, int n, long samples,
                                std::uint64_t seed,
                                SurvivalMethod method = SurvivalMethod::Auto);

}  // namespace slabkin

#endif
