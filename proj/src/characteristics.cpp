#include "slabkin/characteristics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace slabkin {

ExitPoint backward_exit(double x3, double v3) {
  if (v3 == 0.0)
    throw std::invalid_argument("v3 = 0: infinite backward exit time");
  if (x3 < -1.0 || x3 > 1.0)
    throw std::invalid_argument("x3 outside [-1, 1]");
  ExitPoint e;
  if (v3 > 0.0) {
    e.t_b = (x3 + 1.0) / v3;
    e.x_b = -1;
  } else {
    e.t_b = (x3 - 1.0) / v3;
    e.x_b = +1;
  }
  return e;
}

Eigen::Vector3d sample_diffuse(int wall_sign, std::mt19937_64& rng,
                               long* resamples) {
  if (wall_sign != -1 && wall_sign != 1)
    throw std::invalid_argument("wall_sign must be -1 or +1");
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double v1 = gauss(rng);
  const double v2 = gauss(rng);
  double speed;
  for (;;) {
    double u = unif(rng);
    speed = std::sqrt(-2.0 * std::log1p(-u));  // Rayleigh(1)
    if (speed >= 1e-8) break;
    if (resamples) ++(*resamples);
  }
  return {v1, v2, wall_sign == -1 ? speed : -speed};
}

namespace {

// Rayleigh bounce-speed density tilted by exp(-lambda * 2/v), tabulated so
// inverse-CDF sampling has an exactly known piecewise-constant density.
struct TiltedTable {
  double lambda = 0.0;
  double v_lo = 1e-8, v_hi = 20.0;
  int cells = 4096;
  std::vector<double> cdf;   // cells+1, normalized
  double dv = 0.0;

  void build(double lam) {
    lambda = lam;
    dv = (v_hi - v_lo) / cells;
    cdf.assign(cells + 1, 0.0);
    auto logdens = [lam](double v) {
      return std::log(v) - 0.5 * v * v - 2.0 * lam / v;
    };
    // shift out the overall scale so deep tilts do not underflow
    double peak = -1e300;
    for (int i = 0; i <= cells; ++i)
      peak = std::max(peak, logdens(v_lo + i * dv));
    double prev = std::exp(logdens(v_lo) - peak);
    for (int i = 1; i <= cells; ++i) {
      double cur = std::exp(logdens(v_lo + i * dv) - peak);
      cdf[i] = cdf[i - 1] + 0.5 * (prev + cur) * dv;
      prev = cur;
    }
    const double z = cdf[cells];
    for (double& c : cdf) c /= z;
  }

  // sample and return (v, log proposal density)
  std::pair<double, double> sample(double u) const {
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    int i = std::clamp(static_cast<int>(it - cdf.begin()) - 1, 0, cells - 1);
    double mass = std::max(cdf[i + 1] - cdf[i], 1e-300);
    double v = v_lo + (i + (u - cdf[i]) / mass) * dv;
    return {v, std::log(mass / dv)};
  }

  double mean_tau() const {
    // E[2/v] under the tabulated proposal
    double acc = 0.0;
    for (int i = 0; i < cells; ++i) {
      double vm = v_lo + (i + 0.5) * dv;
      acc += (cdf[i + 1] - cdf[i]) * 2.0 / vm;
    }
    return acc;
  }
};

}  // namespace

SurvivalEstimate cycle_survival(double T0, int n, long samples,
                                std::uint64_t seed, SurvivalMethod method) {
  if (!(T0 > 0.0)) throw std::invalid_argument("T0 must be positive");
  if (n < 1) throw std::invalid_argument("n must be positive");
  if (samples < 1000) throw std::invalid_argument("need at least 10^3 samples");

  SurvivalEstimate est;
  est.T0 = T0;
  est.n = n;
  est.samples = samples;

  bool use_is = method == SurvivalMethod::Importance;
  if (method == SurvivalMethod::Auto)
    // direct counting is hopeless once the per-chain exponent ~2 n^3 / T0^2
    // is large; switch to the tilted estimator well before that
    use_is = 2.0 * n * n * n / (T0 * T0) > 8.0;

  std::mt19937_64 rng(seed);

  if (!use_is) {
    long hits = 0;
    for (long s = 0; s < samples; ++s) {
      double budget = T0;
      // the tangential components do not affect survival; draw only |v3|
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      bool alive = true;
      for (int i = 0; i < n; ++i) {
        double speed;
        for (;;) {
          speed = std::sqrt(-2.0 * std::log1p(-unif(rng)));
          if (speed >= 1e-8) break;
          ++est.resamples;
        }
        budget -= 2.0 / speed;
        if (budget <= 0.0) {
          alive = false;
          break;
        }
      }
      if (alive) ++hits;
    }
    est.p_hat = static_cast<double>(hits) / samples;
    est.stderr_rel = hits > 0
                         ? std::sqrt((1.0 - est.p_hat) / hits)
                         : 0.0;
    est.log2_p = hits > 0 ? std::log2(est.p_hat)
                          : -std::numeric_limits<double>::infinity();
    est.log2_stderr = est.stderr_rel / std::numbers::ln2;
    return est;
  }

  // choose lambda so the tilted mean bounce time matches the budget boundary
  const double target = T0 / n;
  TiltedTable table;
  double lo = 0.0, hi = 40.0 * n * n * n / (T0 * T0 * T0) + 10.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    table.build(mid);
    if (table.mean_tau() > target)
      lo = mid;
    else
      hi = mid;
  }
  table.build(0.5 * (lo + hi));
  est.importance_sampled = true;
  est.tilt_lambda = table.lambda;

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> logw_hits;
  logw_hits.reserve(samples / 2);
  for (long s = 0; s < samples; ++s) {
    double budget = T0;
    double logw = 0.0;
    bool alive = true;
    for (int i = 0; i < n; ++i) {
      auto [v, logq] = table.sample(unif(rng));
      logw += std::log(v) - 0.5 * v * v - logq;  // Rayleigh over proposal
      budget -= 2.0 / v;
      if (budget <= 0.0) {
        alive = false;
        break;
      }
    }
    if (alive) logw_hits.push_back(logw);
  }

  if (logw_hits.empty()) {
    est.p_hat = 0.0;
    est.log2_p = -std::numeric_limits<double>::infinity();
    return est;
  }
  const double shift = *std::max_element(logw_hits.begin(), logw_hits.end());
  double sum_w = 0.0, sum_w2 = 0.0;
  for (double lw : logw_hits) {
    double w = std::exp(lw - shift);
    sum_w += w;
    sum_w2 += w * w;
  }
  const double log_p = shift + std::log(sum_w) - std::log(double(samples));
  est.log2_p = log_p / std::numbers::ln2;
  est.p_hat = std::exp(log_p);  // 0 on underflow; log2_p stays valid
  est.stderr_rel = std::sqrt(std::max(0.0, sum_w2 / (sum_w * sum_w) -
                                               1.0 / samples));
  est.log2_stderr = est.stderr_rel / std::numbers::ln2;
  return est;
}

}  // namespace slabkin
