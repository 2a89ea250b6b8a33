#include "slabkin/collision.hpp"

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace slabkin {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Pairs whose Maxwellian prefactor mu(u)*sqrt(mu(v)) falls below this times
// the global peak are skipped in the quadrature loops; far below every
// tolerance in use, it roughly halves the assembly cost.
constexpr double kMuCutoff = 1e-17;

struct SphereTables {
  // base-frame decomposition of each direction: omega = ce*e + c1*t1 + c2*t2
  Eigen::VectorXd ce, c1, c2, w;
};

SphereTables sphere_tables(int n_polar, int n_azimuth) {
  SphereQuadrature sq = build_sphere(n_polar, n_azimuth);
  SphereTables t;
  const int nm = sq.size();
  t.ce.resize(nm);
  t.c1.resize(nm);
  t.c2.resize(nm);
  t.w.resize(nm);
  for (int m = 0; m < nm; ++m) {
    t.ce(m) = sq.directions(2, m);
    t.c1(m) = sq.directions(0, m);
    t.c2(m) = sq.directions(1, m);
    t.w(m) = sq.weights(m);
  }
  return t;
}

}  // namespace

CollisionOperator::CollisionOperator(std::shared_ptr<const VelocityGrid> grid,
                                     Eigen::VectorXd nu, Eigen::MatrixXd K,
                                     CollisionMeta meta)
    : grid_(std::move(grid)),
      proj_(std::make_shared<Projector>(grid_)),
      nu_(std::move(nu)),
      K_(std::move(K)),
      meta_(meta) {}

Eigen::VectorXd CollisionOperator::apply_K(
    const Eigen::Ref<const Eigen::VectorXd>& f) const {
  return K_ * f;
}

Eigen::VectorXd CollisionOperator::apply_L(
    const Eigen::Ref<const Eigen::VectorXd>& f) const {
  return nu_.cwiseProduct(f) - K_ * f;
}

Eigen::VectorXcd CollisionOperator::apply_L(
    const Eigen::Ref<const Eigen::VectorXcd>& f) const {
  Eigen::VectorXd re = nu_.cwiseProduct(f.real()) - K_ * f.real();
  Eigen::VectorXd im = nu_.cwiseProduct(f.imag()) - K_ * f.imag();
  Eigen::VectorXcd out(f.size());
  out.real() = re;
  out.imag() = im;
  return out;
}

double nu_at(const VelocityGrid& grid, const Eigen::Vector3d& v) {
  double acc = 0.0;
  for (int j = 0; j < grid.size(); ++j) {
    const double sm = grid.sqrt_mu(j);
    acc += grid.weights(j) * (v - grid.nodes.col(j)).norm() * sm * sm;
  }
  return kTwoPi * acc;
}

Eigen::VectorXd collision_frequency(const VelocityGrid& grid,
                                    const SphereQuadrature& sq) {
  const int nv = grid.size();
  Eigen::VectorXd nu = Eigen::VectorXd::Zero(nv);
  for (int i = 0; i < nv; ++i) {
    double acc = 0.0;
    for (int j = 0; j < nv; ++j) {
      const Eigen::Vector3d r = grid.nodes.col(i) - grid.nodes.col(j);
      double ang = 0.0;
      for (int m = 0; m < sq.size(); ++m)
        ang += sq.weights(m) * std::abs(r.dot(sq.directions.col(m)));
      const double sm = grid.sqrt_mu(j);
      acc += grid.weights(j) * sm * sm * ang;
    }
    nu(i) = acc;
  }
  return nu;
}

CollisionOperator build_collision(std::shared_ptr<const VelocityGrid> grid,
                                  const CollisionBuildOptions& opt) {
  const VelocityGrid& g = *grid;
  if (g.scheme != GridScheme::UniformCartesian)
    throw std::invalid_argument(
        "collision build requires the uniform cartesian grid");

  const int nv = g.size();
  const SphereTables st = sphere_tables(opt.sphere_polar, opt.sphere_azimuth);
  const int nm = static_cast<int>(st.w.size());

  Eigen::VectorXd nu(nv);
  for (int i = 0; i < nv; ++i) nu(i) = nu_at(g, g.nodes.col(i));

  Eigen::VectorXd inv_sm = g.sqrt_mu.cwiseInverse();
  Eigen::VectorXd mu(nv);
  for (int i = 0; i < nv; ++i) mu(i) = g.sqrt_mu(i) * g.sqrt_mu(i);
  const double mu_peak = mu.maxCoeff() * g.sqrt_mu.maxCoeff();

  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nv, nv);
  double fallback_w = 0.0, total_w = 0.0;

  // Gain terms interpolate the Maxwellian-normalized ratio f/sqrt(mu), so the
  // lattice reproduction of linear functions makes mass and momentum exact in
  // the raw build; the sphere rule's polar axis is rotated onto u-v per pair,
  // which resolves |(v-u).omega| exactly.
  for (int i = 0; i < nv; ++i) {
    const Eigen::Vector3d v = g.nodes.col(i);
    for (int j = 0; j < nv; ++j) {
      if (j == i) continue;
      const double pref = mu(j) * g.sqrt_mu(i);
      if (pref < kMuCutoff * mu_peak) continue;
      const Eigen::Vector3d u = g.nodes.col(j);
      const Eigen::Vector3d r = u - v;
      const double rn = r.norm();
      Eigen::Vector3d e, t1, t2;
      orthonormal_frame(r, e, t1, t2);
      const double base = g.weights(j) * rn * pref;
      for (int m = 0; m < nm; ++m) {
        const double A = base * st.w(m) * std::abs(st.ce(m));
        if (A == 0.0) continue;
        K(i, j) -= A * inv_sm(j);
        const Eigen::Vector3d omega =
            st.ce(m) * e + st.c1(m) * t1 + st.c2(m) * t2;
        const double proj = rn * st.ce(m);
        const Eigen::Vector3d vp = v + proj * omega;
        const Eigen::Vector3d up = u - proj * omega;
        total_w += 2.0 * A;
        TrilinearStencil sv = trilinear_stencil(g, vp);
        if (sv.inside)
          for (int c = 0; c < 8; ++c)
            K(i, sv.idx[c]) += A * sv.coef[c] * inv_sm(sv.idx[c]);
        else
          fallback_w += A;
        TrilinearStencil su = trilinear_stencil(g, up);
        if (su.inside)
          for (int c = 0; c < 8; ++c)
            K(i, su.idx[c]) += A * su.coef[c] * inv_sm(su.idx[c]);
        else
          fallback_w += A;
      }
    }
  }

  CollisionMeta meta;
  meta.n_per_axis = g.n_per_axis;
  meta.v_max = g.v_max;
  meta.sphere_polar = opt.sphere_polar;
  meta.sphere_azimuth = opt.sphere_azimuth;
  meta.structure_fix = opt.structure_fix;
  meta.fallback_rate = total_w > 0.0 ? fallback_w / total_w : 0.0;

  Projector proj(grid);
  const Eigen::MatrixXd& psi = proj.basis();
  double raw_null = 0.0;
  for (int c = 0; c < 5; ++c) {
    Eigen::VectorXd res = nu.cwiseProduct(psi.col(c)) - K * psi.col(c);
    double rel = std::sqrt(dot_v(g, res, res)) /
                 std::sqrt(dot_v(g, Eigen::VectorXd(nu.cwiseProduct(psi.col(c))),
                                 Eigen::VectorXd(nu.cwiseProduct(psi.col(c)))));
    raw_null = std::max(raw_null, rel);
  }
  meta.raw_null_residual = raw_null;
  meta.raw_symmetry_residual =
      (K - K.transpose()).cwiseAbs().maxCoeff() / K.cwiseAbs().maxCoeff();

  if (opt.structure_fix) {
    // Symmetrize (uniform weights make the weight-conjugated and plain
    // symmetrizations coincide), then deflate the five invariants out of L
    // with two rank-5 updates so the null space holds to rounding.
    K = 0.5 * (K + K.transpose()).eval();
    Eigen::MatrixXd L = -K;
    L.diagonal() += nu;
    const Eigen::MatrixXd& U = proj.orthonormal_basis();
    Eigen::MatrixXd V = g.weights.asDiagonal() * U;
    Eigen::MatrixXd M = V.transpose() * L;  // 5 x nv
    L.noalias() -= U * M;                   // (I-P) L
    Eigen::MatrixXd M2 = L * U;             // nv x 5
    L.noalias() -= M2 * V.transpose();      // (I-P) L (I-P)
    K = -L;
    K.diagonal() += nu;
  }

  meta.nu_fit = 1e300;
  for (int i = 0; i < nv; ++i)
    meta.nu_fit = std::min(
        meta.nu_fit, nu(i) / std::sqrt(1.0 + g.nodes.col(i).squaredNorm()));

  return CollisionOperator(std::move(grid), std::move(nu), std::move(K), meta);
}

namespace {

template <typename Scalar>
Eigen::Vector<Scalar, Eigen::Dynamic> gamma_core(
    const CollisionOperator& op,
    const Eigen::Ref<const Eigen::Vector<Scalar, Eigen::Dynamic>>& f,
    const Eigen::Ref<const Eigen::Vector<Scalar, Eigen::Dynamic>>& g) {
  const VelocityGrid& gr = op.grid();
  const int nv = gr.size();
  const SphereTables st =
      sphere_tables(op.meta().sphere_polar, op.meta().sphere_azimuth);
  const int nm = static_cast<int>(st.w.size());
  Eigen::Vector<Scalar, Eigen::Dynamic> out =
      Eigen::Vector<Scalar, Eigen::Dynamic>::Zero(nv);
  const double mu_peak = gr.sqrt_mu.maxCoeff();

  for (int i = 0; i < nv; ++i) {
    const Eigen::Vector3d v = gr.nodes.col(i);
    Scalar acc{};
    for (int j = 0; j < nv; ++j) {
      if (j == i) continue;
      const double smu = gr.sqrt_mu(j);
      if (smu < kMuCutoff * mu_peak) continue;
      const Eigen::Vector3d u = gr.nodes.col(j);
      const Eigen::Vector3d r = u - v;
      const double rn = r.norm();
      Eigen::Vector3d e, t1, t2;
      orthonormal_frame(r, e, t1, t2);
      const double base = gr.weights(j) * rn * smu;
      const Scalar loss = f(j) * g(i);
      for (int m = 0; m < nm; ++m) {
        const double A = base * st.w(m) * std::abs(st.ce(m));
        const Eigen::Vector3d omega =
            st.ce(m) * e + st.c1(m) * t1 + st.c2(m) * t2;
        const double proj = rn * st.ce(m);
        const Eigen::Vector3d up = u - proj * omega;
        const Eigen::Vector3d vp = v + proj * omega;
        Scalar fu{}, gv{};
        TrilinearStencil su = trilinear_stencil(gr, up);
        if (su.inside)
          for (int c = 0; c < 8; ++c) fu += su.coef[c] * f(su.idx[c]);
        TrilinearStencil sv = trilinear_stencil(gr, vp);
        if (sv.inside)
          for (int c = 0; c < 8; ++c) gv += sv.coef[c] * g(sv.idx[c]);
        acc += A * (fu * gv - loss);
      }
    }
    out(i) = acc;
  }
  return out;
}

}  // namespace

Eigen::VectorXd gamma(const CollisionOperator& op,
                      const Eigen::Ref<const Eigen::VectorXd>& f,
                      const Eigen::Ref<const Eigen::VectorXd>& g,
                      double* raw_defect) {
  Eigen::VectorXd raw = gamma_core<double>(op, f, g);
  Eigen::VectorXd macro = op.projector().project(raw);
  if (raw_defect) {
    double denom = std::sqrt(dot_v(op.grid(), f, f) * dot_v(op.grid(), g, g));
    *raw_defect =
        denom > 0.0 ? std::sqrt(dot_v(op.grid(), macro, macro)) / denom : 0.0;
  }
  return raw - macro;
}

Eigen::VectorXcd gamma(const CollisionOperator& op,
                       const Eigen::Ref<const Eigen::VectorXcd>& f,
                       const Eigen::Ref<const Eigen::VectorXcd>& g,
                       double* raw_defect) {
  Eigen::VectorXcd raw = gamma_core<std::complex<double>>(op, f, g);
  Eigen::VectorXcd macro = op.projector().project(raw);
  if (raw_defect) {
    double denom = norm_v(op.grid(), f) * norm_v(op.grid(), g);
    *raw_defect = denom > 0.0 ? norm_v(op.grid(), macro) / denom : 0.0;
  }
  return raw - macro;
}

int ModeLattice::find(const Eigen::Vector2d& k) const {
  for (size_t i = 0; i < ks.size(); ++i)
    if ((ks[i] - k).norm() <= 1e-9 * std::max(1.0, k.norm()))
      return static_cast<int>(i);
  return -1;
}

std::vector<Eigen::MatrixXcd> gamma_hat(
    const CollisionOperator& op, const ModeLattice& lattice,
    const std::vector<Eigen::MatrixXcd>& fhat,
    const std::vector<Eigen::MatrixXcd>& ghat, int* dropped_pairs) {
  if (lattice.ks.empty()) throw std::invalid_argument("empty mode set");
  if (fhat.size() != lattice.ks.size() || ghat.size() != lattice.ks.size())
    throw std::invalid_argument("mode field count mismatch");
  const int nmodes = static_cast<int>(lattice.ks.size());
  const double dl = lattice.spacing * lattice.spacing;
  int dropped = 0;
  std::vector<Eigen::MatrixXcd> out(nmodes);
  for (int t = 0; t < nmodes; ++t)
    out[t] = Eigen::MatrixXcd::Zero(fhat[t].rows(), fhat[t].cols());
  for (int t = 0; t < nmodes; ++t) {
    for (int l = 0; l < nmodes; ++l) {
      int d = lattice.find(lattice.ks[t] - lattice.ks[l]);
      if (d < 0) {
        ++dropped;
        continue;
      }
      for (int x = 0; x < out[t].cols(); ++x)
        out[t].col(x) +=
            dl * gamma(op, Eigen::VectorXcd(fhat[d].col(x)),
                       Eigen::VectorXcd(ghat[l].col(x)));
    }
  }
  if (dropped_pairs) *dropped_pairs = dropped;
  return out;
}

KthetaReport ktheta_truncation_check(const CollisionOperator& op,
                                     const WeightFunction& wf, double N) {
  if (N < 2.0) throw std::invalid_argument("N must be >= 2");
  const VelocityGrid& g = op.grid();
  const int nv = g.size();
  KthetaReport rep;
  rep.N = N;
  for (int i = 0; i < nv; ++i) {
    const Eigen::Vector3d v = g.nodes.col(i);
    const double ev = std::exp(wf.theta * v.squaredNorm());
    double tail = 0.0, row = 0.0;
    for (int j = 0; j < nv; ++j) {
      if (j == i) continue;
      const Eigen::Vector3d u = g.nodes.col(j);
      const double fac =
          ev * std::exp(-wf.theta * u.squaredNorm()) * std::abs(op.K()(i, j));
      row += fac;
      const double ru = (v - u).norm();
      if (u.norm() > N || ru <= 1.0 / N) tail += fac;
      if (ru > 1.0 / N)
        rep.bounded_region_sup =
            std::max(rep.bounded_region_sup, fac / g.weights(j));
    }
    rep.tail_bound = std::max(rep.tail_bound, tail);
    rep.row_sum_bound = std::max(rep.row_sum_bound, (1.0 + v.norm()) * row);
  }
  return rep;
}

std::string collision_cache_key(const VelocityGrid& grid,
                                const CollisionBuildOptions& opt) {
  std::ostringstream ss;
  ss << "cart_n" << grid.n_per_axis << "_vmax" << grid.v_max << "_sp"
     << opt.sphere_polar << "x" << opt.sphere_azimuth << "_fix"
     << (opt.structure_fix ? 1 : 0) << "_v1";
  return ss.str();
}

void save_collision_cache(const CollisionOperator& op,
                          const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open cache file for writing: " + path);
  CollisionBuildOptions opt;
  opt.sphere_polar = op.meta().sphere_polar;
  opt.sphere_azimuth = op.meta().sphere_azimuth;
  opt.structure_fix = op.meta().structure_fix;
  std::string key = collision_cache_key(op.grid(), opt);
  std::ostringstream hs;
  hs << "{\"key\":\"" << key << "\",\"nv\":" << op.grid().size()
     << ",\"raw_null\":" << op.meta().raw_null_residual
     << ",\"raw_sym\":" << op.meta().raw_symmetry_residual
     << ",\"fallback\":" << op.meta().fallback_rate
     << ",\"nu_fit\":" << op.meta().nu_fit << "}";
  std::string header = hs.str();
  const char magic[4] = {'S', 'L', 'B', 'K'};
  std::uint32_t hlen = static_cast<std::uint32_t>(header.size());
  f.write(magic, 4);
  f.write(reinterpret_cast<const char*>(&hlen), 4);
  f.write(header.data(), hlen);
  const int nv = op.grid().size();
  f.write(reinterpret_cast<const char*>(op.nu().data()), nv * sizeof(double));
  f.write(reinterpret_cast<const char*>(op.K().data()),
          static_cast<std::streamsize>(nv) * nv * sizeof(double));
}

std::optional<CollisionOperator> load_collision_cache(
    std::shared_ptr<const VelocityGrid> grid, const CollisionBuildOptions& opt,
    const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) return std::nullopt;
  char magic[4];
  std::uint32_t hlen = 0;
  f.read(magic, 4);
  f.read(reinterpret_cast<char*>(&hlen), 4);
  if (!f || std::string(magic, 4) != "SLBK" || hlen > 1 << 20)
    return std::nullopt;
  std::string header(hlen, '\0');
  f.read(header.data(), hlen);
  std::string key = collision_cache_key(*grid, opt);
  if (header.find("\"key\":\"" + key + "\"") == std::string::npos)
    return std::nullopt;
  const int nv = grid->size();
  Eigen::VectorXd nu(nv);
  Eigen::MatrixXd K(nv, nv);
  f.read(reinterpret_cast<char*>(nu.data()), nv * sizeof(double));
  f.read(reinterpret_cast<char*>(K.data()),
         static_cast<std::streamsize>(nv) * nv * sizeof(double));
  if (!f) return std::nullopt;

  CollisionMeta meta;
  meta.n_per_axis = grid->n_per_axis;
  meta.v_max = grid->v_max;
  meta.sphere_polar = opt.sphere_polar;
  meta.sphere_azimuth = opt.sphere_azimuth;
  meta.structure_fix = opt.structure_fix;
  auto field = [&header](const std::string& name) {
    auto pos = header.find("\"" + name + "\":");
    return pos == std::string::npos
               ? 0.0
               : std::strtod(header.c_str() + pos + name.size() + 3, nullptr);
  };
  meta.raw_null_residual = field("raw_null");
  meta.raw_symmetry_residual = field("raw_sym");
  meta.fallback_rate = field("fallback");
  meta.nu_fit = field("nu_fit");
  return CollisionOperator(std::move(grid), std::move(nu), std::move(K), meta);
}

CollisionOperator build_collision_cached(
    std::shared_ptr<const VelocityGrid> grid, const CollisionBuildOptions& opt,
    std::string dir) {
  if (dir.empty()) {
    const char* env = std::getenv("SLABKIN_CACHE_DIR");
    if (env) dir = env;
  }
  if (dir.empty()) return build_collision(std::move(grid), opt);
  std::filesystem::create_directories(dir);
  std::string path = dir + "/" + collision_cache_key(*grid, opt) + ".bin";
  if (auto cached = load_collision_cache(grid, opt, path)) return *cached;
  CollisionOperator op = build_collision(grid, opt);
  save_collision_cache(op, path);
  return op;
}

}  // namespace slabkin
