#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "slabkin/boundary.hpp"
#include "slabkin/characteristics.hpp"
#include "slabkin/collision.hpp"
#include "slabkin/config.hpp"
#include "slabkin/diagnostics.hpp"
#include "slabkin/slab.hpp"
#include "slabkin/trajectory_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string file_hash(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) return "";
  std::ostringstream ss;
  ss << f.rdbuf();
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(slabkin::fnv1a(ss.str())));
  return buf;
}

std::string cache_file_for(const slabkin::VelocityGrid& grid,
                           const slabkin::CollisionBuildOptions& opt,
                           const std::string& dir) {
  std::string d = dir;
  if (d.empty())
    if (const char* env = std::getenv("SLABKIN_CACHE_DIR")) d = env;
  if (d.empty()) return "";
  return (fs::path(d) / (slabkin::collision_cache_key(grid, opt) + ".bin"))
      .string();
}

void write_manifest(const fs::path& out_dir, const std::string& command,
                    const slabkin::RunConfig& cfg, const std::string& cache_path) {
  json man;
  man["command"] = command;
  man["version"] = slabkin::kVersion;
  man["config"] = json::parse(slabkin::config_manifest(cfg));
  man["operator_cache"] = cache_path;
  man["operator_cache_hash"] = cache_path.empty() ? "" : file_hash(cache_path);
  std::ofstream f(out_dir / "run_manifest.json", std::ios::binary);
  f << man.dump(2) << "\n";
}

slabkin::CollisionBuildOptions build_options(const slabkin::RunConfig& cfg) {
  slabkin::CollisionBuildOptions opt;
  opt.sphere_polar = cfg.sphere.polar;
  opt.sphere_azimuth = cfg.sphere.azimuth;
  return opt;
}

int run_simulate(const std::string& config_path,
                 const std::vector<std::string>& overrides,
                 const std::string& out_dir, const std::string& cache_dir) {
  auto cfg = slabkin::parse_config_file(config_path, overrides);
  fs::create_directories(out_dir);

  auto grid = std::make_shared<slabkin::VelocityGrid>(slabkin::build_grid(
      cfg.velocity.n, cfg.velocity.vmax, cfg.velocity.scheme));
  std::shared_ptr<const slabkin::CollisionOperator> op;
  std::string cache_path;
  if (cfg.collision) {
    auto opt = build_options(cfg);
    cache_path = cache_file_for(*grid, opt, cache_dir);
    op = std::make_shared<slabkin::CollisionOperator>(
        slabkin::build_collision_cached(grid, opt, cache_dir));
  }

  slabkin::SlabSolver solver(cfg, grid, op);
  auto trajs = solver.simulate();
  for (size_t m = 0; m < trajs.size(); ++m) {
    char name[64];
    std::snprintf(name, sizeof(name), "trajectory_mode%zu.csv", m);
    slabkin::write_trajectory(trajs[m], (fs::path(out_dir) / name).string());
    for (size_t s = 0; s < trajs[m].snapshots.size(); ++s) {
      char sn[64];
      std::snprintf(sn, sizeof(sn), "snapshot_mode%zu_%04zu.bin", m, s);
      slabkin::Snapshot snap{trajs[m].snapshots[s].first, trajs[m].k,
                             trajs[m].snapshots[s].second};
      slabkin::write_snapshot(snap, (fs::path(out_dir) / sn).string());
    }
  }
  write_manifest(out_dir, "simulate", cfg, cache_path);
  std::cout << "wrote " << trajs.size() << " mode trajectories to " << out_dir
            << "\n";
  return 0;
}

struct CheckList {
  json report = json::array();
  bool ok = true;
  void add(const std::string& name, bool pass, double value, double bound) {
    report.push_back({{"check", name},
                      {"pass", pass},
                      {"value", value},
                      {"bound", bound}});
    ok = ok && pass;
    std::cout << (pass ? "[ ok ] " : "[FAIL] ") << name << "  value=" << value
              << " bound=" << bound << "\n";
  }
};

int run_verify(const std::string& config_path,
               const std::vector<std::string>& overrides,
               const std::string& out_dir, const std::string& cache_dir) {
  slabkin::RunConfig cfg;
  if (!config_path.empty()) {
    cfg = slabkin::parse_config_file(config_path, overrides);
  } else {
    // small default problem so the suite stays fast
    cfg = slabkin::parse_config(
        R"({"modes": [[0.5, 0.0]], "dt": 0.002, "t_end": 0.1, "nx": 32,
            "velocity": {"n": 8, "vmax": 5.0}})",
        overrides);
  }
  fs::create_directories(out_dir);

  auto grid = std::make_shared<slabkin::VelocityGrid>(slabkin::build_grid(
      cfg.velocity.n, cfg.velocity.vmax, cfg.velocity.scheme));
  auto opt = build_options(cfg);
  const std::string cache_path = cache_file_for(*grid, opt, cache_dir);
  auto op = std::make_shared<slabkin::CollisionOperator>(
      slabkin::build_collision_cached(grid, opt, cache_dir));

  CheckList checks;
  const int nv = static_cast<int>(grid->weights.size());

  // L annihilates the collision invariants
  slabkin::Projector proj(grid);
  double null_res = 0.0;
  for (int c = 0; c < 5; ++c) {
    Eigen::VectorXd chi = proj.orthonormal_basis().col(c);
    null_res = std::max(null_res, op->apply_L(chi).cwiseAbs().maxCoeff());
  }
  checks.add("null_space", null_res <= 1e-6, null_res, 1e-6);

  // symmetry of K under the weighted inner product
  double sym = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd f = Eigen::VectorXd::Random(nv);
    Eigen::VectorXd g = Eigen::VectorXd::Random(nv);
    double fg = slabkin::dot_v(*grid, op->apply_K(f), g);
    double gf = slabkin::dot_v(*grid, f, op->apply_K(g));
    sym = std::max(sym, std::abs(fg - gf) / std::max(std::abs(fg), 1e-30));
  }
  checks.add("K_symmetry", sym <= 1e-8, sym, 1e-8);

  // positive semidefiniteness of L
  double min_ray = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd f = Eigen::VectorXd::Random(nv);
    double q = slabkin::dot_v(*grid, op->apply_L(f), f) / f.squaredNorm();
    min_ray = std::min(min_ray, q);
  }
  checks.add("L_psd", min_ray >= -1e-10, min_ray, -1e-10);

  // nu lower bound nu(v) >= nu0 sqrt(1+|v|^2)
  checks.add("nu_lower_bound", op->meta().nu_fit > 0.0, op->meta().nu_fit, 0.0);

  // diffuse wall: zero mass flux through each wall after reflection
  slabkin::DiffuseWall wall(grid);
  double flux = 0.0;
  for (auto w : {slabkin::Wall::Bottom, slabkin::Wall::Top}) {
    Eigen::VectorXcd f = Eigen::VectorXcd::Random(nv);
    Eigen::VectorXcd refl = f;
    auto m0 = wall.wall_flux_moment(f, w);
    for (int i : wall.away(w))
      refl(i) = wall.c_mu_discrete() * grid->sqrt_mu(i) * m0;
    flux = std::max(flux, std::abs(wall.mass_flux(refl)));
  }
  checks.add("wall_zero_flux", flux <= 1e-14, flux, 1e-14);

  // elliptic manufactured solution, second order
  const double pi = 3.14159265358979323846;
  auto elliptic_err = [&](int nx) {
    slabkin::EllipticProblem p;
    p.kind = slabkin::EllipticKind::CDirichlet;
    p.k = {0.0, 0.0};
    p.weight = slabkin::RhsWeight::Unweighted;
    p.rhs.resize(nx + 1);
    for (int j = 0; j <= nx; ++j)
      p.rhs(j) = std::sin(pi * (-1.0 + 2.0 * j / nx));
    auto sol = slabkin::elliptic_solve(p, nx);
    double err = 0.0;
    for (int j = 0; j <= nx; ++j)
      err = std::max(err, std::abs(sol.phi(j) - std::sin(pi * (-1.0 + 2.0 * j / nx)) /
                                                    (pi * pi)));
    return err;
  };
  const double e1 = elliptic_err(32), e2 = elliptic_err(64);
  checks.add("elliptic_order", e1 / e2 >= 3.0 && e1 / e2 <= 5.0, e1 / e2, 4.0);

  // Neumann solvability: nonzero-mean rhs at k=0 must be rejected
  bool rejected = false;
  try {
    slabkin::EllipticProblem p;
    p.kind = slabkin::EllipticKind::ANeumann;
    p.k = {0.0, 0.0};
    p.rhs = Eigen::VectorXcd::Ones(33);
    slabkin::elliptic_solve(p, 32);
  } catch (const std::invalid_argument&) {
    rejected = true;
  }
  checks.add("neumann_solvability", rejected, rejected ? 1.0 : 0.0, 1.0);

  write_manifest(out_dir, "verify", cfg, cache_path);
  std::ofstream rf(fs::path(out_dir) / "verify_report.json", std::ios::binary);
  rf << checks.report.dump(2) << "\n";
  return checks.ok ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"slabkin: kinetic slab solver and verification toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", cache_dir;
  std::vector<std::string> overrides;

  auto add_common = [&](CLI::App* cmd, bool config_required) {
    auto* c = cmd->add_option("-c,--config", config_path, "JSON config file");
    if (config_required) c->required();
    cmd->add_option("-D,--define", overrides,
                    "dotted config overrides, e.g. velocity.n=12");
    cmd->add_option("-o,--out", out_dir, "output directory");
    cmd->add_option("--cache-dir", cache_dir,
                    "operator cache directory (or SLABKIN_CACHE_DIR)");
  };

  auto* sim = app.add_subcommand("simulate", "run the slab solver");
  add_common(sim, true);

  auto* ver = app.add_subcommand("verify", "run the invariant suite");
  add_common(ver, false);

  auto* mc = app.add_subcommand("mc-cycles", "bounce-chain survival estimate");
  double mc_t0 = 16.0;
  int mc_n = 4;
  long mc_samples = 100000;
  std::uint64_t mc_seed = 0;
  std::string mc_method = "auto";
  mc->add_option("--T0", mc_t0, "time budget")->required();
  mc->add_option("-n,--bounces", mc_n, "chain length")->required();
  mc->add_option("--samples", mc_samples, "number of chains");
  mc->add_option("--seed", mc_seed, "rng seed");
  mc->add_option("--method", mc_method, "auto | direct | importance")
      ->check(CLI::IsMember({"auto", "direct", "importance"}));
  mc->add_option("-o,--out", out_dir, "output directory");

  auto* fit = app.add_subcommand("decay-fit", "fit a decay rate to a trajectory");
  std::string fit_input, fit_column = "l2_norm", fit_model = "exponential";
  int fit_i0 = 0, fit_i1 = -1;
  fit->add_option("-i,--input", fit_input, "trajectory CSV path")->required();
  fit->add_option("--column", fit_column, "l2_norm | micro | boundary")
      ->check(CLI::IsMember({"l2_norm", "micro", "boundary"}));
  fit->add_option("--model", fit_model, "exponential | power-law")
      ->check(CLI::IsMember({"exponential", "power-law"}));
  fit->add_option("--begin", fit_i0, "window start index");
  fit->add_option("--end", fit_i1, "window end index (exclusive, -1 = all)");
  fit->add_option("-o,--out", out_dir, "output directory");

  auto* asm_cmd = app.add_subcommand(
      "assemble", "inverse Fourier assembly of per-mode snapshots");
  std::vector<std::string> asm_snaps;
  std::vector<double> asm_xbar;
  double asm_spacing = 1.0;
  int asm_dim = 2;
  bool asm_real = false;
  asm_cmd->add_option("-i,--input", asm_snaps, "per-mode snapshot files")
      ->required();
  asm_cmd->add_option("--xbar", asm_xbar,
                      "tangential probe coordinates, pairs x1 x2")
      ->required();
  asm_cmd->add_option("--spacing", asm_spacing, "mode lattice spacing");
  asm_cmd->add_option("--dim", asm_dim, "tangential dimension (1 or 2)");
  asm_cmd->add_flag("--require-real", asm_real,
                    "enforce conjugate symmetry of the mode set");
  asm_cmd->add_option("-o,--out", out_dir, "output directory");

  auto* cache = app.add_subcommand("cache-ops", "operator cache maintenance");
  std::string cache_action = "info";
  cache->add_option("--action", cache_action, "info | build | clear")
      ->check(CLI::IsMember({"info", "build", "clear"}));
  add_common(cache, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed())
      return run_simulate(config_path, overrides, out_dir, cache_dir);

    if (ver->parsed())
      return run_verify(config_path, overrides, out_dir, cache_dir);

    if (mc->parsed()) {
      auto method = mc_method == "direct" ? slabkin::SurvivalMethod::Direct
                    : mc_method == "importance"
                        ? slabkin::SurvivalMethod::Importance
                        : slabkin::SurvivalMethod::Auto;
      auto est = slabkin::cycle_survival(mc_t0, mc_n, mc_samples, mc_seed, method);
      json out;
      out["T0"] = est.T0;
      out["n"] = est.n;
      out["samples"] = est.samples;
      out["p_hat"] = est.p_hat;
      out["stderr"] = est.stderr_rel;
      out["log2_p"] = est.log2_p;
      out["log2_stderr"] = est.log2_stderr;
      out["resamples"] = est.resamples;
      out["importance_sampled"] = est.importance_sampled;
      out["tilt_lambda"] = est.tilt_lambda;
      std::cout << out.dump(2) << "\n";
      return 0;
    }

    if (fit->parsed()) {
      auto traj = slabkin::read_trajectory(fit_input);
      if (traj.hash_mismatch)
        std::cerr << "warning: data hash does not match the manifest of "
                  << fit_input << "\n";
      const std::vector<double>& series =
          fit_column == "micro"      ? traj.micro_dissipation
          : fit_column == "boundary" ? traj.boundary_dissipation
                                     : traj.l2_norm;
      auto model = fit_model == "power-law" ? slabkin::DecayModel::PowerLaw
                                            : slabkin::DecayModel::Exponential;
      auto f = slabkin::fit_decay(traj.t, series, model, fit_i0, fit_i1);
      json out;
      out["k"] = {traj.k1, traj.k2};
      out["column"] = fit_column;
      out["model"] = fit_model;
      out["rate"] = f.rate;
      out["residual"] = f.residual;
      out["r_squared"] = f.r_squared;
      out["window"] = {f.i0, f.i1};
      std::cout << out.dump(2) << "\n";
      return 0;
    }

    if (asm_cmd->parsed()) {
      if (asm_xbar.size() % 2 != 0)
        throw slabkin::ConfigError("--xbar expects pairs of coordinates");
      std::vector<slabkin::SlabState> states;
      for (const auto& p : asm_snaps) {
        auto snap = slabkin::read_snapshot(p);
        slabkin::SlabState s;
        s.k = snap.k;
        s.time = snap.t;
        s.values = snap.values;
        s.nx = static_cast<int>(snap.values.cols());
        s.dx = 2.0 / s.nx;
        states.push_back(std::move(s));
      }
      std::vector<Eigen::Vector2d> xbar;
      for (size_t i = 0; i + 1 < asm_xbar.size(); i += 2)
        xbar.push_back({asm_xbar[i], asm_xbar[i + 1]});
      auto fields = slabkin::assemble_physical(states, asm_spacing, asm_dim,
                                               xbar, asm_real);
      fs::create_directories(out_dir);
      for (size_t i = 0; i < fields.size(); ++i) {
        char name[64];
        std::snprintf(name, sizeof(name), "assembled_%02zu.bin", i);
        slabkin::Snapshot snap{states.empty() ? 0.0 : states[0].time,
                               Eigen::Vector2d::Zero(), fields[i]};
        slabkin::write_snapshot(snap, (fs::path(out_dir) / name).string());
      }
      std::cout << "wrote " << fields.size() << " assembled fields to "
                << out_dir << "\n";
      return 0;
    }

    if (cache->parsed()) {
      auto cfg = slabkin::parse_config_file(config_path, overrides);
      auto grid = std::make_shared<slabkin::VelocityGrid>(slabkin::build_grid(
          cfg.velocity.n, cfg.velocity.vmax, cfg.velocity.scheme));
      auto opt = build_options(cfg);
      std::string path = cache_file_for(*grid, opt, cache_dir);
      if (path.empty())
        throw slabkin::ConfigError(
            "no cache directory: pass --cache-dir or set SLABKIN_CACHE_DIR");
      if (cache_action == "clear") {
        bool removed = fs::remove(path);
        std::cout << (removed ? "removed " : "no cache at ") << path << "\n";
      } else if (cache_action == "build") {
        slabkin::build_collision_cached(grid, opt, cache_dir);
        std::cout << "cache ready at " << path << "\n";
      }
      json out{{"key", slabkin::collision_cache_key(*grid, opt)},
               {"path", path},
               {"present", fs::exists(path)},
               {"hash", file_hash(path)}};
      std::cout << out.dump(2) << "\n";
      return 0;
    }
  } catch (const slabkin::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const slabkin::NumericError& e) {
    std::cerr << "numeric failure at step " << e.step << ": " << e.what()
              << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
