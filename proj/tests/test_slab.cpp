#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <memory>

#include "slabkin/slab.hpp"

using namespace slabkin;

namespace {

std::shared_ptr<const VelocityGrid> grid8() {
  static auto g = std::make_shared<VelocityGrid>(
      build_grid(8, 5.0, GridScheme::UniformCartesian));
  return g;
}

std::shared_ptr<const CollisionOperator> op8() {
  static auto op = std::make_shared<CollisionOperator>(build_collision(grid8()));
  return op;
}

RunConfig base_config(const std::string& extra = "") {
  std::string body =
      R"({"modes": [[0.5, 0.0]], "dt": 0.005, "t_end": 0.1, "nx": 16,
          "velocity": {"n": 8, "vmax": 5.0})";
  if (!extra.empty()) body += "," + extra;
  body += "}";
  return parse_config(body);
}

}  // namespace

TEST_CASE("zero initial data stays zero") {
  auto cfg = base_config();
  SlabSolver solver(cfg, grid8(), op8());
  auto s = solver.init_state(cfg.modes[0]);
  CHECK(s.values.norm() == 0.0);
  solver.step(s);
  CHECK(s.values.norm() == 0.0);
}

TEST_CASE("time derivative isolates the phase term on a uniform ker-L state") {
  auto cfg = base_config(R"("ic": {"kind": "maxwellian-perturbation",
      "a0": 1.0, "profile": "uniform"})");
  cfg.modes = {{0.7, 0.3}};
  SlabSolver solver(cfg, grid8(), op8());
  auto s = solver.init_state(cfg.modes[0]);
  Eigen::MatrixXcd td = solver.time_derivative(s);

  const auto& g = *grid8();
  double err = 0.0, scale = s.values.norm();
  for (int i = 0; i < g.size(); ++i) {
    const double vk = g.nodes(0, i) * 0.7 + g.nodes(1, i) * 0.3;
    for (int j = 0; j < s.nx; ++j)
      err = std::max(err, std::abs(td(i, j) +
                                   std::complex<double>(0, vk) * s.values(i, j)));
  }
  CHECK(err < 1e-5 * scale);
}

TEST_CASE("linear runs dissipate energy") {
  auto cfg = base_config(R"("ic": {"kind": "maxwellian-perturbation",
      "a0": 1.0, "c0": 0.5}, "output": {"cadence": 4})");
  SlabSolver solver(cfg, grid8(), op8());
  auto trajs = solver.simulate();
  REQUIRE(trajs.size() == 1);
  const auto& tr = trajs[0];
  REQUIRE(tr.samples.size() >= 3);
  CHECK(tr.samples.back().l2_norm < tr.samples.front().l2_norm);
  CHECK(tr.step_defects.size() == 20);

  double defect_sum = 0.0;
  for (double d : tr.step_defects) defect_sum += std::abs(d);
  const double e0 = tr.samples.front().l2_norm * tr.samples.front().l2_norm;
  CHECK(defect_sum < 0.05 * e0);
}

TEST_CASE("mass is conserved to rounding in collisionless k=0 transport") {
  auto cfg = base_config(R"("collision": false,
      "ic": {"kind": "maxwellian-perturbation", "a0": 1.0, "c0": 0.3},
      "output": {"cadence": 20})");
  cfg.modes = {{0.0, 0.0}};
  cfg.t_end = 1.0;  // 200 steps
  SlabSolver solver(cfg, grid8(), nullptr);
  auto s = solver.init_state(cfg.modes[0]);

  auto total_mass = [&](const SlabState& st) {
    std::complex<double> acc = 0.0;
    for (int j = 0; j < st.nx; ++j)
      acc += st.dx * moments(*grid8(), st.values.col(j)).a;
    return acc;
  };
  const std::complex<double> m0 = total_mass(s);
  for (int n = 0; n < 200; ++n) solver.step(s);
  CHECK(std::abs(total_mass(s) - m0) < 1e-12 * std::abs(m0));
}

TEST_CASE("snapshot cadence") {
  auto cfg = base_config(R"("ic": {"kind": "maxwellian-perturbation", "a0": 1.0},
      "output": {"cadence": 5, "snapshots": true, "snapshot_cadence": 5})");
  SlabSolver solver(cfg, grid8(), op8());
  auto trajs = solver.simulate();
  const auto& tr = trajs[0];
  REQUIRE(tr.snapshots.size() == 5);  // t = 0, 0.025, ..., 0.1
  for (size_t i = 0; i < tr.snapshots.size(); ++i)
    CHECK(tr.snapshots[i].first == doctest::Approx(0.025 * i).epsilon(1e-12));
}

TEST_CASE("assemble_physical") {
  const int nv = grid8()->size();

  SlabState s0;
  s0.k = {0.0, 0.0};
  s0.nx = 4;
  s0.dx = 0.5;
  // the k = 0 mode of a real field must itself be real
  s0.values = Eigen::MatrixXd::Random(nv, 4).cast<std::complex<double>>();

  // a single k = 0 mode reproduces itself (Delta-ell = 1 at spacing 1)
  auto fields = assemble_physical({s0}, 1.0, 2, {Eigen::Vector2d(0.3, 0.8)}, true);
  REQUIRE(fields.size() == 1);
  CHECK((fields[0] - s0.values).norm() < 1e-14 * s0.values.norm());

  // conjugate pair gives a real field
  SlabState sp = s0, sm = s0;
  sp.k = {0.5, 0.0};
  sp.values = Eigen::MatrixXcd::Random(nv, 4);
  sm.k = {-0.5, 0.0};
  sm.values = sp.values.conjugate();
  auto f2 = assemble_physical({s0, sp, sm}, 0.5, 2, {Eigen::Vector2d(1.1, 0.0)},
                              true);
  CHECK(f2[0].imag().cwiseAbs().maxCoeff() < 1e-13 * f2[0].norm());

  // a non-conjugate mode set cannot promise a real field
  sm.values = Eigen::MatrixXcd::Random(nv, 4);
  CHECK_THROWS(assemble_physical({s0, sp, sm}, 0.5, 2,
                                 {Eigen::Vector2d(0.0, 0.0)}, true));
}

TEST_CASE("duhamel residual on a linear run") {
  auto cfg = base_config(R"("ic": {"kind": "maxwellian-perturbation",
      "a0": 1.0, "c0": 0.5},
      "output": {"cadence": 2, "snapshots": true, "snapshot_cadence": 2})");
  SlabSolver solver(cfg, grid8(), op8());
  auto trajs = solver.simulate();
  auto stats = duhamel_residual(solver, trajs[0], 50, 42);
  CHECK(stats.evaluated > 30);
  CHECK(stats.median >= 0.0);
  CHECK(std::isfinite(stats.max));
  // the mild-form residual should sit near the discretization scale, far
  // below the solution magnitude
  CHECK(stats.median < 0.1);
}
