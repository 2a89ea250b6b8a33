#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "slabkin/boundary.hpp"

using namespace slabkin;

namespace {

std::shared_ptr<const VelocityGrid> grid(int n, double vmax) {
  return std::make_shared<VelocityGrid>(
      build_grid(n, vmax, GridScheme::UniformCartesian));
}

Eigen::VectorXcd random_field(const VelocityGrid& g, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::VectorXcd f(g.size());
  for (int i = 0; i < g.size(); ++i) f(i) = {nd(rng), nd(rng)};
  return f;
}

}  // namespace

TEST_CASE("half-flux normalization is discretely exact") {
  auto g = grid(8, 5.0);
  DiffuseWall wall(g);
  for (auto w : {Wall::Bottom, Wall::Top}) {
    double flux = 0.0;
    for (int i : wall.toward(w))
      flux += wall.c_mu_discrete() * g->sqrt_mu(i) * g->sqrt_mu(i) *
              std::abs(g->nodes(2, i)) * g->weights(i);
    CHECK(std::abs(flux - 1.0) < 1e-14);
  }
}

TEST_CASE("c_mu approaches sqrt(2 pi) under refinement") {
  DiffuseWall w8(grid(8, 5.0)), w16(grid(16, 6.0)), w24(grid(24, 6.0));
  CHECK(w16.c_mu_gap() < 0.03);
  CHECK(w24.c_mu_gap() < w16.c_mu_gap());
  CHECK(w16.c_mu_discrete() ==
        doctest::Approx(std::sqrt(2.0 * std::numbers::pi)).epsilon(0.03));
}

TEST_CASE("diffuse reflection cancels the wall mass flux") {
  auto g = grid(8, 5.0);
  DiffuseWall wall(g);
  for (auto w : {Wall::Bottom, Wall::Top}) {
    Eigen::VectorXcd trace = random_field(*g, 11);
    // zero the outgoing half, then re-emit diffusely
    for (int i : wall.away(w)) trace(i) = 0.0;
    Eigen::VectorXcd refl = trace + wall.p_gamma(trace, w);
    CHECK(std::abs(wall.mass_flux(refl)) < 1e-14 * trace.norm());
  }
}

TEST_CASE("p_gamma is supported on the re-emission half-grid") {
  auto g = grid(8, 5.0);
  DiffuseWall wall(g);
  auto trace = random_field(*g, 12);
  for (auto w : {Wall::Bottom, Wall::Top}) {
    Eigen::VectorXcd pg = wall.p_gamma(trace, w);
    for (int i : wall.toward(w)) CHECK(pg(i) == std::complex<double>(0.0));
  }
}

TEST_CASE("trace split is an orthogonal decomposition at the wall") {
  auto g = grid(8, 5.0);
  DiffuseWall wall(g);
  auto trace = random_field(*g, 13);
  for (auto w : {Wall::Bottom, Wall::Top}) {
    auto [pg, rest] = wall.trace_split(trace, w);
    // parts recompose on the toward-the-wall nodes
    for (int i : wall.toward(w))
      CHECK(std::abs(pg(i) + rest(i) - trace(i)) < 1e-14);
    // cross term in the |v3|-weighted half-grid product vanishes
    std::complex<double> cross = 0.0;
    double n1 = 0.0;
    for (int i : wall.toward(w)) {
      cross += g->weights(i) * std::abs(g->nodes(2, i)) * pg(i) *
               std::conj(rest(i));
      n1 += g->weights(i) * std::abs(g->nodes(2, i)) * std::norm(trace(i));
    }
    CHECK(std::abs(cross) < 1e-13 * n1);
    // Pythagoras for the dissipation norm
    double pg2 = 0.0;
    for (int i : wall.toward(w))
      pg2 += g->weights(i) * std::abs(g->nodes(2, i)) * std::norm(pg(i));
    CHECK(wall.dissipation(trace, w) ==
          doctest::Approx(n1 - pg2).epsilon(1e-10));
  }
}

TEST_CASE("dissipation matches the direct sum") {
  auto g = grid(8, 5.0);
  DiffuseWall wall(g);
  auto trace = random_field(*g, 14);
  for (auto w : {Wall::Bottom, Wall::Top}) {
    auto [pg, rest] = wall.trace_split(trace, w);
    double direct = 0.0;
    for (int i : wall.toward(w))
      direct += g->weights(i) * std::abs(g->nodes(2, i)) * std::norm(rest(i));
    CHECK(wall.dissipation(trace, w) == doctest::Approx(direct).epsilon(1e-12));
  }
}
