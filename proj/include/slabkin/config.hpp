#ifndef SLABKIN_CONFIG_HPP
#define SLABKIN_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "slabkin/velocity_grid.hpp"

namespace slabkin {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kTrajectorySchema = "slabkin-trajectory-1";
inline constexpr const char* kSnapshotSchema = "slabkin-snapshot-1";

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InitialCondition {
  std::string kind = "zero";  // zero | maxwellian-perturbation | microscopic-bump | file
  double amplitude = 1.0;
  // maxwellian-perturbation: per-component amplitudes of the cos(pi x/2)
  // profile unless profile == "uniform" or "sin" (sin(pi x))
  double a0 = 0.0;
  double b0[3] = {0.0, 0.0, 0.0};
  double c0 = 0.0;
  std::string profile = "cos";
  std::string file;  // snapshot path for kind == "file"
};

struct RunConfig {
  int tangential_dim = 2;
  std::vector<Eigen::Vector2d> modes;
  double mode_spacing = 1.0;

  struct Velocity {
    int n = 16;
    double vmax = 6.0;
    GridScheme scheme = GridScheme::UniformCartesian;
  } velocity;

  struct Sphere {
    int polar = 8;
    int azimuth = 16;
  } sphere;

  int nx = 64;
  double dt = 0.0;
  double t_end = 0.0;
  double cfl_limit = 0.98;

  bool nonlinear = false;
  bool collision = true;
  bool transport = true;       // test hook; normal runs keep transport on
  std::string stencil = "upwind";  // upwind | minmod
  double theta = 0.1;

  InitialCondition ic;

  struct Output {
    int cadence = 10;          // record every this many steps
    bool snapshots = false;    // keep full-state snapshots in memory / on disk
    int snapshot_cadence = 10;
    std::vector<double> probes = {0.0};  // x3 probe points for moment columns
  } output;

  std::uint64_t seed = 0;
  double sigma_weight = 1.9;  // sigma of the (1+t)^{sigma/2} report weight
};

// Strict parse: unknown keys rejected, violations name the key. Overrides are
// dotted key=value pairs, e.g. "velocity.n=12".
RunConfig parse_config(const std::string& json_text,
                       const std::vector<std::string>& overrides = {});
RunConfig parse_config_file(const std::string& path,
                            const std::vector<std::string>& overrides = {});

// fully resolved config echoed as JSON (the manifest body)
std::string config_manifest(const RunConfig& cfg);

}  // namespace slabkin

#endif
