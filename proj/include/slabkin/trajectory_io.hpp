#ifndef SLABKIN_TRAJECTORY_IO_HPP
#define SLABKIN_TRAJECTORY_IO_HPP

#include <string>

#include "slabkin/config.hpp"

namespace slabkin {

struct Trajectory;  // slab.hpp

// CSV schema (kTrajectorySchema): column "t", then for each probe point p:
// a_re_p, a_im_p, b1_re_p, b1_im_p, b2_re_p, b2_im_p, b3_re_p, b3_im_p,
// c_re_p, c_im_p, then l2_norm, micro_dissipation, boundary_dissipation,
// energy_defect. A sidecar <path>.manifest.json carries the schema version,
// grid metadata and an FNV-1a hash of the CSV bytes.
void write_trajectory(const Trajectory& traj, const std::string& path);

// Throws on version mismatch or malformed rows (message carries the line
// number); a data-hash mismatch sets hash_mismatch instead of failing.
struct LoadedTrajectory {
  bool hash_mismatch = false;
  // scalar series exactly as written
  std::vector<double> t, l2_norm, micro_dissipation, boundary_dissipation,
      energy_defect;
  std::vector<std::vector<double>> probe_columns;  // 10 per probe, CSV order
  std::vector<double> probes;
  double k1 = 0.0, k2 = 0.0;
};

LoadedTrajectory read_trajectory(const std::string& path);

struct Snapshot {
  double t = 0.0;
  Eigen::Vector2d k{0.0, 0.0};
  Eigen::MatrixXcd values;
};

void write_snapshot(const Snapshot& snap, const std::string& path);
Snapshot read_snapshot(const std::string& path);

std::uint64_t fnv1a(const std::string& bytes);

}  // namespace slabkin

#endif
