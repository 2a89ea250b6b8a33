#include "slabkin/trajectory_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "slabkin/slab.hpp"

namespace slabkin {

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

void write_trajectory(const Trajectory& traj, const std::string& path) {
  std::ostringstream csv;
  csv << "t";
  for (size_t p = 0; p < traj.probes.size(); ++p) {
    const char* names[5] = {"a", "b1", "b2", "b3", "c"};
    for (int c = 0; c < 5; ++c)
      csv << "," << names[c] << "_re_p" << p << "," << names[c] << "_im_p" << p;
  }
  csv << ",l2_norm,micro_dissipation,boundary_dissipation,energy_defect\n";
  for (const auto& s : traj.samples) {
    csv << format_double(s.t);
    for (const auto& m : s.probe_moments) {
      const std::complex<double> vals[5] = {m.a, m.b[0], m.b[1], m.b[2], m.c};
      for (int c = 0; c < 5; ++c)
        csv << "," << format_double(vals[c].real()) << ","
            << format_double(vals[c].imag());
    }
    csv << "," << format_double(s.l2_norm) << ","
        << format_double(s.micro_dissipation) << ","
        << format_double(s.boundary_dissipation) << ","
        << format_double(s.energy_defect) << "\n";
  }
  const std::string body = csv.str();

  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << body;
  f.close();

  nlohmann::json man;
  man["schema"] = kTrajectorySchema;
  man["version"] = kVersion;
  man["k"] = {traj.k(0), traj.k(1)};
  man["nx"] = traj.nx;
  man["dx"] = traj.dx;
  man["dt"] = traj.dt;
  man["probes"] = traj.probes;
  man["samples"] = traj.samples.size();
  man["initial_weighted_sup"] = traj.initial_weighted_sup;
  man["min_F"] = traj.min_F;
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016" PRIx64, fnv1a(body));
  man["data_hash"] = hash;
  std::ofstream mf(path + ".manifest.json", std::ios::binary);
  mf << man.dump(2) << "\n";
}

LoadedTrajectory read_trajectory(const std::string& path) {
  std::ifstream mf(path + ".manifest.json");
  if (!mf) throw std::runtime_error("missing trajectory manifest: " + path);
  nlohmann::json man = nlohmann::json::parse(mf);
  if (man.value("schema", "") != kTrajectorySchema)
    throw std::runtime_error("trajectory schema mismatch in " + path +
                             ": got \"" + man.value("schema", "") + "\"");
  if (man.value("version", "") != kVersion)
    throw std::runtime_error("trajectory version mismatch in " + path +
                             ": got \"" + man.value("version", "") + "\"");

  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  const std::string body = ss.str();

  LoadedTrajectory out;
  char expect[32];
  std::snprintf(expect, sizeof(expect), "%016" PRIx64, fnv1a(body));
  out.hash_mismatch = man.value("data_hash", "") != expect;
  out.probes = man["probes"].get<std::vector<double>>();
  out.k1 = man["k"][0].get<double>();
  out.k2 = man["k"][1].get<double>();
  const size_t nprobes = out.probes.size();
  const size_t ncols = 1 + 10 * nprobes + 4;
  out.probe_columns.assign(10 * nprobes, {});

  std::istringstream lines(body);
  std::string line;
  long lineno = 0;
  size_t nsamples = man.value("samples", size_t{0});
  while (std::getline(lines, line)) {
    ++lineno;
    if (lineno == 1) continue;  // header
    std::vector<double> vals;
    std::istringstream ls(line);
    std::string tok;
    while (std::getline(ls, tok, ',')) {
      char* end = nullptr;
      double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str())
        throw std::runtime_error(path + ": parse error at line " +
                                 std::to_string(lineno));
      vals.push_back(v);
    }
    if (vals.size() != ncols)
      throw std::runtime_error(path + ": truncated or malformed row at line " +
                               std::to_string(lineno));
    size_t c = 0;
    out.t.push_back(vals[c++]);
    for (size_t p = 0; p < 10 * nprobes; ++p) out.probe_columns[p].push_back(vals[c++]);
    out.l2_norm.push_back(vals[c++]);
    out.micro_dissipation.push_back(vals[c++]);
    out.boundary_dissipation.push_back(vals[c++]);
    out.energy_defect.push_back(vals[c++]);
  }
  if (out.t.size() != nsamples)
    throw std::runtime_error(path + ": truncated file, expected " +
                             std::to_string(nsamples) + " rows, got " +
                             std::to_string(out.t.size()) + " (last line " +
                             std::to_string(lineno) + ")");
  return out;
}

void write_snapshot(const Snapshot& snap, const std::string& path) {
  nlohmann::json h;
  h["schema"] = kSnapshotSchema;
  h["version"] = kVersion;
  h["t"] = snap.t;
  h["k"] = {snap.k(0), snap.k(1)};
  h["nv"] = snap.values.rows();
  h["nx"] = snap.values.cols();
  const std::string header = h.dump();
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  const char magic[4] = {'S', 'L', 'S', 'N'};
  std::uint32_t hlen = static_cast<std::uint32_t>(header.size());
  f.write(magic, 4);
  f.write(reinterpret_cast<const char*>(&hlen), 4);
  f.write(header.data(), hlen);
  f.write(reinterpret_cast<const char*>(snap.values.data()),
          static_cast<std::streamsize>(snap.values.size()) * sizeof(std::complex<double>));
}

Snapshot read_snapshot(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open snapshot: " + path);
  char magic[4];
  std::uint32_t hlen = 0;
  f.read(magic, 4);
  f.read(reinterpret_cast<char*>(&hlen), 4);
  if (!f || std::string(magic, 4) != "SLSN" || hlen > 1 << 20)
    throw std::runtime_error("not a snapshot file: " + path);
  std::string header(hlen, '\0');
  f.read(header.data(), hlen);
  nlohmann::json h = nlohmann::json::parse(header);
  if (h.value("schema", "") != kSnapshotSchema)
    throw std::runtime_error("snapshot schema mismatch: " + path);
  if (h.value("version", "") != kVersion)
    throw std::runtime_error("snapshot version mismatch: " + path);
  Snapshot snap;
  snap.t = h["t"].get<double>();
  snap.k = Eigen::Vector2d(h["k"][0].get<double>(), h["k"][1].get<double>());
  const long nv = h["nv"].get<long>(), nx = h["nx"].get<long>();
  snap.values.resize(nv, nx);
  f.read(reinterpret_cast<char*>(snap.values.data()),
         static_cast<std::streamsize>(nv) * nx * sizeof(std::complex<double>));
  if (!f) throw std::runtime_error("truncated snapshot: " + path);
  return snap;
}

}  // namespace slabkin
