#include "slabkin/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace slabkin {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& where,
                const std::set<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("unknown config key: " + where + it.key());
}

double require_positive(const json& obj, const std::string& key, double value) {
  (void)obj;
  if (!(value > 0.0)) throw ConfigError("config key \"" + key + "\" must be > 0");
  return value;
}

GridScheme parse_scheme(const std::string& s) {
  if (s == "uniform-cartesian") return GridScheme::UniformCartesian;
  if (s == "gauss-hermite-tensor") return GridScheme::GaussHermiteTensor;
  throw ConfigError("config key \"velocity.scheme\": unknown scheme \"" + s + "\"");
}

json apply_override(json j, const std::string& kv) {
  auto eq = kv.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override must have the form key=value: " + kv);
  std::string key = kv.substr(0, eq);
  std::string val = kv.substr(eq + 1);
  json parsed;
  try {
    parsed = json::parse(val);
  } catch (...) {
    parsed = val;  // bare string
  }
  json* cur = &j;
  std::istringstream ss(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  if (parts.empty()) throw ConfigError("empty override key");
  for (size_t i = 0; i + 1 < parts.size(); ++i) cur = &(*cur)[parts[i]];
  (*cur)[parts.back()] = parsed;
  return j;
}

}  // namespace

RunConfig parse_config(const std::string& json_text,
                       const std::vector<std::string>& overrides) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  for (const auto& kv : overrides) j = apply_override(j, kv);

  check_keys(j, "",
             {"tangential_dim", "modes", "mode_spacing", "velocity", "sphere",
              "nx", "dt", "t_end", "cfl_limit", "nonlinear", "collision",
              "transport", "stencil", "theta", "ic", "output", "seed",
              "sigma_weight"});

  RunConfig cfg;
  if (j.contains("tangential_dim")) {
    cfg.tangential_dim = j["tangential_dim"].get<int>();
    if (cfg.tangential_dim != 1 && cfg.tangential_dim != 2)
      throw ConfigError("config key \"tangential_dim\" must be 1 or 2");
  }
  if (!j.contains("modes") || !j["modes"].is_array() || j["modes"].empty())
    throw ConfigError("config key \"modes\" must be a nonempty array of [k1,k2]");
  for (const auto& m : j["modes"]) {
    if (!m.is_array() || m.size() != 2)
      throw ConfigError("config key \"modes\": each mode must be [k1,k2]");
    Eigen::Vector2d k(m[0].get<double>(), m[1].get<double>());
    if (cfg.tangential_dim == 1 && k(1) != 0.0)
      throw ConfigError("config key \"modes\": k2 must be 0 when tangential_dim=1");
    cfg.modes.push_back(k);
  }
  if (j.contains("mode_spacing"))
    cfg.mode_spacing = require_positive(j, "mode_spacing", j["mode_spacing"].get<double>());

  if (j.contains("velocity")) {
    const json& v = j["velocity"];
    check_keys(v, "velocity.", {"n", "vmax", "scheme"});
    if (v.contains("n")) cfg.velocity.n = v["n"].get<int>();
    if (v.contains("vmax")) cfg.velocity.vmax = v["vmax"].get<double>();
    if (v.contains("scheme")) cfg.velocity.scheme = parse_scheme(v["scheme"].get<std::string>());
  }
  if (j.contains("sphere")) {
    const json& s = j["sphere"];
    check_keys(s, "sphere.", {"polar", "azimuth"});
    if (s.contains("polar")) cfg.sphere.polar = s["polar"].get<int>();
    if (s.contains("azimuth")) cfg.sphere.azimuth = s["azimuth"].get<int>();
  }
  if (j.contains("nx")) cfg.nx = j["nx"].get<int>();
  if (cfg.nx < 2) throw ConfigError("config key \"nx\" must be >= 2");
  if (!j.contains("dt")) throw ConfigError("config key \"dt\" is required");
  cfg.dt = require_positive(j, "dt", j["dt"].get<double>());
  if (!j.contains("t_end")) throw ConfigError("config key \"t_end\" is required");
  cfg.t_end = require_positive(j, "t_end", j["t_end"].get<double>());
  if (j.contains("cfl_limit"))
    cfg.cfl_limit = require_positive(j, "cfl_limit", j["cfl_limit"].get<double>());
  if (j.contains("nonlinear")) cfg.nonlinear = j["nonlinear"].get<bool>();
  if (j.contains("collision")) cfg.collision = j["collision"].get<bool>();
  if (j.contains("transport")) cfg.transport = j["transport"].get<bool>();
  if (j.contains("stencil")) {
    cfg.stencil = j["stencil"].get<std::string>();
    if (cfg.stencil != "upwind" && cfg.stencil != "minmod")
      throw ConfigError("config key \"stencil\" must be upwind or minmod");
  }
  if (j.contains("theta")) {
    cfg.theta = j["theta"].get<double>();
    if (!(cfg.theta > 0.0 && cfg.theta < 0.25))
      throw ConfigError("config key \"theta\" must lie in (0, 1/4)");
  }

  if (j.contains("ic")) {
    const json& ic = j["ic"];
    check_keys(ic, "ic.", {"kind", "amplitude", "a0", "b0", "c0", "profile", "file"});
    if (ic.contains("kind")) cfg.ic.kind = ic["kind"].get<std::string>();
    if (cfg.ic.kind != "zero" && cfg.ic.kind != "maxwellian-perturbation" &&
        cfg.ic.kind != "microscopic-bump" && cfg.ic.kind != "file")
      throw ConfigError("config key \"ic.kind\": unknown kind \"" + cfg.ic.kind + "\"");
    if (ic.contains("amplitude")) cfg.ic.amplitude = ic["amplitude"].get<double>();
    if (ic.contains("a0")) cfg.ic.a0 = ic["a0"].get<double>();
    if (ic.contains("b0")) {
      if (!ic["b0"].is_array() || ic["b0"].size() != 3)
        throw ConfigError("config key \"ic.b0\" must be a 3-array");
      for (int i = 0; i < 3; ++i) cfg.ic.b0[i] = ic["b0"][i].get<double>();
    }
    if (ic.contains("c0")) cfg.ic.c0 = ic["c0"].get<double>();
    if (ic.contains("profile")) {
      cfg.ic.profile = ic["profile"].get<std::string>();
      if (cfg.ic.profile != "cos" && cfg.ic.profile != "sin" &&
          cfg.ic.profile != "uniform")
        throw ConfigError("config key \"ic.profile\" must be cos, sin, or uniform");
    }
    if (ic.contains("file")) cfg.ic.file = ic["file"].get<std::string>();
    if (cfg.ic.kind == "file" && cfg.ic.file.empty())
      throw ConfigError("config key \"ic.file\" is required for ic.kind=file");
  }

  if (j.contains("output")) {
    const json& o = j["output"];
    check_keys(o, "output.", {"cadence", "snapshots", "snapshot_cadence", "probes"});
    if (o.contains("cadence")) cfg.output.cadence = o["cadence"].get<int>();
    if (cfg.output.cadence < 1) throw ConfigError("config key \"output.cadence\" must be >= 1");
    if (o.contains("snapshots")) cfg.output.snapshots = o["snapshots"].get<bool>();
    if (o.contains("snapshot_cadence")) {
      cfg.output.snapshot_cadence = o["snapshot_cadence"].get<int>();
      if (cfg.output.snapshot_cadence < 1)
        throw ConfigError("config key \"output.snapshot_cadence\" must be >= 1");
    }
    if (o.contains("probes")) {
      cfg.output.probes.clear();
      for (const auto& p : o["probes"]) {
        double x = p.get<double>();
        if (x < -1.0 || x > 1.0)
          throw ConfigError("config key \"output.probes\": probe outside [-1,1]");
        cfg.output.probes.push_back(x);
      }
      if (cfg.output.probes.empty())
        throw ConfigError("config key \"output.probes\" must be nonempty");
    }
  }
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("sigma_weight")) cfg.sigma_weight = j["sigma_weight"].get<double>();

  if (cfg.transport) {
    const double dx = 2.0 / cfg.nx;
    const double cfl = cfg.velocity.vmax * cfg.dt / dx;
    if (cfl > cfg.cfl_limit) {
      std::ostringstream ss;
      ss << "config key \"dt\": CFL number " << cfl << " exceeds cfl_limit "
         << cfg.cfl_limit;
      throw ConfigError(ss.str());
    }
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path,
                            const std::vector<std::string>& overrides) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), overrides);
}

std::string config_manifest(const RunConfig& cfg) {
  nlohmann::json j;
  j["tangential_dim"] = cfg.tangential_dim;
  for (const auto& k : cfg.modes) j["modes"].push_back({k(0), k(1)});
  j["mode_spacing"] = cfg.mode_spacing;
  j["velocity"] = {{"n", cfg.velocity.n},
                   {"vmax", cfg.velocity.vmax},
                   {"scheme", cfg.velocity.scheme == GridScheme::UniformCartesian
                                  ? "uniform-cartesian"
                                  : "gauss-hermite-tensor"}};
  j["sphere"] = {{"polar", cfg.sphere.polar}, {"azimuth", cfg.sphere.azimuth}};
  j["nx"] = cfg.nx;
  j["dt"] = cfg.dt;
  j["t_end"] = cfg.t_end;
  j["cfl_limit"] = cfg.cfl_limit;
  j["nonlinear"] = cfg.nonlinear;
  j["collision"] = cfg.collision;
  j["transport"] = cfg.transport;
  j["stencil"] = cfg.stencil;
  j["theta"] = cfg.theta;
  j["ic"] = {{"kind", cfg.ic.kind},
             {"amplitude", cfg.ic.amplitude},
             {"a0", cfg.ic.a0},
             {"b0", {cfg.ic.b0[0], cfg.ic.b0[1], cfg.ic.b0[2]}},
             {"c0", cfg.ic.c0},
             {"profile", cfg.ic.profile},
             {"file", cfg.ic.file}};
  j["output"] = {{"cadence", cfg.output.cadence},
                 {"snapshots", cfg.output.snapshots},
                 {"snapshot_cadence", cfg.output.snapshot_cadence},
                 {"probes", cfg.output.probes}};
  j["seed"] = cfg.seed;
  j["sigma_weight"] = cfg.sigma_weight;
  return j.dump(2);
}

}  // namespace slabkin
