#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include <json.hpp>

#include "ktraj/design.hpp"

namespace ktraj {

// Full design prescription, as parsed from a JSON config document.
struct DesignConfig {
  std::string kind;        // "radial" | "cones" | "stack"
  FovModel fov;            // cm
  double res_xy_mm = 0.0;  // Delta x = Delta y
  double res_z_mm = 0.0;
  HardwareConfig hw;
  DensityParams density;
  std::optional<std::int64_t> target_readouts;
  std::uint64_t seed = 1;
  double offset = 0.5;
  std::size_t surfaces = 64;
  std::size_t grid = kDefaultGrid;
  std::string pole_rule = "coarsen";  // or "literal-min"

  ExtentModel extent() const {
    return ExtentModel::from_resolution_cm(res_xy_mm / 10.0, res_z_mm / 10.0);
  }
  DesignOptions options() const {
    DesignOptions o;
    o.target_readouts = target_readouts;
    o.offset = offset;
    o.surfaces = surfaces;
    o.grid = grid;
    o.pole_rule = pole_rule == "literal-min" ? PoleRule::literal_min
                                             : PoleRule::coarsen;
    return o;
  }
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

template <typename T>
T require(const nlohmann::json& j, const std::string& path) {
  const nlohmann::json* cur = &j;
  std::string part;
  std::size_t pos = 0;
  std::string rest = path;
  while (!rest.empty()) {
    const auto dot = rest.find('.');
    part = rest.substr(0, dot);
    rest = dot == std::string::npos ? "" : rest.substr(dot + 1);
    if (!cur->contains(part))
      throw ConfigError("missing required field: " + path);
    cur = &(*cur)[part];
    (void)pos;
  }
  try {
    return cur->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("wrong type at field: " + path);
  }
}

template <typename T>
T get_or(const nlohmann::json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j[key].get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("wrong type at field: " + key);
  }
}

inline void check_positive(double v, const std::string& field) {
  if (!(v > 0.0)) throw ConfigError("field must be positive: " + field);
}

}  // namespace detail

inline DesignConfig parse_config(const nlohmann::json& j) {
  DesignConfig c;
  c.kind = detail::require<std::string>(j, "kind");
  if (c.kind != "radial" && c.kind != "cones" && c.kind != "stack")
    throw ConfigError("unknown kind: " + c.kind);

  const double lr = detail::require<double>(j, "fov_cm.lr");
  const double lz = detail::require<double>(j, "fov_cm.lz");
  detail::check_positive(lr, "fov_cm.lr");
  detail::check_positive(lz, "fov_cm.lz");
  c.fov = FovModel(lr, lz);

  c.res_xy_mm = detail::require<double>(j, "resolution_mm.dxy");
  c.res_z_mm = detail::get_or<double>(j["resolution_mm"], "dz", c.res_xy_mm);
  detail::check_positive(c.res_xy_mm, "resolution_mm.dxy");
  detail::check_positive(c.res_z_mm, "resolution_mm.dz");

  c.hw.t_read = detail::require<double>(j, "readout_ms");
  c.hw.g_max = detail::get_or<double>(j, "g_max_mT_m", 39.0);
  c.hw.s_max = detail::get_or<double>(j, "s_max_mT_m_ms", 145.0);
  c.hw.dt = detail::get_or<double>(j, "dt_us", 4.0) * 1e-3;
  c.hw.gamma_bar = detail::get_or<double>(j, "gamma_bar_kHz_mT", 42.5764);
  try {
    c.hw.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  c.density.alpha = detail::get_or<double>(j, "alpha", 1.0);
  c.density.alpha_r = detail::get_or<double>(j, "alpha_r", 1.0);
  c.density.alpha_z = detail::get_or<double>(j, "alpha_z", 1.0);
  c.density.k_floor_frac = detail::get_or<double>(j, "k_floor_frac", 0.0);
  try {
    c.density.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  if (j.contains("target_readouts")) {
    const auto t = detail::require<std::int64_t>(j, "target_readouts");
    if (t < 1) throw ConfigError("target_readouts must be >= 1");
    c.target_readouts = t;
  }
  c.seed = detail::get_or<std::uint64_t>(j, "seed", 1);
  c.offset = detail::get_or<double>(j, "offset", 0.5);
  if (c.offset < 0.0 || c.offset >= 1.0)
    throw ConfigError("offset must be in [0, 1)");
  c.surfaces = detail::get_or<std::size_t>(j, "surfaces", 64);
  c.grid = detail::get_or<std::size_t>(j, "grid", kDefaultGrid);
  c.pole_rule = detail::get_or<std::string>(j, "pole_rule", "coarsen");
  if (c.pole_rule != "coarsen" && c.pole_rule != "literal-min")
    throw ConfigError("pole_rule must be 'coarsen' or 'literal-min'");
  return c;
}

inline DesignConfig parse_config_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return parse_config(j);
}

inline DesignConfig load_config(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigError("cannot open config: " + p.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_config_text(text);
}

inline nlohmann::json config_to_json(const DesignConfig& c) {
  nlohmann::json j;
  j["kind"] = c.kind;
  j["fov_cm"] = {{"lr", c.fov.l_r}, {"lz", c.fov.l_z}};
  j["resolution_mm"] = {{"dxy", c.res_xy_mm}, {"dz", c.res_z_mm}};
  j["readout_ms"] = c.hw.t_read;
  j["g_max_mT_m"] = c.hw.g_max;
  j["s_max_mT_m_ms"] = c.hw.s_max;
  j["dt_us"] = c.hw.dt * 1e3;
  j["gamma_bar_kHz_mT"] = c.hw.gamma_bar;
  j["alpha"] = c.density.alpha;
  j["alpha_r"] = c.density.alpha_r;
  j["alpha_z"] = c.density.alpha_z;
  j["k_floor_frac"] = c.density.k_floor_frac;
  if (c.target_readouts) j["target_readouts"] = *c.target_readouts;
  j["seed"] = c.seed;
  j["offset"] = c.offset;
  j["surfaces"] = c.surfaces;
  j["grid"] = c.grid;
  j["pole_rule"] = c.pole_rule;
  return j;
}

inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t h = 14695981039346656037ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

// Payload layout: little-endian float32, [readouts][samples][4] with
// (k_x, k_y, k_z, dcf weight), row-major.  Readouts shorter than the
// longest are padded with their endpoint and zero weight; true lengths go
// in the header when they differ.
struct TrajectoryFile {
  nlohmann::json header;
  Trajectory trajectory;
  DcfTable dcf;
};

inline void export_trajectory(const Trajectory& traj, const DcfTable& dcf,
                              const DesignConfig& cfg, double n_real,
                              const std::filesystem::path& stem) {
  if (dcf.weights.size() != traj.readouts.size())
    throw std::invalid_argument("export_trajectory: dcf misaligned");
  std::size_t max_s = 0;
  bool uniform = true;
  for (const auto& ro : traj.readouts) {
    if (max_s != 0 && ro.k_samples.size() != max_s) uniform = false;
    max_s = std::max(max_s, ro.k_samples.size());
  }

  std::vector<float> payload;
  payload.reserve(traj.readouts.size() * max_s * 4);
  for (std::size_t i = 0; i < traj.readouts.size(); ++i) {
    const auto& ro = traj.readouts[i];
    for (std::size_t s = 0; s < max_s; ++s) {
      const std::size_t si = std::min(s, ro.k_samples.size() - 1);
      const Vec3& k = ro.k_samples[si];
      const float w = s < ro.k_samples.size()
                          ? static_cast<float>(dcf.weights[i][s])
                          : 0.0f;
      payload.push_back(static_cast<float>(k.x));
      payload.push_back(static_cast<float>(k.y));
      payload.push_back(static_cast<float>(k.z));
      payload.push_back(w);
    }
  }

  nlohmann::json h;
  h["format_version"] = 1;
  h["kind"] = cfg.kind;
  h["readouts"] = traj.readouts.size();
  h["samples_per_readout"] = max_s;
  if (!uniform) {
    std::vector<std::size_t> counts;
    counts.reserve(traj.readouts.size());
    for (const auto& ro : traj.readouts) counts.push_back(ro.k_samples.size());
    h["sample_counts"] = counts;
  }
  h["units"] = {{"k", "cm^-1"}, {"dcf", "relative"}};
  h["n_real"] = n_real;
  h["dcf_normalization"] = dcf.normalization;
  h["config"] = config_to_json(cfg);
  h["payload_checksum_fnv1a64"] =
      fnv1a64(payload.data(), payload.size() * sizeof(float));

  {
    std::ofstream out(stem.string() + ".json");
    if (!out) throw std::runtime_error("cannot write " + stem.string() + ".json");
    out << h.dump(2) << "\n";
  }
  {
    std::ofstream out(stem.string() + ".traj.bin", std::ios::binary);
    if (!out)
      throw std::runtime_error("cannot write " + stem.string() + ".traj.bin");
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size() * sizeof(float)));
  }
}

inline TrajectoryFile import_trajectory(const std::filesystem::path& stem) {
  TrajectoryFile f;
  {
    std::ifstream in(stem.string() + ".json");
    if (!in) throw std::runtime_error("cannot open " + stem.string() + ".json");
    in >> f.header;
  }
  std::vector<float> payload;
  {
    std::ifstream in(stem.string() + ".traj.bin", std::ios::binary);
    if (!in)
      throw std::runtime_error("cannot open " + stem.string() + ".traj.bin");
    in.seekg(0, std::ios::end);
    const auto bytes = static_cast<std::size_t>(in.tellg());
    in.seekg(0);
    payload.resize(bytes / sizeof(float));
    in.read(reinterpret_cast<char*>(payload.data()),
            static_cast<std::streamsize>(bytes));
  }
  const auto checksum = fnv1a64(payload.data(), payload.size() * sizeof(float));
  if (checksum != f.header.at("payload_checksum_fnv1a64").get<std::uint64_t>())
    throw std::runtime_error("payload checksum mismatch");

  const std::size_t n_ro = f.header.at("readouts").get<std::size_t>();
  const std::size_t max_s = f.header.at("samples_per_readout").get<std::size_t>();
  std::vector<std::size_t> counts(n_ro, max_s);
  if (f.header.contains("sample_counts"))
    counts = f.header["sample_counts"].get<std::vector<std::size_t>>();

  const std::string kind = f.header.at("kind").get<std::string>();
  f.trajectory.kind = kind == "radial" ? PathKind::ellipsoid_radial
                      : kind == "cones" ? PathKind::ellipsoid_cones
                                        : PathKind::cylinder_stack;
  f.trajectory.readouts.resize(n_ro);
  f.dcf.weights.resize(n_ro);
  f.dcf.normalization = f.header.value("dcf_normalization", 1.0);
  std::size_t idx = 0;
  for (std::size_t i = 0; i < n_ro; ++i) {
    auto& ro = f.trajectory.readouts[i];
    ro.index = static_cast<std::int64_t>(i);
    ro.k_samples.resize(counts[i]);
    f.dcf.weights[i].resize(counts[i]);
    for (std::size_t s = 0; s < max_s; ++s) {
      const float kx = payload[idx], ky = payload[idx + 1],
                  kz = payload[idx + 2], w = payload[idx + 3];
      idx += 4;
      if (s < counts[i]) {
        ro.k_samples[s] = {kx, ky, kz};
        f.dcf.weights[i][s] = w;
      }
    }
  }
  return f;
}

}  // namespace ktraj
