#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "ktraj/io.hpp"

using namespace ktraj;

namespace {

const char* kMinimalConfig = R"({
  "kind": "radial",
  "fov_cm": {"lr": 10.0, "lz": 10.0},
  "resolution_mm": {"dxy": 4.0},
  "readout_ms": 2.8
})";

std::filesystem::path temp_stem(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("parse_config: minimal document and defaults") {
  auto c = parse_config_text(kMinimalConfig);
  CHECK(c.kind == "radial");
  CHECK(c.fov.l_r == doctest::Approx(10.0));
  CHECK(c.res_z_mm == doctest::Approx(4.0));  // defaults to dxy
  CHECK(c.hw.g_max == doctest::Approx(39.0));
  CHECK(c.hw.s_max == doctest::Approx(145.0));
  CHECK(c.hw.dt == doctest::Approx(0.004));
  CHECK(c.hw.gamma_bar == doctest::Approx(42.5764));
  CHECK(c.density.alpha == doctest::Approx(1.0));
  CHECK(c.offset == doctest::Approx(0.5));
  CHECK(c.surfaces == 64);
  CHECK(c.pole_rule == "coarsen");
  CHECK(!c.target_readouts);
  CHECK(c.extent().k_r == doctest::Approx(1.25));
  CHECK(c.extent().k_z == doctest::Approx(1.25));
}

TEST_CASE("parse_config: full document round trips through config_to_json") {
  nlohmann::json j = nlohmann::json::parse(kMinimalConfig);
  j["kind"] = "stack";
  j["resolution_mm"]["dz"] = 8.0;
  j["alpha_r"] = 1.5;
  j["alpha_z"] = 2.0;
  j["target_readouts"] = 500;
  j["seed"] = 99;
  j["offset"] = 0.25;
  j["surfaces"] = 32;
  j["pole_rule"] = "literal-min";
  auto c = parse_config(j);
  CHECK(c.options().pole_rule == PoleRule::literal_min);
  CHECK(*c.target_readouts == 500);

  auto c2 = parse_config(config_to_json(c));
  CHECK(c2.kind == c.kind);
  CHECK(c2.res_z_mm == doctest::Approx(c.res_z_mm));
  CHECK(c2.density.alpha_r == doctest::Approx(1.5));
  CHECK(c2.density.alpha_z == doctest::Approx(2.0));
  CHECK(*c2.target_readouts == 500);
  CHECK(c2.seed == 99);
  CHECK(c2.offset == doctest::Approx(0.25));
  CHECK(c2.surfaces == 32);
  CHECK(c2.pole_rule == "literal-min");
}

TEST_CASE("parse_config: diagnostics for broken documents") {
  CHECK_THROWS_AS(parse_config_text("{not json"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("{}"), ConfigError);

  auto mutate = [](auto&& fn) {
    nlohmann::json j = nlohmann::json::parse(kMinimalConfig);
    fn(j);
    return j;
  };
  CHECK_THROWS_AS(parse_config(mutate([](auto& j) { j["kind"] = "epic"; })),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(mutate([](auto& j) { j.erase("fov_cm"); })),
                  ConfigError);
  CHECK_THROWS_AS(
      parse_config(mutate([](auto& j) { j["fov_cm"]["lr"] = "wide"; })),
      ConfigError);
  CHECK_THROWS_AS(
      parse_config(mutate([](auto& j) { j["fov_cm"]["lr"] = -3.0; })),
      ConfigError);
  CHECK_THROWS_AS(parse_config(mutate([](auto& j) { j["alpha"] = 0.3; })),
                  ConfigError);
  CHECK_THROWS_AS(
      parse_config(mutate([](auto& j) { j["target_readouts"] = 0; })),
      ConfigError);
  CHECK_THROWS_AS(parse_config(mutate([](auto& j) { j["offset"] = 1.0; })),
                  ConfigError);
  CHECK_THROWS_AS(
      parse_config(mutate([](auto& j) { j["pole_rule"] = "median"; })),
      ConfigError);

  // messages name the offending field
  try {
    parse_config(nlohmann::json::parse("{\"kind\":\"radial\"}"));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("fov_cm.lr") != std::string::npos);
  }
}

TEST_CASE("load_config reads from disk") {
  const auto p = temp_stem("ktraj_cfg_test.json");
  {
    std::ofstream out(p);
    out << kMinimalConfig;
  }
  auto c = load_config(p);
  CHECK(c.kind == "radial");
  std::filesystem::remove(p);
  CHECK_THROWS_AS(load_config(p), ConfigError);
}

TEST_CASE("export/import: bit-exact float32 round trip with checksum") {
  auto cfg = parse_config_text(kMinimalConfig);
  FovModel fm = cfg.fov;
  ExtentModel e = cfg.extent();
  auto d = design_radial(fm, e, cfg.hw);

  const auto stem = temp_stem("ktraj_io_test");
  export_trajectory(d.trajectory, d.dcf, cfg, d.path.n_real, stem);

  auto f = import_trajectory(stem);
  CHECK(f.header.at("format_version") == 1);
  CHECK(f.header.at("n_real").get<double>() ==
        doctest::Approx(d.path.n_real));
  REQUIRE(f.trajectory.readouts.size() == d.trajectory.readouts.size());
  for (std::size_t i = 0; i < f.trajectory.readouts.size(); i += 137) {
    const auto& a = d.trajectory.readouts[i];
    const auto& b = f.trajectory.readouts[i];
    REQUIRE(a.k_samples.size() == b.k_samples.size());
    for (std::size_t s = 0; s < a.k_samples.size(); s += 9) {
      CHECK(static_cast<float>(a.k_samples[s].x) ==
            static_cast<float>(b.k_samples[s].x));
      CHECK(static_cast<float>(a.k_samples[s].y) ==
            static_cast<float>(b.k_samples[s].y));
      CHECK(static_cast<float>(a.k_samples[s].z) ==
            static_cast<float>(b.k_samples[s].z));
      CHECK(static_cast<float>(d.dcf.weights[i][s]) ==
            static_cast<float>(f.dcf.weights[i][s]));
    }
  }
  CHECK(f.dcf.normalization == doctest::Approx(d.dcf.normalization));

  // config echo in the header reproduces the prescription
  auto echoed = parse_config(f.header.at("config"));
  CHECK(echoed.kind == cfg.kind);
  CHECK(echoed.fov.l_r == doctest::Approx(cfg.fov.l_r));

  std::filesystem::remove(stem.string() + ".json");
  std::filesystem::remove(stem.string() + ".traj.bin");
}

TEST_CASE("import rejects corrupted payloads") {
  auto cfg = parse_config_text(kMinimalConfig);
  auto d = design_radial(cfg.fov, cfg.extent(), cfg.hw);
  const auto stem = temp_stem("ktraj_io_corrupt");
  export_trajectory(d.trajectory, d.dcf, cfg, d.path.n_real, stem);

  // flip one byte in the middle of the binary payload
  const auto bin = stem.string() + ".traj.bin";
  {
    std::fstream f(bin, std::ios::in | std::ios::out | std::ios::binary);
    f.seekg(0, std::ios::end);
    const auto size = static_cast<std::streamoff>(f.tellg());
    f.seekp(size / 2);
    char c;
    f.seekg(size / 2);
    f.read(&c, 1);
    c ^= 0x5a;
    f.seekp(size / 2);
    f.write(&c, 1);
  }
  CHECK_THROWS_WITH_AS(import_trajectory(stem), "payload checksum mismatch",
                       std::runtime_error);
  std::filesystem::remove(stem.string() + ".json");
  std::filesystem::remove(bin);
}

TEST_CASE("fnv1a64 reference values") {
  // published FNV-1a test vectors
  CHECK(fnv1a64("", 0) == 14695981039346656037ull);
  CHECK(fnv1a64("a", 1) == 12638187200555641996ull);
  CHECK(fnv1a64("foobar", 6) == 0x85944171f73967e8ull);
}
