// ktraj: trajectory design CLI.  Subcommands design a trajectory from a
// JSON config, check DCFs against the Monte-Carlo oracle, render PSF plot
// data, measure sphere uniformity, or dry-run a config.  Every run writes a
// report echoing the full effective configuration.
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ktraj/analysis.hpp"
#include "ktraj/io.hpp"

using namespace ktraj;
namespace fs = std::filesystem;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<std::int64_t> target;
  std::optional<double> alpha, alpha_r, alpha_z;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config_path, "JSON config file")->required();
  const char* env = std::getenv("KTRAJ_OUT_DIR");
  a.out_dir = env ? env : ".";
  cmd->add_option("--out", a.out_dir, "output directory");
  cmd->add_option("--target-readouts", a.target, "override readout target");
  cmd->add_option("--alpha", a.alpha, "override cone variable-density alpha");
  cmd->add_option("--alpha-r", a.alpha_r, "override in-plane alpha");
  cmd->add_option("--alpha-z", a.alpha_z, "override through-plane alpha");
  cmd->add_option("--seed", a.seed, "override RNG seed");
}

DesignConfig effective_config(const CommonArgs& a,
                              const std::string& force_kind = "") {
  DesignConfig cfg = load_config(a.config_path);
  if (!force_kind.empty()) cfg.kind = force_kind;
  if (a.target) cfg.target_readouts = *a.target;
  if (a.alpha) cfg.density.alpha = *a.alpha;
  if (a.alpha_r) cfg.density.alpha_r = *a.alpha_r;
  if (a.alpha_z) cfg.density.alpha_z = *a.alpha_z;
  if (a.seed) cfg.seed = *a.seed;
  cfg.density.validate();
  return cfg;
}

Design run_design(const DesignConfig& cfg, bool waveforms = true) {
  DesignOptions opt = cfg.options();
  opt.build_waveforms = waveforms;
  if (cfg.kind == "radial")
    return design_radial(cfg.fov, cfg.extent(), cfg.hw, opt);
  if (cfg.kind == "cones")
    return design_cones(cfg.fov, cfg.extent(), cfg.density, cfg.hw, opt);
  return design_stack(cfg.fov, cfg.extent(), cfg.density, cfg.hw, opt);
}

void write_report(const fs::path& path, const DesignConfig& cfg,
                  nlohmann::json results, double ms) {
  nlohmann::json r;
  r["effective_config"] = config_to_json(cfg);
  r["results"] = std::move(results);
  r["timing_ms"] = ms;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report: " + path.string());
  out << r.dump(2) << "\n";
}

class Timer {
 public:
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - t0_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ =
      std::chrono::steady_clock::now();
};

int cmd_design(const CommonArgs& a, const std::string& kind) {
  Timer t;
  DesignConfig cfg = effective_config(a, kind);
  Design d = run_design(cfg);
  fs::create_directories(a.out_dir);
  const fs::path stem = fs::path(a.out_dir) / cfg.kind;
  export_trajectory(d.trajectory, d.dcf, cfg, d.path.n_real, stem);

  nlohmann::json res;
  res["n_real"] = d.path.n_real;
  res["readouts"] = d.trajectory.readouts.size();
  res["total_samples"] = d.trajectory.total_samples();
  res["fov_scale"] = d.fov_scale;
  res["match_iterations"] = d.match_iterations;
  write_report(stem.string() + ".report.json", cfg, res, t.ms());
  std::cout << cfg.kind << ": n_real = " << d.path.n_real << ", readouts = "
            << d.trajectory.readouts.size() << ", wrote " << stem.string()
            << ".{json,traj.bin,report.json}\n";
  return 0;
}

int cmd_dcf_check(const CommonArgs& a, std::size_t mc_points) {
  Timer t;
  DesignConfig cfg = effective_config(a);
  Design d = run_design(cfg);
  if (mc_points == 0) mc_points = 200 * d.trajectory.total_samples();
  auto oracle = voronoi_dcf_oracle(d.trajectory, mc_points, cfg.seed);

  DcfTable analytic = d.dcf;
  analytic.normalize();
  oracle.normalize();
  // compare on the interior shell: at the k-space center the per-sample
  // weights vanish and near the support boundary the Voronoi cells are
  // clipped, so neither region reflects the analytic model's accuracy
  double k_max = 0.0;
  for (const auto& ro : d.trajectory.readouts)
    for (const auto& k : ro.k_samples) k_max = std::max(k_max, k.norm());
  double num = 0.0, cnt = 0.0;
  for (std::size_t i = 0; i < analytic.weights.size(); ++i)
    for (std::size_t s = 0; s < analytic.weights[i].size(); ++s) {
      const double kn = d.trajectory.readouts[i].k_samples[s].norm();
      if (kn < 0.15 * k_max || kn > 0.85 * k_max) continue;
      if (oracle.weights[i][s] > 0.0) {
        const double r = analytic.weights[i][s] / oracle.weights[i][s] - 1.0;
        num += r * r;
        cnt += 1.0;
      }
    }
  const double rms = std::sqrt(num / std::max(1.0, cnt));

  fs::create_directories(a.out_dir);
  nlohmann::json res;
  res["mc_points"] = mc_points;
  res["relative_rms_vs_oracle"] = rms;
  res["samples_compared"] = cnt;
  write_report(fs::path(a.out_dir) / (cfg.kind + ".dcf-check.report.json"),
               cfg, res, t.ms());
  std::cout << "dcf-check: relative RMS vs oracle = " << rms << "\n";
  return 0;
}

int cmd_psf(const CommonArgs& a, std::vector<int> grid) {
  Timer t;
  DesignConfig cfg = effective_config(a);
  Design d = run_design(cfg);
  if (grid.size() != 3)
    throw CLI::ValidationError("--grid", "expects nx,ny,nz");
  const std::array<int, 3> shape{grid[0], grid[1], grid[2]};
  const std::array<double, 3> render{1.5 * cfg.fov.l_r, 1.5 * cfg.fov.l_r,
                                     1.5 * cfg.fov.l_z};
  auto img = compute_psf(d.trajectory, d.dcf, shape, render);

  fs::create_directories(a.out_dir);
  const fs::path stem = fs::path(a.out_dir) / (cfg.kind + ".psf");
  {
    std::ofstream out(stem.string() + ".bin", std::ios::binary);
    std::vector<float> mags;
    mags.reserve(img.values.size());
    for (const auto& v : img.values)
      mags.push_back(static_cast<float>(std::abs(v)));
    out.write(reinterpret_cast<const char*>(mags.data()),
              static_cast<std::streamsize>(mags.size() * sizeof(float)));
  }
  nlohmann::json res;
  res["grid"] = shape;
  res["voxel_cm"] = img.voxel_cm;
  res["fwhm_cm"] = {psf_fwhm(img, 0), psf_fwhm(img, 1), psf_fwhm(img, 2)};
  res["first_alias_cm"] = {first_alias_position(img, 0),
                           first_alias_position(img, 1),
                           first_alias_position(img, 2)};
  for (int axis = 0; axis < 3; ++axis)
    res["axis_profile"][axis] = img.axis_profile(axis);
  res["volume_file"] = stem.string() + ".bin";
  write_report(stem.string() + ".report.json", cfg, res, t.ms());
  std::cout << "psf: fwhm_cm = [" << psf_fwhm(img, 0) << ", "
            << psf_fwhm(img, 1) << ", " << psf_fwhm(img, 2) << "]\n";
  return 0;
}

int cmd_uniformity(const CommonArgs& a, std::size_t mc_points) {
  Timer t;
  DesignConfig cfg = effective_config(a);
  if (cfg.kind != "radial")
    throw ConfigError("uniformity: only radial designs have endpoint spheres");
  Design d = run_design(cfg);
  std::vector<Vec3> dirs;
  dirs.reserve(d.trajectory.readouts.size());
  for (const auto& ro : d.trajectory.readouts) {
    Vec3 tip = ro.k_samples.back();
    dirs.push_back(tip * (1.0 / tip.norm()));
  }
  if (mc_points == 0) mc_points = 500 * dirs.size();
  auto st = sphere_uniformity(dirs, mc_points, cfg.seed);

  fs::create_directories(a.out_dir);
  nlohmann::json res;
  res["points"] = dirs.size();
  res["mc_points"] = mc_points;
  res["voronoi_area_mean"] = st.mean;
  res["voronoi_area_cv"] = st.cv;
  res["voronoi_area_min"] = st.min;
  res["voronoi_area_max"] = st.max;
  res["used_points"] = st.used_points;
  write_report(fs::path(a.out_dir) / "radial.uniformity.report.json", cfg,
               res, t.ms());
  std::cout << "uniformity: voronoi area CV = " << st.cv << " over "
            << st.used_points << " points\n";
  return 0;
}

int cmd_info(const CommonArgs& a) {
  Timer t;
  DesignConfig cfg = effective_config(a);
  Design d = run_design(cfg, /*waveforms=*/false);

  fs::create_directories(a.out_dir);
  nlohmann::json res;
  res["n_real"] = d.path.n_real;
  res["rounded_count"] =
      static_cast<std::int64_t>(std::floor(d.path.n_real + 0.5));
  res["fov_scale"] = d.fov_scale;
  res["match_iterations"] = d.match_iterations;
  res["extent_cm_inv"] = {cfg.extent().k_r, cfg.extent().k_z};
  write_report(fs::path(a.out_dir) / (cfg.kind + ".info.report.json"), cfg,
               res, t.ms());
  std::cout << "info: kind = " << cfg.kind << ", n_real = " << d.path.n_real
            << ", rounded count = " << res["rounded_count"] << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"k-space trajectory design toolkit"};
  app.require_subcommand(1);

  CommonArgs args[6];
  std::size_t mc_points = 0;
  std::vector<int> grid = {64, 64, 64};

  auto* radial = app.add_subcommand("radial", "design a 3D radial trajectory");
  add_common(radial, args[0]);
  auto* cones = app.add_subcommand("cones", "design a 3D cones trajectory");
  add_common(cones, args[1]);
  auto* stack = app.add_subcommand("stack", "design a stack-of-spirals");
  add_common(stack, args[2]);
  auto* dcf = app.add_subcommand("dcf-check",
                                 "compare analytic DCF to the Voronoi oracle");
  add_common(dcf, args[3]);
  dcf->add_option("--mc-points", mc_points, "Monte-Carlo draws (0 = auto)");
  auto* psf = app.add_subcommand("psf", "render point-spread-function data");
  add_common(psf, args[4]);
  psf->add_option("--grid", grid, "PSF grid as nx,ny,nz")->delimiter(',');
  auto* unif = app.add_subcommand("uniformity",
                                  "spherical uniformity of radial endpoints");
  add_common(unif, args[5]);
  unif->add_option("--mc-points", mc_points, "Monte-Carlo draws (0 = auto)");
  auto* info = app.add_subcommand("info", "path-only dry run of a config");
  CommonArgs info_args;
  add_common(info, info_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (radial->parsed()) return cmd_design(args[0], "radial");
    if (cones->parsed()) return cmd_design(args[1], "cones");
    if (stack->parsed()) return cmd_design(args[2], "stack");
    if (dcf->parsed()) return cmd_dcf_check(args[3], mc_points);
    if (psf->parsed()) return cmd_psf(args[4], grid);
    if (unif->parsed()) return cmd_uniformity(args[5], mc_points);
    if (info->parsed()) return cmd_info(info_args);
  } catch (const ConfigError& e) {
    std::cerr << "{\"error\":\"config\",\"message\":\"" << e.what() << "\"}\n";
    return 2;
  } catch (const InfeasibleDesign& e) {
    std::cerr << "{\"error\":\"infeasible\",\"message\":\"" << e.what()
              << "\"}\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "{\"error\":\"runtime\",\"message\":\"" << e.what()
              << "\"}\n";
    return 1;
  }
  return 1;
}
