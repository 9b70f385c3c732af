// sbsim: building thermal simulator and RL environment engine.
//
// Subcommands: ingest, run, replay, calibrate, eval, render.
// Exit codes: 0 success, 2 usage error, 3 validation/config error,
// 4 solver failure.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "sbsim/building.hpp"
#include "sbsim/calibration.hpp"
#include "sbsim/env.hpp"
#include "sbsim/episode.hpp"
#include "sbsim/ingest.hpp"
#include "sbsim/manifest.hpp"
#include "sbsim/render.hpp"

namespace {

using namespace sbsim;

struct ManifestScope {
  RunManifest manifest;
  std::string dir;

  ManifestScope(std::string command, std::string out_dir) : dir(std::move(out_dir)) {
    manifest.command = std::move(command);
    manifest.started = wall_clock_now();
  }

  void finish() {
    manifest.finished = wall_clock_now();
    std::filesystem::path p(dir);
    if (!p.empty()) {
      std::error_code ec;
      std::filesystem::create_directories(p, ec);
      manifest.write((p / ("manifest_" + manifest.command + ".json")).string());
    }
  }
};

int cmd_ingest(const std::string& image_path, double scale, double threshold, double cv_size,
               double floor_height, int denoise_iters, const std::string& devices_path,
               const std::string& mask_path, const std::string& out_path, const std::string& name) {
  ManifestScope ms("ingest", std::filesystem::path(out_path).parent_path().string());
  RasterImage img = read_image(image_path);
  IngestOptions opts;
  opts.threshold = threshold;
  opts.scale_m_per_pixel = scale;
  opts.cv_size_m = cv_size;
  opts.floor_height_m = floor_height;
  opts.denoise_iters = denoise_iters;
  opts.name = name;
  std::vector<MaskRect> mask;
  if (!mask_path.empty()) mask = load_mask(mask_path);
  PlacementFile placement;
  if (!devices_path.empty()) placement = load_placement(devices_path);
  BuildingConfig b = ingest_floorplan(img, opts, mask, placement);
  save_building(b, out_path);
  log_info("ingested ", image_path, " -> ", out_path, " (", b.floor_grids[0].rows(), "x",
           b.floor_grids[0].cols(), " CVs, ", b.zones.size(), " zones)");
  ms.manifest.config_path = image_path;
  ms.manifest.config_hash = file_fingerprint(image_path);
  ms.manifest.outputs = {out_path};
  ms.finish();
  return 0;
}

int cmd_run(const std::string& building_path, const std::string& policy_path, int steps,
            std::uint64_t seed, const std::string& out_dir) {
  ManifestScope ms("run", out_dir);
  BuildingConfig b = load_building(building_path);
  Environment env(b);
  std::unique_ptr<Policy> policy = load_policy(policy_path);
  EpisodeArchive ep = run_episode(env, *policy, steps, seed);
  save_episode(ep, out_dir);
  log_info("ran ", steps, " steps -> ", out_dir);
  ms.manifest.config_path = building_path;
  ms.manifest.config_hash = file_fingerprint(building_path);
  ms.manifest.seed = seed;
  ms.manifest.outputs = {out_dir};
  ms.finish();
  return 0;
}

int cmd_replay(const std::string& building_path, const std::string& episode_dir, int nsteps,
               std::uint64_t seed, const std::string& params_path, const std::string& report_path) {
  ManifestScope ms("replay", std::filesystem::path(report_path).parent_path().string());
  BuildingConfig b = load_building(building_path);
  if (!params_path.empty()) {
    std::ifstream in(params_path);
    if (!in) fail<ConfigError>("params file '", params_path, "' not readable");
    json pj;
    in >> pj;
    ParamVector p{};
    for (int i = 0; i < kNumTunables; ++i) p[i] = pj.at(tunable_names()[i]).get<double>();
    b.materials = materialize(p);
  }
  EpisodeArchive ep = load_episode(episode_dir);
  if (nsteps <= 0) nsteps = ep.observations.steps() - 1;
  ReplayResult r = n_step_replay(b, ep, nsteps, seed);
  json report;
  report["episode"] = episode_dir;
  report["n_steps"] = nsteps;
  report["zones"] = r.zone_ids;
  report["ts_mae_c"] = r.error_c;
  std::ofstream out(report_path);
  if (!out) fail<ConfigError>("cannot write '", report_path, "'");
  out << report.dump(2) << "\n";
  std::cout << "TS-MAE over " << nsteps << " steps: " << r.error_c << " degC\n";
  ms.manifest.config_path = building_path;
  ms.manifest.config_hash = file_fingerprint(building_path);
  ms.manifest.seed = seed;
  ms.manifest.outputs = {report_path};
  ms.finish();
  return 0;
}

int cmd_calibrate(const std::string& building_path, const std::string& train_dir,
                  const std::string& val_dir, int budget, const std::string& optimizer, int workers,
                  std::uint64_t seed, const std::string& out_csv, const std::string& best_path) {
  ManifestScope ms("calibrate", std::filesystem::path(out_csv).parent_path().string());
  BuildingConfig b = load_building(building_path);
  EpisodeArchive train = load_episode(train_dir);
  std::optional<EpisodeArchive> val;
  if (!val_dir.empty()) val = load_episode(val_dir);

  CalibrationOptions opts;
  opts.budget = budget;
  opts.optimizer = optimizer;
  opts.workers = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
  opts.seed = seed;
  CalibrationReport report = calibrate(b, train, opts, val ? &*val : nullptr);
  write_trials_csv(report, out_csv);
  if (!best_path.empty()) {
    json bj;
    for (int i = 0; i < kNumTunables; ++i) bj[tunable_names()[i]] = report.best.params[i];
    std::ofstream out(best_path);
    if (!out) fail<ConfigError>("cannot write '", best_path, "'");
    out << bj.dump(2) << "\n";
  }
  std::cout << "best trial " << report.best.trial << ": train eps = " << report.best.train_error_c
            << " degC";
  if (report.best.val_error_c) std::cout << ", val eps = " << *report.best.val_error_c << " degC";
  std::cout << "\n";
  ms.manifest.config_path = building_path;
  ms.manifest.config_hash = file_fingerprint(building_path);
  ms.manifest.seed = seed;
  ms.manifest.outputs = {out_csv};
  if (!best_path.empty()) ms.manifest.outputs.push_back(best_path);
  ms.finish();
  return 0;
}

int cmd_eval(const std::string& building_path, const std::string& train_dir, const std::string& val_dir,
             const std::string& params_path, std::uint64_t seed, const std::string& report_path) {
  ManifestScope ms("eval", std::filesystem::path(report_path).parent_path().string());
  BuildingConfig base = load_building(building_path);
  BuildingConfig calibrated = base;
  bool have_params = false;
  if (!params_path.empty()) {
    std::ifstream in(params_path);
    if (!in) fail<ConfigError>("params file '", params_path, "' not readable");
    json pj;
    in >> pj;
    ParamVector p{};
    for (int i = 0; i < kNumTunables; ++i) p[i] = pj.at(tunable_names()[i]).get<double>();
    calibrated.materials = materialize(p);
    have_params = true;
  }

  json report;
  std::printf("%-8s %-8s %12s %12s\n", "split", "steps", "calib. eps", "uncalib. eps");
  auto eval_split = [&](const std::string& label, const std::string& dir) {
    if (dir.empty()) return;
    EpisodeArchive ep = load_episode(dir);
    const int n = ep.observations.steps() - 1;
    const double uncal = n_step_replay(base, ep, n, seed).error_c;
    const double cal = have_params ? n_step_replay(calibrated, ep, n, seed).error_c : uncal;
    std::printf("%-8s %-8d %12.4f %12.4f\n", label.c_str(), n, cal, uncal);
    report[label] = {{"steps", n}, {"calibrated_eps_c", cal}, {"uncalibrated_eps_c", uncal}};
  };
  eval_split("train", train_dir);
  eval_split("val", val_dir);
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    if (!out) fail<ConfigError>("cannot write '", report_path, "'");
    out << report.dump(2) << "\n";
    ms.manifest.outputs = {report_path};
  }
  ms.manifest.config_path = building_path;
  ms.manifest.config_hash = file_fingerprint(building_path);
  ms.manifest.seed = seed;
  ms.finish();
  return 0;
}

// Paints per-zone temperatures (or differences against another episode) onto
// the floorplan and renders the heatmap.
int cmd_render(const std::string& episode_dir, int t, const std::string& diff_dir, int floor,
               const std::string& out_path) {
  ManifestScope ms("render", std::filesystem::path(out_path).parent_path().string());
  EpisodeArchive ep = load_episode(episode_dir);
  if (t < 0 || t >= ep.observations.steps()) {
    fail<ValidationError>("step ", t, " out of range (episode has ", ep.observations.steps(), " rows)");
  }
  std::optional<EpisodeArchive> diff;
  if (!diff_dir.empty()) {
    diff = load_episode(diff_dir);
    if (t >= diff->observations.steps()) fail<ValidationError>("step ", t, " out of range in diff episode");
  }

  const json& floors = ep.metadata.at("floorplan");
  if (floor < 0 || floor >= static_cast<int>(floors.size())) {
    fail<ValidationError>("floor ", floor, " out of range");
  }
  const Grid2D<CellClass> classes = detail::grid_from_json(floors[floor]);
  Grid2D<double> field(classes.rows(), classes.cols(), std::numeric_limits<double>::quiet_NaN());
  for (const json& z : ep.metadata.at("zone_info")) {
    if (z.at("floor").get<int>() != floor) continue;
    const std::string id = z.at("id").get<std::string>();
    double v = ep.observations.at(t, names::zone_temp(id));
    if (diff) v -= diff->observations.at(t, names::zone_temp(id));
    for (const json& cj : z.at("cells")) {
      field(cj[0].get<int>(), cj[1].get<int>()) = v;
    }
  }
  HeatmapOptions opts;
  opts.diverging = diff.has_value();
  render_heatmap(field, classes, out_path, opts);
  log_info("rendered ", out_path);
  ms.manifest.config_path = episode_dir;
  ms.manifest.outputs = {out_path, out_path + ".txt"};
  ms.finish();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sbsim: finite-difference building thermal simulator"};
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Convert a floorplan image into a building config");
  std::string in_image, in_devices, in_mask, in_out = "building.json", in_name = "ingested";
  double in_scale = 0.0, in_threshold = 0.5, in_cv = 0.5, in_floor_height = 3.0;
  int in_denoise = 2;
  ingest->add_option("--image", in_image, "Floorplan image (PNG or PGM)")->required();
  ingest->add_option("--scale", in_scale, "Image scale in m/pixel")->required();
  ingest->add_option("--threshold", in_threshold, "Binarization threshold in [0,1]");
  ingest->add_option("--cv-size", in_cv, "Control-volume size in m");
  ingest->add_option("--floor-height", in_floor_height, "Floor height in m");
  ingest->add_option("--denoise-iters", in_denoise, "Morphological opening rounds");
  ingest->add_option("--devices", in_devices, "Device placement JSON");
  ingest->add_option("--mask", in_mask, "Feature-erase mask JSON");
  ingest->add_option("--out", in_out, "Output building config path");
  ingest->add_option("--name", in_name, "Building name");

  // run
  auto* run = app.add_subcommand("run", "Run a policy and record an episode");
  std::string run_building, run_policy, run_out = "episode";
  int run_steps = 288;
  std::uint64_t run_seed = 0;
  run->add_option("--building", run_building, "Building config JSON")->required();
  run->add_option("--policy", run_policy, "Policy JSON")->required();
  run->add_option("--steps", run_steps, "Number of 5-minute steps");
  run->add_option("--seed", run_seed, "Master seed");
  run->add_option("--out", run_out, "Episode output directory");

  // replay
  auto* replay = app.add_subcommand("replay", "N-step replay of an episode; reports TS-MAE");
  std::string rp_building, rp_episode, rp_params, rp_report = "tsmae.json";
  int rp_nsteps = 0;
  std::uint64_t rp_seed = 0;
  replay->add_option("--building", rp_building, "Building config JSON")->required();
  replay->add_option("--episode", rp_episode, "Episode directory")->required();
  replay->add_option("--nsteps", rp_nsteps, "Replay steps (default: full episode)");
  replay->add_option("--seed", rp_seed, "Replay seed");
  replay->add_option("--params", rp_params, "Material parameter JSON override");
  replay->add_option("--report", rp_report, "Report output path");

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "Tune material parameters against an episode");
  std::string cal_building, cal_train, cal_val, cal_out = "trials.csv", cal_best, cal_opt = "random";
  int cal_budget = 100, cal_workers = 0;
  std::uint64_t cal_seed = 0;
  cal->add_option("--building", cal_building, "Building config JSON")->required();
  cal->add_option("--train", cal_train, "Training episode directory")->required();
  cal->add_option("--val", cal_val, "Validation episode directory");
  cal->add_option("--budget", cal_budget, "Trial budget");
  cal->add_option("--optimizer", cal_opt, "random | golden");
  cal->add_option("--workers", cal_workers, "Parallel trial workers (0 = hardware)");
  cal->add_option("--seed", cal_seed, "Master seed");
  cal->add_option("--out", cal_out, "Trial log CSV path");
  cal->add_option("--best", cal_best, "Best-parameters JSON path");

  // eval
  auto* eval = app.add_subcommand("eval", "Train/validation TS-MAE report");
  std::string ev_building, ev_train, ev_val, ev_params, ev_report = "eval.json";
  std::uint64_t ev_seed = 0;
  eval->add_option("--building", ev_building, "Building config JSON")->required();
  eval->add_option("--train", ev_train, "Training episode directory");
  eval->add_option("--val", ev_val, "Validation episode directory");
  eval->add_option("--params", ev_params, "Calibrated parameter JSON");
  eval->add_option("--seed", ev_seed, "Replay seed");
  eval->add_option("--report", ev_report, "Report output path");

  // render
  auto* render = app.add_subcommand("render", "Render a zone temperature heatmap");
  std::string rd_episode, rd_diff, rd_out = "heatmap.png";
  int rd_t = 0, rd_floor = 0;
  render->add_option("--episode", rd_episode, "Episode directory")->required();
  render->add_option("--t", rd_t, "Step index");
  render->add_option("--diff-against", rd_diff, "Episode to subtract");
  render->add_option("--floor", rd_floor, "Floor index");
  render->add_option("--out", rd_out, "Output image (PNG or PPM)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*ingest) {
      return cmd_ingest(in_image, in_scale, in_threshold, in_cv, in_floor_height, in_denoise, in_devices,
                        in_mask, in_out, in_name);
    }
    if (*run) return cmd_run(run_building, run_policy, run_steps, run_seed, run_out);
    if (*replay) return cmd_replay(rp_building, rp_episode, rp_nsteps, rp_seed, rp_params, rp_report);
    if (*cal) {
      return cmd_calibrate(cal_building, cal_train, cal_val, cal_budget, cal_opt, cal_workers, cal_seed,
                           cal_out, cal_best);
    }
    if (*eval) return cmd_eval(ev_building, ev_train, ev_val, ev_params, ev_seed, ev_report);
    if (*render) return cmd_render(rd_episode, rd_t, rd_diff, rd_floor, rd_out);
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 4;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
