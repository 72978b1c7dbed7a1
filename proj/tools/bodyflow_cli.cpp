// Command-line front end for the bodyflow library.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bodyflow/capsule_human.hpp"
#include "bodyflow/error.hpp"
#include "bodyflow/model_io.hpp"
#include "bodyflow/obj_export.hpp"
#include "bodyflow/pipeline.hpp"

namespace fs = std::filesystem;
using namespace bodyflow;
using nlohmann::json;

namespace {

struct Globals {
  std::string model = "builtin";
  std::uint64_t seed = 0;
  double rtol = 1e-5;
  double atol = 1e-7;
  int samples = 1000;
  std::string weights;
  std::string out;
};

RunOptions run_options(const Globals& g) {
  RunOptions run;
  run.seed = g.seed;
  run.samples = g.samples;
  run.solver.rtol = g.rtol;
  run.solver.atol = g.atol;
  if (!g.weights.empty()) run.weights = std::make_shared<const MlpWeights>(load_mlp(g.weights));
  return run;
}

std::string require_out(const Globals& g) {
  if (g.out.empty()) throw ValidationError("--out is required");
  return g.out;
}

fs::path out_dir(const Globals& g) {
  const fs::path dir = require_out(g);
  fs::create_directories(dir);
  return dir;
}

void write_frames(const SkinnedModel& model, const std::vector<Pose>& poses, const fs::path& dir) {
  char name[32];
  for (std::size_t i = 0; i < poses.size(); ++i) {
    std::snprintf(name, sizeof name, "frame_%04zu.obj", i);
    export_obj(model, poses[i], (dir / name).string());
  }
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "all")
      out.push_back(0);
    else
      out.push_back(std::stoi(item));
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

int cmd_correct(const Globals& g, const std::string& input, const std::string& keyposes) {
  const SkinnedModel model = resolve_model(g.model);
  const PoseSequence seq = load_pose_sequence(input);
  CorrectOptions options;
  options.run = run_options(g);
  KeyposeDictionary dict;
  if (!keyposes.empty()) {
    dict = load_keyposes(keyposes);
    options.keyposes = &dict;
  }
  const CorrectResult result = correct_sequence(model, seq, options);
  const fs::path dir = out_dir(g);
  save_pose_sequence(result.corrected, (dir / "corrected.json").string());
  MetricsReport metrics = result.metrics;
  save_metrics(metrics, (dir / "metrics.json").string());
  json log = json::array();
  int flagged = 0;
  for (const FrameLog& f : result.log) {
    flagged += f.flagged;
    log.push_back({{"frame", f.frame},
                   {"strategy", f.strategy},
                   {"tries", f.tries},
                   {"collisions_in", f.collisions_in},
                   {"collisions_out", f.collisions_out},
                   {"status", f.status},
                   {"steps", f.steps},
                   {"flagged", f.flagged},
                   {"note", f.note}});
  }
  json summary = {{"frames", result.log.size()},
                  {"col_rate_at_0_in", result.col_rate_in},
                  {"col_rate_at_0_out", result.col_rate_out},
                  {"flagged_frames", flagged},
                  {"frames_log", log}};
  write_text((dir / "frames.json").string(), summary.dump(1) + "\n");
  std::printf("frames: %zu  flagged: %d\n", result.log.size(), flagged);
  std::printf("Col.Rate@0 input: %.1f%%  output: %.1f%%\n", result.col_rate_in, result.col_rate_out);
  std::cout << metrics_table(metrics);
  return 0;
}

int cmd_interpolate(const Globals& g, const std::string& from, const std::string& to, bool obj) {
  const SkinnedModel model = resolve_model(g.model);
  const Trajectory traj = interpolate_poses(model, load_pose(from), load_pose(to), run_options(g));
  const fs::path dir = out_dir(g);
  save_trajectory(traj, (dir / "trajectory.json").string());
  if (obj) write_frames(model, traj.poses, dir);
  std::printf("status: %s  steps: %zu  t: %.6g\n", status_name(traj.status), traj.diagnostics.size(),
              traj.times.back());
  return 0;
}

int cmd_scenario(const Globals& g, const std::string& config_path, bool obj) {
  const std::string text = read_text(config_path);
  const json raw = json::parse(text, nullptr, false);
  const std::string model_spec = raw.is_object() && raw.contains("model") && raw["model"].is_string()
                                     ? raw["model"].get<std::string>()
                                     : g.model;
  const SkinnedModel model = resolve_model(model_spec);
  const ScenarioConfig cfg = parse_scenario(text, model);
  const ScenarioResult result = run_scenario(model, cfg);
  const fs::path dir = out_dir(g);
  save_trajectory(result.trajectory, (dir / "trajectory.json").string());
  const ScenarioReport& r = result.report;
  const json report = {{"status", r.status},
                       {"steps", r.steps},
                       {"t_final", r.t_final},
                       {"final_distance", r.final_distance},
                       {"region_penetration", r.region_penetration},
                       {"max_penetration", r.max_penetration},
                       {"r_in", cfg.r_in},
                       {"final_collisions", r.final_collisions}};
  write_text((dir / "report.json").string(), report.dump(1) + "\n");
  if (obj) write_frames(model, result.trajectory.poses, dir);
  std::printf("status: %s  steps: %d  t: %.6g\n", r.status.c_str(), r.steps, r.t_final);
  for (std::size_t i = 0; i < r.final_distance.size(); ++i)
    std::printf("target %zu: final distance %.4f m\n", i, r.final_distance[i]);
  std::printf("region penetration: %.4f m (r_in %.4f)\n", r.region_penetration, cfg.r_in);
  return 0;
}

int cmd_metrics(const Globals& g, const std::string& pred, const std::string& gt, const std::string& thresholds,
                double fps) {
  const SkinnedModel model = resolve_model(g.model);
  const PoseSequence p = load_pose_sequence(pred);
  const PoseSequence t = load_pose_sequence(gt);
  const MetricsReport report = compute_metrics(model, p, t, parse_int_list(thresholds), fps > 0 ? fps : p.fps);
  if (!g.out.empty()) save_metrics(report, g.out);
  std::cout << metrics_table(report);
  return 0;
}

int cmd_ablate(const Globals& g, const std::string& counts, const std::string& deltas, int seeds, double amplitude) {
  const SkinnedModel model = resolve_model(g.model);
  AblationConfig cfg;
  cfg.sample_counts = parse_int_list(counts);
  cfg.delta_norms = parse_double_list(deltas);
  cfg.seeds = seeds;
  cfg.seed = g.seed;
  cfg.pose_amplitude = amplitude;
  const std::vector<AblationCell> cells = ablate_sampling(model, cfg);
  const fs::path dir = out_dir(g);
  json table = json::array();
  std::ostringstream timing;
  timing << "samples,delta_norm,median_re,median_ms\n";
  std::printf("%8s  %10s  %12s  %10s\n", "S", "|dTheta|", "median RE", "median ms");
  for (const AblationCell& c : cells) {
    table.push_back({{"samples", c.samples},
                     {"delta_norm", c.delta_norm},
                     {"median_re", c.median_error},
                     {"re_per_seed", c.errors},
                     {"rank_deficient_seeds", c.rank_deficient}});
    char line[128];
    std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.6f\n", c.samples, c.delta_norm, c.median_error,
                  1e3 * c.median_seconds);
    timing << line;
    std::printf("%8d  %10.3g  %12.4e  %10.3f\n", c.samples, c.delta_norm, c.median_error, 1e3 * c.median_seconds);
  }
  write_text((dir / "ablation.json").string(), json{{"seeds", seeds}, {"cells", table}}.dump(1) + "\n");
  // Wall times vary run to run, so they stay out of ablation.json.
  write_text((dir / "timing.csv").string(), timing.str());
  return 0;
}

int cmd_keyposes(const Globals& g, const std::string& corpus, int k) {
  const SkinnedModel model = resolve_model(g.model);
  const PoseSequence seq = load_pose_sequence(corpus);
  const KeyposeDictionary dict = build_keypose_dict(seq.poses, k, model, g.seed);
  save_keyposes(dict, require_out(g));
  std::printf("keyposes: %d from %zu corpus poses\n", dict.size(), seq.poses.size());
  return 0;
}

int cmd_export(const Globals& g, const std::string& pose, const std::string& trajectory) {
  const SkinnedModel model = resolve_model(g.model);
  if (!pose.empty()) {
    export_obj(model, load_pose(pose), require_out(g));
  } else if (!trajectory.empty()) {
    write_frames(model, load_trajectory(trajectory).poses, out_dir(g));
  } else {
    throw ValidationError("export needs --pose or --trajectory");
  }
  return 0;
}

int cmd_synth(const Globals& g, const std::string& what, int count, double fraction, double amplitude,
              const std::string& kind, int hidden, int frequencies) {
  const SkinnedModel model = resolve_model(g.model);
  const std::string out = require_out(g);
  if (what == "sequence") {
    save_pose_sequence(synth_sequence(model, count, fraction, g.seed), out);
  } else if (what == "corpus") {
    PoseSequence seq;
    seq.joints = model.joint_count();
    seq.model_name = model.name;
    seq.poses = synth_corpus(model, count, g.seed, amplitude);
    save_pose_sequence(seq, out);
  } else if (what == "pose") {
    Pose p = Pose::zero(model.joint_count());
    if (kind == "raised") {
      p = left_arm_raised_pose(1.0);
    } else if (kind == "folded") {
      p = hand_in_torso_pose();
    } else if (kind == "random") {
      std::mt19937_64 rng(g.seed);
      p = random_collision_free_pose(model, rng, amplitude);
    } else if (kind != "rest") {
      throw ValidationError("unknown pose kind: " + kind);
    }
    save_pose(p, out, model.name);
  } else if (what == "weights") {
    save_mlp(random_mlp(model.pose_dim(), hidden, frequencies, 1.0, g.seed), out);
  } else if (what == "model") {
    save_model(model, out);
  } else {
    throw ValidationError("unknown synth target: " + what);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bodyflow: collision-free motion of articulated bodies by integrating flow fields"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--model", g.model, "model file or 'builtin'")->capture_default_str();
  app.add_option("--seed", g.seed, "seed for every random choice")->capture_default_str();
  app.add_option("--rtol", g.rtol, "relative tolerance")->capture_default_str();
  app.add_option("--atol", g.atol, "absolute tolerance")->capture_default_str();
  app.add_option("--samples", g.samples, "surface samples S")->capture_default_str();
  app.add_option("--weights", g.weights, "MLP weights file (replaces the linear field)");
  app.add_option("--out", g.out, "output file or directory");

  std::string input, keyposes, from, to, config, pred, gt, thresholds = "0", counts = "100,300,1000,3000,all",
                                                             deltas = "1e-2", corpus, pose, trajectory,
                                                             kind = "rest";
  double fps = 0.0, fraction = 0.5, amplitude = 0.5;
  int seeds = 10, k = 128, count = 200, hidden = 32, frequencies = 4;
  bool obj = false;

  auto* correct = app.add_subcommand("correct", "remove self-intersections from a pose sequence")->fallthrough();
  correct->add_option("--input", input, "pose sequence")->required();
  correct->add_option("--keyposes", keyposes, "keypose dictionary for the last init fallback");

  auto* interp = app.add_subcommand("interpolate", "collision-free path between two poses")->fallthrough();
  interp->add_option("--from", from)->required();
  interp->add_option("--to", to)->required();
  interp->add_flag("--obj", obj, "also write one OBJ per accepted step");

  auto* scenario = app.add_subcommand("scenario", "run a target/obstacle field scenario")->fallthrough();
  scenario->add_option("--config", config)->required();
  scenario->add_flag("--obj", obj, "also write one OBJ per accepted step");

  auto* metrics = app.add_subcommand("metrics", "MPJPE, P-MPJPE, Accel.Err and Col.Rate")->fallthrough();
  metrics->add_option("--pred", pred)->required();
  metrics->add_option("--gt", gt)->required();
  metrics->add_option("--C", thresholds, "comma-separated collision thresholds")->capture_default_str();
  metrics->add_option("--fps", fps, "frame rate (default: from the prediction file)");

  auto* ablate = app.add_subcommand("ablate", "relative error vs. sample count")->fallthrough();
  ablate->add_option("--S", counts, "comma-separated sample counts, 'all' = every vertex")->capture_default_str();
  ablate->add_option("--delta", deltas, "comma-separated perturbation norms")->capture_default_str();
  ablate->add_option("--seeds", seeds)->capture_default_str();
  ablate->add_option("--amplitude", amplitude, "random evaluation-pose amplitude (0 = rest)")->capture_default_str();

  auto* kp = app.add_subcommand("keyposes", "keypose dictionary tools")->fallthrough();
  kp->require_subcommand(1);
  auto* kp_build = kp->add_subcommand("build", "cluster a corpus into K keyposes")->fallthrough();
  kp_build->add_option("--corpus", corpus)->required();
  kp_build->add_option("--k", k)->capture_default_str();

  auto* exp = app.add_subcommand("export", "write OBJ meshes")->fallthrough();
  exp->add_option("--pose", pose, "single pose file -> OBJ at --out");
  exp->add_option("--trajectory", trajectory, "trajectory file -> OBJ per step in --out");

  std::string what;
  auto* synth = app.add_subcommand("synth", "generate synthetic inputs")->fallthrough();
  synth->add_option("what", what, "sequence | corpus | pose | weights | model")->required();
  synth->add_option("--frames,--count", count)->capture_default_str();
  synth->add_option("--collision-fraction", fraction)->capture_default_str();
  synth->add_option("--amplitude", amplitude)->capture_default_str();
  synth->add_option("--kind", kind, "rest | raised | folded | random")->capture_default_str();
  synth->add_option("--hidden", hidden)->capture_default_str();
  synth->add_option("--frequencies", frequencies, "Fourier frequencies of random weights")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*correct) return cmd_correct(g, input, keyposes);
    if (*interp) return cmd_interpolate(g, from, to, obj);
    if (*scenario) return cmd_scenario(g, config, obj);
    if (*metrics) return cmd_metrics(g, pred, gt, thresholds, fps);
    if (*ablate) return cmd_ablate(g, counts, deltas, seeds, amplitude);
    if (*kp_build) return cmd_keyposes(g, corpus, k);
    if (*exp) return cmd_export(g, pose, trajectory);
    if (*synth) return cmd_synth(g, what, count, fraction, amplitude, kind, hidden, frequencies);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: bad number in list argument\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
