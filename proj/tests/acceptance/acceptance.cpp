// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "bodyflow/capsule_human.hpp"
#include "bodyflow/collision.hpp"
#include "bodyflow/dormand_prince.hpp"
#include "bodyflow/flow_fields.hpp"
#include "bodyflow/metrics.hpp"
#include "bodyflow/pipeline.hpp"
#include "bodyflow/rng.hpp"
#include "bodyflow/surface_sampling.hpp"
#include "bodyflow/velocity_projection.hpp"
#include "cli_runner.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace bodyflow;
using fixtures::human;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome zero_collision_contract() {
  const SkinnedModel& m = human();
  const auto t0 = Clock::now();
  const PoseSequence seq = synth_sequence(m, 200, 0.4, 11);
  int constructed = 0;
  for (const Pose& p : seq.poses) constructed += has_self_intersection(m, p);
  CorrectOptions opt;
  opt.run.seed = 11;
  opt.keep_trajectories = true;
  const CorrectResult r = correct_sequence(m, seq, opt);
  const double secs = seconds_since(t0);

  int dirty_steps = 0, steps = 0, flagged = 0;
  for (const Trajectory& t : r.trajectories)
    for (const Pose& p : t.poses) {
      ++steps;
      dirty_steps += has_self_intersection(m, p);
    }
  for (const FrameLog& f : r.log) flagged += f.flagged;
  const double out_rate = col_rate(r.corrected.poses, m, 0);
  const bool pass = constructed >= 80 && r.col_rate_out == 0.0 && out_rate == 0.0 && dirty_steps == 0 &&
                    secs < 600.0;
  return {pass, fmt("input collisions %d/200 (%.1f%%), output Col.Rate@0 %.1f%%, %d flagged, %d/%d states "
                    "colliding, %.0f s",
                    constructed, r.col_rate_in, out_rate, flagged, dirty_steps, steps, secs)};
}

Outcome linear_round_trip() {
  const SkinnedModel& m = human();
  const auto t0 = Clock::now();
  const Points& rest = m.template_vertices;
  const double diag = (rest.colwise().maxCoeff() - rest.colwise().minCoeff()).norm();
  RunOptions run;
  run.solver.rtol = 1e-5;
  run.solver.atol = 1e-7;
  const double bound = 10.0 * (run.solver.atol + run.solver.rtol) * diag;
  std::mt19937_64 rng(2);
  double total = 0.0, worst = 0.0;
  int incomplete = 0;
  for (int i = 0; i < 50; ++i) {
    const Pose a = random_collision_free_pose(m, rng, 0.5);
    const Pose b = random_collision_free_pose(m, rng, 0.5);
    run.seed = static_cast<std::uint64_t>(i);
    const Trajectory traj = interpolate_poses(m, a, b, run);
    incomplete += traj.status != TrajectoryStatus::Completed;
    const double err =
        (skin_vertices(m, traj.final_pose()).points - skin_vertices(m, b).points).rowwise().norm().mean();
    total += err;
    worst = std::max(worst, err);
  }
  const double mean = total / 50.0;
  const double secs = seconds_since(t0);
  return {mean < bound && secs < 300.0,
          fmt("mean vertex error %.3e m (worst %.3e), bound %.3e m, %d not completed, %.0f s", mean, worst, bound,
              incomplete, secs)};
}

Outcome jacobian_correctness() {
  const SkinnedModel& m = human();
  const auto t0 = Clock::now();
  std::mt19937_64 rng(3);
  double worst = 0.0;
  for (int draw = 0; draw < 100; ++draw) {
    const Pose p = random_human_pose(rng, 1.0);
    const SampleSet s = sample_surface(m, 10, 1000 + draw);
    const Eigen::MatrixXd J = pose_jacobian(m, p, s);
    const auto positions = [&](const Eigen::VectorXd& th) -> Eigen::VectorXd {
      return evaluate_attachments(m, Pose{th}, s).flat();
    };
    const Eigen::MatrixXd fd = oracle::central_difference(positions, p.theta, 1e-6);
    worst = std::max(worst, (J - fd).norm() / fd.norm());
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-6 && secs < 60.0, fmt("worst relative Frobenius error %.3e over 100 draws, %.1f s", worst, secs)};
}

Outcome re_regime() {
  const SkinnedModel& m = human();
  const auto t0 = Clock::now();
  const SampleSet all = vertex_samples(m);
  const std::vector<double> norms{1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1};
  std::vector<std::vector<double>> re(norms.size());
  std::vector<double> mean_disp(norms.size(), 0.0);
  for (int seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(500 + seed);
    const Pose p = random_human_pose(rng, 0.5);
    const Eigen::VectorXd x0 = evaluate_attachments(m, p, all).flat();
    for (std::size_t k = 0; k < norms.size(); ++k) {
      const PoseDelta d = random_delta(m.pose_dim(), norms[k], static_cast<std::uint64_t>(seed));
      re[k].push_back(relative_error(m, p, d, all));
      const Eigen::VectorXd x1 = evaluate_attachments(m, Pose{p.theta + d.dtheta}, all).flat();
      const Eigen::VectorXd disp = x1 - x0;
      double sum = 0.0;
      for (int v = 0; v < all.size(); ++v) sum += disp.segment<3>(3 * v).norm();
      mean_disp[k] += sum / all.size() / 10.0;
    }
  }
  // Least-squares slope of log displacement vs log norm over [1e-6, 1e-2].
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int n = 5;
  for (int k = 0; k < n; ++k) {
    const double x = std::log(norms[k]), y = std::log(mean_disp[k]);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double re2 = median(re[4]), re1 = median(re[5]);
  const double secs = seconds_since(t0);
  const bool pass = re2 < 0.15 && re1 > 3.0 * re2 && std::abs(slope - 1.0) <= 0.05 && secs < 300.0;
  return {pass, fmt("median RE(1e-6) %.2e, RE(1e-2) %.3e, RE(1e-1) %.3e (ratio %.1f), displacement slope %.4f, "
                    "%.0f s",
                    median(re[0]), re2, re1, re1 / re2, slope, secs)};
}

Outcome sampling_ablation() {
  const auto t0 = Clock::now();
  AblationConfig cfg;
  cfg.sample_counts = {100, 300, 1000, 3000};
  cfg.seeds = 10;
  const std::vector<AblationCell> cells = ablate_sampling(human(), cfg);
  bool monotone = true;
  std::string row;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    row += fmt(" S=%d: RE %.3e, %.2f ms;", cells[i].samples, cells[i].median_error, 1e3 * cells[i].median_seconds);
    if (i > 0) {
      monotone &= cells[i].median_error <= cells[i - 1].median_error;
      monotone &= cells[i].median_seconds > cells[i - 1].median_seconds;
    }
  }
  const fs::path dir = fixtures::scratch_dir("accept_ablate");
  const int code = cli::run("ablate --S 100,300,1000,3000 --seeds 10 --out \"" + dir.string() + "\"");
  const bool report = code == 0 && fs::exists(dir / "ablation.json") && fs::exists(dir / "timing.csv");
  const double secs = seconds_since(t0);
  return {monotone && report && secs < 600.0,
          fmt("%s report %s, %.0f s", row.c_str(), report ? "written" : "missing", secs)};
}

Outcome blend_exactness() {
  const double r_in = 0.010, r_out = 0.030, h = 1e-9, du = h / (r_out - r_in);
  const double b0 = bezier_blend(r_in, r_in, r_out), b1 = bezier_blend(r_out, r_in, r_out);
  const double mid = bezier_blend(0.5 * (r_in + r_out), r_in, r_out);
  const double d0 = (bezier_blend(r_in + h, r_in, r_out) - b0) / du;
  const double d1 = (b1 - bezier_blend(r_out - h, r_in, r_out)) / du;
  const bool pass = b0 == 0.0 && b1 == 1.0 && std::abs(mid - 0.3125) < 1e-12 && std::abs(d0) < 1e-6 &&
                    std::abs(d1) < 1e-6;
  return {pass, fmt("b(r_in)=%g b(r_out)=%g b(mid)=%.15f db/du at ends %.1e %.1e", b0, b1, mid, d0, d1)};
}

Outcome obstacle_scenario() {
  const SkinnedModel& m = human();
  const auto t0 = Clock::now();
  const fs::path data = BODYFLOW_TEST_DATA;
  const ScenarioConfig box_cfg = parse_scenario(cli::slurp(data / "reach_box.json"), m);
  const ScenarioConfig free_cfg = parse_scenario(cli::slurp(data / "reach_free.json"), m);
  const ScenarioReport box = run_scenario(m, box_cfg).report;
  const ScenarioReport free = run_scenario(m, free_cfg).report;
  const double secs = seconds_since(t0);
  const bool pass = box.region_penetration <= box_cfg.r_in && free.final_distance[0] < 2.0 * free_cfg.r_in &&
                    secs < 120.0;
  return {pass, fmt("box: %s, penetration %.4f m (r_in %.3f), distance %.3f m; free: %s, distance %.4f m; %.0f s",
                    box.status.c_str(), box.region_penetration, box_cfg.r_in, box.final_distance[0],
                    free.status.c_str(), free.final_distance[0], secs)};
}

Outcome solver_order() {
  const OdeRhs f = [](double, const Eigen::VectorXd& y) { return Eigen::VectorXd(y); };
  double prev = 0.0, worst = 1e300;
  std::string orders;
  for (int k = 0; k <= 4; ++k) {
    SolverConfig cfg;
    cfg.fixed_step = 0.125 / (1 << k);
    Eigen::VectorXd y = Eigen::VectorXd::Ones(1);
    dormand_prince(f, 0.0, 2.0, y, cfg);
    const double err = std::abs(y(0) - std::exp(2.0));
    if (k > 0) {
      const double order = std::log2(prev / err);
      worst = std::min(worst, order);
      orders += fmt(" %.3f", order);
    }
    prev = err;
  }
  return {worst >= 4.8, "observed orders" + orders};
}

Outcome detector_agreement() {
  const SkinnedModel& m = human();
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  int agree = 0, positives = 0;
  for (int i = 0; i < 50; ++i) {
    Pose p = random_human_pose(rng, 1.0);
    if (i % 2) {
      p.set_rotation(kLeftShoulder, Vec3(0, -1.5708 + uniform(rng, -0.3, 0.3), uniform(rng, -0.2, 0.2)));
      p.set_rotation(kLeftElbow, Vec3(0, -uniform(rng, 1.2, 2.6), 0));
    }
    const bool ours = has_self_intersection(m, p);
    const bool ref = oracle::mesh_self_intersects(skin_vertices(m, p).points, m.faces);
    agree += ours == ref;
    positives += ref;
  }
  return {agree >= 49, fmt("%d/50 agree (%d oracle positives), %.0f s", agree, positives, seconds_since(t0))};
}

Outcome metric_oracles() {
  std::mt19937_64 rng(10);
  JointSequence gt, pred;
  for (int f = 0; f < 6; ++f) {
    Points g(16, 3);
    for (int i = 0; i < g.size(); ++i) g.data()[i] = 400.0 * standard_normal(rng);
    const Mat3 R = axis_angle_to_matrix(Vec3(standard_normal(rng), standard_normal(rng), standard_normal(rng)));
    const double s = uniform(rng, 0.5, 2.0);
    const Eigen::RowVector3d t(uniform(rng, -50, 50), uniform(rng, -50, 50), uniform(rng, -50, 50));
    gt.push_back(g);
    pred.push_back(((s * (g * R.transpose())).rowwise() + t).eval());
  }
  const double pm = p_mpjpe(pred, gt);

  JointSequence grid(8, Points::Zero(16, 3));
  for (std::size_t t = 0; t < grid.size(); ++t)
    for (int j = 0; j < 16; ++j) grid[t].row(j) << j, 3 * j - 7, 20 - j;
  JointSequence quad = grid;
  for (std::size_t t = 0; t < quad.size(); ++t) quad[t].col(0).array() += static_cast<double>(t * t);
  const double acc = accel_err(quad, grid, 1.0);

  const SkinnedModel& m = human();
  const Pose rest = Pose::zero(m.joint_count());
  const Pose hit = hand_in_torso_pose();
  const int n = self_intersection_count(m, hit).count;
  const std::vector<Pose> seq{rest, hit, hit, rest, rest, hit, rest, rest};  // 3 of 8 colliding
  const bool counts = col_rate(seq, m, 0) == 37.5 && col_rate(seq, m, n - 1) == 37.5 && col_rate(seq, m, n) == 0.0 &&
                      col_rate_from_counts({0, 4, 0, 9, 2}, 0) == 60.0 &&
                      col_rate_from_counts({0, 4, 0, 9, 2}, 4) == 20.0;
  return {pm < 1e-9 && acc == 2.0 && counts,
          fmt("p_mpjpe of similarity copies %.2e mm, accel_err %.17g, Col.Rate hand counts %s", pm, acc,
              counts ? "match" : "differ")};
}

Outcome cli_determinism() {
  const auto t0 = Clock::now();
  const fs::path data = BODYFLOW_TEST_DATA;
  const auto q = [](const fs::path& p) { return "\"" + p.string() + "\""; };
  std::vector<std::string> failed;
  int commands = 0;
  for (int run = 0; run < 2; ++run) {
    const fs::path d = fixtures::scratch_dir("accept_det_" + std::to_string(run));
    const std::vector<std::string> cmds = {
        "--seed 5 synth sequence --frames 10 --collision-fraction 0.4 --out " + q(d / "seq.json"),
        "--seed 5 synth corpus --count 40 --out " + q(d / "corpus.json"),
        "--seed 5 synth pose --kind random --out " + q(d / "pose.json"),
        "synth pose --kind rest --out " + q(d / "rest.json"),
        "--seed 5 synth weights --hidden 16 --out " + q(d / "weights.json"),
        "synth model --out " + q(d / "model.json"),
        "--seed 5 correct --input " + q(d / "seq.json") + " --out " + q(d / "correct"),
        "--seed 5 keyposes build --corpus " + q(d / "corpus.json") + " --k 4 --out " + q(d / "k.json"),
        "--seed 5 correct --input " + q(d / "seq.json") + " --keyposes " + q(d / "k.json") + " --out " +
            q(d / "correct_k"),
        "metrics --pred " + q(d / "correct" / "corrected.json") + " --gt " + q(d / "seq.json") +
            " --C 0,10 --out " + q(d / "metrics.json"),
        "--seed 5 interpolate --from " + q(d / "rest.json") + " --to " + q(d / "pose.json") + " --obj --out " +
            q(d / "interp"),
        "--seed 5 --samples 200 --weights " + q(d / "weights.json") + " interpolate --from " + q(d / "rest.json") + " --to " +
            q(d / "pose.json") + " --out " + q(d / "neural"),
        "--model " + q(d / "model.json") + " scenario --config " + q(data / "reach_free.json") + " --out " +
            q(d / "scenario"),
        "export --trajectory " + q(d / "interp" / "trajectory.json") + " --out " + q(d / "export"),
        "ablate --S 100,300 --seeds 3 --out " + q(d / "ablate"),
    };
    commands = static_cast<int>(cmds.size());
    for (const std::string& c : cmds) {
      const int code = cli::run(c, (d / "log.txt").string());
      if (code != 0 && run == 0) failed.push_back(fmt("exit %d: %s", code, c.c_str()));
    }
  }
  auto a = cli::snapshot(fixtures::scratch_dir_path("accept_det_0"));
  auto b = cli::snapshot(fixtures::scratch_dir_path("accept_det_1"));
  // Wall-clock timings and the console log are not outputs of the computation.
  for (auto* s : {&a, &b}) {
    s->erase("ablate/timing.csv");
    s->erase("log.txt");
  }
  int differing = 0;
  std::string first_diff;
  for (const auto& [name, content] : a) {
    const auto it = b.find(name);
    if (it == b.end() || it->second != content) {
      if (differing++ == 0) first_diff = name;
    }
  }
  if (a.size() != b.size()) ++differing;
  for (const std::string& f : failed) std::printf("  %s\n", f.c_str());
  return {failed.empty() && differing == 0 && a.size() > 20,
          fmt("%d commands x 2 runs, %zu files compared, %d differ%s%s, %zu failed, %.0f s", commands, a.size(),
              differing, differing ? ", first " : "", first_diff.c_str(), failed.size(), seconds_since(t0))};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"zero-collision correction", zero_collision_contract},
      {"linear round trip", linear_round_trip},
      {"jacobian vs finite differences", jacobian_correctness},
      {"relative-error regime", re_regime},
      {"sampling ablation trend", sampling_ablation},
      {"blend exactness", blend_exactness},
      {"obstacle scenario", obstacle_scenario},
      {"solver order", solver_order},
      {"collision detector agreement", detector_agreement},
      {"metric oracles", metric_oracles},
      {"cli determinism", cli_determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
