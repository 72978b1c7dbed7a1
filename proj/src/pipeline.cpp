#include "bodyflow/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include <Eigen/QR>
#include <json.hpp>

#include "bodyflow/capsule_human.hpp"
#include "bodyflow/error.hpp"
#include "bodyflow/rng.hpp"
#include "bodyflow/surface_sampling.hpp"

namespace bodyflow {

using nlohmann::json;

namespace {

IntegrationOptions options_for(const RunOptions& run) {
  IntegrationOptions opt;
  opt.solver = run.solver;
  return opt;
}

IntegrationProblem make_problem(const SkinnedModel& model, const Pose& theta0, const Pose& theta1,
                                const SampleSet& samples, const RunOptions& run) {
  IntegrationProblem problem;
  problem.model = &model;
  problem.theta0 = theta0;
  problem.span = {0.0, 1.0};
  problem.samples = samples;
  problem.projection = run.projection;
  if (run.weights) {
    problem.field.kind = Neural{run.weights, theta1, problem.span};
  } else {
    problem.field.kind = LinearParametric{theta0, theta1, problem.span};
  }
  return problem;
}

}  // namespace

// ---- correct -------------------------------------------------------------

CorrectResult correct_sequence(const SkinnedModel& model, const PoseSequence& input, const CorrectOptions& options) {
  if (input.poses.empty()) throw ValidationError("input sequence is empty");
  for (const Pose& p : input.poses) validate_pose(model, p);
  const SampleSet samples = sample_surface(model, options.run.samples, options.run.seed);
  std::mt19937_64 rng(options.run.seed ^ 0x6a09e667f3bcc909ull);

  CorrectResult result;
  result.corrected = input;
  result.corrected.poses.clear();
  std::vector<int> counts_in, counts_out;
  std::optional<Pose> prev;

  for (std::size_t f = 0; f < input.poses.size(); ++f) {
    const Pose& estimate = input.poses[f];
    FrameLog log;
    log.frame = static_cast<int>(f);
    log.collisions_in = self_intersection_count(model, estimate).count;
    Pose out;
    try {
      const InitResult init = initialize(model, estimate, prev, options.keyposes, rng, options.init);
      log.strategy = init.strategy;
      log.tries = init.tries;
      const IntegrationProblem problem = make_problem(model, init.pose, estimate, samples, options.run);
      const Trajectory traj = integrate(problem, options_for(options.run));
      out = traj.final_pose();
      log.status = status_name(traj.status);
      log.steps = static_cast<int>(traj.diagnostics.size());
      if (options.keep_trajectories) result.trajectories.push_back(traj);
    } catch (const NumericalError& e) {
      log.flagged = true;
      log.note = e.what();
      log.status = "flagged";
      out = prev ? *prev : estimate;
    }
    log.collisions_out = self_intersection_count(model, out).count;
    counts_in.push_back(log.collisions_in);
    counts_out.push_back(log.collisions_out);
    if (log.collisions_out == 0) prev = out;
    result.corrected.poses.push_back(out);
    result.log.push_back(log);
  }
  result.col_rate_in = col_rate_from_counts(counts_in, 0);
  result.col_rate_out = col_rate_from_counts(counts_out, 0);

  const JointSequence pred = joints_mm(model, result.corrected.poses);
  JointSequence ref;
  if (!input.gt_joints.empty()) {
    for (const Points& p : input.gt_joints) ref.push_back(p * 1000.0);
  } else {
    ref = joints_mm(model, input.poses);
  }
  MetricsReport& m = result.metrics;
  m.mpjpe = mpjpe(pred, ref, true);
  m.p_mpjpe = p_mpjpe(pred, ref);
  m.accel_err = pred.size() >= 3 ? accel_err(pred, ref, input.fps) : 0.0;
  m.col_rate_at[0] = result.col_rate_out;
  return result;
}

// ---- interpolate ---------------------------------------------------------

Trajectory interpolate_poses(const SkinnedModel& model, const Pose& theta0, const Pose& theta1,
                             const RunOptions& options) {
  validate_pose(model, theta0);
  validate_pose(model, theta1);
  for (const Pose* p : {&theta0, &theta1}) {
    const int count = self_intersection_count(model, *p).count;
    if (count > 0)
      throw ValidationError("endpoint pose self-intersects (" + std::to_string(count) + " penetrating vertices)");
  }
  const SampleSet samples = sample_surface(model, options.samples, options.seed);
  return integrate(make_problem(model, theta0, theta1, samples, options), options_for(options));
}

// ---- scenario ------------------------------------------------------------

namespace {

const std::map<std::string, int>& human_joint_names() {
  static const std::map<std::string, int> names = {
      {"pelvis", kPelvis},           {"spine", kSpine},
      {"neck", kNeck},               {"head", kHead},
      {"left_shoulder", kLeftShoulder}, {"left_elbow", kLeftElbow},
      {"left_wrist", kLeftWrist},    {"right_shoulder", kRightShoulder},
      {"right_elbow", kRightElbow},  {"right_wrist", kRightWrist},
      {"left_hip", kLeftHip},        {"left_knee", kLeftKnee},
      {"left_ankle", kLeftAnkle},    {"right_hip", kRightHip},
      {"right_knee", kRightKnee},    {"right_ankle", kRightAnkle},
  };
  return names;
}

Vec3 json_vec3(const json& j, const char* what) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 3) throw ValidationError(std::string(what) + " must have 3 components");
  return {v[0], v[1], v[2]};
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& json_text, const SkinnedModel& model) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ValidationError("malformed scenario config: " + std::string(e.what()));
  }
  try {
    ScenarioConfig cfg;
    cfg.model = j.value("model", std::string("builtin"));
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.samples = j.value("samples", 1000);
    cfg.start = Pose::zero(model.joint_count());
    if (j.contains("start")) {
      const json& s = j.at("start");
      if (s.is_string()) {
        if (s.get<std::string>() != "rest") cfg.start = load_pose(s.get<std::string>());
      } else {
        const auto v = s.get<std::vector<double>>();
        cfg.start.theta = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
      }
    }
    validate_pose(model, cfg.start);
    for (const auto& t : j.at("targets")) {
      TargetSpec spec;
      if (t.contains("seed_point")) {
        spec.seed_point = json_vec3(t.at("seed_point"), "seed_point");
      } else {
        const json& joint = t.at("joint");
        if (joint.is_string()) {
          const auto it = human_joint_names().find(joint.get<std::string>());
          if (it == human_joint_names().end()) throw ValidationError("unknown joint name: " + joint.get<std::string>());
          spec.seed_joint = it->second;
        } else {
          spec.seed_joint = joint.get<int>();
        }
        if (spec.seed_joint < 0 || spec.seed_joint >= model.joint_count())
          throw ValidationError("target joint index out of range");
        if (t.contains("offset")) spec.joint_offset = json_vec3(t.at("offset"), "offset");
      }
      spec.region_radius = t.value("region_radius", spec.region_radius);
      spec.target = json_vec3(t.at("target"), "target");
      spec.magnitude = t.value("magnitude", spec.magnitude);
      spec.eps = t.value("eps", spec.eps);
      if (!(spec.region_radius > 0.0)) throw ValidationError("region_radius must be positive");
      if (!(spec.magnitude > 0.0) || !(spec.eps > 0.0)) throw ValidationError("target needs magnitude > 0 and eps > 0");
      cfg.targets.push_back(spec);
    }
    if (cfg.targets.empty()) throw ValidationError("scenario needs at least one target");
    if (j.contains("blend")) {
      const json& b = j.at("blend");
      if (b.is_boolean()) {
        cfg.blend = b.get<bool>();
      } else {
        cfg.r_in = b.value("r_in", cfg.r_in);
        cfg.r_out = b.value("r_out", cfg.r_out);
        const std::string coupling = b.value("coupling", std::string("region"));
        if (coupling == "region")
          cfg.coupling = ObstacleCoupling::Region;
        else if (coupling == "per_point")
          cfg.coupling = ObstacleCoupling::PerPoint;
        else
          throw ValidationError("unknown obstacle coupling: " + coupling);
      }
    }
    if (!(cfg.r_in >= 0.0 && cfg.r_in < cfg.r_out)) throw ValidationError("blend radii must satisfy 0 <= r_in < r_out");
    for (const auto& o : j.value("obstacles", json::array())) {
      if (o.contains("box")) {
        cfg.obstacles.push_back(
            ObstacleVolume::box(json_vec3(o.at("box").at("min"), "box min"), json_vec3(o.at("box").at("max"), "box max")));
      } else {
        cfg.obstacles.push_back(ObstacleVolume::sphere(json_vec3(o.at("sphere").at("center"), "sphere center"),
                                                       o.at("sphere").at("radius").get<double>()));
      }
    }
    if (!cfg.blend && !cfg.obstacles.empty()) throw ValidationError("obstacles require blending");
    cfg.solver.h_max = 5.0;
    if (j.contains("solver")) {
      const json& s = j.at("solver");
      cfg.solver.rtol = s.value("rtol", cfg.solver.rtol);
      cfg.solver.atol = s.value("atol", cfg.solver.atol);
      cfg.solver.h_init = s.value("h_init", cfg.solver.h_init);
      cfg.solver.h_max = s.value("h_max", cfg.solver.h_max);
      cfg.solver.max_steps = s.value("max_steps", cfg.solver.max_steps);
    }
    cfg.solver.validate();
    cfg.t_end = j.value("t_end", cfg.t_end);
    if (!(cfg.t_end > 0.0)) throw ValidationError("t_end must be positive");
    double max_f = 0.0;
    for (const auto& t : cfg.targets) max_f = std::max(max_f, t.magnitude);
    cfg.quiescence_speed = j.value("quiescence_factor", 1e-6) * max_f;
    cfg.guard_min_step = j.value("guard_min_step", cfg.guard_min_step);
    return cfg;
  } catch (const json::exception& e) {
    throw ValidationError("malformed scenario config: " + std::string(e.what()));
  }
}

ScenarioResult run_scenario(const SkinnedModel& model, const ScenarioConfig& config) {
  const SampleSet samples = sample_surface(model, config.samples, config.seed);
  const std::vector<RigidTransform> start_frames = forward_kinematics(model, config.start);

  std::vector<RegionMask> regions;
  auto composite = std::make_shared<FieldSpec>();
  Composite parts;
  for (const TargetSpec& t : config.targets) {
    const Vec3 seed = t.seed_point ? *t.seed_point : start_frames[t.seed_joint].apply(t.joint_offset);
    TargetRegion target{t.target, select_region(model, samples, seed, t.region_radius, config.start), t.magnitude,
                        t.eps};
    regions.push_back(target.region);
    auto base = std::make_shared<FieldSpec>(FieldSpec{target});
    if (config.blend) {
      parts.parts.push_back(std::make_shared<FieldSpec>(
          FieldSpec{Blended{base, config.obstacles, config.r_in, config.r_out, config.coupling}}));
    } else {
      parts.parts.push_back(base);
    }
  }

  IntegrationProblem problem;
  problem.model = &model;
  problem.theta0 = config.start;
  problem.span = {0.0, config.t_end};
  problem.samples = samples;
  if (parts.parts.size() == 1) {
    problem.field = *parts.parts.front();
  } else {
    problem.field.kind = parts;
  }
  IntegrationOptions options;
  options.solver = config.solver;
  options.quiescence_speed = config.quiescence_speed;
  options.guard_min_step = config.guard_min_step;

  ScenarioResult result;
  result.trajectory = integrate(problem, options);
  const Trajectory& traj = result.trajectory;

  ScenarioReport& rep = result.report;
  rep.status = status_name(traj.status);
  rep.steps = static_cast<int>(traj.diagnostics.size());
  rep.t_final = traj.times.back();
  const PointCloud final_points = evaluate_attachments(model, traj.final_pose(), samples);
  for (std::size_t r = 0; r < regions.size(); ++r) {
    Vec3 centroid = Vec3::Zero();
    for (const int i : regions[r].members) centroid += Vec3(final_points.points.row(i));
    centroid /= static_cast<double>(regions[r].members.size());
    rep.final_distance.push_back((centroid - config.targets[r].target).norm());
    for (const int i : regions[r].members) {
      for (const auto& o : config.obstacles)
        rep.region_penetration = std::max(rep.region_penetration, o.depth(final_points.points.row(i).transpose()));
    }
  }
  for (int i = 0; i < final_points.size(); ++i) {
    for (const auto& o : config.obstacles)
      rep.max_penetration = std::max(rep.max_penetration, o.depth(final_points.points.row(i).transpose()));
  }
  rep.final_collisions = self_intersection_count(model, traj.final_pose()).count;
  return result;
}

// ---- metrics -------------------------------------------------------------

MetricsReport compute_metrics(const SkinnedModel& model, const PoseSequence& pred, const PoseSequence& gt,
                              const std::vector<int>& thresholds, double fps) {
  if (pred.poses.size() != gt.poses.size())
    throw ValidationError("sequence length mismatch: " + std::to_string(pred.poses.size()) + " vs " +
                          std::to_string(gt.poses.size()));
  for (const Pose& p : pred.poses) validate_pose(model, p);
  for (const Pose& p : gt.poses) validate_pose(model, p);
  const JointSequence a = joints_mm(model, pred.poses);
  JointSequence b;
  if (!gt.gt_joints.empty()) {
    for (const Points& p : gt.gt_joints) b.push_back(p * 1000.0);
  } else {
    b = joints_mm(model, gt.poses);
  }
  MetricsReport report;
  report.mpjpe = mpjpe(a, b, true);
  report.p_mpjpe = p_mpjpe(a, b);
  report.accel_err = a.size() >= 3 ? accel_err(a, b, fps) : 0.0;
  std::vector<int> counts;
  for (const Pose& p : pred.poses) counts.push_back(self_intersection_count(model, p).count);
  for (const int c : thresholds) report.col_rate_at[c] = col_rate_from_counts(counts, c);
  return report;
}

std::string metrics_table(const MetricsReport& report) {
  std::ostringstream os;
  char buf[128];
  os << "MPJPE(mm)  P-MPJPE(mm)  Accel.Err(mm/s^2)";
  for (const auto& [c, rate] : report.col_rate_at) os << "  Col.Rate@" << c << "(%)";
  os << '\n';
  std::snprintf(buf, sizeof buf, "%9.3f  %11.3f  %17.3f", report.mpjpe, report.p_mpjpe, report.accel_err);
  os << buf;
  for (const auto& [c, rate] : report.col_rate_at) {
    const std::string head = "Col.Rate@" + std::to_string(c) + "(%)";
    std::snprintf(buf, sizeof buf, "  %*.1f", static_cast<int>(head.size()), rate);
    os << buf;
  }
  os << '\n';
  return os.str();
}

// ---- ablation ------------------------------------------------------------

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<AblationCell> ablate_sampling(const SkinnedModel& model, const AblationConfig& config) {
  if (config.seeds < 1) throw ValidationError("need at least one seed");
  std::vector<Pose> poses;
  std::vector<std::uint64_t> seeds;
  for (int s = 0; s < config.seeds; ++s) {
    const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(s);
    seeds.push_back(seed);
    if (config.pose_amplitude > 0.0) {
      std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ull + 1);
      poses.push_back(random_collision_free_pose(model, rng, config.pose_amplitude));
    } else {
      poses.push_back(Pose::zero(model.joint_count()));
    }
  }
  const SampleSet all = vertex_samples(model);
  std::vector<AblationCell> cells;
  for (const double norm : config.delta_norms) {
    for (const int count : config.sample_counts) {
      if (count < 0) throw ValidationError("sample counts must be non-negative");
      AblationCell cell;
      cell.samples = count == 0 ? all.size() : count;
      cell.delta_norm = norm;
      for (int s = 0; s < config.seeds; ++s) {
        const SampleSet samples = count == 0 ? all : sample_surface(model, count, seeds[s]);
        const PoseDelta delta = random_delta(model.pose_dim(), norm, seeds[s] + 0x5bd1e995ull);
        const Pose& pose = poses[s];
        const Points moved = evaluate_attachments(model, Pose{pose.theta + delta.dtheta}, samples).points;

        const auto begin = std::chrono::steady_clock::now();
        PointCloud x0;
        Eigen::MatrixXd jac;
        double err;
        try {
          attachments_with_jacobian(model, pose, samples, x0, jac);
          const Eigen::VectorXd f = Eigen::Map<const Eigen::VectorXd>(moved.data(), moved.size()) - x0.flat();
          const PoseDelta est = project_velocity(jac, f, exact_projection());
          err = (est.dtheta - delta.dtheta).norm() / norm;
        } catch (const NumericalError&) {
          // Rank-deficient sampling: fall back to the minimum-norm solution.
          Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(jac);
          cod.setThreshold(1e-10);
          const Eigen::VectorXd f = Eigen::Map<const Eigen::VectorXd>(moved.data(), moved.size()) - x0.flat();
          err = (cod.solve(f) - delta.dtheta).norm() / norm;
          ++cell.rank_deficient;
        }
        const auto end = std::chrono::steady_clock::now();
        cell.errors.push_back(err);
        cell.seconds.push_back(std::chrono::duration<double>(end - begin).count());
      }
      cell.median_error = median(cell.errors);
      cell.median_seconds = median(cell.seconds);
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

// ---- synthetic data ------------------------------------------------------

PoseSequence synth_sequence(const SkinnedModel& model, int frames, double collision_fraction, std::uint64_t seed) {
  if (frames < 1) throw ValidationError("frames must be at least 1");
  if (collision_fraction < 0.0 || collision_fraction > 1.0)
    throw ValidationError("collision fraction must lie in [0, 1]");
  if (model.joint_count() != kHumanJointCount) throw ValidationError("synthetic sequences need the built-in humanoid");
  std::mt19937_64 rng(seed);
  constexpr int kKeySpacing = 25;
  std::vector<Pose> keys;
  for (int k = 0; k <= frames / kKeySpacing + 1; ++k) keys.push_back(random_collision_free_pose(model, rng, 0.5));

  const Pose folded = hand_in_torso_pose();
  const int per_block = static_cast<int>(std::lround(10.0 * collision_fraction));
  PoseSequence seq;
  seq.joints = model.joint_count();
  seq.model_name = model.name;
  for (int f = 0; f < frames; ++f) {
    const int k = f / kKeySpacing;
    double s = static_cast<double>(f % kKeySpacing) / kKeySpacing;
    s = s * s * (3.0 - 2.0 * s);
    Pose base{(1.0 - s) * keys[k].theta + s * keys[k + 1].theta};
    seq.gt_joints.push_back(joint_positions(model, base));
    if (f % 10 >= 10 - per_block) {
      Pose hit = base;
      hit.set_rotation(kLeftShoulder, folded.rotation(kLeftShoulder));
      hit.set_rotation(kLeftElbow, folded.rotation(kLeftElbow));
      if (!has_self_intersection(model, hit)) {
        hit = folded;
        hit.set_translation(base.translation());
      }
      seq.poses.push_back(hit);
    } else {
      seq.poses.push_back(base);
    }
  }
  return seq;
}

std::vector<Pose> synth_corpus(const SkinnedModel& model, int count, std::uint64_t seed, double amplitude) {
  if (count < 1) throw ValidationError("corpus size must be at least 1");
  std::mt19937_64 rng(seed);
  std::vector<Pose> out;
  for (int i = 0; i < count; ++i) out.push_back(random_collision_free_pose(model, rng, amplitude));
  return out;
}

}  // namespace bodyflow
