#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bodyflow/init_strategies.hpp"
#include "bodyflow/metrics.hpp"
#include "bodyflow/mlp_field.hpp"
#include "bodyflow/ode_integrator.hpp"
#include "bodyflow/serialization.hpp"

namespace bodyflow {

struct RunOptions {
  std::uint64_t seed = 0;
  int samples = 1000;
  SolverConfig solver;
  ProjectionConfig projection;
  /// Optional network; replaces the linear field when set.
  std::shared_ptr<const MlpWeights> weights;
};

// ---- correct -------------------------------------------------------------

struct FrameLog {
  int frame = 0;
  std::string strategy;
  int tries = 0;
  int collisions_in = 0;
  int collisions_out = 0;
  std::string status;
  int steps = 0;
  bool flagged = false;
  std::string note;
};

struct CorrectResult {
  PoseSequence corrected;
  std::vector<FrameLog> log;
  double col_rate_in = 0.0;
  double col_rate_out = 0.0;
  MetricsReport metrics;
  /// One per integrated frame, only with CorrectOptions::keep_trajectories.
  std::vector<Trajectory> trajectories;
};

struct CorrectOptions {
  RunOptions run;
  InitConfig init;
  const KeyposeDictionary* keyposes = nullptr;
  bool keep_trajectories = false;
};

CorrectResult correct_sequence(const SkinnedModel& model, const PoseSequence& input, const CorrectOptions& options);

// ---- interpolate ---------------------------------------------------------

Trajectory interpolate_poses(const SkinnedModel& model, const Pose& theta0, const Pose& theta1,
                             const RunOptions& options);

// ---- scenario ------------------------------------------------------------

struct TargetSpec {
  /// Region centre; either an explicit point or a joint's posed position.
  std::optional<Vec3> seed_point;
  int seed_joint = -1;
  /// Added to the joint position in the joint's own frame.
  Vec3 joint_offset = Vec3::Zero();
  double region_radius = 0.08;
  Vec3 target = Vec3::Zero();
  double magnitude = 1e-3;
  double eps = 1e-6;
};

struct ScenarioConfig {
  std::string model = "builtin";
  std::uint64_t seed = 0;
  int samples = 1000;
  Pose start;
  std::vector<TargetSpec> targets;
  bool blend = true;
  double r_in = 0.010;
  double r_out = 0.030;
  ObstacleCoupling coupling = ObstacleCoupling::Region;
  std::vector<ObstacleVolume> obstacles;
  SolverConfig solver;
  double t_end = 2000.0;
  double quiescence_speed = 1e-9;
  double guard_min_step = 0.05;
};

/// Parses the JSON scenario schema (see README).
ScenarioConfig parse_scenario(const std::string& json_text, const SkinnedModel& model);

struct ScenarioReport {
  std::string status;
  int steps = 0;
  double t_final = 0.0;
  /// Distance from each region's sample centroid to its target at the end.
  std::vector<double> final_distance;
  /// Deepest region-sample penetration into any obstacle (meters).
  double region_penetration = 0.0;
  /// Deepest penetration over every sample.
  double max_penetration = 0.0;
  int final_collisions = 0;
};

struct ScenarioResult {
  Trajectory trajectory;
  ScenarioReport report;
};

ScenarioResult run_scenario(const SkinnedModel& model, const ScenarioConfig& config);

// ---- metrics -------------------------------------------------------------

MetricsReport compute_metrics(const SkinnedModel& model, const PoseSequence& pred, const PoseSequence& gt,
                              const std::vector<int>& thresholds, double fps);
std::string metrics_table(const MetricsReport& report);

// ---- ablation ------------------------------------------------------------

struct AblationConfig {
  /// Sample counts; 0 stands for "all mesh vertices".
  std::vector<int> sample_counts{100, 300, 1000, 3000};
  std::vector<double> delta_norms{1e-2};
  int seeds = 10;
  std::uint64_t seed = 0;
  /// Pose amplitude for the evaluation poses (0 = rest pose).
  double pose_amplitude = 0.5;
};

struct AblationCell {
  int samples = 0;
  double delta_norm = 0.0;
  /// Per seed; rank-deficient systems use the minimum-norm solution.
  std::vector<double> errors;
  std::vector<double> seconds;       // per seed: Jacobian + solve
  double median_error = 0.0;
  double median_seconds = 0.0;
  int rank_deficient = 0;
};

std::vector<AblationCell> ablate_sampling(const SkinnedModel& model, const AblationConfig& config);
double median(std::vector<double> values);

// ---- synthetic data ------------------------------------------------------

/// Smooth random motion; the frames with collision_period-sized blocks
/// marked as colliding get the left arm folded into the chest. Ground-truth
/// joints are the collision-free motion.
PoseSequence synth_sequence(const SkinnedModel& model, int frames, double collision_fraction, std::uint64_t seed);
std::vector<Pose> synth_corpus(const SkinnedModel& model, int count, std::uint64_t seed, double amplitude = 0.8);

}  // namespace bodyflow
