#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bodyflow/attachment.hpp"
#include "bodyflow/init_strategies.hpp"
#include "bodyflow/metrics.hpp"
#include "bodyflow/ode_integrator.hpp"

namespace bodyflow {

struct PoseSequence {
  std::string model_name = "capsule_human";
  int joints = 0;
  double fps = 30.0;
  std::vector<Pose> poses;
  /// Optional per-frame ground-truth joint positions (meters).
  std::vector<Points> gt_joints;
};

PoseSequence load_pose_sequence(const std::string& path);
void save_pose_sequence(const PoseSequence& seq, const std::string& path);

/// A single-pose file is a one-frame sequence.
Pose load_pose(const std::string& path);
void save_pose(const Pose& pose, const std::string& path, const std::string& model_name = "capsule_human");

void save_trajectory(const Trajectory& traj, const std::string& path);
Trajectory load_trajectory(const std::string& path);

void save_keyposes(const KeyposeDictionary& dict, const std::string& path);
KeyposeDictionary load_keyposes(const std::string& path);

void save_samples(const SampleSet& samples, const std::string& path);
SampleSet load_samples(const std::string& path);

void save_metrics(const MetricsReport& report, const std::string& path);

/// Writes text to a file, throwing ValidationError on failure.
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace bodyflow
