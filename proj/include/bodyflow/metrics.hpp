#pragma once

#include <map>
#include <vector>

#include "bodyflow/body_model.hpp"

namespace bodyflow {

/// One J x 3 block of joint positions per frame.
using JointSequence = std::vector<Points>;

struct MetricsReport {
  double mpjpe = 0.0;
  double p_mpjpe = 0.0;
  double accel_err = 0.0;
  /// threshold C -> percentage of frames with more than C penetrating vertices
  std::map<int, double> col_rate_at;
};

/// Mean joint distance over frames and joints, in the input units. With
/// root_align, joint 0 is subtracted from both sides first.
double mpjpe(const JointSequence& pred, const JointSequence& gt, bool root_align = true);

/// Similarity (rotation, scale, translation) Procrustes alignment of
/// `source` onto `target`.
Points procrustes_align(const Points& source, const Points& target);

/// MPJPE after per-frame similarity Procrustes alignment of the prediction.
double p_mpjpe(const JointSequence& pred, const JointSequence& gt);

/// Mean |a_pred - a_gt| over interior frames and joints, with
/// a_t = (p_{t+1} - 2 p_t + p_{t-1}) fps^2.
double accel_err(const JointSequence& pred, const JointSequence& gt, double fps);

/// Joint positions of every pose, in millimetres.
JointSequence joints_mm(const SkinnedModel& model, const std::vector<Pose>& poses);

}  // namespace bodyflow
