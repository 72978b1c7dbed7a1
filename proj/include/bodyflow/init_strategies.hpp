#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "bodyflow/body_model.hpp"
#include "bodyflow/collision.hpp"
#include "bodyflow/error.hpp"

namespace bodyflow {

struct KeyposeDictionary {
  std::vector<Pose> poses;
  /// Posed joint positions of each keypose on the reference model.
  std::vector<Points> keypoints;

  int size() const { return static_cast<int>(poses.size()); }
};

/// Raised when one initialization strategy cannot produce a valid pose.
class StrategyFailed : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// prev_corrected if it exists and is collision-free.
std::optional<Pose> successive_frame_init(const std::optional<Pose>& prev_corrected, const SkinnedModel& model);

/// Joints whose parameters jitter may touch for a given collision: the
/// non-branching chains containing the offending joints, or the offending
/// branching joints themselves when no chain is involved. Sorted.
std::vector<int> jitter_joints(const SkinnedModel& model, const CollisionReport& report);

struct JitterResult {
  Pose pose;
  int tries = 0;
  std::vector<int> joints;
};

/// Uniform noise of half-width sigma on the jitter joints, doubled every
/// ceil(max_tries / 4) failures up to 8 sigma, until collision-free.
JitterResult jitter_init(const SkinnedModel& model, const Pose& estimate, std::mt19937_64& rng, double sigma,
                         int max_tries);

/// Root-aligned mean joint distance.
double keypoint_distance(const Points& a, const Points& b);

/// k-means on root-aligned joint positions; each cluster contributes the
/// member pose nearest its centroid. Colliding corpus poses are dropped.
KeyposeDictionary build_keypose_dict(const std::vector<Pose>& corpus, int k, const SkinnedModel& model,
                                     std::uint64_t seed, int max_iterations = 100);

/// Index of the nearest keypose to the estimate.
int nearest_keypose(const KeyposeDictionary& dict, const Pose& estimate, const SkinnedModel& model);
Pose keypose_init(const KeyposeDictionary& dict, const Pose& estimate, const SkinnedModel& model);

struct InitConfig {
  double jitter_sigma = 0.1;
  int jitter_max_tries = 200;
};

struct InitResult {
  Pose pose;
  std::string strategy;  // "successive", "jitter", "keypose"
  int tries = 0;
};

/// Successive Frames, then Jitter, then Keyposes (when a dictionary is
/// given). Throws StrategyFailed naming every exhausted strategy.
InitResult initialize(const SkinnedModel& model, const Pose& estimate, const std::optional<Pose>& prev_corrected,
                      const KeyposeDictionary* dict, std::mt19937_64& rng, const InitConfig& config = {});

}  // namespace bodyflow
