#pragma once

#include <random>

#include "bodyflow/body_model.hpp"

namespace bodyflow {

/// Joint indices of the built-in humanoid (y up, +x is the body's left,
/// +z is forward, rest pose is a T-pose).
enum HumanJoint : int {
  kPelvis = 0,
  kSpine,
  kNeck,
  kHead,
  kLeftShoulder,
  kLeftElbow,
  kLeftWrist,
  kRightShoulder,
  kRightElbow,
  kRightWrist,
  kLeftHip,
  kLeftKnee,
  kLeftAnkle,
  kRightHip,
  kRightKnee,
  kRightAnkle,
  kHumanJointCount
};

struct CapsuleHumanConfig {
  int joints = kHumanJointCount;
  /// Marching-tetrahedra lattice spacing, meters.
  double grid_spacing = 0.035;
  /// Smooth-union radius between capsules, meters.
  double blend_radius = 0.03;
  /// Skinning weights fall to zero this far past the nearest bone's surface.
  double weight_band = 0.06;
  double crotch_exclusion_radius = 0.08;
  double armpit_exclusion_radius = 0.06;
};

/// Procedural license-free humanoid: a smooth union of tapered capsules
/// polygonized into one closed genus-0 mesh, with distance-based skinning
/// weights and crotch/armpit exclusion faces. Deterministic.
SkinnedModel make_capsule_human(const CapsuleHumanConfig& config = {});

/// Left hand driven through the chest by a forward shoulder swing and a hard
/// elbow bend. Collides on the default model.
Pose hand_in_torso_pose();

/// Left arm swung down and across the hip by `angle` radians past vertical.
Pose left_arm_lowered_pose(double angle);

/// Left arm raised `angle` radians above the horizontal.
Pose left_arm_raised_pose(double angle);

/// Random joint angles drawn inside loose anatomical ranges scaled by
/// `amplitude` in [0, 1]. May self-intersect.
Pose random_human_pose(std::mt19937_64& rng, double amplitude);

/// Rejection-samples random_human_pose until the model is collision-free.
/// Throws NumericalError after `max_tries`.
Pose random_collision_free_pose(const SkinnedModel& model, std::mt19937_64& rng, double amplitude,
                                int max_tries = 200);

}  // namespace bodyflow
