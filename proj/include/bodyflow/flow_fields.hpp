#pragma once

#include <memory>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "bodyflow/body_model.hpp"
#include "bodyflow/mlp_field.hpp"
#include "bodyflow/surface_sampling.hpp"

namespace bodyflow {

struct TimeSpan {
  double t0 = 0.0;
  double t1 = 1.0;
};

/// Constant parameter velocity along the straight path theta0 -> theta1.
struct LinearParametric {
  Pose theta0;
  Pose theta1;
  TimeSpan span;

  Pose interpolant(double t) const;
};

/// Fixed-magnitude pull of the region samples towards a point.
struct TargetRegion {
  Vec3 target = Vec3::Zero();
  RegionMask region;
  double magnitude = 1e-3;
  double eps = 1e-6;
};

struct ObstacleVolume {
  enum class Shape { Box, Sphere };
  Shape shape = Shape::Box;
  Vec3 lo = Vec3::Zero();  // box min, or sphere center
  Vec3 hi = Vec3::Zero();  // box max
  double radius = 0.0;

  static ObstacleVolume box(const Vec3& lo, const Vec3& hi);
  static ObstacleVolume sphere(const Vec3& center, double radius);
  void validate() const;
  /// Euclidean distance to the volume, 0 inside.
  double distance(const Vec3& x) const;
  /// Depth below the surface, 0 outside.
  double depth(const Vec3& x) const;
  bool strictly_contains(const Vec3& x) const { return depth(x) > 0.0; }
};

/// How obstacle weights are assigned to the samples of a target region.
enum class ObstacleCoupling {
  PerPoint,  // each sample uses its own distance
  Region,    // samples the region field moves share their smallest distance
};

struct FieldSpec;

struct Blended {
  std::shared_ptr<const FieldSpec> base;
  std::vector<ObstacleVolume> obstacles;
  double r_in = 0.010;
  double r_out = 0.030;
  ObstacleCoupling coupling = ObstacleCoupling::Region;
};

struct Neural {
  std::shared_ptr<const MlpWeights> weights;
  Pose theta1;
  TimeSpan span;
};

/// Sum of several fields (e.g. one target per hand).
struct Composite {
  std::vector<std::shared_ptr<const FieldSpec>> parts;
};

struct FieldSpec {
  std::variant<LinearParametric, TargetRegion, Blended, Neural, Composite> kind;
};

/// Everything a field may look at for one evaluation.
struct FieldState {
  const SkinnedModel& model;
  const SampleSet& samples;
  const Pose& pose;
  double t;
  const PointCloud& positions;
  const Eigen::MatrixXd& jacobian;
  /// Evaluate the linear field's Jacobian at the interpolant instead of pose.
  bool interp_state_approx = false;
};

/// b(r) = sum_p alpha_p B^4_p(u), alpha = (0, 0, 0, 1, 1), u = (r - r_in)/(r_out - r_in)
/// clamped to [0, 1].
double bezier_blend(double r, double r_in, double r_out);

/// Scales each sample by 1 - b(r): 1 below r_in, 1 - b in the band, 0 beyond r_out.
Eigen::VectorXd blend_field(const Eigen::VectorXd& base, const Eigen::VectorXd& distances, double r_in,
                            double r_out);

Eigen::VectorXd eval_linear_field(const LinearParametric& field, const FieldState& state);

/// F (x_T - x) / (|x_T - x| + eps) on region members; zero elsewhere unless
/// `whole_body` is set.
Eigen::VectorXd eval_target_field(const TargetRegion& field, const PointCloud& positions,
                                  bool whole_body = false);

/// Coordinate-space velocity at every sample, stacked 3S.
Eigen::VectorXd evaluate_field(const FieldSpec& spec, const FieldState& state);

void validate_field(const FieldSpec& spec, const SkinnedModel& model);

}  // namespace bodyflow
