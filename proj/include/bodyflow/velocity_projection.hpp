#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "bodyflow/body_model.hpp"

namespace bodyflow {

enum class LeastSquaresSolver { QR, SVD };

struct ProjectionConfig {
  /// Tikhonov damping; only used by the SVD solver.
  double damping = 1e-8;
  LeastSquaresSolver solver = LeastSquaresSolver::SVD;
  /// sigma_min / sigma_max below this is treated as rank deficient when
  /// there is no damping.
  double min_singular_ratio = 1e-12;
};

struct ProjectionResult {
  PoseDelta delta;
  double min_singular = 0.0;
  double max_singular = 0.0;
};

/// argmin_v |J v - f|^2 + damping |v|^2. QR for damping == 0, otherwise SVD
/// with filter factors sigma / (sigma^2 + damping).
ProjectionResult project_velocity_ex(const Eigen::MatrixXd& jacobian, const Eigen::VectorXd& field,
                                     const ProjectionConfig& cfg);

inline PoseDelta project_velocity(const Eigen::MatrixXd& jacobian, const Eigen::VectorXd& field,
                                  const ProjectionConfig& cfg) {
  return project_velocity_ex(jacobian, field, cfg).delta;
}

/// Undamped QR configuration used by the relative-error oracle.
ProjectionConfig exact_projection();

/// Relative reconstruction error of a known parameter perturbation:
/// |J^+ (X(pose + delta) - X(pose)) - delta| / |delta|.
double relative_error(const SkinnedModel& model, const Pose& pose, const PoseDelta& delta,
                      const SampleSet& samples, const ProjectionConfig& cfg = exact_projection());

/// Random direction of the given norm over all pose coordinates.
PoseDelta random_delta(int pose_dim, double norm, std::uint64_t seed);

}  // namespace bodyflow
