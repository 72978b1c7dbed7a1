#pragma once

#include <string>
#include <vector>

#include "bodyflow/collision.hpp"
#include "bodyflow/dormand_prince.hpp"
#include "bodyflow/error.hpp"
#include "bodyflow/flow_fields.hpp"
#include "bodyflow/velocity_projection.hpp"

namespace bodyflow {

struct IntegrationProblem {
  const SkinnedModel* model = nullptr;
  FieldSpec field;
  Pose theta0;
  TimeSpan span;
  SampleSet samples;
  ProjectionConfig projection;
};

struct IntegrationOptions {
  SolverConfig solver;
  bool interp_state_approx = false;
  /// Check every candidate step for self-intersection; shrink the step on a
  /// hit and stop at the last clean state once h falls below
  /// guard_min_step.
  bool collision_guard = true;
  double guard_min_step = 1e-3;
  /// Stop when the mean projected sample speed stays below
  /// quiescence_speed for quiescence_steps accepted steps (0 disables).
  double quiescence_speed = 0.0;
  int quiescence_steps = 3;
  /// Redraw the samples after every accepted step (seed + step index).
  /// Only for fields without source regions.
  bool resample_every_step = false;
  CollisionConfig collision;
};

struct StepDiagnostic {
  double h = 0.0;
  double error = 0.0;
  double field_norm = 0.0;
  double min_singular = 0.0;
  double mean_speed = 0.0;
};

enum class TrajectoryStatus { Completed, Quiescent, StoppedAtContact };

const char* status_name(TrajectoryStatus status);

struct Trajectory {
  std::vector<double> times;
  std::vector<Pose> poses;
  /// d theta / dt at every stored pose when dense output is on.
  std::vector<Eigen::VectorXd> rates;
  /// diagnostics[k] describes the step that produced poses[k + 1].
  std::vector<StepDiagnostic> diagnostics;
  TrajectoryStatus status = TrajectoryStatus::Completed;
  int rejected_steps = 0;
  int guard_rejections = 0;
  int rhs_evaluations = 0;

  const Pose& final_pose() const { return poses.back(); }
  /// Pose at time t: cubic Hermite with stored rates, else linear per step.
  Pose at(double t) const;
};

/// Integration failure that keeps whatever was computed before it.
class IntegrationError : public NumericalError {
 public:
  IntegrationError(const std::string& what, Trajectory partial)
      : NumericalError(what), partial_(std::move(partial)) {}
  const Trajectory& partial() const { return partial_; }

 private:
  Trajectory partial_;
};

struct RhsValue {
  PoseDelta rate;
  double field_norm = 0.0;
  double min_singular = 0.0;
  double mean_speed = 0.0;
};

/// d theta / dt = J^+(theta) f(X(theta), t).
RhsValue rhs(const IntegrationProblem& problem, const Pose& pose, double t, bool interp_state_approx = false);

/// Rejects colliding start poses, then integrates over problem.span.
Trajectory integrate(const IntegrationProblem& problem, const IntegrationOptions& options = {});

/// (1/M) sum_m mean_v |x_v(traj(t_m)) - x_v(lerp(theta0, theta1, t_m))|^2,
/// t_m = t0 + (m/M)(t1 - t0), m = 1..M, over all mesh vertices.
double trajectory_loss(const Trajectory& traj, const Pose& theta0, const Pose& theta1, int M,
                       const SkinnedModel& model);

}  // namespace bodyflow
