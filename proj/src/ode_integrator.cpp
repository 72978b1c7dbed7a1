#include "bodyflow/ode_integrator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bodyflow {

const char* status_name(TrajectoryStatus status) {
  switch (status) {
    case TrajectoryStatus::Completed:
      return "completed";
    case TrajectoryStatus::Quiescent:
      return "quiescent";
    case TrajectoryStatus::StoppedAtContact:
      return "stopped_at_contact";
  }
  return "completed";
}

Pose Trajectory::at(double t) const {
  if (t <= times.front()) return poses.front();
  if (t >= times.back()) return poses.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - times.begin()) - 1;
  const double h = times[k + 1] - times[k];
  const double s = (t - times[k]) / h;
  if (rates.size() == poses.size()) {
    const double s2 = s * s, s3 = s2 * s;
    return Pose{(2 * s3 - 3 * s2 + 1) * poses[k].theta + (s3 - 2 * s2 + s) * h * rates[k] +
                (-2 * s3 + 3 * s2) * poses[k + 1].theta + (s3 - s2) * h * rates[k + 1]};
  }
  return Pose{(1.0 - s) * poses[k].theta + s * poses[k + 1].theta};
}

RhsValue rhs(const IntegrationProblem& problem, const Pose& pose, double t, bool interp_state_approx) {
  const SkinnedModel& model = *problem.model;
  if (!pose.is_finite()) throw NumericalError("field blow-up");
  PointCloud positions;
  Eigen::MatrixXd jacobian;
  attachments_with_jacobian(model, pose, problem.samples, positions, jacobian);
  const FieldState state{model, problem.samples, pose, t, positions, jacobian, interp_state_approx};
  const Eigen::VectorXd f = evaluate_field(problem.field, state);
  RhsValue out;
  out.field_norm = f.norm();
  if (out.field_norm == 0.0) {
    out.rate.dtheta = Eigen::VectorXd::Zero(model.pose_dim());
    return out;
  }
  const ProjectionResult projected = project_velocity_ex(jacobian, f, problem.projection);
  out.rate = projected.delta;
  out.min_singular = projected.min_singular;
  const Eigen::VectorXd v = jacobian * out.rate.dtheta;
  double speed = 0.0;
  for (int i = 0; i < problem.samples.size(); ++i) speed += v.segment<3>(3 * i).norm();
  out.mean_speed = speed / problem.samples.size();
  return out;
}

namespace {

bool canonicalize_in_place(Eigen::VectorXd& theta) {
  bool changed = false;
  for (Eigen::Index k = 3; k + 2 < theta.size(); k += 3) {
    const Vec3 r = theta.segment<3>(k);
    if (r.norm() >= std::numbers::pi) {
      theta.segment<3>(k) = canonicalize_axis_angle(r);
      changed = true;
    }
  }
  return changed;
}

}  // namespace

Trajectory integrate(const IntegrationProblem& problem, const IntegrationOptions& options) {
  if (!problem.model) throw ValidationError("integration problem has no model");
  const SkinnedModel& model = *problem.model;
  validate_pose(model, problem.theta0);
  validate_samples(model, problem.samples);
  validate_field(problem.field, model);
  options.solver.validate();
  if (!(problem.span.t1 >= problem.span.t0)) throw ValidationError("time span must satisfy t1 >= t0");
  if (3 * problem.samples.size() < model.pose_dim())
    throw ValidationError("too few samples for the pose dimension");
  const CollisionReport start = self_intersection_count(model, problem.theta0, options.collision);
  if (start.count > 0)
    throw ValidationError("start pose self-intersects (" + std::to_string(start.count) + " penetrating vertices)");

  if (options.resample_every_step && !std::holds_alternative<LinearParametric>(problem.field.kind) &&
      !std::holds_alternative<Neural>(problem.field.kind))
    throw ValidationError("resample_every_step needs a field without source regions");

  IntegrationProblem active = problem;
  Trajectory traj;
  traj.times.push_back(problem.span.t0);
  traj.poses.push_back(problem.theta0);

  RhsValue last;
  const OdeRhs f = [&](double t, const Eigen::VectorXd& y) {
    last = rhs(active, Pose{y}, t, options.interp_state_approx);
    return last.rate.dtheta;
  };

  StepObserver observer;
  if (options.collision_guard) {
    const double min_step = options.guard_min_step;
    observer.trial = [&, min_step](double t_new, const Eigen::VectorXd& y_new) {
      if (!has_self_intersection(model, Pose{y_new}, options.collision)) return TrialVerdict::Accept;
      ++traj.guard_rejections;
      return t_new - traj.times.back() > min_step ? TrialVerdict::Shrink : TrialVerdict::Halt;
    };
  }
  observer.accepted = [&](double t, Eigen::VectorXd& y, double h, double err, const Eigen::VectorXd&) {
    traj.diagnostics.push_back({h, err, last.field_norm, last.min_singular, last.mean_speed});
    const bool changed = canonicalize_in_place(y);
    traj.times.push_back(t);
    traj.poses.push_back(Pose{y});
    if (options.resample_every_step) {
      active.samples = sample_surface(model, problem.samples.size(), problem.samples.seed + traj.diagnostics.size());
      return true;
    }
    return changed;
  };
  int quiet = 0;
  observer.done = [&](double, const Eigen::VectorXd&, const Eigen::VectorXd& dydt) {
    if (options.solver.dense_output) traj.rates.push_back(dydt);
    if (options.quiescence_speed <= 0.0) return false;
    quiet = last.mean_speed < options.quiescence_speed ? quiet + 1 : 0;
    return quiet >= options.quiescence_steps;
  };

  Eigen::VectorXd y = problem.theta0.theta;
  SolveStats stats;
  try {
    // The first rate is produced inside the solver; capture it through f.
    bool first = true;
    const OdeRhs wrapped = [&](double t, const Eigen::VectorXd& state) {
      Eigen::VectorXd rate = f(t, state);
      if (first) {
        first = false;
        if (options.solver.dense_output) traj.rates.push_back(rate);
      }
      return rate;
    };
    stats = dormand_prince(wrapped, problem.span.t0, problem.span.t1, y, options.solver, observer);
  } catch (const NumericalError& e) {
    traj.rhs_evaluations = stats.evaluations;
    throw IntegrationError(e.what(), std::move(traj));
  }
  traj.rejected_steps = stats.rejected;
  traj.rhs_evaluations = stats.evaluations;
  switch (stats.status) {
    case SolveStatus::Completed:
      traj.status = TrajectoryStatus::Completed;
      break;
    case SolveStatus::EarlyStop:
      traj.status = TrajectoryStatus::Quiescent;
      break;
    case SolveStatus::Halted:
      traj.status = TrajectoryStatus::StoppedAtContact;
      break;
    case SolveStatus::MaxSteps:
      throw IntegrationError("max_steps exceeded", std::move(traj));
    case SolveStatus::BlowUp:
      throw IntegrationError("field blow-up", std::move(traj));
  }
  if (options.solver.dense_output && traj.rates.size() != traj.poses.size()) traj.rates.clear();
  return traj;
}

double trajectory_loss(const Trajectory& traj, const Pose& theta0, const Pose& theta1, int M,
                       const SkinnedModel& model) {
  if (M < 1) throw ValidationError("M must be at least 1");
  const double t0 = traj.times.front();
  const double t1 = traj.times.back();
  double loss = 0.0;
  for (int m = 1; m <= M; ++m) {
    const double s = static_cast<double>(m) / M;
    const Pose on_traj = traj.at(t0 + s * (t1 - t0));
    const Pose reference{theta0.theta + s * (theta1.theta - theta0.theta)};
    const Points a = skin_vertices(model, on_traj).points;
    const Points b = skin_vertices(model, reference).points;
    loss += (a - b).rowwise().squaredNorm().mean();
  }
  return loss / M;
}

}  // namespace bodyflow
