#pragma once

#include <functional>

#include <Eigen/Core>

namespace bodyflow {

/// Step-size controls shared by the generic solver and the body integrator.
struct SolverConfig {
  double rtol = 1e-5;
  double atol = 1e-7;
  double h_init = 1e-3;
  double h_max = 0.1;
  int max_steps = 10000;
  bool dense_output = false;
  /// When positive, take fixed steps of this size and skip error control.
  double fixed_step = 0.0;

  void validate() const;
};

/// Verdict of the observer on a step that passed error control.
enum class TrialVerdict { Accept, Shrink, Halt };

enum class SolveStatus { Completed, EarlyStop, Halted, MaxSteps, BlowUp };

struct SolveStats {
  SolveStatus status = SolveStatus::Completed;
  int accepted = 0;
  int rejected = 0;
  int evaluations = 0;
};

/// Hooks called by the solver loop. Defaults accept everything.
struct StepObserver {
  /// Candidate state at t_new; may reject (Shrink) or end the solve at the
  /// last accepted state (Halt).
  std::function<TrialVerdict(double t_new, const Eigen::VectorXd& y_new)> trial;
  /// Called after acceptance; may rewrite y (returning true forces a fresh
  /// derivative evaluation) and records the step.
  std::function<bool(double t, Eigen::VectorXd& y, double h, double err, const Eigen::VectorXd& dydt)> accepted;
  /// Return true to stop early after an accepted step.
  std::function<bool(double t, const Eigen::VectorXd& y, const Eigen::VectorXd& dydt)> done;
};

using OdeRhs = std::function<Eigen::VectorXd(double t, const Eigen::VectorXd& y)>;

/// Dormand-Prince 5(4) with FSAL and the standard controller
/// h <- h * clamp(0.9 err^(-1/5), 0.2, 5), err measured in the max norm of
/// e_i / (atol + rtol max(|y_i|, |y_new_i|)). The final step is truncated
/// to land on t1 exactly.
SolveStats dormand_prince(const OdeRhs& f, double t0, double t1, Eigen::VectorXd& y, const SolverConfig& cfg,
                          const StepObserver& observer = {});

}  // namespace bodyflow
