#include "bodyflow/dormand_prince.hpp"

#include <algorithm>
#include <cmath>

#include "bodyflow/error.hpp"

namespace bodyflow {

void SolverConfig::validate() const {
  if (!(rtol > 0.0) || !(atol > 0.0)) throw ValidationError("rtol and atol must be positive");
  if (!(h_init > 0.0) || !(h_max > 0.0)) throw ValidationError("step sizes must be positive");
  if (max_steps < 1) throw ValidationError("max_steps must be at least 1");
  if (fixed_step < 0.0) throw ValidationError("fixed_step must be non-negative");
}

namespace {

// Dormand & Prince (1980) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b - b_hat for the embedded 4th-order solution.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace

SolveStats dormand_prince(const OdeRhs& f, double t0, double t1, Eigen::VectorXd& y, const SolverConfig& cfg,
                          const StepObserver& observer) {
  cfg.validate();
  SolveStats stats;
  if (!(t1 >= t0)) throw ValidationError("integration interval must satisfy t1 >= t0");
  if (t1 == t0) return stats;

  const bool fixed = cfg.fixed_step > 0.0;
  double t = t0;
  double h = std::min(fixed ? cfg.fixed_step : cfg.h_init, cfg.h_max);
  if (fixed) h = cfg.fixed_step;
  Eigen::VectorXd k1 = f(t, y);
  ++stats.evaluations;
  const double h_floor = 1e-14 * std::max(1.0, std::abs(t1));

  while (t < t1) {
    if (stats.accepted + stats.rejected >= cfg.max_steps) {
      stats.status = SolveStatus::MaxSteps;
      return stats;
    }
    bool last = false;
    if (t + h >= t1 || t1 - (t + h) < h_floor) {
      h = t1 - t;
      last = true;
    }
    const Eigen::VectorXd k2 = f(t + c2 * h, y + h * (a21 * k1));
    const Eigen::VectorXd k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
    const Eigen::VectorXd k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Eigen::VectorXd k5 = f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Eigen::VectorXd k6 = f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    Eigen::VectorXd y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const double t_new = last ? t1 : t + h;
    Eigen::VectorXd k7 = f(t_new, y_new);
    stats.evaluations += 6;

    double err = 0.0;
    if (!fixed) {
      const Eigen::VectorXd e = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double scale = cfg.atol + cfg.rtol * std::max(std::abs(y(i)), std::abs(y_new(i)));
        err = std::max(err, std::abs(e(i)) / scale);
      }
    }
    if (!y_new.allFinite() || !std::isfinite(err)) {
      h *= 0.2;
      ++stats.rejected;
      if (fixed || h < h_floor) {
        stats.status = SolveStatus::BlowUp;
        return stats;
      }
      continue;
    }
    if (!fixed && err > 1.0) {
      h *= std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0);
      ++stats.rejected;
      if (h < h_floor) {
        stats.status = SolveStatus::BlowUp;
        return stats;
      }
      continue;
    }

    if (observer.trial) {
      const TrialVerdict verdict = observer.trial(t_new, y_new);
      if (verdict == TrialVerdict::Halt) {
        stats.status = SolveStatus::Halted;
        return stats;
      }
      if (verdict == TrialVerdict::Shrink) {
        h *= 0.5;
        ++stats.rejected;
        continue;
      }
    }

    y = std::move(y_new);
    t = t_new;
    ++stats.accepted;
    if (observer.accepted && observer.accepted(t, y, h, err, k7)) {
      k7 = f(t, y);
      ++stats.evaluations;
    }
    k1 = std::move(k7);
    if (observer.done && observer.done(t, y, k1)) {
      stats.status = t < t1 ? SolveStatus::EarlyStop : SolveStatus::Completed;
      return stats;
    }
    if (!fixed) {
      const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      h = std::min(h * factor, cfg.h_max);
    }
  }
  return stats;
}

}  // namespace bodyflow
