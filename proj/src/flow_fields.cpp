#include "bodyflow/flow_fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bodyflow/error.hpp"

namespace bodyflow {

Pose LinearParametric::interpolant(double t) const {
  const double s = (t - span.t0) / (span.t1 - span.t0);
  return Pose{theta0.theta + s * (theta1.theta - theta0.theta)};
}

ObstacleVolume ObstacleVolume::box(const Vec3& lo, const Vec3& hi) {
  ObstacleVolume o;
  o.shape = Shape::Box;
  o.lo = lo;
  o.hi = hi;
  o.validate();
  return o;
}

ObstacleVolume ObstacleVolume::sphere(const Vec3& center, double radius) {
  ObstacleVolume o;
  o.shape = Shape::Sphere;
  o.lo = center;
  o.radius = radius;
  o.validate();
  return o;
}

void ObstacleVolume::validate() const {
  if (shape == Shape::Box) {
    if (!lo.allFinite() || !hi.allFinite() || !((hi - lo).array() > 0.0).all())
      throw ValidationError("obstacle box has a degenerate extent");
  } else if (!lo.allFinite() || !(radius > 0.0)) {
    throw ValidationError("obstacle sphere needs a positive radius");
  }
}

double ObstacleVolume::distance(const Vec3& x) const {
  if (shape == Shape::Sphere) return std::max(0.0, (x - lo).norm() - radius);
  const Vec3 outside = (lo - x).cwiseMax(x - hi).cwiseMax(0.0);
  return outside.norm();
}

double ObstacleVolume::depth(const Vec3& x) const {
  if (shape == Shape::Sphere) return std::max(0.0, radius - (x - lo).norm());
  const Vec3 inner = (x - lo).cwiseMin(hi - x);
  return std::max(0.0, inner.minCoeff());
}

double bezier_blend(double r, double r_in, double r_out) {
  if (!(r_in < r_out)) throw ValidationError("blend radii must satisfy r_in < r_out");
  const double u = std::clamp((r - r_in) / (r_out - r_in), 0.0, 1.0);
  const double u3 = u * u * u;
  return 4.0 * u3 * (1.0 - u) + u3 * u;
}

Eigen::VectorXd blend_field(const Eigen::VectorXd& base, const Eigen::VectorXd& distances, double r_in,
                            double r_out) {
  if (base.size() != 3 * distances.size()) throw ValidationError("blend: field and distance sizes differ");
  Eigen::VectorXd out(base.size());
  for (Eigen::Index i = 0; i < distances.size(); ++i) {
    const double r = distances(i);
    double w;
    if (r < r_in)
      w = 1.0;
    else if (r > r_out)
      w = 0.0;
    else
      w = 1.0 - bezier_blend(r, r_in, r_out);
    out.segment<3>(3 * i) = w * base.segment<3>(3 * i);
  }
  return out;
}

Eigen::VectorXd eval_linear_field(const LinearParametric& field, const FieldState& state) {
  const Eigen::VectorXd velocity = (field.theta1.theta - field.theta0.theta) / (field.span.t1 - field.span.t0);
  if (state.interp_state_approx) {
    return pose_jacobian(state.model, field.interpolant(state.t), state.samples) * velocity;
  }
  return state.jacobian * velocity;
}

Eigen::VectorXd eval_target_field(const TargetRegion& field, const PointCloud& positions, bool whole_body) {
  const int S = positions.size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(3 * S);
  auto pull = [&](int i) {
    const Vec3 to_target = field.target - Vec3(positions.points.row(i));
    out.segment<3>(3 * i) = field.magnitude * to_target / (to_target.norm() + field.eps);
  };
  if (whole_body) {
    for (int i = 0; i < S; ++i) pull(i);
  } else {
    for (const int i : field.region.members) pull(i);
  }
  return out;
}

namespace {

Eigen::VectorXd distance_to_region(const RegionMask& region, const PointCloud& positions) {
  const int S = positions.size();
  Eigen::VectorXd r(S);
  for (int i = 0; i < S; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (const int j : region.members) {
      best = std::min(best, (positions.points.row(i) - positions.points.row(j)).squaredNorm());
    }
    r(i) = std::sqrt(best);
  }
  for (const int j : region.members) r(j) = 0.0;
  return r;
}

Eigen::VectorXd eval_blended(const Blended& field, const FieldState& state) {
  const int S = state.positions.size();
  const auto* target = std::get_if<TargetRegion>(&field.base->kind);
  Eigen::VectorXd out;
  // Samples moved by the region field; with region coupling they share one
  // obstacle distance.
  std::vector<int> group;
  if (target) {
    const Eigen::VectorXd r = distance_to_region(target->region, state.positions);
    out = blend_field(eval_target_field(*target, state.positions, true), r, field.r_in, field.r_out);
    for (int i = 0; i < S; ++i) {
      if (r(i) <= field.r_out) group.push_back(i);
    }
  } else {
    out = evaluate_field(*field.base, state);
  }
  if (field.obstacles.empty()) return out;

  Eigen::VectorXd weight = Eigen::VectorXd::Ones(S);
  for (const ObstacleVolume& obstacle : field.obstacles) {
    Eigen::VectorXd r(S);
    for (int i = 0; i < S; ++i) r(i) = obstacle.distance(state.positions.points.row(i).transpose());
    if (target && field.coupling == ObstacleCoupling::Region) {
      double nearest = std::numeric_limits<double>::infinity();
      for (const int j : group) nearest = std::min(nearest, r(j));
      for (const int j : group) r(j) = nearest;
    }
    for (int i = 0; i < S; ++i) {
      // A sample inside the obstacle has r = 0 < r_in, so b = 0 exactly.
      weight(i) *= bezier_blend(r(i), field.r_in, field.r_out);
    }
  }
  for (int i = 0; i < S; ++i) {
    if (weight(i) == 0.0)
      out.segment<3>(3 * i).setZero();
    else
      out.segment<3>(3 * i) *= weight(i);
  }
  return out;
}

}  // namespace

Eigen::VectorXd evaluate_field(const FieldSpec& spec, const FieldState& state) {
  return std::visit(
      [&](const auto& field) -> Eigen::VectorXd {
        using T = std::decay_t<decltype(field)>;
        if constexpr (std::is_same_v<T, LinearParametric>) {
          return eval_linear_field(field, state);
        } else if constexpr (std::is_same_v<T, TargetRegion>) {
          return eval_target_field(field, state.positions);
        } else if constexpr (std::is_same_v<T, Blended>) {
          return eval_blended(field, state);
        } else if constexpr (std::is_same_v<T, Neural>) {
          // Stage evaluations can land exactly on t1; keep dt positive there.
          const double dt = std::max(field.span.t1 - state.t, 1e-6);
          return mlp_field_eval(*field.weights, state.model, state.samples, state.positions, state.pose,
                                field.theta1, dt);
        } else {
          Eigen::VectorXd sum = Eigen::VectorXd::Zero(3 * state.positions.size());
          for (const auto& part : field.parts) sum += evaluate_field(*part, state);
          return sum;
        }
      },
      spec.kind);
}

void validate_field(const FieldSpec& spec, const SkinnedModel& model) {
  std::visit(
      [&](const auto& field) {
        using T = std::decay_t<decltype(field)>;
        if constexpr (std::is_same_v<T, LinearParametric>) {
          validate_pose(model, field.theta0);
          validate_pose(model, field.theta1);
          if (!(field.span.t1 > field.span.t0)) throw ValidationError("linear field needs t1 > t0");
        } else if constexpr (std::is_same_v<T, TargetRegion>) {
          if (!(field.magnitude > 0.0) || !(field.eps > 0.0))
            throw ValidationError("target field needs F > 0 and eps > 0");
          if (field.region.members.empty()) throw ValidationError("empty source region");
          if (!field.target.allFinite()) throw ValidationError("target is not finite");
        } else if constexpr (std::is_same_v<T, Blended>) {
          if (!field.base) throw ValidationError("blended field has no base");
          if (!(field.r_in < field.r_out) || field.r_in < 0.0)
            throw ValidationError("blend radii must satisfy 0 <= r_in < r_out");
          for (const auto& o : field.obstacles) o.validate();
          validate_field(*field.base, model);
        } else if constexpr (std::is_same_v<T, Neural>) {
          if (!field.weights) throw ValidationError("neural field has no weights");
          field.weights->validate();
          if (field.weights->pose_dim != model.pose_dim())
            throw ValidationError("MLP pose dimension does not match the model");
          validate_pose(model, field.theta1);
          if (!(field.span.t1 > field.span.t0)) throw ValidationError("neural field needs t1 > t0");
        } else {
          if (field.parts.empty()) throw ValidationError("composite field has no parts");
          for (const auto& part : field.parts) validate_field(*part, model);
        }
      },
      spec.kind);
}

}  // namespace bodyflow
