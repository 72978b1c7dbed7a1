#include "bodyflow/velocity_projection.hpp"

#include <random>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "bodyflow/error.hpp"
#include "bodyflow/rng.hpp"
#include "bodyflow/surface_sampling.hpp"

namespace bodyflow {

ProjectionResult project_velocity_ex(const Eigen::MatrixXd& jacobian, const Eigen::VectorXd& field,
                                     const ProjectionConfig& cfg) {
  const Eigen::Index rows = jacobian.rows();
  const Eigen::Index d = jacobian.cols();
  if (field.size() != rows) throw ValidationError("field length does not match Jacobian rows");
  if (rows < d) throw ValidationError("under-constrained projection: 3S < d");
  if (!(cfg.damping >= 0.0)) throw ValidationError("damping must be non-negative");
  if (!jacobian.allFinite() || !field.allFinite()) throw NumericalError("field blow-up");

  // Reduce to the d x d triangular factor first; the SVD then runs on R,
  // whose singular values equal those of J.
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(jacobian);
  const Eigen::VectorXd qtf = (qr.householderQ().transpose() * field).head(d);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(d).triangularView<Eigen::Upper>();
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& sigma = svd.singularValues();

  ProjectionResult out;
  out.max_singular = sigma.size() ? sigma(0) : 0.0;
  out.min_singular = sigma.size() ? sigma(sigma.size() - 1) : 0.0;

  const bool undamped = cfg.solver == LeastSquaresSolver::QR || cfg.damping == 0.0;
  if (undamped) {
    if (!(out.min_singular > cfg.min_singular_ratio * out.max_singular))
      throw NumericalError("singular Jacobian; enable damping");
    out.delta.dtheta = r.triangularView<Eigen::Upper>().solve(qtf);
  } else {
    const Eigen::VectorXd ut = svd.matrixU().transpose() * qtf;
    Eigen::VectorXd scaled(d);
    for (Eigen::Index i = 0; i < d; ++i) scaled(i) = sigma(i) / (sigma(i) * sigma(i) + cfg.damping) * ut(i);
    out.delta.dtheta = svd.matrixV() * scaled;
  }
  return out;
}

ProjectionConfig exact_projection() {
  ProjectionConfig cfg;
  cfg.damping = 0.0;
  cfg.solver = LeastSquaresSolver::QR;
  return cfg;
}

double relative_error(const SkinnedModel& model, const Pose& pose, const PoseDelta& delta,
                      const SampleSet& samples, const ProjectionConfig& cfg) {
  const double norm = delta.dtheta.norm();
  if (!(norm > 0.0)) throw ValidationError("perturbation must be non-zero");
  PointCloud x0;
  Eigen::MatrixXd jacobian;
  attachments_with_jacobian(model, pose, samples, x0, jacobian);
  const Pose moved{pose.theta + delta.dtheta};
  const PointCloud x1 = evaluate_attachments(model, moved, samples);
  const Eigen::VectorXd f = x1.flat() - x0.flat();
  const PoseDelta estimate = project_velocity(jacobian, f, cfg);
  return (estimate.dtheta - delta.dtheta).norm() / norm;
}

PoseDelta random_delta(int pose_dim, double norm, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Eigen::VectorXd v(pose_dim);
  for (int i = 0; i < pose_dim; ++i) v(i) = standard_normal(rng);
  return PoseDelta{v * (norm / v.norm())};
}

}  // namespace bodyflow
