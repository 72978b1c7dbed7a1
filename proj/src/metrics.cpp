#include "bodyflow/metrics.hpp"

#include <Eigen/SVD>

#include "bodyflow/error.hpp"

namespace bodyflow {

namespace {

void check_shapes(const JointSequence& pred, const JointSequence& gt) {
  if (pred.size() != gt.size()) throw ValidationError("prediction and ground truth have different frame counts");
  if (pred.empty()) throw ValidationError("empty joint sequence");
  for (std::size_t f = 0; f < pred.size(); ++f) {
    if (pred[f].rows() != gt[f].rows() || pred[f].rows() == 0)
      throw ValidationError("frame " + std::to_string(f) + ": joint count mismatch");
  }
}

double mean_distance(const Points& a, const Points& b) { return (a - b).rowwise().norm().mean(); }

}  // namespace

double mpjpe(const JointSequence& pred, const JointSequence& gt, bool root_align) {
  check_shapes(pred, gt);
  double total = 0.0;
  for (std::size_t f = 0; f < pred.size(); ++f) {
    if (root_align) {
      const Points p = pred[f].rowwise() - pred[f].row(0);
      const Points g = gt[f].rowwise() - gt[f].row(0);
      total += mean_distance(p, g);
    } else {
      total += mean_distance(pred[f], gt[f]);
    }
  }
  return total / pred.size();
}

Points procrustes_align(const Points& source, const Points& target) {
  if (source.rows() != target.rows() || source.rows() < 3)
    throw ValidationError("Procrustes alignment needs at least 3 matching joints");
  const Eigen::RowVector3d mu_s = source.colwise().mean();
  const Eigen::RowVector3d mu_t = target.colwise().mean();
  const Eigen::MatrixXd xs = source.rowwise() - mu_s;
  const Eigen::MatrixXd xt = target.rowwise() - mu_t;

  const Eigen::JacobiSVD<Eigen::MatrixXd> spread(xt, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::JacobiSVD<Eigen::MatrixXd> spread_s(xs, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& st = spread.singularValues();
  const auto& ss = spread_s.singularValues();
  if (!(st(1) > 1e-9 * st(0)) || !(ss(1) > 1e-9 * ss(0)))
    throw ValidationError("degenerate (collinear) joint set");

  const Mat3 cov = xt.transpose() * xs;
  const Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) d(2, 2) = -1.0;
  const Mat3 rot = svd.matrixU() * d * svd.matrixV().transpose();
  const double var_s = xs.squaredNorm();
  const double scale = (svd.singularValues().asDiagonal() * d).trace() / var_s;
  Points out = (scale * (xs * rot.transpose())).rowwise() + mu_t;
  return out;
}

double p_mpjpe(const JointSequence& pred, const JointSequence& gt) {
  check_shapes(pred, gt);
  double total = 0.0;
  for (std::size_t f = 0; f < pred.size(); ++f) total += mean_distance(procrustes_align(pred[f], gt[f]), gt[f]);
  return total / pred.size();
}

double accel_err(const JointSequence& pred, const JointSequence& gt, double fps) {
  check_shapes(pred, gt);
  if (pred.size() < 3) throw ValidationError("acceleration error needs at least 3 frames");
  if (!(fps > 0.0)) throw ValidationError("fps must be positive");
  const double f2 = fps * fps;
  double total = 0.0;
  for (std::size_t t = 1; t + 1 < pred.size(); ++t) {
    const Points ap = (pred[t + 1] - 2.0 * pred[t] + pred[t - 1]) * f2;
    const Points ag = (gt[t + 1] - 2.0 * gt[t] + gt[t - 1]) * f2;
    total += mean_distance(ap, ag);
  }
  return total / (pred.size() - 2);
}

JointSequence joints_mm(const SkinnedModel& model, const std::vector<Pose>& poses) {
  JointSequence out;
  out.reserve(poses.size());
  for (const Pose& p : poses) out.push_back(joint_positions(model, p) * 1000.0);
  return out;
}

}  // namespace bodyflow
