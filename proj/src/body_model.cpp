#include "bodyflow/body_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bodyflow/error.hpp"
#include "bodyflow/mesh.hpp"

namespace bodyflow {

void SkinWeights::append_row(std::span<const std::pair<int, double>> entries) {
  for (const auto& [j, w] : entries) {
    joint.push_back(j);
    weight.push_back(w);
  }
  row_begin.push_back(static_cast<int>(joint.size()));
}

std::vector<Vec3> SkinnedModel::rest_joint_positions() const {
  const int n = joint_count();
  std::vector<Vec3> c(n);
  for (int j = 0; j < n; ++j) {
    c[j] = tree.parent[j] < 0 ? tree.rest_offset[j] : c[tree.parent[j]] + tree.rest_offset[j];
  }
  return c;
}

int SkinnedModel::dominant_joint(int v) const {
  int best = -1;
  double best_w = -1.0;
  for (int k = skin_weights.row_begin[v]; k < skin_weights.row_begin[v + 1]; ++k) {
    if (skin_weights.weight[k] > best_w) {
      best_w = skin_weights.weight[k];
      best = skin_weights.joint[k];
    }
  }
  return best;
}

bool SkinnedModel::is_excluded(int face) const {
  return std::binary_search(exclusion_faces.begin(), exclusion_faces.end(), face);
}

Pose Pose::zero(int joint_count) { return Pose{Eigen::VectorXd::Zero(3 + 3 * joint_count)}; }

Pose Pose::canonicalized() const {
  Pose out = *this;
  for (int j = 0; j < joint_count(); ++j) out.set_rotation(j, canonicalize_axis_angle(rotation(j)));
  return out;
}

namespace {

[[noreturn]] void fail(const std::string& what) { throw ValidationError(what); }

template <typename... Args>
std::string cat(const Args&... args) {
  std::ostringstream os;
  (os << ... << args);
  return os.str();
}

}  // namespace

void validate_model(const SkinnedModel& model) {
  const auto& tree = model.tree;
  const int J = tree.joint_count();
  if (J < 1) fail("kinematic tree has no joints");
  if (static_cast<int>(tree.rest_offset.size()) != J)
    fail(cat("rest_offsets has ", tree.rest_offset.size(), " entries, expected ", J));
  if (tree.parent[0] != -1) fail("joint 0 must be the root (parent -1)");
  for (int j = 1; j < J; ++j) {
    if (tree.parent[j] < 0 || tree.parent[j] >= j)
      fail(cat("joint ", j, ": parent ", tree.parent[j], " must lie in [0, ", j, ")"));
  }
  for (int j = 0; j < J; ++j) {
    if (!tree.rest_offset[j].allFinite()) fail(cat("rest_offset ", j, " is not finite"));
  }

  const int V = model.vertex_count();
  if (V < 4) fail("mesh needs at least 4 vertices");
  for (int v = 0; v < V; ++v) {
    if (!model.template_vertices.row(v).allFinite()) fail(cat("vertex ", v, " is not finite"));
  }
  for (int f = 0; f < model.face_count(); ++f) {
    const Face& face = model.faces[f];
    for (int k = 0; k < 3; ++k) {
      if (face[k] < 0 || face[k] >= V) fail(cat("face ", f, ": vertex index ", face[k], " out of range"));
    }
    if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2])
      fail(cat("face ", f, " repeats a vertex"));
  }
  if (const auto problem = find_manifold_violation(model.faces, V)) fail(*problem);

  const auto& w = model.skin_weights;
  if (w.vertex_count() != V) fail(cat("skin weights cover ", w.vertex_count(), " vertices, expected ", V));
  for (int v = 0; v < V; ++v) {
    double sum = 0.0;
    for (int k = w.row_begin[v]; k < w.row_begin[v + 1]; ++k) {
      if (w.joint[k] < 0 || w.joint[k] >= J)
        fail(cat("skin weight row ", v, ": joint ", w.joint[k], " out of range"));
      if (!(w.weight[k] >= 0.0)) fail(cat("skin weight row ", v, " has a negative entry"));
      sum += w.weight[k];
    }
    if (std::abs(sum - 1.0) > 1e-9) fail(cat("skin weight row ", v, " sums to ", sum));
  }

  for (std::size_t i = 0; i < model.exclusion_faces.size(); ++i) {
    const int f = model.exclusion_faces[i];
    if (f < 0 || f >= model.face_count()) fail(cat("exclusion face ", f, " out of range"));
    if (i > 0 && model.exclusion_faces[i - 1] >= f) fail("exclusion faces must be sorted and unique");
  }
}

void validate_pose(const SkinnedModel& model, const Pose& pose) {
  if (pose.theta.size() != model.pose_dim()) throw ValidationError("pose/model dimension mismatch");
  if (!pose.is_finite()) throw ValidationError("pose has non-finite entries");
}

std::vector<RigidTransform> forward_kinematics(const SkinnedModel& model, const Pose& pose) {
  validate_pose(model, pose);
  const auto& tree = model.tree;
  const int J = tree.joint_count();
  std::vector<RigidTransform> global(J);
  for (int j = 0; j < J; ++j) {
    const Mat3 local = axis_angle_to_matrix(pose.rotation(j));
    const int p = tree.parent[j];
    if (p < 0) {
      global[j].rotation = local;
      global[j].translation = pose.translation() + tree.rest_offset[j];
    } else {
      global[j].rotation = global[p].rotation * local;
      global[j].translation = global[p].apply(tree.rest_offset[j]);
    }
  }
  return global;
}

Points joint_positions(const SkinnedModel& model, const Pose& pose) {
  const auto global = forward_kinematics(model, pose);
  Points out(global.size(), 3);
  for (std::size_t j = 0; j < global.size(); ++j) out.row(j) = global[j].translation.transpose();
  return out;
}

PosedSkeleton pose_skeleton(const SkinnedModel& model, const Pose& pose) {
  return {forward_kinematics(model, pose), model.rest_joint_positions()};
}

Vec3 PosedSkeleton::skin(const SkinnedModel& model, int vertex) const {
  const Vec3 rest = model.template_vertices.row(vertex).transpose();
  Vec3 delta = Vec3::Zero();
  const auto& w = model.skin_weights;
  for (int k = w.row_begin[vertex]; k < w.row_begin[vertex + 1]; ++k) {
    const int j = w.joint[k];
    const Vec3 local = rest - rest_joints[j];
    delta += w.weight[k] * ((global[j].rotation * local - local) + (global[j].translation - rest_joints[j]));
  }
  return rest + delta;
}

PointCloud skin_vertices(const SkinnedModel& model, const Pose& pose) {
  const PosedSkeleton skeleton = pose_skeleton(model, pose);
  PointCloud out{Points(model.vertex_count(), 3)};
  for (int v = 0; v < model.vertex_count(); ++v) out.points.row(v) = skeleton.skin(model, v).transpose();
  return out;
}

void attachments_with_jacobian(const SkinnedModel& model, const Pose& pose,
                               const SampleSet& attachments, PointCloud& positions,
                               Eigen::MatrixXd& jacobian) {
  const PosedSkeleton skeleton = pose_skeleton(model, pose);
  const auto& tree = model.tree;
  const int J = tree.joint_count();
  const int S = attachments.size();

  // d(R_k q)/d theta_k, rotated into world: A_parent(k) * J_l(theta_k).
  std::vector<Mat3> column_map(J);
  for (int k = 0; k < J; ++k) {
    const Mat3 parent_rot = tree.parent[k] < 0 ? Mat3::Identity() : skeleton.global[tree.parent[k]].rotation;
    column_map[k] = parent_rot * so3_left_jacobian(pose.rotation(k));
  }

  positions.points.resize(S, 3);
  jacobian.setZero(3 * S, model.pose_dim());

  // Per-joint accumulators over the subtree: weight mass and weighted position.
  std::vector<double> mass(J);
  std::vector<Vec3> moment(J);
  const auto& w = model.skin_weights;

  for (int i = 0; i < S; ++i) {
    const Attachment& a = attachments.attachments[i];
    std::fill(mass.begin(), mass.end(), 0.0);
    std::fill(moment.begin(), moment.end(), Vec3::Zero());
    Vec3 x = Vec3::Zero();
    double total = 0.0;
    for (int c = 0; c < 3; ++c) {
      const double b = a.bary[c];
      if (b == 0.0) continue;
      const int v = model.faces[a.face][c];
      x += b * skeleton.skin(model, v);
      const Vec3 rest = model.template_vertices.row(v).transpose();
      for (int k = w.row_begin[v]; k < w.row_begin[v + 1]; ++k) {
        const int j = w.joint[k];
        const double bw = b * w.weight[k];
        const Vec3 y = skeleton.global[j].apply(rest - skeleton.rest_joints[j]);
        total += bw;
        for (int anc = j; anc >= 0; anc = tree.parent[anc]) {
          mass[anc] += bw;
          moment[anc] += bw * y;
        }
      }
    }
    positions.points.row(i) = x.transpose();
    jacobian.block<3, 3>(3 * i, 0) = total * Mat3::Identity();
    for (int k = 0; k < J; ++k) {
      if (mass[k] == 0.0) continue;
      const Vec3 lever = moment[k] - mass[k] * skeleton.global[k].translation;
      jacobian.block<3, 3>(3 * i, 3 + 3 * k) = -skew(lever) * column_map[k];
    }
  }
}

Eigen::MatrixXd pose_jacobian(const SkinnedModel& model, const Pose& pose, const SampleSet& attachments) {
  PointCloud positions;
  Eigen::MatrixXd jacobian;
  attachments_with_jacobian(model, pose, attachments, positions, jacobian);
  return jacobian;
}

}  // namespace bodyflow
