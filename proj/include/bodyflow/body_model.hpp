#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bodyflow/attachment.hpp"
#include "bodyflow/rotation.hpp"

namespace bodyflow {

/// Row-major V x 3 block of points; rows are contiguous so the whole block
/// maps onto a stacked 3V vector.
using Points = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

using Face = std::array<int, 3>;

struct KinematicTree {
  /// parent[0] == -1; parent[j] < j for every other joint.
  std::vector<int> parent;
  /// Rest position of joint j relative to its parent. For the root this is
  /// the absolute rest position.
  std::vector<Vec3> rest_offset;

  int joint_count() const { return static_cast<int>(parent.size()); }
};

/// Sparse skinning weights in compressed-row form: the weights of vertex v
/// live in [row_begin[v], row_begin[v + 1]).
struct SkinWeights {
  std::vector<int> row_begin{0};
  std::vector<int> joint;
  std::vector<double> weight;

  int vertex_count() const { return static_cast<int>(row_begin.size()) - 1; }
  void append_row(std::span<const std::pair<int, double>> entries);
};

struct SkinnedModel {
  std::string name;
  KinematicTree tree;
  Points template_vertices;
  std::vector<Face> faces;
  SkinWeights skin_weights;
  /// Sorted, unique face indices that are never sampled.
  std::vector<int> exclusion_faces;

  int vertex_count() const { return static_cast<int>(template_vertices.rows()); }
  int face_count() const { return static_cast<int>(faces.size()); }
  int joint_count() const { return tree.joint_count(); }
  /// Pose dimension d = 3 + 3 J.
  int pose_dim() const { return 3 + 3 * joint_count(); }

  /// Cumulative rest-pose joint positions.
  std::vector<Vec3> rest_joint_positions() const;
  /// Joint with the largest skinning weight for vertex v.
  int dominant_joint(int v) const;
  bool is_excluded(int face) const;
};

/// Parameter vector: root translation, then one axis-angle triple per joint.
struct Pose {
  Eigen::VectorXd theta;

  static Pose zero(int joint_count);
  int joint_count() const { return static_cast<int>((theta.size() - 3) / 3); }
  Vec3 translation() const { return theta.head<3>(); }
  Vec3 rotation(int joint) const { return theta.segment<3>(3 + 3 * joint); }
  void set_translation(const Vec3& t) { theta.head<3>() = t; }
  void set_rotation(int joint, const Vec3& r) { theta.segment<3>(3 + 3 * joint) = r; }
  /// Every joint rotation brought onto the |axis-angle| < pi branch.
  Pose canonicalized() const;
  bool is_finite() const { return theta.allFinite(); }
};

/// Parameter-space increment or velocity, same layout as Pose.
struct PoseDelta {
  Eigen::VectorXd dtheta;
};

struct PointCloud {
  Points points;

  int size() const { return static_cast<int>(points.rows()); }
  Eigen::Map<const Eigen::VectorXd> flat() const {
    return {points.data(), points.size()};
  }
};

/// Validates structure and weights; throws ValidationError naming the first
/// violation together with its index.
void validate_model(const SkinnedModel& model);
void validate_pose(const SkinnedModel& model, const Pose& pose);

/// Global joint transforms: transform[j] maps joint-j local coordinates
/// (rest orientation, origin at the joint) to world coordinates.
std::vector<RigidTransform> forward_kinematics(const SkinnedModel& model, const Pose& pose);

/// Posed joint positions (translations of the forward-kinematics transforms).
Points joint_positions(const SkinnedModel& model, const Pose& pose);

/// Forward kinematics plus the rest joint positions, i.e. everything needed
/// to skin individual vertices at one pose.
struct PosedSkeleton {
  std::vector<RigidTransform> global;
  std::vector<Vec3> rest_joints;

  /// v = v_rest + sum_j w_j [(A_j - I)(v_rest - c_j) + (p_j - c_j)], which is
  /// ordinary LBS for normalized weights and returns v_rest bit-exactly at
  /// the zero pose.
  Vec3 skin(const SkinnedModel& model, int vertex) const;
};

PosedSkeleton pose_skeleton(const SkinnedModel& model, const Pose& pose);

/// Linear blend skinning of every template vertex.
PointCloud skin_vertices(const SkinnedModel& model, const Pose& pose);

/// d x / d theta for every attachment, stacked into a 3S x d matrix (row
/// block i belongs to attachment i). Chain rule through the kinematic tree
/// using the SO(3) left Jacobian; no numerical differentiation.
Eigen::MatrixXd pose_jacobian(const SkinnedModel& model, const Pose& pose,
                              const SampleSet& attachments);

/// Attachment positions and their Jacobian from a single skinning pass.
void attachments_with_jacobian(const SkinnedModel& model, const Pose& pose,
                               const SampleSet& attachments, PointCloud& positions,
                               Eigen::MatrixXd& jacobian);

}  // namespace bodyflow
