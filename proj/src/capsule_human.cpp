#include "bodyflow/capsule_human.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include "bodyflow/collision.hpp"
#include "bodyflow/error.hpp"
#include "bodyflow/mesh.hpp"
#include "bodyflow/rng.hpp"

namespace bodyflow {

namespace {

struct TaperedCapsule {
  Vec3 a;
  Vec3 b;
  double radius_a;
  double radius_b;
  int joint;

  double distance(const Vec3& p) const {
    const Vec3 ab = b - a;
    const double len2 = ab.squaredNorm();
    const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    return (p - (a + t * ab)).norm() - (radius_a + t * (radius_b - radius_a));
  }
};

struct Layout {
  std::vector<int> parent;
  std::vector<Vec3> joints;  // absolute rest positions
  std::vector<TaperedCapsule> parts;
};

Vec3 mirror(const Vec3& v) { return {-v.x(), v.y(), v.z()}; }

Layout humanoid_layout() {
  Layout L;
  L.parent.assign(kHumanJointCount, -1);
  L.joints.resize(kHumanJointCount);
  auto joint = [&](HumanJoint j, HumanJoint parent, Vec3 pos) {
    L.parent[j] = parent;
    L.joints[j] = pos;
  };
  L.joints[kPelvis] = {0.0, 0.95, 0.0};
  joint(kSpine, kPelvis, {0.0, 1.10, 0.0});
  joint(kNeck, kSpine, {0.0, 1.45, 0.0});
  joint(kHead, kNeck, {0.0, 1.55, 0.0});
  joint(kLeftShoulder, kSpine, {0.19, 1.40, 0.0});
  joint(kLeftElbow, kLeftShoulder, {0.47, 1.40, 0.0});
  joint(kLeftWrist, kLeftElbow, {0.72, 1.40, 0.0});
  joint(kLeftHip, kPelvis, {0.10, 0.90, 0.0});
  joint(kLeftKnee, kLeftHip, {0.10, 0.50, 0.0});
  joint(kLeftAnkle, kLeftKnee, {0.10, 0.10, 0.0});
  const std::array<std::pair<HumanJoint, HumanJoint>, 6> mirrored{{{kRightShoulder, kLeftShoulder},
                                                                   {kRightElbow, kLeftElbow},
                                                                   {kRightWrist, kLeftWrist},
                                                                   {kRightHip, kLeftHip},
                                                                   {kRightKnee, kLeftKnee},
                                                                   {kRightAnkle, kLeftAnkle}}};
  for (const auto& [right, left] : mirrored) L.joints[right] = mirror(L.joints[left]);
  L.parent[kRightShoulder] = kSpine;
  L.parent[kRightElbow] = kRightShoulder;
  L.parent[kRightWrist] = kRightElbow;
  L.parent[kRightHip] = kPelvis;
  L.parent[kRightKnee] = kRightHip;
  L.parent[kRightAnkle] = kRightKnee;

  auto part = [&](Vec3 a, Vec3 b, double ra, double rb, int j) { L.parts.push_back({a, b, ra, rb, j}); };
  part({-0.08, 0.93, 0.0}, {0.08, 0.93, 0.0}, 0.115, 0.115, kPelvis);
  part({0.0, 0.95, 0.0}, {0.0, 1.10, 0.0}, 0.12, 0.12, kPelvis);
  part({0.0, 1.10, 0.0}, {0.0, 1.30, 0.0}, 0.12, 0.125, kSpine);
  part({-0.10, 1.34, 0.0}, {0.10, 1.34, 0.0}, 0.095, 0.095, kSpine);
  part({0.0, 1.42, 0.0}, {0.0, 1.55, 0.0}, 0.05, 0.05, kNeck);
  part({0.0, 1.65, 0.01}, {0.0, 1.65, 0.01}, 0.10, 0.10, kHead);
  for (int side = 0; side < 2; ++side) {
    auto s = [&](Vec3 v) { return side == 0 ? v : mirror(v); };
    const int off_arm = side == 0 ? 0 : kRightShoulder - kLeftShoulder;
    const int off_leg = side == 0 ? 0 : kRightHip - kLeftHip;
    part(s({0.19, 1.40, 0.0}), s({0.47, 1.40, 0.0}), 0.05, 0.043, kLeftShoulder + off_arm);
    part(s({0.47, 1.40, 0.0}), s({0.72, 1.40, 0.0}), 0.042, 0.035, kLeftElbow + off_arm);
    part(s({0.745, 1.40, 0.0}), s({0.85, 1.40, 0.0}), 0.036, 0.032, kLeftWrist + off_arm);
    part(s({0.10, 0.90, 0.0}), s({0.10, 0.50, 0.0}), 0.075, 0.055, kLeftHip + off_leg);
    part(s({0.10, 0.50, 0.0}), s({0.10, 0.10, 0.0}), 0.055, 0.042, kLeftKnee + off_leg);
    part(s({0.10, 0.05, -0.02}), s({0.10, 0.05, 0.14}), 0.04, 0.036, kLeftAnkle + off_leg);
  }
  return L;
}

double smooth_min(double a, double b, double k) {
  const double h = std::max(k - std::abs(a - b), 0.0) / k;
  return std::min(a, b) - h * h * k * 0.25;
}

double body_field(const Layout& L, const Vec3& p, double k) {
  double d = L.parts.front().distance(p);
  for (std::size_t i = 1; i < L.parts.size(); ++i) d = smooth_min(d, L.parts[i].distance(p), k);
  return d;
}

/// Marching tetrahedra over a Kuhn-subdivided cubic lattice. The piecewise
/// linear level set of a lattice function with no zero nodes is a closed
/// embedded 2-manifold, and every tet is split by at most one planar patch.
void polygonize(const Layout& L, const CapsuleHumanConfig& cfg, Points& vertices, std::vector<Face>& faces) {
  const double h = cfg.grid_spacing;
  Vec3 lo = Vec3::Constant(1e9);
  Vec3 hi = Vec3::Constant(-1e9);
  for (const auto& part : L.parts) {
    const double r = std::max(part.radius_a, part.radius_b);
    lo = lo.cwiseMin(part.a.cwiseMin(part.b) - Vec3::Constant(r));
    hi = hi.cwiseMax(part.a.cwiseMax(part.b) + Vec3::Constant(r));
  }
  lo -= Vec3::Constant(2.0 * h);
  hi += Vec3::Constant(2.0 * h);
  const Eigen::Vector3i n = ((hi - lo) / h).array().ceil().cast<int>() + 1;
  auto node_id = [&](int i, int j, int k) {
    return static_cast<std::int64_t>(i) + static_cast<std::int64_t>(n.x()) * (j + static_cast<std::int64_t>(n.y()) * k);
  };
  auto node_pos = [&](std::int64_t id) {
    const std::int64_t i = id % n.x();
    const std::int64_t j = (id / n.x()) % n.y();
    const std::int64_t k = id / (static_cast<std::int64_t>(n.x()) * n.y());
    return Vec3(lo.x() + h * i, lo.y() + h * j, lo.z() + h * k);
  };

  std::vector<double> value(static_cast<std::size_t>(n.x()) * n.y() * n.z());
  for (int k = 0; k < n.z(); ++k)
    for (int j = 0; j < n.y(); ++j)
      for (int i = 0; i < n.x(); ++i) {
        double f = body_field(L, node_pos(node_id(i, j, k)), cfg.blend_radius);
        // Nodes exactly on the surface would produce non-manifold patches.
        if (std::abs(f) < 1e-9 * h) f = 1e-9 * h;
        value[node_id(i, j, k)] = f;
      }

  std::unordered_map<std::uint64_t, int> edge_vertex;
  std::vector<Vec3> verts;
  auto crossing = [&](std::int64_t inside, std::int64_t outside) {
    const std::uint64_t key = (static_cast<std::uint64_t>(std::min(inside, outside)) << 32) |
                              static_cast<std::uint64_t>(std::max(inside, outside));
    const auto it = edge_vertex.find(key);
    if (it != edge_vertex.end()) return it->second;
    const double fi = value[inside];
    const double fo = value[outside];
    // Keeping crossings off the lattice nodes bounds how thin a patch can get.
    const double t = std::clamp(fi / (fi - fo), 0.05, 0.95);
    const Vec3 p = node_pos(inside) + t * (node_pos(outside) - node_pos(inside));
    const int id = static_cast<int>(verts.size());
    verts.push_back(p);
    edge_vertex.emplace(key, id);
    return id;
  };

  // Kuhn subdivision: one tet per axis permutation, all sharing the 0-7 diagonal.
  static constexpr std::array<std::array<int, 3>, 6> perms{
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  auto emit = [&](std::array<int, 3> tri, const Vec3& gradient) {
    const Vec3 a = verts[tri[0]];
    const Vec3 nrm = (verts[tri[1]] - a).cross(verts[tri[2]] - a);
    if (nrm.dot(gradient) < 0.0) std::swap(tri[1], tri[2]);
    faces.push_back({tri[0], tri[1], tri[2]});
  };

  for (int k = 0; k + 1 < n.z(); ++k)
    for (int j = 0; j + 1 < n.y(); ++j)
      for (int i = 0; i + 1 < n.x(); ++i) {
        std::array<std::int64_t, 8> corner;
        for (int c = 0; c < 8; ++c) corner[c] = node_id(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1));
        bool any_in = false;
        bool any_out = false;
        for (const auto id : corner) (value[id] < 0.0 ? any_in : any_out) = true;
        if (!any_in || !any_out) continue;
        for (const auto& perm : perms) {
          std::array<std::int64_t, 4> tet;
          int bits = 0;
          tet[0] = corner[0];
          for (int s = 0; s < 3; ++s) {
            bits |= 1 << perm[s];
            tet[s + 1] = corner[bits];
          }
          std::array<std::int64_t, 4> in;
          std::array<std::int64_t, 4> out;
          int n_in = 0;
          int n_out = 0;
          for (const auto id : tet) (value[id] < 0.0 ? in[n_in++] : out[n_out++]) = id;
          if (n_in == 0 || n_out == 0) continue;
          // Gradient of the linear interpolant points from inside to outside.
          Eigen::Matrix3d edges;
          Vec3 rhs;
          for (int r = 0; r < 3; ++r) {
            edges.row(r) = (node_pos(tet[r + 1]) - node_pos(tet[0])).transpose();
            rhs[r] = value[tet[r + 1]] - value[tet[0]];
          }
          const Vec3 gradient = edges.partialPivLu().solve(rhs);
          if (n_in == 1) {
            emit({crossing(in[0], out[0]), crossing(in[0], out[1]), crossing(in[0], out[2])}, gradient);
          } else if (n_out == 1) {
            emit({crossing(in[0], out[0]), crossing(in[1], out[0]), crossing(in[2], out[0])}, gradient);
          } else {
            // Quad cycle; split along the shorter diagonal.
            const int q0 = crossing(in[0], out[0]);
            const int q1 = crossing(in[0], out[1]);
            const int q2 = crossing(in[1], out[1]);
            const int q3 = crossing(in[1], out[0]);
            if ((verts[q0] - verts[q2]).squaredNorm() <= (verts[q1] - verts[q3]).squaredNorm()) {
              emit({q0, q1, q2}, gradient);
              emit({q0, q2, q3}, gradient);
            } else {
              emit({q0, q1, q3}, gradient);
              emit({q1, q2, q3}, gradient);
            }
          }
        }
      }

  vertices.resize(static_cast<Eigen::Index>(verts.size()), 3);
  for (std::size_t v = 0; v < verts.size(); ++v) vertices.row(v) = verts[v].transpose();
}

double smoothstep(double u) {
  u = std::clamp(u, 0.0, 1.0);
  return u * u * (3.0 - 2.0 * u);
}

SkinWeights distance_weights(const Layout& L, const Points& vertices, double band) {
  SkinWeights weights;
  const int J = static_cast<int>(L.joints.size());
  std::vector<double> dist(J);
  std::vector<std::pair<int, double>> row;
  for (Eigen::Index v = 0; v < vertices.rows(); ++v) {
    const Vec3 p = vertices.row(v).transpose();
    std::fill(dist.begin(), dist.end(), 1e9);
    for (const auto& part : L.parts) dist[part.joint] = std::min(dist[part.joint], part.distance(p));
    const double nearest = *std::min_element(dist.begin(), dist.end());
    row.clear();
    double sum = 0.0;
    for (int j = 0; j < J; ++j) {
      const double w = smoothstep(1.0 - (dist[j] - nearest) / band);
      if (w > 0.0) {
        row.emplace_back(j, w);
        sum += w;
      }
    }
    for (auto& entry : row) entry.second /= sum;
    weights.append_row(row);
  }
  return weights;
}

}  // namespace

SkinnedModel make_capsule_human(const CapsuleHumanConfig& config) {
  if (config.joints != kHumanJointCount)
    throw ValidationError("capsule human supports exactly " + std::to_string(kHumanJointCount) + " joints");
  if (!(config.grid_spacing > 0.0) || !(config.blend_radius > 0.0) || !(config.weight_band > 0.0))
    throw ValidationError("capsule human spacing, blend radius and weight band must be positive");

  const Layout L = humanoid_layout();
  SkinnedModel model;
  model.name = "capsule_human";
  model.tree.parent = L.parent;
  model.tree.rest_offset.resize(kHumanJointCount);
  for (int j = 0; j < kHumanJointCount; ++j) {
    model.tree.rest_offset[j] = L.parent[j] < 0 ? L.joints[j] : Vec3(L.joints[j] - L.joints[L.parent[j]]);
  }
  polygonize(L, config, model.template_vertices, model.faces);
  model.skin_weights = distance_weights(L, model.template_vertices, config.weight_band);

  const Vec3 crotch{0.0, 0.82, 0.0};
  const Vec3 armpit{0.18, 1.32, 0.0};
  for (int f = 0; f < model.face_count(); ++f) {
    Vec3 centroid = Vec3::Zero();
    for (int k = 0; k < 3; ++k) centroid += model.template_vertices.row(model.faces[f][k]).transpose() / 3.0;
    const bool excluded = (centroid - crotch).norm() < config.crotch_exclusion_radius ||
                          (centroid - armpit).norm() < config.armpit_exclusion_radius ||
                          (centroid - mirror(armpit)).norm() < config.armpit_exclusion_radius;
    if (excluded) model.exclusion_faces.push_back(f);
  }
  return model;
}

Pose hand_in_torso_pose() {
  constexpr double pi = std::numbers::pi;
  Pose pose = Pose::zero(kHumanJointCount);
  // Upper arm points forward; the forearm folds back through the chest.
  pose.set_rotation(kLeftShoulder, {0.0, -pi / 2.0, 0.0});
  pose.set_rotation(kLeftElbow, {0.0, -(pi / 2.0 + 0.8), 0.0});
  return pose;
}

Pose left_arm_lowered_pose(double angle) {
  constexpr double pi = std::numbers::pi;
  Pose pose = Pose::zero(kHumanJointCount);
  pose.set_rotation(kLeftShoulder, {0.0, 0.0, -(pi / 2.0 + angle)});
  return pose;
}

Pose left_arm_raised_pose(double angle) {
  Pose pose = Pose::zero(kHumanJointCount);
  pose.set_rotation(kLeftShoulder, {0.0, 0.0, angle});
  return pose;
}

namespace {

struct JointRange {
  Vec3 lo;
  Vec3 hi;
};

// Local axis-angle ranges; left and right limbs mirror through x = 0.
const JointRange& joint_range(int j) {
  static const JointRange ranges[kHumanJointCount] = {
      {{-0.15, -0.3, -0.15}, {0.15, 0.3, 0.15}},  // pelvis
      {{-0.3, -0.3, -0.2}, {0.4, 0.3, 0.2}},       // spine
      {{-0.3, -0.4, -0.3}, {0.3, 0.4, 0.3}},       // neck
      {{-0.3, -0.4, -0.3}, {0.3, 0.4, 0.3}},       // head
      {{-0.6, -0.9, -0.8}, {0.6, 0.5, 0.8}},       // left shoulder
      {{-0.3, -1.8, -0.2}, {0.3, 0.0, 0.2}},       // left elbow
      {{-0.4, -0.4, -0.4}, {0.4, 0.4, 0.4}},       // left wrist
      {{-0.6, -0.5, -0.8}, {0.6, 0.9, 0.8}},       // right shoulder
      {{-0.3, 0.0, -0.2}, {0.3, 1.8, 0.2}},        // right elbow
      {{-0.4, -0.4, -0.4}, {0.4, 0.4, 0.4}},       // right wrist
      {{-1.2, -0.3, -0.1}, {0.4, 0.3, 0.4}},       // left hip
      {{0.0, -0.1, -0.1}, {1.6, 0.1, 0.1}},        // left knee
      {{-0.3, -0.2, -0.2}, {0.3, 0.2, 0.2}},       // left ankle
      {{-1.2, -0.3, -0.4}, {0.4, 0.3, 0.1}},       // right hip
      {{0.0, -0.1, -0.1}, {1.6, 0.1, 0.1}},        // right knee
      {{-0.3, -0.2, -0.2}, {0.3, 0.2, 0.2}},       // right ankle
  };
  return ranges[j];
}

}  // namespace

Pose random_human_pose(std::mt19937_64& rng, double amplitude) {
  Pose pose = Pose::zero(kHumanJointCount);
  for (int j = 0; j < kHumanJointCount; ++j) {
    const JointRange& r = joint_range(j);
    Vec3 v;
    for (int k = 0; k < 3; ++k) v[k] = amplitude * uniform(rng, r.lo[k], r.hi[k]);
    pose.set_rotation(j, v);
  }
  return pose;
}

Pose random_collision_free_pose(const SkinnedModel& model, std::mt19937_64& rng, double amplitude, int max_tries) {
  for (int i = 0; i < max_tries; ++i) {
    Pose pose = random_human_pose(rng, amplitude);
    if (!has_self_intersection(model, pose)) return pose;
  }
  throw NumericalError("no collision-free random pose after " + std::to_string(max_tries) + " draws");
}

}  // namespace bodyflow
