#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "bodyflow/body_model.hpp"
#include "bodyflow/capsule_human.hpp"
#include "bodyflow/collision.hpp"
#include "bodyflow/error.hpp"
#include "bodyflow/mesh.hpp"
#include "bodyflow/rng.hpp"
#include "bodyflow/surface_sampling.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace bodyflow;
using fixtures::human;

namespace {

constexpr double kPi = std::numbers::pi;

/// Two joints and a tetrahedron skinned half to each joint.
SkinnedModel two_joint_chain() {
  SkinnedModel m;
  m.name = "chain";
  m.tree.parent = {-1, 0};
  m.tree.rest_offset = {Vec3(0, 0, 0), Vec3(1, 0, 0)};
  m.template_vertices.resize(4, 3);
  m.template_vertices << 0, 0, 0, 2, 0, 0, 1, 1, 0, 1, 0, 1;
  m.faces = {{0, 2, 1}, {0, 1, 3}, {1, 2, 3}, {0, 3, 2}};
  const std::pair<int, double> root[] = {{0, 1.0}};
  const std::pair<int, double> tip[] = {{1, 1.0}};
  const std::pair<int, double> half[] = {{0, 0.5}, {1, 0.5}};
  m.skin_weights.append_row(root);
  m.skin_weights.append_row(tip);
  m.skin_weights.append_row(half);
  m.skin_weights.append_row(half);
  return m;
}

Vec3 random_unit(std::mt19937_64& rng) {
  Vec3 v(standard_normal(rng), standard_normal(rng), standard_normal(rng));
  return v.normalized();
}

Eigen::VectorXd stacked(const PointCloud& pc) { return pc.flat(); }

}  // namespace

TEST_CASE("rodrigues matches Eigen angle-axis and inverts") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    const Vec3 axis = random_unit(rng);
    const double angle = uniform(rng, 0.0, kPi * 0.999);
    const Mat3 R = axis_angle_to_matrix(axis * angle);
    const Mat3 ref = Eigen::AngleAxisd(angle, axis).toRotationMatrix();
    CHECK((R - ref).norm() < 1e-13);
    CHECK((matrix_to_axis_angle(R) - axis * angle).norm() < 1e-9);
  }
  CHECK(axis_angle_to_matrix(Vec3::Zero()) == Mat3::Identity());
  CHECK((axis_angle_to_matrix(Vec3(1e-10, 0, 0)) - Eigen::AngleAxisd(1e-10, Vec3::UnitX()).toRotationMatrix()).norm() <
        1e-15);
}

TEST_CASE("canonicalization keeps the rotation and lands on the principal branch") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 50; ++i) {
    const Vec3 aa = random_unit(rng) * uniform(rng, kPi, 3.0 * kPi);
    const Vec3 c = canonicalize_axis_angle(aa);
    CHECK(c.norm() < kPi + 1e-12);
    CHECK((axis_angle_to_matrix(c) - axis_angle_to_matrix(aa)).norm() < 1e-12);
  }
  const Vec3 small(0.3, -0.2, 0.1);
  CHECK(canonicalize_axis_angle(small) == small);
}

TEST_CASE("left jacobian predicts the rotated point derivative") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    const Vec3 theta = random_unit(rng) * uniform(rng, 0.0, 3.0);
    const Vec3 q(standard_normal(rng), standard_normal(rng), standard_normal(rng));
    Mat3 fd;
    for (int k = 0; k < 3; ++k) {
      Vec3 e = Vec3::Zero();
      e(k) = 1e-6;
      fd.col(k) = (axis_angle_to_matrix(theta + e) * q - axis_angle_to_matrix(theta - e) * q) / 2e-6;
    }
    const Mat3 analytic = -skew(axis_angle_to_matrix(theta) * q) * so3_left_jacobian(theta);
    CHECK((analytic - fd).norm() < 1e-8 * (1.0 + fd.norm()));
  }
}

TEST_CASE("forward kinematics at rest, under translation, and for a hand-composed chain") {
  const SkinnedModel m = two_joint_chain();
  validate_model(m);
  Pose p = Pose::zero(2);
  auto g = forward_kinematics(m, p);
  CHECK(g[0].rotation == Mat3::Identity());
  CHECK(g[1].translation == Vec3(1, 0, 0));

  p.set_translation(Vec3(1, 0, 0));
  g = forward_kinematics(m, p);
  CHECK(g[0].translation == Vec3(1, 0, 0));
  CHECK(g[1].translation == Vec3(2, 0, 0));

  // Rotating joint 0 by pi/2 about z swings joint 1's offset from +x to +y.
  p = Pose::zero(2);
  p.set_rotation(0, Vec3(0, 0, kPi / 2));
  g = forward_kinematics(m, p);
  Mat3 rz;
  rz << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  CHECK((g[0].rotation - rz).norm() < 1e-15);
  CHECK((g[1].translation - Vec3(0, 1, 0)).norm() < 1e-15);

  CHECK_THROWS_WITH_AS(forward_kinematics(m, Pose::zero(3)), "pose/model dimension mismatch", ValidationError);
}

TEST_CASE("skinning is exact at rest and rigid under root motion") {
  const SkinnedModel& m = human();
  const Pose rest = Pose::zero(m.joint_count());
  CHECK(skin_vertices(m, rest).points == m.template_vertices);

  Pose shifted = rest;
  const Vec3 t(0.3, -1.2, 2.5);
  shifted.set_translation(t);
  const Points moved = skin_vertices(m, shifted).points;
  CHECK((moved.rowwise() - t.transpose() - m.template_vertices).cwiseAbs().maxCoeff() < 1e-12);

  std::mt19937_64 rng(4);
  const Pose base = random_human_pose(rng, 0.7);
  const Points x0 = skin_vertices(m, base).points;
  const Vec3 aa(0.4, -1.1, 0.7);
  const Mat3 R = axis_angle_to_matrix(aa);
  Pose moved_pose = base;
  moved_pose.set_rotation(0, matrix_to_axis_angle(R * axis_angle_to_matrix(base.rotation(0))));
  moved_pose.set_translation(t);
  const Vec3 c0 = m.tree.rest_offset[0];
  const Points x1 = skin_vertices(m, moved_pose).points;
  double worst = 0.0;
  for (int v = 0; v < m.vertex_count(); ++v) {
    const Vec3 expect = R * (x0.row(v).transpose() - c0) + c0 + t;
    worst = std::max(worst, (x1.row(v).transpose() - expect).norm());
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("elbow bend matches a per-vertex blended transform oracle") {
  const SkinnedModel& m = human();
  Pose p = Pose::zero(m.joint_count());
  p.set_rotation(kLeftElbow, Vec3(0, -kPi / 4, 0));
  const Points x = skin_vertices(m, p).points;
  const auto rest = m.rest_joint_positions();
  const Vec3 elbow = rest[kLeftElbow];
  const Mat3 R = Eigen::AngleAxisd(-kPi / 4, Vec3::UnitY()).toRotationMatrix();
  double worst = 0.0;
  int forearm = 0, untouched = 0;
  const auto& w = m.skin_weights;
  for (int v = 0; v < m.vertex_count(); ++v) {
    const Vec3 r = m.template_vertices.row(v).transpose();
    double w_below = 0.0;  // weight on the elbow and its subtree
    for (int k = w.row_begin[v]; k < w.row_begin[v + 1]; ++k) {
      const int j = w.joint[k];
      if (j == kLeftElbow || j == kLeftWrist) w_below += w.weight[k];
    }
    const Vec3 expect = (1.0 - w_below) * r + w_below * (R * (r - elbow) + elbow);
    worst = std::max(worst, (x.row(v).transpose() - expect).norm());
    if (w_below == 1.0) ++forearm;
    if (w_below == 0.0 && x.row(v) == m.template_vertices.row(v)) ++untouched;
  }
  CHECK(worst < 1e-12);
  CHECK(forearm > 50);
  CHECK(untouched > m.vertex_count() / 2);
}

TEST_CASE("jacobian structure: translation identity and kinematic independence") {
  const SkinnedModel& m = human();
  std::mt19937_64 rng(5);
  const Pose p = random_human_pose(rng, 0.8);
  const SampleSet samples = sample_surface(m, 200, 9);
  const Eigen::MatrixXd J = pose_jacobian(m, p, samples);
  REQUIRE(J.rows() == 600);
  REQUIRE(J.cols() == m.pose_dim());
  for (int i = 0; i < samples.size(); ++i) CHECK((J.block<3, 3>(3 * i, 0) - Mat3::Identity()).norm() < 1e-12);

  // A vertex fully bound to the left wrist does not move with the right knee.
  int found = 0;
  for (int v = 0; v < m.vertex_count() && found < 5; ++v) {
    const auto& w = m.skin_weights;
    if (w.row_begin[v + 1] - w.row_begin[v] != 1 || w.joint[w.row_begin[v]] != kLeftWrist) continue;
    SampleSet one;
    for (int f = 0; f < m.face_count(); ++f) {
      for (int c = 0; c < 3; ++c) {
        if (m.faces[f][c] == v && one.attachments.empty()) {
          Attachment a;
          a.face = f;
          a.bary = Vec3::Zero();
          a.bary(c) = 1.0;
          one.attachments.push_back(a);
        }
      }
    }
    const Eigen::MatrixXd Jv = pose_jacobian(m, p, one);
    CHECK(Jv.block<3, 3>(0, 3 + 3 * kRightKnee).norm() == 0.0);
    CHECK(Jv.block<3, 3>(0, 3 + 3 * kLeftHip).norm() == 0.0);
    CHECK(Jv.block<3, 3>(0, 3 + 3 * kLeftElbow).norm() > 0.0);
    ++found;
  }
  CHECK(found == 5);
}

TEST_CASE("analytic jacobian matches central differences") {
  const SkinnedModel& m = human();
  std::mt19937_64 rng(6);
  for (int draw = 0; draw < 10; ++draw) {
    const Pose p = random_human_pose(rng, 1.0);
    const SampleSet s = sample_surface(m, 8, 100 + draw);
    const Eigen::MatrixXd J = pose_jacobian(m, p, s);
    const Eigen::MatrixXd fd = oracle::central_difference(
        [&](const Eigen::VectorXd& th) { return stacked(evaluate_attachments(m, Pose{th}, s)); }, p.theta, 1e-6);
    CHECK((J - fd).norm() / fd.norm() < 1e-6);
  }
}

TEST_CASE("local linearity of the skinning map") {
  const SkinnedModel& m = human();
  std::mt19937_64 rng(7);
  const Pose p = random_human_pose(rng, 0.5);
  const SampleSet s = vertex_samples(m);
  const Eigen::MatrixXd J = pose_jacobian(m, p, s);
  const Eigen::VectorXd x0 = stacked(evaluate_attachments(m, p, s));
  Eigen::VectorXd dir(m.pose_dim());
  for (int k = 0; k < dir.size(); ++k) dir(k) = standard_normal(rng);
  dir.normalize();
  for (const double n : {1e-6, 1e-4, 1e-2}) {
    const Eigen::VectorXd d = n * dir;
    const Eigen::VectorXd disp = stacked(evaluate_attachments(m, Pose{p.theta + d}, s)) - x0;
    CHECK((disp - J * d).norm() / (J * d).norm() < 1e-1);
  }
}

TEST_CASE("capsule human is a closed genus-0 mesh with normalized weights") {
  const SkinnedModel& m = human();
  CHECK_FALSE(find_manifold_violation(m.faces, m.vertex_count()).has_value());
  CHECK(euler_characteristic(m.faces, m.vertex_count()) == 2);
  CHECK(connected_components(m.faces, m.vertex_count()) == 1);
  CHECK(signed_volume(m.template_vertices, m.faces) > 0.0);
  CHECK_NOTHROW(validate_model(m));
  for (int v = 0; v < m.vertex_count(); ++v) {
    double sum = 0.0;
    for (int k = m.skin_weights.row_begin[v]; k < m.skin_weights.row_begin[v + 1]; ++k)
      sum += m.skin_weights.weight[k];
    REQUIRE(std::abs(sum - 1.0) < 1e-9);
  }
  CHECK_FALSE(m.exclusion_faces.empty());
  CHECK(self_intersection_count(m, Pose::zero(m.joint_count())).count == 0);

  const SkinnedModel again = make_capsule_human();
  CHECK(again.template_vertices == m.template_vertices);
  CHECK(again.faces == m.faces);
}

TEST_CASE("model validation names the first violation") {
  SkinnedModel m = two_joint_chain();
  m.tree.parent[1] = 1;
  CHECK_THROWS_WITH_AS(validate_model(m), "joint 1: parent 1 must lie in [0, 1)", ValidationError);

  m = two_joint_chain();
  m.skin_weights.weight[0] = 0.9;
  CHECK_THROWS_AS(validate_model(m), ValidationError);

  m = two_joint_chain();
  m.faces.pop_back();
  CHECK_THROWS_AS(validate_model(m), ValidationError);

  m = two_joint_chain();
  m.exclusion_faces = {7};
  CHECK_THROWS_WITH_AS(validate_model(m), "exclusion face 7 out of range", ValidationError);

  Pose bad = Pose::zero(2);
  bad.theta(4) = std::nan("");
  CHECK_THROWS_AS(validate_pose(two_joint_chain(), bad), ValidationError);
}
