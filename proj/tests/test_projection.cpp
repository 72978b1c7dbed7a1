#include <cmath>
#include <map>
#include <random>
#include <set>

#include <doctest.h>

#include "bodyflow/capsule_human.hpp"
#include "bodyflow/error.hpp"
#include "bodyflow/mesh.hpp"
#include "bodyflow/rng.hpp"
#include "bodyflow/surface_sampling.hpp"
#include "bodyflow/velocity_projection.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace bodyflow;
using fixtures::human;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, std::mt19937_64& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = standard_normal(rng);
  return m;
}

Eigen::VectorXd random_vector(int n, std::mt19937_64& rng) { return random_matrix(n, 1, rng).col(0); }

ProjectionConfig svd(double lambda) { return {lambda, LeastSquaresSolver::SVD, 1e-12}; }

/// Flat mesh of `areas.size()` disjoint right triangles with the given areas,
/// closed off by a matching downward copy so the model validates.
SkinnedModel triangle_strip(const std::vector<double>& areas) {
  SkinnedModel m;
  m.tree.parent = {-1};
  m.tree.rest_offset = {Vec3::Zero()};
  const int n = static_cast<int>(areas.size());
  m.template_vertices.resize(4 * n, 3);
  for (int i = 0; i < n; ++i) {
    const double s = std::sqrt(2.0 * areas[i]);
    const double x = 10.0 * i;
    m.template_vertices.row(4 * i + 0) << x, 0, 0;
    m.template_vertices.row(4 * i + 1) << x + s, 0, 0;
    m.template_vertices.row(4 * i + 2) << x, s, 0;
    m.template_vertices.row(4 * i + 3) << x, 0, s;
  }
  // Tetrahedron per triangle; face 4i is the sampled triangle, the rest are excluded.
  for (int i = 0; i < n; ++i) {
    const int a = 4 * i, b = a + 1, c = a + 2, d = a + 3;
    m.faces.push_back({a, c, b});
    m.faces.push_back({a, b, d});
    m.faces.push_back({b, c, d});
    m.faces.push_back({a, d, c});
  }
  for (int f = 0; f < 4 * n; ++f)
    if (f % 4 != 0) m.exclusion_faces.push_back(f);
  for (int v = 0; v < 4 * n; ++v) {
    const std::pair<int, double> row[] = {{0, 1.0}};
    m.skin_weights.append_row(row);
  }
  return m;
}

std::vector<int> face_histogram(const SampleSet& s, int faces) {
  std::vector<int> h(faces, 0);
  for (const auto& a : s.attachments) ++h[a.face];
  return h;
}

}  // namespace

TEST_CASE("projection recovers consistent systems exactly") {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd J = random_matrix(300, 51, rng);
  const Eigen::VectorXd v = random_vector(51, rng);
  for (const ProjectionConfig cfg : {exact_projection(), svd(0.0)}) {
    const Eigen::VectorXd got = project_velocity(J, J * v, cfg).dtheta;
    CHECK((got - v).norm() / v.norm() < 1e-10);
    CHECK(project_velocity(J, Eigen::VectorXd::Zero(300), cfg).dtheta.norm() == 0.0);
  }
  CHECK(project_velocity(J, Eigen::VectorXd::Zero(300), svd(1e-3)).dtheta.norm() == 0.0);
}

TEST_CASE("projection matches the normal equations on a 3000 x 51 system") {
  std::mt19937_64 rng(2);
  const Eigen::MatrixXd J = random_matrix(3000, 51, rng);
  const Eigen::VectorXd f = random_vector(3000, rng);
  for (const double lambda : {0.0, 1e-8, 1e-2, 10.0}) {
    const ProjectionConfig cfg = lambda == 0.0 ? exact_projection() : svd(lambda);
    const Eigen::VectorXd got = project_velocity(J, f, cfg).dtheta;
    const Eigen::VectorXd ref = oracle::normal_equations(J, f, lambda);
    CHECK((got - ref).norm() / ref.norm() < 1e-8);
  }
}

TEST_CASE("projection is scale equivariant and continuous in the damping") {
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd J = random_matrix(120, 51, rng);
  const Eigen::VectorXd f = random_vector(120, rng);
  const Eigen::VectorXd base = project_velocity(J, f, exact_projection()).dtheta;
  for (const double c : {-3.0, 0.5, 1e3}) {
    const Eigen::VectorXd scaled = project_velocity(J, c * f, exact_projection()).dtheta;
    CHECK((scaled - c * base).norm() <= 1e-12 * std::abs(c) * base.norm() * 10.0);
  }
  const Eigen::VectorXd damped = project_velocity(J, f, svd(1e-12)).dtheta;
  CHECK((damped - base).norm() < 1e-6);
}

TEST_CASE("rank deficiency is reported without damping and tolerated with it") {
  std::mt19937_64 rng(4);
  Eigen::MatrixXd J = random_matrix(60, 10, rng);
  J.col(9) = J.col(3);
  const Eigen::VectorXd f = random_vector(60, rng);
  CHECK_THROWS_WITH_AS(project_velocity(J, f, exact_projection()), "singular Jacobian; enable damping",
                       NumericalError);
  CHECK_THROWS_AS(project_velocity(J, f, svd(0.0)), NumericalError);
  const ProjectionResult r = project_velocity_ex(J, f, svd(1e-8));
  CHECK(r.delta.dtheta.allFinite());
  CHECK(r.min_singular < 1e-10 * r.max_singular);
  CHECK_THROWS_AS(project_velocity(J, Eigen::VectorXd::Zero(59), exact_projection()), ValidationError);
  CHECK_THROWS_AS(project_velocity(J, f, svd(-1.0)), ValidationError);
}

TEST_CASE("sampling is deterministic and avoids excluded faces") {
  const SkinnedModel& m = human();
  const SampleSet a = sample_surface(m, 1000, 42);
  const SampleSet b = sample_surface(m, 1000, 42);
  REQUIRE(a.size() == 1000);
  bool same = true;
  for (int i = 0; i < 1000; ++i)
    same &= a.attachments[i].face == b.attachments[i].face && a.attachments[i].bary == b.attachments[i].bary;
  CHECK(same);
  for (const auto& att : a.attachments) {
    REQUIRE_FALSE(m.is_excluded(att.face));
    CHECK(att.bary.minCoeff() >= 0.0);
    CHECK(std::abs(att.bary.sum() - 1.0) < 1e-12);
  }
  // Prefix property of the counter-based stream.
  const SampleSet prefix = sample_surface(m, 10, 42);
  for (int i = 0; i < 10; ++i) CHECK(prefix.attachments[i].face == a.attachments[i].face);
  CHECK(sample_surface(m, 1000, 43).attachments[0].bary != a.attachments[0].bary);
}

TEST_CASE("face counts follow area within binomial bounds") {
  const SkinnedModel m = triangle_strip({1.0, 3.0});
  const int S = 40000;
  const auto h = face_histogram(sample_surface(m, S, 7), m.face_count());
  const double p = 0.25;
  const double sigma = std::sqrt(S * p * (1 - p));
  CHECK(std::abs(h[0] - S * p) < 3.0 * sigma);
  CHECK(h[0] + h[4] == S);
}

TEST_CASE("chi-square test of the area-weighted face distribution") {
  std::vector<double> areas;
  for (int i = 0; i < 10; ++i) areas.push_back(0.5 + 0.37 * i);
  const SkinnedModel m = triangle_strip(areas);
  const int S = 100000;
  const auto h = face_histogram(sample_surface(m, S, 11), m.face_count());
  double total = 0.0;
  for (const double a : areas) total += a;
  double chi2 = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double expect = S * areas[i] / total;
    chi2 += (h[4 * i] - expect) * (h[4 * i] - expect) / expect;
  }
  // 99th percentile of chi-square with 9 degrees of freedom.
  CHECK(chi2 < 21.666);
}

TEST_CASE("sampling rejects empty domains and bad counts") {
  SkinnedModel m = triangle_strip({1.0});
  m.exclusion_faces = {0, 1, 2, 3};
  CHECK_THROWS_WITH_AS(sample_surface(m, 10, 0), "empty sampling domain", ValidationError);
  CHECK_THROWS_AS(sample_surface(human(), 0, 0), ValidationError);
}

TEST_CASE("attachments interpolate skinned vertices") {
  const SkinnedModel& m = human();
  std::mt19937_64 rng(5);
  const Pose p = random_human_pose(rng, 0.8);
  const SampleSet s = sample_surface(m, 300, 3);
  const Points x = skin_vertices(m, p).points;
  const Points ax = evaluate_attachments(m, p, s).points;
  for (int i = 0; i < s.size(); ++i) {
    const Attachment& a = s.attachments[i];
    Vec3 ref = Vec3::Zero();
    for (int c = 0; c < 3; ++c) ref += a.bary[c] * x.row(m.faces[a.face][c]).transpose();
    CHECK((ax.row(i).transpose() - ref).norm() < 1e-14);
  }
  const Points vx = evaluate_attachments(m, p, vertex_samples(m)).points;
  CHECK(vx == x);

  // Rigid root motion commutes with evaluation.
  Pose moved = p;
  const Mat3 R = axis_angle_to_matrix(Vec3(0.2, 0.9, -0.4));
  moved.set_rotation(0, matrix_to_axis_angle(R * axis_angle_to_matrix(p.rotation(0))));
  moved.set_translation(p.translation() + Vec3(1, 2, 3));
  const Points mx = evaluate_attachments(m, moved, s).points;
  const Vec3 c0 = m.tree.rest_offset[0] + p.translation();
  for (int i = 0; i < s.size(); ++i) {
    const Vec3 expect = R * (ax.row(i).transpose() - c0) + c0 + Vec3(1, 2, 3);
    CHECK((mx.row(i).transpose() - expect).norm() < 1e-12);
  }
}

TEST_CASE("region selection against a brute-force distance check") {
  const SkinnedModel& m = human();
  const Pose rest = Pose::zero(m.joint_count());
  const SampleSet s = sample_surface(m, 1000, 1);
  const Points x = evaluate_attachments(m, rest, s).points;

  const RegionMask all = select_region(m, s, Vec3(0, 1, 0), 10.0, rest);
  CHECK(all.members.size() == 1000u);

  const Vec3 hand = m.rest_joint_positions()[kLeftWrist] + Vec3(0.06, 0, 0);
  const RegionMask r = select_region(m, s, hand, 0.05, rest);
  std::set<int> expect;
  for (int i = 0; i < s.size(); ++i)
    if ((x.row(i).transpose() - hand).norm() <= 0.05) expect.insert(i);
  CHECK(std::set<int>(r.members.begin(), r.members.end()) == expect);
  REQUIRE_FALSE(r.members.empty());
  for (const int i : r.members) {
    const int v = m.faces[s.attachments[i].face][0];
    const int j = m.dominant_joint(v);
    CHECK((j == kLeftWrist || j == kLeftElbow));
  }
  CHECK_THROWS_WITH_AS(select_region(m, s, Vec3(5, 5, 5), 1e-4, rest), "empty source region", ValidationError);
}

TEST_CASE("relative error is tiny in the linear regime and grows with the step") {
  const SkinnedModel& m = human();
  std::mt19937_64 rng(8);
  const Pose p = random_human_pose(rng, 0.5);
  const SampleSet all = vertex_samples(m);
  const double small = relative_error(m, p, random_delta(m.pose_dim(), 1e-6, 1), all);
  const double mid = relative_error(m, p, random_delta(m.pose_dim(), 1e-2, 1), all);
  const double big = relative_error(m, p, random_delta(m.pose_dim(), 1e-1, 1), all);
  CHECK(small < 1e-3);
  CHECK(mid < 1.5e-1);
  CHECK(big > mid);
  CHECK(random_delta(m.pose_dim(), 0.3, 5).dtheta.norm() == doctest::Approx(0.3).epsilon(1e-14));
  CHECK_THROWS_AS(relative_error(m, p, PoseDelta{Eigen::VectorXd::Zero(m.pose_dim())}, all), ValidationError);
}
