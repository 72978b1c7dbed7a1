#include "bodyflow/collision.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "bodyflow/error.hpp"
#include "bodyflow/mesh.hpp"

namespace bodyflow {

double solid_angle_winding(const Points& vertices, const std::vector<Face>& faces, const Vec3& query) {
  double total = 0.0;
  for (const Face& f : faces) {
    const Vec3 a = Vec3(vertices.row(f[0])) - query;
    const Vec3 b = Vec3(vertices.row(f[1])) - query;
    const Vec3 c = Vec3(vertices.row(f[2])) - query;
    const double la = a.norm();
    const double lb = b.norm();
    const double lc = c.norm();
    const double num = a.dot(b.cross(c));
    const double den = la * lb * lc + a.dot(b) * lc + a.dot(c) * lb + b.dot(c) * la;
    total += 2.0 * std::atan2(num, den);
  }
  return total / (4.0 * std::numbers::pi);
}

namespace {

// Irrational-ish directions, mostly along z where the body is thinnest.
const std::array<Vec3, 6>& probe_directions() {
  static const std::array<Vec3, 6> dirs = [] {
    std::array<Vec3, 6> d{Vec3(0.0123, 0.0371, 1.0),  Vec3(-0.0417, 0.0219, -1.0), Vec3(0.3117, -0.1931, 0.9),
                          Vec3(1.0, 0.0293, -0.0611), Vec3(-0.2213, 1.0, 0.1377),   Vec3(0.5773, 0.5121, -0.6353)};
    for (auto& v : d) v.normalize();
    return d;
  }();
  return dirs;
}

}  // namespace

WindingNumber::WindingNumber(const Points& vertices, const std::vector<Face>& faces) : bvh_(vertices, faces) {
  unit_normals_.resize(faces.size());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Vec3 a = vertices.row(faces[f][0]);
    const Vec3 b = vertices.row(faces[f][1]);
    const Vec3 c = vertices.row(faces[f][2]);
    unit_normals_[f] = (b - a).cross(c - a);
  }
}

bool WindingNumber::crossings(const Vec3& origin, const Vec3& dir, int& count) const {
  constexpr double kEdgeEps = 1e-10;
  bool ambiguous = false;
  count = 0;
  const Points& V = bvh_.vertices();
  const auto& F = bvh_.faces();
  bvh_.ray_candidates(origin, dir, [&](int f) {
    if (ambiguous) return;
    // Moller-Trumbore with scale-free tolerances.
    const Vec3 a = V.row(F[f][0]);
    const Vec3 e1 = Vec3(V.row(F[f][1])) - a;
    const Vec3 e2 = Vec3(V.row(F[f][2])) - a;
    const Vec3 p = dir.cross(e2);
    const double det = e1.dot(p);
    const double scale = e1.norm() * e2.norm();
    if (scale == 0.0) return;  // zero-length edge: the neighbors cover it
    if (std::abs(det) <= 1e-12 * scale) {
      // Ray parallel to the face plane; only matters if it lies in it.
      if (std::abs((origin - a).dot(unit_normals_[f])) <= 1e-12 * scale) ambiguous = true;
      return;
    }
    const double inv = 1.0 / det;
    const Vec3 s = origin - a;
    const double u = s.dot(p) * inv;
    const Vec3 q = s.cross(e1);
    const double v = dir.dot(q) * inv;
    const double w = 1.0 - u - v;
    if (u < -kEdgeEps || v < -kEdgeEps || w < -kEdgeEps) return;
    const double t = e2.dot(q) * inv;
    const double reach = std::sqrt(scale);
    if (t < -kEdgeEps * reach) return;
    if (u <= kEdgeEps || v <= kEdgeEps || w <= kEdgeEps || t <= kEdgeEps * reach) {
      ambiguous = true;
      return;
    }
    count += det > 0.0 ? -1 : 1;
  });
  return !ambiguous;
}

double WindingNumber::operator()(const Vec3& query) const {
  for (const Vec3& dir : probe_directions()) {
    int count = 0;
    if (crossings(query, dir, count)) return count;
  }
  return solid_angle_winding(bvh_.vertices(), bvh_.faces(), query);
}

int vertex_penetration_score(const WindingNumber& winding, const Vec3& vertex, const Vec3& normal,
                             double offset) {
  const int outside = static_cast<int>(std::lround(winding(vertex + offset * normal)));
  if (outside < 1) return outside;
  const int inside = static_cast<int>(std::lround(winding(vertex - offset * normal)));
  return std::min(outside, inside - 1);
}

namespace {

template <typename OnHit>
void scan_vertices(const SkinnedModel& model, const Points& posed, const CollisionConfig& config, OnHit&& on_hit) {
  if (posed.rows() != model.vertex_count()) throw ValidationError("posed vertex count does not match model");
  const WindingNumber winding(posed, model.faces);
  const Points normals = vertex_normals(posed, model.faces);
  for (int v = 0; v < model.vertex_count(); ++v) {
    const Vec3 n = normals.row(v);
    if (vertex_penetration_score(winding, posed.row(v), n, config.probe_offset) >= 1) {
      if (!on_hit(v)) return;
    }
  }
}

}  // namespace

CollisionReport self_intersections(const SkinnedModel& model, const Points& posed, const CollisionConfig& config) {
  CollisionReport report;
  scan_vertices(model, posed, config, [&](int v) {
    report.penetrating_vertices.push_back(v);
    ++report.per_part_counts[model.dominant_joint(v)];
    return true;
  });
  report.count = static_cast<int>(report.penetrating_vertices.size());
  return report;
}

CollisionReport self_intersection_count(const SkinnedModel& model, const Pose& pose, const CollisionConfig& config) {
  return self_intersections(model, skin_vertices(model, pose).points, config);
}

bool has_self_intersection(const SkinnedModel& model, const Pose& pose, const CollisionConfig& config) {
  bool hit = false;
  scan_vertices(model, skin_vertices(model, pose).points, config, [&](int) {
    hit = true;
    return false;
  });
  return hit;
}

double col_rate_from_counts(const std::vector<int>& counts, int threshold) {
  if (counts.empty()) throw ValidationError("col_rate needs a non-empty sequence");
  int over = 0;
  for (const int c : counts) over += c > threshold;
  return 100.0 * over / static_cast<double>(counts.size());
}

double col_rate(const std::vector<Pose>& sequence, const SkinnedModel& model, int threshold,
                const CollisionConfig& config) {
  std::vector<int> counts;
  counts.reserve(sequence.size());
  for (const Pose& pose : sequence) counts.push_back(self_intersection_count(model, pose, config).count);
  return col_rate_from_counts(counts, threshold);
}

}  // namespace bodyflow
