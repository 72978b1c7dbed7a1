#pragma once

#include <map>
#include <vector>

#include "bodyflow/body_model.hpp"
#include "bodyflow/bvh.hpp"

namespace bodyflow {

/// Generalized winding number by direct signed solid-angle summation
/// (Van Oosterom-Strackee, atan2 form). O(F) per query.
double solid_angle_winding(const Points& vertices, const std::vector<Face>& faces, const Vec3& query);

/// BVH-accelerated winding number of a closed mesh. For closed meshes the
/// generalized winding number equals the signed count of surface crossings
/// along any ray, so each query is a single ray cast. Rays grazing an edge or
/// starting on the surface are retried in another direction; if every
/// direction is ambiguous the solid-angle sum is used.
class WindingNumber {
 public:
  WindingNumber(const Points& vertices, const std::vector<Face>& faces);

  double operator()(const Vec3& query) const;

  const TriangleBvh& bvh() const { return bvh_; }

 private:
  /// Signed crossings, or false if the ray was ambiguous.
  bool crossings(const Vec3& origin, const Vec3& dir, int& count) const;

  TriangleBvh bvh_;
  std::vector<Vec3> unit_normals_;
};

struct CollisionConfig {
  /// Vertices are probed this far along the outward and inward normal.
  double probe_offset = 1e-4;
};

struct CollisionReport {
  std::vector<int> penetrating_vertices;
  int count = 0;
  /// dominant skinning joint -> number of penetrating vertices
  std::map<int, int> per_part_counts;
};

/// A vertex penetrates the body when the point just outside it is still
/// enclosed by the rest of the mesh, and the point just inside it is enclosed
/// one layer deeper: min(w(v + d n), w(v - d n) - 1) >= 1. On an embedded
/// closed surface every vertex scores 0 (or -1 when a probe crosses a thin
/// fold), so the classification never depends on the ambient 1/2 of an
/// on-surface winding evaluation.
int vertex_penetration_score(const WindingNumber& winding, const Vec3& vertex, const Vec3& normal,
                             double offset);

CollisionReport self_intersections(const SkinnedModel& model, const Points& posed,
                                   const CollisionConfig& config = {});
CollisionReport self_intersection_count(const SkinnedModel& model, const Pose& pose,
                                        const CollisionConfig& config = {});
/// Same test with an early exit at the first penetrating vertex.
bool has_self_intersection(const SkinnedModel& model, const Pose& pose, const CollisionConfig& config = {});

/// Percentage of frames with more than `threshold` penetrating vertices.
double col_rate(const std::vector<Pose>& sequence, const SkinnedModel& model, int threshold,
                const CollisionConfig& config = {});
/// Same, from precomputed per-frame counts.
double col_rate_from_counts(const std::vector<int>& counts, int threshold);

}  // namespace bodyflow
