#pragma once

#include <limits>
#include <vector>

#include "bodyflow/body_model.hpp"

namespace bodyflow {

struct Aabb {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void extend(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void extend(const Aabb& b) {
    lo = lo.cwiseMin(b.lo);
    hi = hi.cwiseMax(b.hi);
  }
  bool overlaps(const Aabb& b) const {
    return (lo.array() <= b.hi.array()).all() && (b.lo.array() <= hi.array()).all();
  }
  /// Slab test against the ray origin + t * dir, t >= 0.
  bool hit_by_ray(const Vec3& origin, const Vec3& inv_dir) const;
};

/// Bounding-volume hierarchy over the triangles of a posed mesh. Built once,
/// immutable afterwards; queries are safe from multiple threads.
class TriangleBvh {
 public:
  TriangleBvh(const Points& vertices, const std::vector<Face>& faces);

  /// Calls visit(face) for every face whose bounding box the ray (t >= 0)
  /// passes through.
  template <typename Visit>
  void ray_candidates(const Vec3& origin, const Vec3& dir, Visit&& visit) const;

  template <typename Visit>
  void box_candidates(const Aabb& box, Visit&& visit) const;

  const Points& vertices() const { return vertices_; }
  const std::vector<Face>& faces() const { return faces_; }

 private:
  struct Node {
    Aabb box;
    int left = -1;   // child index, or -1 for leaves
    int right = -1;
    int begin = 0;   // leaf range in order_
    int end = 0;
  };

  int build(int begin, int end, std::vector<Vec3>& centroids, std::vector<Aabb>& boxes);

  Points vertices_;
  std::vector<Face> faces_;
  std::vector<Node> nodes_;
  std::vector<int> order_;
};

template <typename Visit>
void TriangleBvh::ray_candidates(const Vec3& origin, const Vec3& dir, Visit&& visit) const {
  const Vec3 inv_dir = dir.cwiseInverse();
  int stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (!node.box.hit_by_ray(origin, inv_dir)) continue;
    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i) visit(order_[i]);
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
}

template <typename Visit>
void TriangleBvh::box_candidates(const Aabb& box, Visit&& visit) const {
  int stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (!node.box.overlaps(box)) continue;
    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i) visit(order_[i]);
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
}

}  // namespace bodyflow
