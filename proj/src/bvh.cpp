#include "bodyflow/bvh.hpp"

#include <algorithm>
#include <numeric>

namespace bodyflow {

bool Aabb::hit_by_ray(const Vec3& origin, const Vec3& inv_dir) const {
  double t_enter = 0.0;
  double t_exit = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    double t0 = (lo[a] - origin[a]) * inv_dir[a];
    double t1 = (hi[a] - origin[a]) * inv_dir[a];
    if (t0 > t1) std::swap(t0, t1);
    t_enter = std::max(t_enter, t0);
    t_exit = std::min(t_exit, t1);
    if (t_enter > t_exit) return false;
  }
  return true;
}

TriangleBvh::TriangleBvh(const Points& vertices, const std::vector<Face>& faces)
    : vertices_(vertices), faces_(faces), order_(faces.size()) {
  std::iota(order_.begin(), order_.end(), 0);
  std::vector<Vec3> centroids(faces.size());
  std::vector<Aabb> boxes(faces.size());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    for (int k = 0; k < 3; ++k) boxes[f].extend(Vec3(vertices.row(faces[f][k])));
    centroids[f] = 0.5 * (boxes[f].lo + boxes[f].hi);
  }
  nodes_.reserve(2 * faces.size() / 4 + 1);
  if (!faces.empty()) build(0, static_cast<int>(faces.size()), centroids, boxes);
}

int TriangleBvh::build(int begin, int end, std::vector<Vec3>& centroids, std::vector<Aabb>& boxes) {
  const int index = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  Aabb box;
  Aabb centroid_box;
  for (int i = begin; i < end; ++i) {
    box.extend(boxes[order_[i]]);
    centroid_box.extend(centroids[order_[i]]);
  }
  nodes_[index].box = box;
  if (end - begin <= 4) {
    nodes_[index].begin = begin;
    nodes_[index].end = end;
    return index;
  }
  int axis = 0;
  (centroid_box.hi - centroid_box.lo).maxCoeff(&axis);
  const int mid = (begin + end) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) { return centroids[a][axis] < centroids[b][axis]; });
  const int left = build(begin, mid, centroids, boxes);
  const int right = build(mid, end, centroids, boxes);
  nodes_[index].left = left;
  nodes_[index].right = right;
  return index;
}

}  // namespace bodyflow
