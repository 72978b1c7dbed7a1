#include "bodyflow/mesh.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

namespace bodyflow {

namespace {

std::uint64_t edge_key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

}  // namespace

std::optional<std::string> find_manifold_violation(const std::vector<Face>& faces, int vertex_count) {
  (void)vertex_count;
  // Each directed edge must appear exactly once and its reverse exactly once.
  std::unordered_map<std::uint64_t, int> directed;
  directed.reserve(faces.size() * 3);
  for (std::size_t f = 0; f < faces.size(); ++f) {
    for (int k = 0; k < 3; ++k) {
      const int a = faces[f][k];
      const int b = faces[f][(k + 1) % 3];
      if (!directed.emplace(edge_key(a, b), static_cast<int>(f)).second) {
        return "face " + std::to_string(f) + ": edge (" + std::to_string(a) + ", " + std::to_string(b) +
               ") is shared by more than two faces or inconsistently oriented";
      }
    }
  }
  for (std::size_t f = 0; f < faces.size(); ++f) {
    for (int k = 0; k < 3; ++k) {
      const int a = faces[f][k];
      const int b = faces[f][(k + 1) % 3];
      if (!directed.contains(edge_key(b, a))) {
        return "face " + std::to_string(f) + ": edge (" + std::to_string(a) + ", " + std::to_string(b) +
               ") is a boundary edge";
      }
    }
  }
  return std::nullopt;
}

int euler_characteristic(const std::vector<Face>& faces, int vertex_count) {
  std::unordered_map<std::uint64_t, int> edges;
  for (const Face& f : faces) {
    for (int k = 0; k < 3; ++k) {
      const int a = std::min(f[k], f[(k + 1) % 3]);
      const int b = std::max(f[k], f[(k + 1) % 3]);
      edges.emplace(edge_key(a, b), 0);
    }
  }
  return vertex_count - static_cast<int>(edges.size()) + static_cast<int>(faces.size());
}

int connected_components(const std::vector<Face>& faces, int vertex_count) {
  std::vector<int> parent(vertex_count);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<char> used(vertex_count, 0);
  for (const Face& f : faces) {
    for (int k = 0; k < 3; ++k) used[f[k]] = 1;
    parent[find(f[1])] = find(f[0]);
    parent[find(f[2])] = find(f[0]);
  }
  int count = 0;
  for (int v = 0; v < vertex_count; ++v) count += used[v] && find(v) == v;
  return count;
}

std::vector<double> face_areas(const Points& vertices, const std::vector<Face>& faces) {
  std::vector<double> areas(faces.size());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Vec3 a = vertices.row(faces[f][0]);
    const Vec3 b = vertices.row(faces[f][1]);
    const Vec3 c = vertices.row(faces[f][2]);
    areas[f] = 0.5 * (b - a).cross(c - a).norm();
  }
  return areas;
}

Points vertex_normals(const Points& vertices, const std::vector<Face>& faces) {
  Points normals = Points::Zero(vertices.rows(), 3);
  for (const Face& f : faces) {
    const Vec3 a = vertices.row(f[0]);
    const Vec3 b = vertices.row(f[1]);
    const Vec3 c = vertices.row(f[2]);
    const Vec3 n = (b - a).cross(c - a);
    for (int k = 0; k < 3; ++k) normals.row(f[k]) += n.transpose();
  }
  for (Eigen::Index v = 0; v < normals.rows(); ++v) {
    const double len = normals.row(v).norm();
    if (len > 0.0) normals.row(v) /= len;
  }
  return normals;
}

double signed_volume(const Points& vertices, const std::vector<Face>& faces) {
  double six_v = 0.0;
  for (const Face& f : faces) {
    const Vec3 a = vertices.row(f[0]);
    const Vec3 b = vertices.row(f[1]);
    const Vec3 c = vertices.row(f[2]);
    six_v += a.dot(b.cross(c));
  }
  return six_v / 6.0;
}

std::vector<std::vector<int>> vertex_faces(const std::vector<Face>& faces, int vertex_count) {
  std::vector<std::vector<int>> out(vertex_count);
  for (std::size_t f = 0; f < faces.size(); ++f) {
    for (int k = 0; k < 3; ++k) out[faces[f][k]].push_back(static_cast<int>(f));
  }
  return out;
}

}  // namespace bodyflow
