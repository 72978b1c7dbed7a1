#pragma once
// Independent reference implementations used only by the tests.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "bodyflow/body_model.hpp"

namespace oracle {

using bodyflow::Face;
using bodyflow::Points;
using V3 = Eigen::Vector3d;

/// Segment pq against triangle abc (Moller-Trumbore, closed segment).
inline bool segment_hits_triangle(const V3& p, const V3& q, const V3& a, const V3& b, const V3& c) {
  const V3 dir = q - p;
  const V3 e1 = b - a, e2 = c - a;
  const V3 h = dir.cross(e2);
  const double det = e1.dot(h);
  const double scale = e1.norm() * e2.norm() * dir.norm();
  if (std::abs(det) <= 1e-14 * scale) return false;  // parallel: coplanar contact ignored
  const double inv = 1.0 / det;
  const V3 s = p - a;
  const double u = inv * s.dot(h);
  if (u < 0.0 || u > 1.0) return false;
  const V3 qv = s.cross(e1);
  const double v = inv * dir.dot(qv);
  if (v < 0.0 || u + v > 1.0) return false;
  const double t = inv * e2.dot(qv);
  return t >= 0.0 && t <= 1.0;
}

/// Two non-coplanar triangles intersect iff an edge of one crosses the other.
inline bool triangles_intersect(const std::array<V3, 3>& t1, const std::array<V3, 3>& t2) {
  for (int k = 0; k < 3; ++k) {
    if (segment_hits_triangle(t1[k], t1[(k + 1) % 3], t2[0], t2[1], t2[2])) return true;
    if (segment_hits_triangle(t2[k], t2[(k + 1) % 3], t1[0], t1[1], t1[2])) return true;
  }
  return false;
}

/// Any pair of intersecting triangles, found with a uniform-grid broad
/// phase. Pairs closer than `ring_gap` edge hops (0: sharing a vertex)
/// are local-disk neighbours and are skipped.
inline bool mesh_self_intersects(const Points& verts, const std::vector<Face>& faces, double cell = 0.04,
                                 int* pairs_found = nullptr, int ring_gap = 1) {
  int vertex_count = 0;
  for (const Face& f : faces) vertex_count = std::max({vertex_count, f[0] + 1, f[1] + 1, f[2] + 1});
  std::vector<std::vector<int>> adj(vertex_count);
  for (const Face& f : faces) {
    for (int k = 0; k < 3; ++k) {
      adj[f[k]].push_back(f[(k + 1) % 3]);
      adj[f[(k + 1) % 3]].push_back(f[k]);
    }
  }
  // Vertices within ring_gap hops of each face.
  auto near_set = [&](const Face& f) {
    std::vector<int> out(f.begin(), f.end());
    std::size_t begin = 0;
    for (int hop = 0; hop < ring_gap; ++hop) {
      const std::size_t end = out.size();
      for (std::size_t i = begin; i < end; ++i) {
        for (const int w : adj[out[i]]) {
          if (std::find(out.begin(), out.end(), w) == out.end()) out.push_back(w);
        }
      }
      begin = end;
    }
    return out;
  };
  std::map<std::tuple<int, int, int>, std::vector<int>> grid;
  auto key = [&](double x, double y, double z) {
    return std::make_tuple(static_cast<int>(std::floor(x / cell)), static_cast<int>(std::floor(y / cell)),
                           static_cast<int>(std::floor(z / cell)));
  };
  std::vector<std::array<V3, 3>> tris(faces.size());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    for (int k = 0; k < 3; ++k) tris[f][k] = verts.row(faces[f][k]).transpose();
    V3 lo = tris[f][0].cwiseMin(tris[f][1]).cwiseMin(tris[f][2]);
    V3 hi = tris[f][0].cwiseMax(tris[f][1]).cwiseMax(tris[f][2]);
    const auto [x0, y0, z0] = key(lo.x(), lo.y(), lo.z());
    const auto [x1, y1, z1] = key(hi.x(), hi.y(), hi.z());
    for (int x = x0; x <= x1; ++x)
      for (int y = y0; y <= y1; ++y)
        for (int z = z0; z <= z1; ++z) grid[{x, y, z}].push_back(static_cast<int>(f));
  }
  int found = 0;
  for (const auto& [k, list] : grid) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      for (std::size_t j = i + 1; j < list.size(); ++j) {
        const int a = std::min(list[i], list[j]), b = std::max(list[i], list[j]);
        const Face& fa = faces[a];
        const Face& fb = faces[b];
        if (!triangles_intersect(tris[a], tris[b])) continue;
        const std::vector<int> near = near_set(fa);
        bool local = false;
        for (int v = 0; v < 3; ++v) local |= std::find(near.begin(), near.end(), fb[v]) != near.end();
        if (!local) {
          ++found;
          if (!pairs_found) return true;
        }
      }
    }
  }
  if (pairs_found) *pairs_found = found;
  return found > 0;
}

/// Normal-equations solve (J^T J + lambda I)^{-1} J^T f via Cholesky.
inline Eigen::VectorXd normal_equations(const Eigen::MatrixXd& J, const Eigen::VectorXd& f, double lambda) {
  Eigen::MatrixXd A = J.transpose() * J;
  A.diagonal().array() += lambda;
  return A.llt().solve(J.transpose() * f);
}

/// Horn's quaternion method for the rotation, plus the closed-form scale.
inline Points similarity_align(const Points& src, const Points& dst) {
  const Eigen::RowVector3d ms = src.colwise().mean(), md = dst.colwise().mean();
  const Eigen::MatrixXd a = src.rowwise() - ms, b = dst.rowwise() - md;
  const Eigen::Matrix3d M = a.transpose() * b;
  const double sxx = M(0, 0), sxy = M(0, 1), sxz = M(0, 2), syx = M(1, 0), syy = M(1, 1), syz = M(1, 2),
               szx = M(2, 0), szy = M(2, 1), szz = M(2, 2);
  Eigen::Matrix4d N;
  N << sxx + syy + szz, syz - szy, szx - sxz, sxy - syx,  //
      syz - szy, sxx - syy - szz, sxy + syx, szx + sxz,   //
      szx - sxz, sxy + syx, -sxx + syy - szz, syz + szy,  //
      sxy - syx, szx + sxz, syz + szy, -sxx - syy + szz;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(N);
  const Eigen::Vector4d q = es.eigenvectors().col(3);
  const Eigen::Quaterniond quat(q(0), q(1), q(2), q(3));
  const Eigen::Matrix3d R = quat.normalized().toRotationMatrix();
  const Eigen::MatrixXd ra = a * R.transpose();
  const double s = (ra.array() * b.array()).sum() / a.squaredNorm();
  Points out = (s * ra).rowwise() + md;
  return out;
}

}  // namespace oracle

namespace oracle {

/// Central finite difference of the attachment positions, 3S x d.
template <typename PositionsFn>
Eigen::MatrixXd central_difference(PositionsFn&& positions, const Eigen::VectorXd& theta, double h) {
  const Eigen::VectorXd x0 = positions(theta);
  Eigen::MatrixXd out(x0.size(), theta.size());
  for (int k = 0; k < theta.size(); ++k) {
    Eigen::VectorXd plus = theta, minus = theta;
    plus(k) += h;
    minus(k) -= h;
    out.col(k) = (positions(plus) - positions(minus)) / (2.0 * h);
  }
  return out;
}

}  // namespace oracle
