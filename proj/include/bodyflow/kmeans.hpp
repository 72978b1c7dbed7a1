#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace bodyflow {

struct KMeansResult {
  Eigen::MatrixXd centroids;  // K x D
  std::vector<int> assignment;
  double inertia = 0.0;
  int iterations = 0;
};

/// Lloyd's algorithm with k-means++ seeding on the rows of `data`. Empty
/// clusters are reseeded with the point farthest from its centroid.
KMeansResult kmeans(const Eigen::MatrixXd& data, int k, std::uint64_t seed, int max_iterations = 100);

}  // namespace bodyflow
