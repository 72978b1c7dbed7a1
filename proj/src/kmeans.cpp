#include "bodyflow/kmeans.hpp"

#include <limits>
#include <random>

#include "bodyflow/error.hpp"
#include "bodyflow/rng.hpp"

namespace bodyflow {

namespace {

double assign(const Eigen::MatrixXd& data, const Eigen::MatrixXd& centroids, std::vector<int>& assignment,
              std::vector<double>& dist2) {
  double inertia = 0.0;
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
      const double d = (data.row(i) - centroids.row(c)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    assignment[i] = best;
    dist2[i] = best_d;
    inertia += best_d;
  }
  return inertia;
}

}  // namespace

KMeansResult kmeans(const Eigen::MatrixXd& data, int k, std::uint64_t seed, int max_iterations) {
  const Eigen::Index n = data.rows();
  if (k < 1) throw ValidationError("k must be at least 1");
  if (n < k) throw ValidationError("corpus too small: " + std::to_string(n) + " poses for K = " + std::to_string(k));

  std::mt19937_64 rng(seed);
  KMeansResult out;
  out.centroids.resize(k, data.cols());
  std::vector<double> dist2(n, std::numeric_limits<double>::infinity());
  std::vector<char> chosen(n, 0);

  // k-means++ seeding.
  auto pick = [&](Eigen::Index idx, int c) {
    out.centroids.row(c) = data.row(idx);
    chosen[idx] = 1;
    for (Eigen::Index i = 0; i < n; ++i) dist2[i] = std::min(dist2[i], (data.row(i) - data.row(idx)).squaredNorm());
  };
  pick(static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n)), 0);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) total += chosen[i] ? 0.0 : dist2[i];
    Eigen::Index idx = -1;
    if (total > 0.0) {
      double u = uniform01(rng) * total;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (chosen[i]) continue;
        idx = i;
        u -= dist2[i];
        if (u < 0.0) break;
      }
    } else {
      for (Eigen::Index i = 0; i < n && idx < 0; ++i) {
        if (!chosen[i]) idx = i;
      }
    }
    pick(idx, c);
  }

  out.assignment.assign(n, 0);
  out.inertia = assign(data, out.centroids, out.assignment, dist2);
  for (out.iterations = 0; out.iterations < max_iterations; ++out.iterations) {
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, data.cols());
    std::vector<int> counts(k, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(out.assignment[i]) += data.row(i);
      ++counts[out.assignment[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        out.centroids.row(c) = sums.row(c) / counts[c];
        continue;
      }
      Eigen::Index far = 0;
      for (Eigen::Index i = 1; i < n; ++i) {
        if (dist2[i] > dist2[far]) far = i;
      }
      out.centroids.row(c) = data.row(far);
      dist2[far] = 0.0;
    }
    const std::vector<int> previous = out.assignment;
    out.inertia = assign(data, out.centroids, out.assignment, dist2);
    if (out.assignment == previous) {
      ++out.iterations;
      break;
    }
  }
  return out;
}

}  // namespace bodyflow
