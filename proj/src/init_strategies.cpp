#include "bodyflow/init_strategies.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <set>

#include "bodyflow/kmeans.hpp"
#include "bodyflow/rng.hpp"

namespace bodyflow {

std::optional<Pose> successive_frame_init(const std::optional<Pose>& prev_corrected, const SkinnedModel& model) {
  if (!prev_corrected) return std::nullopt;
  const CollisionReport report = self_intersection_count(model, *prev_corrected);
  if (report.count > 0) {
    std::cerr << "warning: previous corrected frame self-intersects (" << report.count
              << " vertices); skipping successive-frame init\n";
    return std::nullopt;
  }
  return prev_corrected;
}

std::vector<int> jitter_joints(const SkinnedModel& model, const CollisionReport& report) {
  const auto& parent = model.tree.parent;
  const int J = model.joint_count();
  std::vector<int> children(J, 0);
  for (int j = 1; j < J; ++j) ++children[parent[j]];
  auto branching = [&](int j) { return parent[j] < 0 || children[j] > 1; };

  std::set<int> chain_tops;
  std::set<int> trunk;
  for (const auto& [joint, count] : report.per_part_counts) {
    if (count <= 0) continue;
    if (branching(joint)) {
      trunk.insert(joint);
      continue;
    }
    int top = joint;
    while (!branching(parent[top])) top = parent[top];
    chain_tops.insert(top);
  }
  std::vector<int> out;
  if (chain_tops.empty()) return {trunk.begin(), trunk.end()};
  for (int j = 0; j < J; ++j) {
    for (int a = j; a >= 0 && !branching(a); a = parent[a]) {
      if (chain_tops.count(a)) {
        out.push_back(j);
        break;
      }
    }
  }
  return out;
}

JitterResult jitter_init(const SkinnedModel& model, const Pose& estimate, std::mt19937_64& rng, double sigma,
                         int max_tries) {
  if (!(sigma > 0.0)) throw ValidationError("jitter sigma must be positive");
  if (max_tries < 1) throw ValidationError("jitter max_tries must be at least 1");
  validate_pose(model, estimate);
  const CollisionReport report = self_intersection_count(model, estimate);
  JitterResult out{estimate, 0, {}};
  if (report.count == 0) return out;
  out.joints = jitter_joints(model, report);
  const int period = (max_tries + 3) / 4;
  for (int attempt = 0; attempt < max_tries; ++attempt) {
    const double width = sigma * std::min(8.0, std::ldexp(1.0, attempt / period));
    Pose trial = estimate;
    for (const int j : out.joints) {
      Vec3 r = trial.rotation(j);
      for (int k = 0; k < 3; ++k) r[k] += uniform(rng, -width, width);
      trial.set_rotation(j, r);
    }
    out.tries = attempt + 1;
    if (!has_self_intersection(model, trial)) {
      out.pose = trial;
      return out;
    }
  }
  throw StrategyFailed("jitter failed after " + std::to_string(max_tries) + " tries");
}

double keypoint_distance(const Points& a, const Points& b) {
  const Points ra = a.rowwise() - a.row(0);
  const Points rb = b.rowwise() - b.row(0);
  return (ra - rb).rowwise().norm().mean();
}

KeyposeDictionary build_keypose_dict(const std::vector<Pose>& corpus, int k, const SkinnedModel& model,
                                     std::uint64_t seed, int max_iterations) {
  std::vector<Pose> valid;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    validate_pose(model, corpus[i]);
    if (has_self_intersection(model, corpus[i])) {
      std::cerr << "warning: corpus pose " << i << " self-intersects; dropped\n";
      continue;
    }
    valid.push_back(corpus[i]);
  }
  if (k < 1) throw ValidationError("K must be at least 1");
  if (static_cast<int>(valid.size()) < k)
    throw ValidationError("corpus too small: " + std::to_string(valid.size()) + " valid poses for K = " +
                          std::to_string(k));

  const int J = model.joint_count();
  std::vector<Points> joints(valid.size());
  Eigen::MatrixXd embedding(valid.size(), 3 * J);
  for (std::size_t i = 0; i < valid.size(); ++i) {
    joints[i] = joint_positions(model, valid[i]);
    const Points aligned = joints[i].rowwise() - joints[i].row(0);
    embedding.row(i) = Eigen::Map<const Eigen::RowVectorXd>(aligned.data(), 3 * J);
  }
  const KMeansResult clusters = kmeans(embedding, k, seed, max_iterations);

  KeyposeDictionary dict;
  std::vector<char> used(valid.size(), 0);
  for (int c = 0; c < k; ++c) {
    Points centroid(J, 3);
    for (int j = 0; j < J; ++j) centroid.row(j) = clusters.centroids.block(c, 3 * j, 1, 3);
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    // Prefer members of the cluster; fall back to any unused pose.
    for (int pass = 0; pass < 2 && best < 0; ++pass) {
      for (std::size_t i = 0; i < valid.size(); ++i) {
        if (used[i] || (pass == 0 && clusters.assignment[i] != c)) continue;
        const double d = keypoint_distance(joints[i], centroid);
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(i);
        }
      }
    }
    used[best] = 1;
    dict.poses.push_back(valid[best]);
    dict.keypoints.push_back(joints[best]);
  }
  return dict;
}

int nearest_keypose(const KeyposeDictionary& dict, const Pose& estimate, const SkinnedModel& model) {
  if (dict.poses.empty()) throw ValidationError("keypose dictionary is empty");
  const Points target = joint_positions(model, estimate);
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < dict.size(); ++i) {
    const double d = keypoint_distance(dict.keypoints[i], target);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

Pose keypose_init(const KeyposeDictionary& dict, const Pose& estimate, const SkinnedModel& model) {
  return dict.poses[nearest_keypose(dict, estimate, model)];
}

InitResult initialize(const SkinnedModel& model, const Pose& estimate, const std::optional<Pose>& prev_corrected,
                      const KeyposeDictionary* dict, std::mt19937_64& rng, const InitConfig& config) {
  if (auto prev = successive_frame_init(prev_corrected, model)) return {*prev, "successive", 0};
  std::string tried = prev_corrected ? "successive frames (colliding), " : "successive frames (none), ";
  try {
    JitterResult j = jitter_init(model, estimate, rng, config.jitter_sigma, config.jitter_max_tries);
    return {j.pose, "jitter", j.tries};
  } catch (const StrategyFailed&) {
    tried += "jitter";
  }
  if (dict && dict->size() > 0) {
    const Pose pose = keypose_init(*dict, estimate, model);
    if (!has_self_intersection(model, pose)) return {pose, "keypose", 0};
    tried += ", keyposes (nearest keypose collides)";
  } else {
    tried += ", keyposes (no dictionary)";
  }
  throw StrategyFailed("initialization exhausted: " + tried);
}

}  // namespace bodyflow
