#include "bodyflow/surface_sampling.hpp"

#include <algorithm>
#include <cmath>

#include "bodyflow/error.hpp"
#include "bodyflow/mesh.hpp"
#include "bodyflow/rng.hpp"

namespace bodyflow {

SampleSet sample_surface(const SkinnedModel& model, int count, std::uint64_t seed) {
  if (count < 1) throw ValidationError("sample count must be at least 1");
  const std::vector<double> areas = face_areas(model.template_vertices, model.faces);
  std::vector<int> domain;
  std::vector<double> cumulative;
  double total = 0.0;
  for (int f = 0; f < model.face_count(); ++f) {
    if (model.is_excluded(f) || areas[f] <= 0.0) continue;
    total += areas[f];
    domain.push_back(f);
    cumulative.push_back(total);
  }
  if (domain.empty()) throw ValidationError("empty sampling domain");

  const CounterRng rng(seed);
  SampleSet out;
  out.seed = seed;
  out.attachments.resize(count);
  for (int i = 0; i < count; ++i) {
    const std::uint64_t base = 3 * static_cast<std::uint64_t>(i);
    const double pick = rng.uniform(base) * total;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    const std::size_t slot = std::min<std::size_t>(it - cumulative.begin(), domain.size() - 1);
    const double r1 = std::sqrt(rng.uniform(base + 1));
    const double u2 = rng.uniform(base + 2);
    Attachment& a = out.attachments[i];
    a.face = domain[slot];
    a.bary = {1.0 - r1, r1 * (1.0 - u2), 0.0};
    a.bary[2] = 1.0 - a.bary[0] - a.bary[1];
  }
  return out;
}

SampleSet vertex_samples(const SkinnedModel& model) {
  std::vector<int> face_of(model.vertex_count(), -1);
  std::vector<int> corner_of(model.vertex_count(), 0);
  for (int f = 0; f < model.face_count(); ++f) {
    for (int k = 0; k < 3; ++k) {
      if (face_of[model.faces[f][k]] < 0) {
        face_of[model.faces[f][k]] = f;
        corner_of[model.faces[f][k]] = k;
      }
    }
  }
  SampleSet out;
  for (int v = 0; v < model.vertex_count(); ++v) {
    if (face_of[v] < 0) continue;
    Attachment a;
    a.face = face_of[v];
    a.bary = Vec3::Zero();
    a.bary[corner_of[v]] = 1.0;
    out.attachments.push_back(a);
  }
  return out;
}

void validate_samples(const SkinnedModel& model, const SampleSet& samples) {
  if (samples.size() < 1) throw ValidationError("sample set is empty");
  for (int i = 0; i < samples.size(); ++i) {
    const Attachment& a = samples.attachments[i];
    if (a.face < 0 || a.face >= model.face_count())
      throw ValidationError("attachment " + std::to_string(i) + " references face " + std::to_string(a.face));
    if ((a.bary.array() < 0.0).any() || std::abs(a.bary.sum() - 1.0) > 1e-12)
      throw ValidationError("attachment " + std::to_string(i) + " has invalid barycentric coordinates");
  }
}

PointCloud evaluate_attachments(const SkinnedModel& model, const Pose& pose, const SampleSet& samples) {
  const PosedSkeleton skeleton = pose_skeleton(model, pose);
  PointCloud out{Points(samples.size(), 3)};
  for (int i = 0; i < samples.size(); ++i) {
    const Attachment& a = samples.attachments[i];
    Vec3 x = Vec3::Zero();
    for (int c = 0; c < 3; ++c) {
      if (a.bary[c] != 0.0) x += a.bary[c] * skeleton.skin(model, model.faces[a.face][c]);
    }
    out.points.row(i) = x.transpose();
  }
  return out;
}

RegionMask select_region(const SkinnedModel& model, const SampleSet& samples, const Vec3& seed_point,
                         double radius, const Pose& pose) {
  if (!(radius > 0.0)) throw ValidationError("region radius must be positive");
  const PointCloud posed = evaluate_attachments(model, pose, samples);
  RegionMask mask;
  mask.seed_point = seed_point;
  mask.radius = radius;
  for (int i = 0; i < posed.size(); ++i) {
    if ((Vec3(posed.points.row(i)) - seed_point).norm() <= radius) mask.members.push_back(i);
  }
  if (mask.members.empty()) throw ValidationError("empty source region");
  return mask;
}

}  // namespace bodyflow
