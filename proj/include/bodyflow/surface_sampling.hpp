#pragma once

#include <cstdint>
#include <vector>

#include "bodyflow/attachment.hpp"
#include "bodyflow/body_model.hpp"

namespace bodyflow {

/// Sample indices forming a source region, plus how it was defined.
struct RegionMask {
  std::vector<int> members;
  Vec3 seed_point = Vec3::Zero();
  double radius = 0.0;
};

/// S points uniformly by rest-pose area over the non-excluded faces.
/// Sample i uses counters 3i..3i+2 of a counter-based generator, so the
/// result depends only on (model, S, seed).
SampleSet sample_surface(const SkinnedModel& model, int count, std::uint64_t seed);

/// One attachment per mesh vertex (bary one-hot on an incident face).
SampleSet vertex_samples(const SkinnedModel& model);

void validate_samples(const SkinnedModel& model, const SampleSet& samples);

/// Barycentric combination of the skinned face vertices.
PointCloud evaluate_attachments(const SkinnedModel& model, const Pose& pose, const SampleSet& samples);

/// Samples whose posed position lies within `radius` of `seed_point`.
RegionMask select_region(const SkinnedModel& model, const SampleSet& samples, const Vec3& seed_point,
                         double radius, const Pose& pose);

}  // namespace bodyflow
