#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace bodyflow {

/// A point glued to the surface: a face and barycentric coordinates in it.
struct Attachment {
  int face = 0;
  Eigen::Vector3d bary{1.0, 0.0, 0.0};
};

struct SampleSet {
  std::vector<Attachment> attachments;
  std::uint64_t seed = 0;

  int size() const { return static_cast<int>(attachments.size()); }
};

}  // namespace bodyflow
