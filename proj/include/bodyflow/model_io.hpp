#pragma once

#include <string>

#include "bodyflow/body_model.hpp"

namespace bodyflow {

/// JSON model: parents, rest_offsets, vertices, faces, weights (dense rows
/// or sparse [vertex, joint, weight] triplets), optional exclusion_faces.
/// The result is validated before it is returned.
SkinnedModel load_model(const std::string& path);
void save_model(const SkinnedModel& model, const std::string& path);

/// "builtin" (or empty) selects the procedural humanoid; anything else is a
/// model file path.
SkinnedModel resolve_model(const std::string& spec);

}  // namespace bodyflow
