#pragma once

#include <string>

#include "bodyflow/body_model.hpp"

namespace bodyflow {

/// Wavefront OBJ with 1-based faces and vertices printed to 6 decimals.
void write_obj(const Points& vertices, const std::vector<Face>& faces, const std::string& path);
void export_obj(const SkinnedModel& model, const Pose& pose, const std::string& path);

/// Reads the `v` and `f` records back (triangles only).
void read_obj(const std::string& path, Points& vertices, std::vector<Face>& faces);

}  // namespace bodyflow
