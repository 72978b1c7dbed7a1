#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bodyflow/body_model.hpp"

namespace bodyflow {

/// Returns a description of the first edge that is not shared by exactly two
/// consistently oriented faces, or nothing if the mesh is closed and manifold.
std::optional<std::string> find_manifold_violation(const std::vector<Face>& faces, int vertex_count);

/// V - E + F.
int euler_characteristic(const std::vector<Face>& faces, int vertex_count);

/// Number of edge-connected face components.
int connected_components(const std::vector<Face>& faces, int vertex_count);

std::vector<double> face_areas(const Points& vertices, const std::vector<Face>& faces);

/// Area-weighted vertex normals (unit length where defined).
Points vertex_normals(const Points& vertices, const std::vector<Face>& faces);

/// Enclosed volume by the divergence theorem; positive for outward faces.
double signed_volume(const Points& vertices, const std::vector<Face>& faces);

/// Faces incident to each vertex.
std::vector<std::vector<int>> vertex_faces(const std::vector<Face>& faces, int vertex_count);

}  // namespace bodyflow
