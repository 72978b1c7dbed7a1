#include "bodyflow/obj_export.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "bodyflow/error.hpp"

namespace bodyflow {

void write_obj(const Points& vertices, const std::vector<Face>& faces, const std::string& path) {
  std::FILE* file = std::fopen(path.c_str(), "w");
  if (!file) throw ValidationError("cannot write OBJ file: " + path);
  for (Eigen::Index v = 0; v < vertices.rows(); ++v) {
    std::fprintf(file, "v %.6f %.6f %.6f\n", vertices(v, 0), vertices(v, 1), vertices(v, 2));
  }
  for (const Face& f : faces) std::fprintf(file, "f %d %d %d\n", f[0] + 1, f[1] + 1, f[2] + 1);
  if (std::fclose(file) != 0) throw ValidationError("failed writing OBJ file: " + path);
}

void export_obj(const SkinnedModel& model, const Pose& pose, const std::string& path) {
  write_obj(skin_vertices(model, pose).points, model.faces, path);
}

void read_obj(const std::string& path, Points& vertices, std::vector<Face>& faces) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open OBJ file: " + path);
  std::vector<Vec3> verts;
  faces.clear();
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      Vec3 p;
      ls >> p.x() >> p.y() >> p.z();
      verts.push_back(p);
    } else if (tag == "f") {
      Face f;
      for (int k = 0; k < 3; ++k) {
        std::string token;
        ls >> token;
        f[k] = std::stoi(token.substr(0, token.find('/'))) - 1;
      }
      faces.push_back(f);
    }
  }
  vertices.resize(static_cast<Eigen::Index>(verts.size()), 3);
  for (std::size_t i = 0; i < verts.size(); ++i) vertices.row(static_cast<Eigen::Index>(i)) = verts[i].transpose();
}

}  // namespace bodyflow
