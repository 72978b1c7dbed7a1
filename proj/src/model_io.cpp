#include "bodyflow/model_io.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include <json.hpp>

#include "bodyflow/capsule_human.hpp"
#include "bodyflow/error.hpp"

namespace bodyflow {

using nlohmann::json;

SkinnedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open model file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("malformed model file: " + std::string(e.what()));
  }
  SkinnedModel model;
  try {
    model.name = j.value("name", std::string("model"));
    model.tree.parent = j.at("parents").get<std::vector<int>>();
    for (const auto& o : j.at("rest_offsets")) {
      const auto v = o.get<std::vector<double>>();
      if (v.size() != 3) throw ValidationError("rest_offsets entries must have 3 components");
      model.tree.rest_offset.emplace_back(v[0], v[1], v[2]);
    }
    const auto& verts = j.at("vertices");
    model.template_vertices.resize(static_cast<Eigen::Index>(verts.size()), 3);
    for (std::size_t i = 0; i < verts.size(); ++i) {
      const auto v = verts[i].get<std::vector<double>>();
      if (v.size() != 3) throw ValidationError("vertex " + std::to_string(i) + " must have 3 components");
      model.template_vertices.row(static_cast<Eigen::Index>(i)) << v[0], v[1], v[2];
    }
    for (const auto& f : j.at("faces")) {
      const auto v = f.get<std::vector<int>>();
      if (v.size() != 3) throw ValidationError("faces must be triangles");
      model.faces.push_back({v[0], v[1], v[2]});
    }
    const auto& w = j.at("weights");
    const int V = model.vertex_count();
    if (w.is_object() && w.contains("sparse")) {
      std::vector<std::vector<std::pair<int, double>>> rows(V);
      for (const auto& t : w.at("sparse")) {
        const int v = t.at(0).get<int>();
        if (v < 0 || v >= V) throw ValidationError("sparse weight references vertex " + std::to_string(v));
        rows[v].emplace_back(t.at(1).get<int>(), t.at(2).get<double>());
      }
      for (auto& r : rows) {
        std::sort(r.begin(), r.end());
        model.skin_weights.append_row(r);
      }
    } else {
      for (const auto& row : w) {
        const auto dense = row.get<std::vector<double>>();
        std::vector<std::pair<int, double>> r;
        for (std::size_t k = 0; k < dense.size(); ++k) {
          if (dense[k] != 0.0) r.emplace_back(static_cast<int>(k), dense[k]);
        }
        model.skin_weights.append_row(r);
      }
    }
    if (j.contains("exclusion_faces")) model.exclusion_faces = j.at("exclusion_faces").get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw ValidationError("malformed model file: " + std::string(e.what()));
  }
  validate_model(model);
  return model;
}

void save_model(const SkinnedModel& model, const std::string& path) {
  json j;
  j["format"] = "bodyflow-model";
  j["name"] = model.name;
  j["parents"] = model.tree.parent;
  j["rest_offsets"] = json::array();
  for (const Vec3& o : model.tree.rest_offset) j["rest_offsets"].push_back({o.x(), o.y(), o.z()});
  j["vertices"] = json::array();
  for (int v = 0; v < model.vertex_count(); ++v) {
    j["vertices"].push_back(
        {model.template_vertices(v, 0), model.template_vertices(v, 1), model.template_vertices(v, 2)});
  }
  j["faces"] = json::array();
  for (const Face& f : model.faces) j["faces"].push_back({f[0], f[1], f[2]});
  json sparse = json::array();
  const auto& w = model.skin_weights;
  for (int v = 0; v < w.vertex_count(); ++v) {
    for (int k = w.row_begin[v]; k < w.row_begin[v + 1]; ++k) sparse.push_back({v, w.joint[k], w.weight[k]});
  }
  j["weights"] = {{"sparse", sparse}};
  j["exclusion_faces"] = model.exclusion_faces;
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write model file: " + path);
  out << j.dump() << '\n';
}

SkinnedModel resolve_model(const std::string& spec) {
  if (spec.empty() || spec == "builtin") return make_capsule_human();
  return load_model(spec);
}

}  // namespace bodyflow
