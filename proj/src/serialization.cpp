#include "bodyflow/serialization.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bodyflow/error.hpp"

namespace bodyflow {

using nlohmann::json;

namespace {

json parse_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw ValidationError(std::string("cannot open ") + what + " file: " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed ") + what + " file: " + e.what());
  }
}

void dump_file(const json& j, const std::string& path) { write_text(path, j.dump(1) + "\n"); }

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd json_vec(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json points_json(const Points& p) {
  json out = json::array();
  for (Eigen::Index r = 0; r < p.rows(); ++r) out.push_back({p(r, 0), p(r, 1), p(r, 2)});
  return out;
}

Points json_points(const json& j) {
  Points p(static_cast<Eigen::Index>(j.size()), 3);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const auto v = j[r].get<std::vector<double>>();
    if (v.size() != 3) throw ValidationError("point rows must have 3 components");
    p.row(static_cast<Eigen::Index>(r)) << v[0], v[1], v[2];
  }
  return p;
}

template <typename F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed ") + what + " file: " + e.what());
  }
}

}  // namespace

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write file: " + path);
  out << text;
  if (!out) throw ValidationError("failed writing file: " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PoseSequence load_pose_sequence(const std::string& path) {
  const json j = parse_file(path, "pose sequence");
  return guarded("pose sequence", [&] {
    PoseSequence seq;
    seq.model_name = j.value("model", std::string("capsule_human"));
    seq.fps = j.value("fps", 30.0);
    if (!(seq.fps > 0.0)) throw ValidationError("fps must be positive");
    const int d = j.at("pose_dim").get<int>();
    seq.joints = j.value("joints", (d - 3) / 3);
    if (d != 3 + 3 * seq.joints) throw ValidationError("pose_dim does not equal 3 + 3 * joints");
    for (const auto& row : j.at("poses")) {
      Pose p{json_vec(row)};
      if (p.theta.size() != d)
        throw ValidationError("pose row " + std::to_string(seq.poses.size()) + " has length " +
                              std::to_string(p.theta.size()) + ", expected " + std::to_string(d));
      seq.poses.push_back(std::move(p));
    }
    if (j.contains("gt_joints")) {
      for (const auto& frame : j.at("gt_joints")) seq.gt_joints.push_back(json_points(frame));
      if (seq.gt_joints.size() != seq.poses.size())
        throw ValidationError("gt_joints frame count does not match poses");
    }
    return seq;
  });
}

void save_pose_sequence(const PoseSequence& seq, const std::string& path) {
  json j;
  j["format"] = "bodyflow-poses";
  j["model"] = seq.model_name;
  const int d = seq.poses.empty() ? 3 + 3 * seq.joints : static_cast<int>(seq.poses.front().theta.size());
  j["joints"] = (d - 3) / 3;
  j["pose_dim"] = d;
  j["fps"] = seq.fps;
  j["poses"] = json::array();
  for (const Pose& p : seq.poses) j["poses"].push_back(vec_json(p.theta));
  if (!seq.gt_joints.empty()) {
    j["gt_joints"] = json::array();
    for (const Points& p : seq.gt_joints) j["gt_joints"].push_back(points_json(p));
  }
  dump_file(j, path);
}

Pose load_pose(const std::string& path) {
  const PoseSequence seq = load_pose_sequence(path);
  if (seq.poses.size() != 1) throw ValidationError("pose file must hold exactly one pose: " + path);
  return seq.poses.front();
}

void save_pose(const Pose& pose, const std::string& path, const std::string& model_name) {
  PoseSequence seq;
  seq.model_name = model_name;
  seq.poses = {pose};
  seq.joints = pose.joint_count();
  save_pose_sequence(seq, path);
}

void save_trajectory(const Trajectory& traj, const std::string& path) {
  json j;
  j["format"] = "bodyflow-trajectory";
  j["status"] = status_name(traj.status);
  j["rejected_steps"] = traj.rejected_steps;
  j["guard_rejections"] = traj.guard_rejections;
  j["rhs_evaluations"] = traj.rhs_evaluations;
  j["times"] = traj.times;
  j["poses"] = json::array();
  for (const Pose& p : traj.poses) j["poses"].push_back(vec_json(p.theta));
  if (!traj.rates.empty()) {
    j["rates"] = json::array();
    for (const auto& r : traj.rates) j["rates"].push_back(vec_json(r));
  }
  j["diagnostics"] = json::array();
  for (const StepDiagnostic& d : traj.diagnostics) {
    j["diagnostics"].push_back({{"h", d.h},
                                {"error", d.error},
                                {"field_norm", d.field_norm},
                                {"min_singular", d.min_singular},
                                {"mean_speed", d.mean_speed}});
  }
  dump_file(j, path);
}

Trajectory load_trajectory(const std::string& path) {
  const json j = parse_file(path, "trajectory");
  return guarded("trajectory", [&] {
    Trajectory traj;
    const std::string status = j.at("status").get<std::string>();
    if (status == "quiescent")
      traj.status = TrajectoryStatus::Quiescent;
    else if (status == "stopped_at_contact")
      traj.status = TrajectoryStatus::StoppedAtContact;
    traj.times = j.at("times").get<std::vector<double>>();
    for (const auto& p : j.at("poses")) traj.poses.push_back(Pose{json_vec(p)});
    if (j.contains("rates")) {
      for (const auto& r : j.at("rates")) traj.rates.push_back(json_vec(r));
    }
    for (const auto& d : j.at("diagnostics")) {
      traj.diagnostics.push_back({d.at("h").get<double>(), d.at("error").get<double>(),
                                  d.at("field_norm").get<double>(), d.at("min_singular").get<double>(),
                                  d.value("mean_speed", 0.0)});
    }
    traj.rejected_steps = j.value("rejected_steps", 0);
    traj.guard_rejections = j.value("guard_rejections", 0);
    traj.rhs_evaluations = j.value("rhs_evaluations", 0);
    if (traj.poses.empty() || traj.poses.size() != traj.times.size())
      throw ValidationError("trajectory times and poses disagree");
    return traj;
  });
}

void save_keyposes(const KeyposeDictionary& dict, const std::string& path) {
  json j;
  j["format"] = "bodyflow-keyposes";
  j["k"] = dict.size();
  j["poses"] = json::array();
  for (const Pose& p : dict.poses) j["poses"].push_back(vec_json(p.theta));
  j["keypoints"] = json::array();
  for (const Points& p : dict.keypoints) j["keypoints"].push_back(points_json(p));
  dump_file(j, path);
}

KeyposeDictionary load_keyposes(const std::string& path) {
  const json j = parse_file(path, "keypose");
  return guarded("keypose", [&] {
    KeyposeDictionary dict;
    for (const auto& p : j.at("poses")) dict.poses.push_back(Pose{json_vec(p)});
    for (const auto& p : j.at("keypoints")) dict.keypoints.push_back(json_points(p));
    if (dict.poses.empty() || dict.poses.size() != dict.keypoints.size())
      throw ValidationError("keypose dictionary poses and keypoints disagree");
    return dict;
  });
}

void save_samples(const SampleSet& samples, const std::string& path) {
  json j;
  j["format"] = "bodyflow-samples";
  j["seed"] = samples.seed;
  j["attachments"] = json::array();
  for (const Attachment& a : samples.attachments) j["attachments"].push_back({a.face, a.bary[0], a.bary[1], a.bary[2]});
  dump_file(j, path);
}

SampleSet load_samples(const std::string& path) {
  const json j = parse_file(path, "sample set");
  return guarded("sample set", [&] {
    SampleSet s;
    s.seed = j.value("seed", std::uint64_t{0});
    for (const auto& a : j.at("attachments")) {
      s.attachments.push_back({a.at(0).get<int>(), Vec3(a.at(1).get<double>(), a.at(2).get<double>(), a.at(3).get<double>())});
    }
    return s;
  });
}

void save_metrics(const MetricsReport& report, const std::string& path) {
  json j;
  j["format"] = "bodyflow-metrics";
  j["mpjpe_mm"] = report.mpjpe;
  j["p_mpjpe_mm"] = report.p_mpjpe;
  j["accel_err_mm_s2"] = report.accel_err;
  j["col_rate_at"] = json::object();
  for (const auto& [c, rate] : report.col_rate_at) j["col_rate_at"][std::to_string(c)] = rate;
  dump_file(j, path);
}

}  // namespace bodyflow
