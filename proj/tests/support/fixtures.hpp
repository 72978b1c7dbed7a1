#pragma once

#include <filesystem>
#include <string>

#include "bodyflow/capsule_human.hpp"

namespace fixtures {

/// The default humanoid, built once per test binary.
inline const bodyflow::SkinnedModel& human() {
  static const bodyflow::SkinnedModel model = bodyflow::make_capsule_human();
  return model;
}

inline std::filesystem::path scratch_dir_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("bodyflow_test_" + name);
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = scratch_dir_path(name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixtures
