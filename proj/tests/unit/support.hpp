#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>

#include "altproj/geometry.hpp"

namespace testing_support {

inline altproj::Vector vec(std::initializer_list<double> v) {
  altproj::Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

/// Matrix whose columns are the given vectors.
inline altproj::Matrix cols(std::initializer_list<std::initializer_list<double>> columns) {
  const auto d = static_cast<Eigen::Index>(columns.begin()->size());
  altproj::Matrix m(d, static_cast<Eigen::Index>(columns.size()));
  Eigen::Index c = 0;
  for (const auto& col : columns) m.col(c++) = vec(col);
  return m;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("altproj_tests_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testing_support
