#pragma once

#include <filesystem>
#include <random>
#include <string>

#include <doctest.h>
#include <json.hpp>

#include "geoflood/error.hpp"

namespace testing {

inline std::filesystem::path data_dir() { return GEOFLOOD_TEST_DATA_DIR; }

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("geoflood-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

template <class F>
geoflood::ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const geoflood::Error& e) {
    return e.code();
  }
  FAIL("expected a geoflood::Error");
  return geoflood::ErrorCode::Io;
}

}  // namespace testing
