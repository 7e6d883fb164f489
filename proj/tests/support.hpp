#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <memory>
#include <string>

#include "crashrepro/llm_gateway.hpp"
#include "crashrepro/simulator.hpp"

namespace testing {

inline std::string data_path(const std::string& rel) { return std::string(CRASHREPRO_DATA_DIR) + "/" + rel; }

inline std::shared_ptr<const crashrepro::sim::SimAppSpec> load_app(const std::string& name) {
  return std::make_shared<const crashrepro::sim::SimAppSpec>(
      crashrepro::sim::load_spec(data_path("apps/" + name + ".json")));
}

/// Scripted mock reply; `repeat` replies are never used up.
inline crashrepro::llm::MockEntry reply(std::string text, bool repeat = false) {
  crashrepro::llm::MockEntry e;
  e.response = std::move(text);
  e.repeat = repeat;
  return e;
}

inline crashrepro::llm::MockEntry failing(crashrepro::llm::MockEntry::Failure kind) {
  crashrepro::llm::MockEntry e;
  e.failure = kind;
  return e;
}

/// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("crashrepro-" + tag + "-" + std::to_string(std::random_device{}()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
