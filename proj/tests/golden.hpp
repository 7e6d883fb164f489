#pragma once

#include <cstdlib>
#include <string>

#include <doctest.h>

#include "crashrepro/text.hpp"
#include "support.hpp"

namespace testing {

/// Compares `actual` with data/golden/<name>. Set CRASHREPRO_UPDATE_GOLDEN=1
/// to rewrite the file instead; review the diff before committing.
inline void check_golden(const std::string& name, const std::string& actual) {
  const std::string path = data_path("golden/" + name);
  if (const char* update = std::getenv("CRASHREPRO_UPDATE_GOLDEN"); update && std::string(update) == "1") {
    crashrepro::text::write_file(path, actual);
    return;
  }
  const std::string expected = crashrepro::text::read_file(path);
  CHECK_MESSAGE(actual == expected, "golden mismatch: " << path);
}

}  // namespace testing
