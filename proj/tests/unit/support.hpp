#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>

namespace testing {

// Fresh scratch directory per test case.
inline std::filesystem::path scratch(const std::string& name) {
  const char* root = std::getenv("JAMWATCH_TEST_TMP");
  std::filesystem::path dir = root ? std::filesystem::path(root) : std::filesystem::temp_directory_path() / "jamwatch_tests";
  dir /= name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

} // namespace testing
