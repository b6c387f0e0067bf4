#pragma once

#include <filesystem>
#include <string>

namespace hifd {

// Writes to a sibling temp file and renames over the target.
void atomic_write(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

// Shortest decimal string that round-trips the double.
std::string format_double(double v);

// Thrown when an input file a command depends on is absent.
struct MissingFile : std::runtime_error {
  explicit MissingFile(const std::filesystem::path& p) : std::runtime_error("missing file: " + p.string()) {}
};

}  // namespace hifd
