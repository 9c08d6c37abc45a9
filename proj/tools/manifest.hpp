#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace atlasbench::cli {

/// Hex SHA-256 of a file's bytes. Throws DataError when the file cannot be read.
std::string sha256_file(const std::filesystem::path& path);

/// Written next to every output. No timestamps: two identical runs write identical manifests.
struct RunManifest {
  std::string subcommand;
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  int threads = 1;

  /// Hashes inputs and outputs as they are on disk now.
  void write(const std::filesystem::path& path) const;
};

/// Worker cap from ATLASBENCH_THREADS (default 1). Throws ConfigError on a non-positive or
/// non-numeric value.
int thread_cap();

}  // namespace atlasbench::cli
