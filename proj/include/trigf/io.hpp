#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace trigf {

std::string version_string();

// FNV-1a over the canonical "k=v\n" rendering of a flat config.
uint64_t config_hash(const std::vector<std::pair<std::string, std::string>>& kv);

// Round-trip-exact, locale-independent float rendering (%.17g).
std::string format_double(double x);

// CSV writer with a one-line '#' provenance header:
//   # trigf <version> seed=<seed> config=<hex hash>
// Identical content for identical (config, seed) regardless of thread count.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& columns,
            uint64_t seed, uint64_t config_hash);
  ~CsvWriter();

  void row(const std::vector<std::string>& cells);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

}  // namespace trigf
