#include "trigf/io.hpp"

#include <cstdio>
#include <stdexcept>

#ifndef TRIGF_VERSION
#define TRIGF_VERSION "unversioned"
#endif

namespace trigf {

std::string version_string() { return TRIGF_VERSION; }

uint64_t config_hash(const std::vector<std::pair<std::string, std::string>>& kv) {
  uint64_t h = 0xCBF29CE484222325ull;
  auto feed = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001B3ull;
    }
  };
  for (const auto& [k, v] : kv) {
    feed(k);
    feed("=");
    feed(v);
    feed("\n");
  }
  return h;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::string& columns,
                     uint64_t seed, uint64_t hash) {
  path_ = path;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path);
  if (!out_) throw std::runtime_error("cannot open " + path.string());
  char head[160];
  std::snprintf(head, sizeof(head), "# trigf %s seed=%llu config=%016llx\n",
                version_string().c_str(),
                static_cast<unsigned long long>(seed),
                static_cast<unsigned long long>(hash));
  out_ << head << columns << "\n";
}

CsvWriter::~CsvWriter() = default;

void CsvWriter::row(const std::vector<std::string>& cells) {
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
}

}  // namespace trigf
