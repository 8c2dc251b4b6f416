#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "qfgan/matrix.hpp"

namespace qfgan {

// Shortest round-trippable decimal (%.17g).
std::string fmt_double(double v);

double parse_double(const std::string& token, long row = -1);

// Leading comment lines stamped on every artifact. Timestamps never go
// here; they would break byte-identical re-runs.
struct Provenance {
  std::string tool_version;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> extra;

  std::string header_block() const;  // "# key value\n" lines
};

std::string read_text_file(const std::filesystem::path& path);

// Writes via a sibling temp file then renames, so readers never see a
// partial artifact.
void write_text_file(const std::filesystem::path& path, const std::string& content);

// CSV body: optional column header, then one row per line, LF endings.
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m,
                      const Provenance& prov, const std::string& column_header = "");

// Skips '#' comment lines and one optional non-numeric header row.
Matrix read_matrix_csv(const std::filesystem::path& path);

// "key=value" per line, for small sidecar metadata.
void write_kv_file(const std::filesystem::path& path,
                   const std::vector<std::pair<std::string, std::string>>& kv);
std::vector<std::pair<std::string, std::string>> read_kv_file(
    const std::filesystem::path& path);

std::string kv_lookup(const std::vector<std::pair<std::string, std::string>>& kv,
                      const std::string& key);

}  // namespace qfgan
