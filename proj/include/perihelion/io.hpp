#pragma once

// Run manifests, CSV datasets with hash headers, atomic file output.

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace perihelion {

inline constexpr int kSchemaVersion = 1;

std::string sha256_hex(const std::string& bytes);

/// Hash of the canonical (sorted-key, compact) dump of a run config.
std::string manifest_hash(const nlohmann::json& config);

/// Writes through a temporary file in the same directory, then renames.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// "%.17g"; round-trips every double.
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> comments;  ///< emitted as "# ..." lines
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(const std::vector<double>& values);
  void add_cells(std::vector<std::string> cells) { rows.push_back(std::move(cells)); }
  std::string render(const std::string& hash) const;
};

/// Output directory bound to one manifest. Every file written through it
/// carries the manifest hash.
class RunOutput {
 public:
  RunOutput(std::filesystem::path dir, nlohmann::json config);

  const std::string& hash() const { return hash_; }
  const nlohmann::json& config() const { return config_; }
  const std::filesystem::path& dir() const { return dir_; }

  std::filesystem::path write_csv(const std::string& name, const CsvTable& table);
  /// The hash is inserted under "manifest_hash".
  std::filesystem::path write_json(const std::string& name, nlohmann::json doc);
  std::filesystem::path write_manifest(const std::vector<std::string>& files);

 private:
  std::filesystem::path dir_;
  nlohmann::json config_;
  std::string hash_;
};

}  // namespace perihelion
