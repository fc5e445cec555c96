#include "perihelion/io.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <system_error>
#include <unistd.h>

namespace perihelion {

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

std::string manifest_hash(const nlohmann::json& config) {
  // nlohmann::json objects are std::map backed, so dump() is key-sorted.
  return sha256_hex(config.dump());
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("rename failed: " + path.string() + ": " + ec.message());
  }
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void CsvTable::add(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_double(v));
  rows.push_back(std::move(cells));
}

std::string CsvTable::render(const std::string& hash) const {
  std::string s = "# manifest_hash: " + hash + "\n";
  for (const auto& c : comments) s += "# " + c + "\n";
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) s += ',';
      s += cells[i];
    }
    s += '\n';
  };
  line(columns);
  for (const auto& r : rows) line(r);
  return s;
}

RunOutput::RunOutput(std::filesystem::path dir, nlohmann::json config)
    : dir_(std::move(dir)), config_(std::move(config)) {
  config_["schema_version"] = kSchemaVersion;
  hash_ = manifest_hash(config_);
}

std::filesystem::path RunOutput::write_csv(const std::string& name, const CsvTable& table) {
  const auto path = dir_ / name;
  write_atomic(path, table.render(hash_));
  return path;
}

std::filesystem::path RunOutput::write_json(const std::string& name, nlohmann::json doc) {
  doc["manifest_hash"] = hash_;
  const auto path = dir_ / name;
  write_atomic(path, doc.dump(2) + "\n");
  return path;
}

std::filesystem::path RunOutput::write_manifest(const std::vector<std::string>& files) {
  nlohmann::json m;
  m["config"] = config_;
  m["files"] = files;
  return write_json("manifest.json", std::move(m));
}

}  // namespace perihelion
