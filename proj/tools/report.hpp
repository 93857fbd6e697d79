#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace blindcapon::cli {

using nlohmann::json;

/// Number rounded to 9 significant digits; NaN and infinities become null.
json num(double v);

/// Output directory: the flag if given, else $BLINDCAPON_OUT_DIR, else ".".
std::filesystem::path resolve_out_dir(const std::string& flag);

void write_json(const std::filesystem::path& path, const json& j);

/// Provenance record written next to every output.
class RunManifest {
 public:
  RunManifest(std::string command, std::vector<std::string> argv);

  json& flags() { return flags_; }
  void set_seed(std::uint64_t seed) { seed_ = seed; has_seed_ = true; }
  void add_output(const std::filesystem::path& p) { outputs_.push_back(p.string()); }

  /// Writes manifest.json into dir and returns its path.
  std::filesystem::path write(const std::filesystem::path& dir) const;

 private:
  std::string command_;
  std::vector<std::string> argv_;
  json flags_ = json::object();
  std::uint64_t seed_ = 0;
  bool has_seed_ = false;
  std::vector<std::string> outputs_;
  std::chrono::steady_clock::time_point start_;
  std::string started_at_;
};

}  // namespace blindcapon::cli
