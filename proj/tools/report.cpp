#include "report.hpp"

#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>

#include <Eigen/Core>

#include "blindcapon/error.hpp"
#include "blindcapon/monte_carlo.hpp"
#include "blindcapon/version.hpp"

namespace blindcapon::cli {

json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  return std::stod(format_number(v));
}

std::filesystem::path resolve_out_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("BLINDCAPON_OUT_DIR"); env && *env) return env;
  return ".";
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

RunManifest::RunManifest(std::string command, std::vector<std::string> argv)
    : command_(std::move(command)), argv_(std::move(argv)),
      start_(std::chrono::steady_clock::now()) {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  started_at_ = buf;
}

std::filesystem::path RunManifest::write(const std::filesystem::path& dir) const {
  json j;
  j["command"] = command_;
  j["argv"] = argv_;
  j["flags"] = flags_;
  j["master_seed"] = has_seed_ ? json(seed_) : json(nullptr);
  j["versions"] = {{"blindcapon", kVersion},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                 std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)}};
  j["outputs"] = outputs_;
  j["started_at"] = started_at_;
  j["wall_clock_s"] =
      num(std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count());
  const auto path = dir / "manifest.json";
  write_json(path, j);
  return path;
}

}  // namespace blindcapon::cli
