#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace debiaskit::cli {

inline constexpr const char* kToolName = "debias-kit";
inline constexpr const char* kToolVersion = "0.1.0";

// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

struct FileDigest {
  std::string role;
  std::string path;
  std::string sha256;
};

// What a command read and wrote, plus its fully resolved configuration.
struct RunRecord {
  std::string command;
  std::vector<std::string> args;  // argv after the program name
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::vector<FileDigest> inputs;
  std::vector<FileDigest> outputs;
  std::filesystem::path primary_output;

  void input(std::string role, const std::filesystem::path& path);
  void output(std::string role, const std::filesystem::path& path);
};

std::filesystem::path manifest_path(const std::filesystem::path& primary_output);

// Digests every output and writes `<primary output>.manifest.json`.
std::filesystem::path write_manifest(RunRecord& record);

nlohmann::ordered_json manifest_json(const RunRecord& record);

}  // namespace debiaskit::cli
