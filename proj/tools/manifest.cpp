#include "manifest.hpp"

#include "debiaskit/types.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>

namespace debiaskit::cli {

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open '{}' for hashing", path.string()));
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("SHA-256 initialisation failed");
  std::array<char, 1 << 16> buffer{};
  while (in) {
    in.read(buffer.data(), buffer.size());
    const auto got = in.gcount();
    if (got > 0 && EVP_DigestUpdate(ctx.get(), buffer.data(), static_cast<std::size_t>(got)) != 1) {
      throw Error("SHA-256 update failed");
    }
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_DigestFinal_ex(ctx.get(), digest.data(), &length) != 1) throw Error("SHA-256 finalisation failed");
  std::string hex;
  for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

void RunRecord::input(std::string role, const std::filesystem::path& path) {
  inputs.push_back({std::move(role), path.string(), sha256_file(path)});
}

void RunRecord::output(std::string role, const std::filesystem::path& path) {
  outputs.push_back({std::move(role), path.string(), {}});
}

std::filesystem::path manifest_path(const std::filesystem::path& primary_output) {
  return std::filesystem::path(primary_output.string() + ".manifest.json");
}

nlohmann::ordered_json manifest_json(const RunRecord& record) {
  auto files = [](const std::vector<FileDigest>& list) {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const auto& f : list) out.push_back({{"role", f.role}, {"path", f.path}, {"sha256", f.sha256}});
    return out;
  };
  nlohmann::ordered_json doc;
  doc["tool"] = kToolName;
  doc["version"] = kToolVersion;
  doc["command"] = record.command;
  doc["working_directory"] = std::filesystem::current_path().string();
  doc["args"] = record.args;
  doc["config"] = record.config;
  doc["inputs"] = files(record.inputs);
  doc["outputs"] = files(record.outputs);
  return doc;
}

std::filesystem::path write_manifest(RunRecord& record) {
  for (auto& f : record.outputs) f.sha256 = sha256_file(f.path);
  const auto path = manifest_path(record.primary_output);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write manifest '{}'", path.string()));
  out << manifest_json(record).dump(2) << '\n';
  if (!out) throw Error(fmt::format("failed while writing '{}'", path.string()));
  return path;
}

}  // namespace debiaskit::cli
