#pragma once

#include "debiaskit/types.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace debiaskit {

using WordList = std::vector<std::string>;

struct Identity {
  std::string name;
  std::vector<std::string> groups;
  std::vector<WordList> defining_sets;
  // Defaults to defining_sets when the source document has none.
  std::vector<WordList> equality_sets;
};

struct IdentityTaxonomy {
  std::vector<Identity> identities;

  const Identity& find(std::string_view name) const;
  bool contains(std::string_view name) const;
};

// Target words S and attribute sets A_1..A_N for MAC evaluation.
struct EvalSpec {
  std::string identity;
  WordList targets;
  std::vector<WordList> attribute_sets;
};

IdentityTaxonomy parse_taxonomy(const nlohmann::json& doc);
IdentityTaxonomy load_taxonomy(const std::filesystem::path& path);

// `fallback_identity` is used when the document has no "identity" key.
EvalSpec parse_eval_spec(const nlohmann::json& doc, std::string fallback_identity = {});
EvalSpec load_eval_spec(const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace debiaskit
