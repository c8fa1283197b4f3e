#include "debiaskit/lexicon.hpp"

#include <fmt/format.h>

#include <fstream>
#include <set>

namespace debiaskit {

namespace {

using nlohmann::json;

WordList word_list(const json& node, const std::string& where) {
  if (!node.is_array()) throw FormatError(fmt::format("{}: expected an array of strings", where));
  WordList words;
  words.reserve(node.size());
  for (const auto& item : node) {
    if (!item.is_string()) throw FormatError(fmt::format("{}: expected an array of strings", where));
    words.push_back(item.get<std::string>());
  }
  return words;
}

std::vector<WordList> word_lists(const json& node, const std::string& where) {
  if (!node.is_array()) throw FormatError(fmt::format("{}: expected an array of word lists", where));
  std::vector<WordList> lists;
  for (std::size_t i = 0; i < node.size(); ++i) lists.push_back(word_list(node[i], fmt::format("{}[{}]", where, i)));
  return lists;
}

const json& required(const json& object, const char* key, const std::string& where) {
  const auto it = object.find(key);
  if (it == object.end()) throw FormatError(fmt::format("{}: missing required key '{}'", where, key));
  return *it;
}

}  // namespace

const Identity& IdentityTaxonomy::find(std::string_view name) const {
  for (const auto& identity : identities) {
    if (identity.name == name) return identity;
  }
  throw ValidationError(fmt::format("identity '{}' is not in the taxonomy", name));
}

bool IdentityTaxonomy::contains(std::string_view name) const {
  for (const auto& identity : identities) {
    if (identity.name == name) return true;
  }
  return false;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open '{}'", path.string()));
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(fmt::format("{}: invalid JSON: {}", path.string(), e.what()));
  }
}

IdentityTaxonomy parse_taxonomy(const json& doc) {
  if (!doc.is_object()) throw FormatError("taxonomy: top level must be an object");
  const json& list = required(doc, "identities", "taxonomy");
  if (!list.is_array()) throw FormatError("taxonomy: 'identities' must be an array");
  if (list.empty()) throw ValidationError("taxonomy: 'identities' is empty");

  IdentityTaxonomy taxonomy;
  std::set<std::string> names;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string where = fmt::format("identities[{}]", i);
    const json& node = list[i];
    if (!node.is_object()) throw FormatError(fmt::format("{}: expected an object", where));
    Identity identity;
    const json& name = required(node, "name", where);
    if (!name.is_string() || name.get<std::string>().empty()) {
      throw FormatError(fmt::format("{}.name: expected a non-empty string", where));
    }
    identity.name = name.get<std::string>();
    if (!names.insert(identity.name).second) {
      throw ValidationError(fmt::format("taxonomy: duplicate identity '{}'", identity.name));
    }
    identity.groups = word_list(required(node, "groups", where), where + ".groups");
    identity.defining_sets = word_lists(required(node, "defining_sets", where), where + ".defining_sets");
    if (identity.defining_sets.empty()) {
      throw ValidationError(fmt::format("identity '{}' has no defining sets", identity.name));
    }
    for (std::size_t s = 0; s < identity.defining_sets.size(); ++s) {
      if (identity.defining_sets[s].size() < 2) {
        throw ValidationError(
            fmt::format("identity '{}': defining set {} needs at least 2 words", identity.name, s));
      }
    }
    if (const auto it = node.find("equality_sets"); it != node.end() && !it->is_null()) {
      identity.equality_sets = word_lists(*it, where + ".equality_sets");
    } else {
      identity.equality_sets = identity.defining_sets;
    }
    taxonomy.identities.push_back(std::move(identity));
  }
  return taxonomy;
}

IdentityTaxonomy load_taxonomy(const std::filesystem::path& path) {
  const json doc = read_json_file(path);
  try {
    return parse_taxonomy(doc);
  } catch (const FormatError& e) {
    throw FormatError(fmt::format("{}: {}", path.string(), e.what()));
  } catch (const ValidationError& e) {
    throw ValidationError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

EvalSpec parse_eval_spec(const json& doc, std::string fallback_identity) {
  if (!doc.is_object()) throw FormatError("eval spec: top level must be an object");
  EvalSpec spec;
  spec.identity = std::move(fallback_identity);
  if (const auto it = doc.find("identity"); it != doc.end()) {
    if (!it->is_string()) throw FormatError("eval spec: 'identity' must be a string");
    spec.identity = it->get<std::string>();
  }
  spec.targets = word_list(required(doc, "targets", "eval spec"), "targets");
  spec.attribute_sets = word_lists(required(doc, "attribute_sets", "eval spec"), "attribute_sets");
  if (spec.targets.empty()) throw ValidationError("eval spec: 'targets' is empty");
  if (spec.attribute_sets.empty()) throw ValidationError("eval spec: 'attribute_sets' is empty");
  for (std::size_t j = 0; j < spec.attribute_sets.size(); ++j) {
    if (spec.attribute_sets[j].empty()) throw ValidationError(fmt::format("eval spec: attribute set {} is empty", j));
  }
  return spec;
}

EvalSpec load_eval_spec(const std::filesystem::path& path) {
  const json doc = read_json_file(path);
  try {
    return parse_eval_spec(doc, path.stem().string());
  } catch (const FormatError& e) {
    throw FormatError(fmt::format("{}: {}", path.string(), e.what()));
  } catch (const ValidationError& e) {
    throw ValidationError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace debiaskit
