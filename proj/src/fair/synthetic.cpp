#include "debiaskit/fair/synthetic.hpp"

#include "debiaskit/lexicon.hpp"

#include <Eigen/QR>
#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <set>

namespace debiaskit::fair {

namespace {

using json = nlohmann::json;

double number(const json& doc, const char* key, double fallback) {
  if (!doc.contains(key)) return fallback;
  if (!doc[key].is_number()) throw FormatError(fmt::format("synthetic spec: '{}' must be a number", key));
  return doc[key].get<double>();
}

std::size_t count(const json& doc, const char* key, std::size_t fallback) {
  if (!doc.contains(key)) return fallback;
  if (!doc[key].is_number_integer() || doc[key].get<long long>() < 0) {
    throw FormatError(fmt::format("synthetic spec: '{}' must be a non-negative integer", key));
  }
  return doc[key].get<std::size_t>();
}

bool probability(double p) { return p >= 0.0 && p <= 1.0; }

// P(group | label) for every group, [label][group].
std::array<std::vector<double>, 2> conditional_shares(const SyntheticSpec& spec) {
  std::array<std::vector<double>, 2> out;
  for (const auto& g : spec.groups) {
    out[1].push_back(spec.base_rate > 0.0 ? g.share * g.toxicity / spec.base_rate : 0.0);
    out[0].push_back(spec.base_rate < 1.0 ? g.share * (1.0 - g.toxicity) / (1.0 - spec.base_rate) : 0.0);
  }
  return out;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (size < 1) throw ValidationError("synthetic spec: size must be at least 1");
  if (!probability(base_rate)) throw ValidationError("synthetic spec: base_rate must lie in [0, 1]");
  if (!probability(intersectional_boost)) throw ValidationError("synthetic spec: intersectional_boost must lie in [0, 1]");
  if (!std::isfinite(bias_strength) || !std::isfinite(signal_strength)) {
    throw ValidationError("synthetic spec: strengths must be finite");
  }
  if (identities.empty()) throw ValidationError("synthetic spec: no identities declared");
  if (feature_dim < 1 + groups.size()) {
    throw ValidationError(fmt::format("synthetic spec: feature_dim {} is below 1 + number of groups ({})", feature_dim,
                                      1 + groups.size()));
  }
  for (const auto& g : groups) {
    if (!probability(g.share) || !probability(g.toxicity)) {
      throw ValidationError(fmt::format("synthetic spec: share and toxicity of '{}' must lie in [0, 1]", g.key.label()));
    }
    if (g.toxicity > 0.0 && base_rate == 0.0) {
      throw ValidationError(fmt::format("synthetic spec: '{}' has toxic rows but base_rate is 0", g.key.label()));
    }
    if (g.toxicity < 1.0 && base_rate == 1.0) {
      throw ValidationError(fmt::format("synthetic spec: '{}' has non-toxic rows but base_rate is 1", g.key.label()));
    }
  }
  const auto shares = conditional_shares(*this);
  for (const auto& identity : identities) {
    for (int label = 0; label < 2; ++label) {
      double total = 0.0;
      for (std::size_t g = 0; g < groups.size(); ++g) {
        if (groups[g].key.identity == identity.name) total += shares[static_cast<std::size_t>(label)][g];
      }
      if (total > 1.0 + 1e-12) {
        throw ValidationError(fmt::format(
            "synthetic spec: groups of '{}' need {:.4f} of the label-{} rows; shares and toxicities are inconsistent",
            identity.name, total, label));
      }
    }
  }
}

SyntheticSpec jigsaw_like_spec() {
  SyntheticSpec spec;
  spec.identities = {{"gender", {"male", "female"}},
                     {"race", {"black", "white"}},
                     {"religion", {"christian", "jewish", "muslim"}}};
  spec.groups = {{{"gender", "male"}, 0.110, 0.150},    {{"gender", "female"}, 0.132, 0.137},
                 {{"race", "black"}, 0.037, 0.314},     {{"race", "white"}, 0.062, 0.281},
                 {{"religion", "christian"}, 0.100, 0.091}, {{"religion", "jewish"}, 0.019, 0.162},
                 {{"religion", "muslim"}, 0.052, 0.228}};
  return spec;
}

SyntheticSpec parse_synthetic_spec(const json& doc) {
  if (!doc.is_object()) throw FormatError("synthetic spec: top level must be an object");
  SyntheticSpec spec;
  spec.base_rate = number(doc, "base_rate", spec.base_rate);
  spec.feature_dim = count(doc, "feature_dim", spec.feature_dim);
  spec.bias_strength = number(doc, "bias_strength", spec.bias_strength);
  spec.signal_strength = number(doc, "signal_strength", spec.signal_strength);
  spec.intersectional_boost = number(doc, "intersectional_boost", spec.intersectional_boost);
  spec.size = count(doc, "size", spec.size);
  spec.geometry_seed = count(doc, "geometry_seed", spec.geometry_seed);

  if (!doc.contains("identities") || !doc["identities"].is_array()) {
    throw FormatError("synthetic spec: 'identities' must be an array");
  }
  if (!doc.contains("groups") || !doc["groups"].is_object()) {
    throw FormatError("synthetic spec: 'groups' must be an object keyed by 'identity:group'");
  }
  std::set<std::string> declared;
  for (const auto& entry : doc["identities"]) {
    if (!entry.is_object() || !entry.contains("name") || !entry["name"].is_string() || !entry.contains("groups") ||
        !entry["groups"].is_array()) {
      throw FormatError("synthetic spec: each identity needs a string 'name' and a 'groups' array");
    }
    SyntheticIdentity identity{entry["name"].get<std::string>(), {}};
    for (const auto& g : entry["groups"]) {
      if (!g.is_string()) throw FormatError("synthetic spec: group names must be strings");
      identity.groups.push_back(g.get<std::string>());
      if (!declared.insert(identity.name + ":" + identity.groups.back()).second) {
        throw ValidationError(fmt::format("synthetic spec: group '{}:{}' declared twice", identity.name,
                                          identity.groups.back()));
      }
    }
    spec.identities.push_back(std::move(identity));
  }
  const json& rates = doc["groups"];
  for (const auto& [key, value] : rates.items()) {
    if (!declared.contains(key)) {
      throw ValidationError(fmt::format("synthetic spec: rates given for undeclared group '{}'", key));
    }
    if (!value.is_object()) throw FormatError(fmt::format("synthetic spec: group '{}' must be an object", key));
  }
  for (const auto& identity : spec.identities) {
    for (const auto& name : identity.groups) {
      const std::string key = identity.name + ":" + name;
      if (!rates.contains(key)) throw ValidationError(fmt::format("synthetic spec: no rates for group '{}'", key));
      const json& r = rates[key];
      if (!r.contains("share") || !r.contains("toxicity")) {
        throw FormatError(fmt::format("synthetic spec: group '{}' needs 'share' and 'toxicity'", key));
      }
      spec.groups.push_back({{identity.name, name}, number(r, "share", 0.0), number(r, "toxicity", 0.0)});
    }
  }
  spec.validate();
  return spec;
}

SyntheticSpec load_synthetic_spec(const std::filesystem::path& path) {
  const json doc = read_json_file(path);
  try {
    return parse_synthetic_spec(doc);
  } catch (const FormatError& e) {
    throw FormatError(fmt::format("{}: {}", path.string(), e.what()));
  } catch (const ValidationError& e) {
    throw ValidationError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

nlohmann::ordered_json to_json(const SyntheticSpec& spec) {
  nlohmann::ordered_json out;
  out["base_rate"] = spec.base_rate;
  out["feature_dim"] = spec.feature_dim;
  out["bias_strength"] = spec.bias_strength;
  out["signal_strength"] = spec.signal_strength;
  out["intersectional_boost"] = spec.intersectional_boost;
  out["size"] = spec.size;
  out["geometry_seed"] = spec.geometry_seed;
  nlohmann::ordered_json identities = nlohmann::ordered_json::array();
  for (const auto& identity : spec.identities) identities.push_back({{"name", identity.name}, {"groups", identity.groups}});
  out["identities"] = std::move(identities);
  nlohmann::ordered_json groups = nlohmann::ordered_json::object();
  for (const auto& g : spec.groups) groups[g.key.label()] = {{"share", g.share}, {"toxicity", g.toxicity}};
  out["groups"] = std::move(groups);
  return out;
}

LabeledDataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  spec.validate();
  const std::size_t n = spec.size;
  const std::size_t d = spec.feature_dim;
  const std::size_t group_count = spec.groups.size();

  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  // Column 0 carries the label, column 1 + g the direction of group g.
  std::mt19937_64 geometry(spec.geometry_seed);
  Eigen::MatrixXd gaussian(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(1 + group_count));
  for (Eigen::Index j = 0; j < gaussian.cols(); ++j) {
    for (Eigen::Index i = 0; i < gaussian.rows(); ++i) gaussian(i, j) = normal(geometry);
  }
  std::mt19937_64 rng(seed);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian);
  const Eigen::MatrixXd directions =
      qr.householderQ() * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d), gaussian.cols());

  // Groups of each identity, for one categorical draw per identity.
  std::vector<std::vector<std::size_t>> by_identity(spec.identities.size());
  for (std::size_t g = 0; g < group_count; ++g) {
    for (std::size_t t = 0; t < spec.identities.size(); ++t) {
      if (spec.groups[g].key.identity == spec.identities[t].name) by_identity[t].push_back(g);
    }
  }
  const auto shares = conditional_shares(spec);

  std::vector<std::string> ids(n);
  std::vector<std::uint8_t> labels(n);
  std::vector<std::uint8_t> membership(n * group_count, 0);
  Matrix features(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  const int width = static_cast<int>(std::to_string(n).size());

  for (std::size_t i = 0; i < n; ++i) {
    ids[i] = fmt::format("r{:0{}}", i, width);
    std::uint8_t label = uniform(rng) < spec.base_rate ? 1 : 0;
    std::size_t identities_present = 0;
    for (const auto& groups : by_identity) {
      const double u = uniform(rng);
      double cumulative = 0.0;
      for (std::size_t g : groups) {
        cumulative += shares[label][g];
        if (u < cumulative) {
          membership[i * group_count + g] = 1;
          ++identities_present;
          break;
        }
      }
    }
    const double flip = uniform(rng);
    if (label == 0 && identities_present >= 2 && flip < spec.intersectional_boost) label = 1;
    labels[i] = label;

    Eigen::VectorXd x(static_cast<Eigen::Index>(d));
    for (Eigen::Index j = 0; j < x.size(); ++j) x(j) = normal(rng);
    x += (label ? 0.5 : -0.5) * spec.signal_strength * directions.col(0);
    for (std::size_t g = 0; g < group_count; ++g) {
      if (membership[i * group_count + g]) x += spec.bias_strength * directions.col(static_cast<Eigen::Index>(1 + g));
    }
    features.row(static_cast<Eigen::Index>(i)) = x.transpose();
  }

  std::vector<GroupKey> keys;
  for (const auto& g : spec.groups) keys.push_back(g.key);
  return LabeledDataset(std::move(ids), std::move(features), std::move(labels), std::move(keys), std::move(membership));
}

}  // namespace debiaskit::fair
