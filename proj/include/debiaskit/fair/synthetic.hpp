#pragma once

#include "debiaskit/fair/dataset.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace debiaskit::fair {

struct SyntheticGroup {
  GroupKey key;
  double share = 0.0;     // fraction of rows in the group
  double toxicity = 0.0;  // P(label = 1 | row in group)
};

struct SyntheticIdentity {
  std::string name;
  std::vector<std::string> groups;
};

struct SyntheticSpec {
  double base_rate = 0.114;
  std::size_t feature_dim = 16;
  double bias_strength = 1.0;     // weight of each group's direction in the features
  double signal_strength = 2.0;   // separation of the two label clusters
  double intersectional_boost = 0.0;
  std::size_t size = 20000;
  // Seeds the feature directions, so datasets drawn with different row
  // seeds share one distribution.
  std::uint64_t geometry_seed = 1;
  std::vector<SyntheticIdentity> identities;
  std::vector<SyntheticGroup> groups;  // in declaration order of `identities`

  // Throws ValidationError on out-of-range values or group shares that no
  // joint distribution can honour.
  void validate() const;
};

// Seven groups over gender, race and religion with Jigsaw-like shares and
// toxicity rates.
SyntheticSpec jigsaw_like_spec();

SyntheticSpec parse_synthetic_spec(const nlohmann::json& doc);
SyntheticSpec load_synthetic_spec(const std::filesystem::path& path);
nlohmann::ordered_json to_json(const SyntheticSpec& spec);

// The label is drawn first, then one group (or none) per identity from the
// label-conditional shares, so each group's share and toxicity match the
// spec in expectation. Features are
//   x = N(0, I) + (+-signal/2) e + bias * sum_{g in row} u_g
// with e, u_g random orthonormal directions fixed by `geometry_seed`. Rows with
// memberships in two or more identities flip a negative label to positive
// with probability `intersectional_boost`.
LabeledDataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace debiaskit::fair
