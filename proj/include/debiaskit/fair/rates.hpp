#pragma once

#include "debiaskit/fair/dataset.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace debiaskit::fair {

inline constexpr double kDecisionThreshold = 0.5;

struct Confusion {
  std::size_t tp = 0;
  std::size_t fn = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;

  // Undefined (nullopt) when the population has no positives / negatives.
  std::optional<double> fnr() const;
  std::optional<double> fpr() const;
};

struct RateTable {
  Confusion overall;
  std::vector<Confusion> groups;      // aligned with LabeledDataset::groups()
  std::vector<Confusion> identities;  // rows in any group of the identity
};

RateTable compute_rates(std::span<const std::uint8_t> predictions, const LabeledDataset& data);

struct EqualityDifference {
  double fned = 0.0;
  double fped = 0.0;
  double total() const { return fned + fped; }
};

struct BiasReport {
  RateTable rates;
  std::vector<std::string> identities;
  std::vector<GroupKey> groups;
  // Deviations from the global rates, per identity and summed.
  std::vector<EqualityDifference> individual_by_identity;
  EqualityDifference individual;
  // Deviations from each identity's own rates, per identity and summed.
  std::vector<EqualityDifference> joint_by_identity;
  EqualityDifference joint;
  double accuracy = 0.0;
  double f1 = 0.0;
  std::optional<double> auc;
  double threshold = kDecisionThreshold;
  std::vector<std::string> warnings;
};

// Rate tables plus both families of equality differences. Groups with an
// undefined rate are left out of the sums and reported in `warnings`.
BiasReport bias_report(std::span<const std::uint8_t> predictions, const LabeledDataset& data);

// Same, thresholding `scores` (probabilities) and adding the AUC.
BiasReport evaluate(std::span<const double> scores, const LabeledDataset& data, double threshold = kDecisionThreshold);

struct JointBias {
  double fned_j = 0.0;
  double fped_j = 0.0;
  double total = 0.0;
};

// Sum over identities t and groups G_tj of |rate(G_t) - rate(G_tj)|.
JointBias joint_bias(const BiasReport& report);

// Rank-based AUC with ties counted as one half; nullopt when a class is absent.
std::optional<double> roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

nlohmann::ordered_json to_json(const BiasReport& report);

}  // namespace debiaskit::fair
