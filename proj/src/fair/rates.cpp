#include "debiaskit/fair/rates.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace debiaskit::fair {

namespace {

void tally(Confusion& c, std::uint8_t label, std::uint8_t prediction) {
  if (label) {
    (prediction ? c.tp : c.fn) += 1;
  } else {
    (prediction ? c.fp : c.tn) += 1;
  }
}

// |reference - rate| when both are defined.
void add_deviation(double& sum, std::optional<double> reference, std::optional<double> rate) {
  if (reference && rate) sum += std::fabs(*reference - *rate);
}

nlohmann::ordered_json rate_json(std::optional<double> rate) {
  return rate ? nlohmann::ordered_json(*rate) : nlohmann::ordered_json(nullptr);
}

nlohmann::ordered_json confusion_json(const Confusion& c) {
  return {{"tp", c.tp}, {"fn", c.fn}, {"fp", c.fp}, {"tn", c.tn}, {"fnr", rate_json(c.fnr())}, {"fpr", rate_json(c.fpr())}};
}

nlohmann::ordered_json difference_json(const EqualityDifference& d) {
  return {{"fned", d.fned}, {"fped", d.fped}, {"total", d.total()}};
}

}  // namespace

std::optional<double> Confusion::fnr() const {
  if (fn + tp == 0) return std::nullopt;
  return static_cast<double>(fn) / static_cast<double>(fn + tp);
}

std::optional<double> Confusion::fpr() const {
  if (fp + tn == 0) return std::nullopt;
  return static_cast<double>(fp) / static_cast<double>(fp + tn);
}

RateTable compute_rates(std::span<const std::uint8_t> predictions, const LabeledDataset& data) {
  if (predictions.size() != data.size()) {
    throw DimensionError(fmt::format("{} predictions for {} rows", predictions.size(), data.size()));
  }
  RateTable table;
  table.groups.resize(data.group_count());
  table.identities.resize(data.identities().size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::uint8_t label = data.labels()[i];
    const std::uint8_t prediction = predictions[i] ? 1 : 0;
    tally(table.overall, label, prediction);
    for (std::size_t g = 0; g < data.group_count(); ++g) {
      if (data.member(i, g)) tally(table.groups[g], label, prediction);
    }
    for (std::size_t t = 0; t < data.identities().size(); ++t) {
      if (data.in_identity(i, t)) tally(table.identities[t], label, prediction);
    }
  }
  return table;
}

BiasReport bias_report(std::span<const std::uint8_t> predictions, const LabeledDataset& data) {
  BiasReport report;
  report.rates = compute_rates(predictions, data);
  report.identities = data.identities();
  report.groups = data.groups();
  const RateTable& r = report.rates;

  if (!r.overall.fnr()) report.warnings.push_back("overall FNR undefined: no positive rows");
  if (!r.overall.fpr()) report.warnings.push_back("overall FPR undefined: no negative rows");

  for (std::size_t t = 0; t < data.identities().size(); ++t) {
    EqualityDifference individual;
    EqualityDifference joint;
    const Confusion& identity = r.identities[t];
    for (std::size_t g : data.groups_of(t)) {
      const Confusion& group = r.groups[g];
      if (!group.fnr()) report.warnings.push_back(fmt::format("FNR of '{}' undefined: no positive rows", data.groups()[g].label()));
      if (!group.fpr()) report.warnings.push_back(fmt::format("FPR of '{}' undefined: no negative rows", data.groups()[g].label()));
      add_deviation(individual.fned, r.overall.fnr(), group.fnr());
      add_deviation(individual.fped, r.overall.fpr(), group.fpr());
      add_deviation(joint.fned, identity.fnr(), group.fnr());
      add_deviation(joint.fped, identity.fpr(), group.fpr());
    }
    report.individual.fned += individual.fned;
    report.individual.fped += individual.fped;
    report.joint.fned += joint.fned;
    report.joint.fped += joint.fped;
    report.individual_by_identity.push_back(individual);
    report.joint_by_identity.push_back(joint);
  }

  const Confusion& c = r.overall;
  const std::size_t n = c.tp + c.fn + c.fp + c.tn;
  report.accuracy = n == 0 ? 0.0 : static_cast<double>(c.tp + c.tn) / static_cast<double>(n);
  const std::size_t f1_denominator = 2 * c.tp + c.fp + c.fn;
  report.f1 = f1_denominator == 0 ? 0.0 : 2.0 * static_cast<double>(c.tp) / static_cast<double>(f1_denominator);
  return report;
}

BiasReport evaluate(std::span<const double> scores, const LabeledDataset& data, double threshold) {
  if (scores.size() != data.size()) throw DimensionError(fmt::format("{} scores for {} rows", scores.size(), data.size()));
  std::vector<std::uint8_t> predictions(scores.size());
  std::transform(scores.begin(), scores.end(), predictions.begin(),
                 [threshold](double s) { return static_cast<std::uint8_t>(s >= threshold ? 1 : 0); });
  BiasReport report = bias_report(predictions, data);
  report.threshold = threshold;
  report.auc = roc_auc(scores, data.labels());
  return report;
}

JointBias joint_bias(const BiasReport& report) {
  return {report.joint.fned, report.joint.fped, report.joint.fned + report.joint.fped};
}

std::optional<double> roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw DimensionError("scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double average_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks i+1 .. j
    for (std::size_t m = i; m < j; ++m) {
      if (labels[order[m]]) {
        positive_rank_sum += average_rank;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) return std::nullopt;
  const double p = static_cast<double>(positives);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(negatives));
}

nlohmann::ordered_json to_json(const BiasReport& report) {
  nlohmann::ordered_json out;
  out["threshold"] = report.threshold;
  out["accuracy"] = report.accuracy;
  out["f1"] = report.f1;
  out["auc"] = report.auc ? nlohmann::ordered_json(*report.auc) : nlohmann::ordered_json(nullptr);
  out["overall"] = confusion_json(report.rates.overall);
  nlohmann::ordered_json groups = nlohmann::ordered_json::object();
  for (std::size_t g = 0; g < report.groups.size(); ++g) groups[report.groups[g].label()] = confusion_json(report.rates.groups[g]);
  out["groups"] = std::move(groups);
  nlohmann::ordered_json identities = nlohmann::ordered_json::object();
  for (std::size_t t = 0; t < report.identities.size(); ++t) {
    nlohmann::ordered_json entry = confusion_json(report.rates.identities[t]);
    entry["individual"] = difference_json(report.individual_by_identity[t]);
    entry["joint"] = difference_json(report.joint_by_identity[t]);
    identities[report.identities[t]] = std::move(entry);
  }
  out["identities"] = std::move(identities);
  out["individual"] = difference_json(report.individual);
  out["joint"] = difference_json(report.joint);
  out["warnings"] = report.warnings;
  return out;
}

}  // namespace debiaskit::fair
