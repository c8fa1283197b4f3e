#pragma once

#include "debiaskit/fair/dataset.hpp"
#include "debiaskit/fair/rates.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace debiaskit::fair {

// none:    plain logistic regression
// uniform: every group against the global FNR/FPR
// joint:   every group against the FNR/FPR of its own identity
enum class ConstraintMode { none, uniform, joint };

std::string_view to_string(ConstraintMode mode);
ConstraintMode parse_constraint_mode(std::string_view text);

struct ConstraintConfig {
  ConstraintMode mode = ConstraintMode::joint;
  double tau_fnr = 0.02;
  double tau_fpr = 0.03;
  std::vector<std::string> identities;  // empty: every identity in the data
};

struct TrainHyperparams {
  double learning_rate = 0.05;
  std::size_t epochs = 25;
  std::size_t batch_size = 256;
  double penalty_step = 5.0;     // dual ascent rate for the multipliers
  double penalty_weight = 10.0;  // quadratic term on the excess violation
  double temperature = 10.0;     // sharpness of the sigmoid rate surrogate
  std::size_t patience = 8;      // epochs without progress before giving up
  std::uint64_t seed = 7;
  double threshold = kDecisionThreshold;
};

struct ClassifierParams {
  Vector weights;
  double bias = 0.0;
  double threshold = kDecisionThreshold;

  std::vector<double> scores(const LabeledDataset& data) const;
  std::vector<std::uint8_t> predict(const LabeledDataset& data) const;
};

// One rate constraint |rate(reference) - rate(group)| < tau.
struct RateConstraint {
  std::string group;
  std::string reference;  // "overall" or an identity name
  bool false_negative = true;
  double tau = 0.0;
  double multiplier = 0.0;
};

// Builds the constraint list for `config` over the groups in `data`.
std::vector<RateConstraint> build_constraints(const LabeledDataset& data, const ConstraintConfig& config);

struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  double fned_j = 0.0;
  double fped_j = 0.0;
  double total_bias = 0.0;
  double surrogate_excess = 0.0;  // sum over constraints of max(0, violation - tau)
  double exact_excess = 0.0;      // same, with hard-threshold rates
};

struct TrainResult {
  ClassifierParams params;
  std::vector<EpochRecord> trace;
  std::vector<RateConstraint> constraints;  // final multipliers
  bool diverged = false;
  bool unsatisfiable = false;
  std::size_t returned_epoch = 0;  // epoch whose parameters were returned
};

// Logistic regression trained with Adam on minibatches, plus a penalty
//   sum_c lambda_c * max(0, v_c - tau_c) + rho/2 * max(0, v_c - tau_c)^2
// where v_c is the deviation of sigmoid-smoothed rates computed over the
// whole training set. Multipliers follow one dual ascent step per epoch,
//   lambda_c <- max(0, lambda_c + eta * (v_c - tau_c)).
// Training stops early on a non-finite loss (returning the last stable
// parameters) or when the surrogate excess stops improving for `patience`
// epochs (returning the least-violating parameters seen).
TrainResult train_constrained(const LabeledDataset& data, const ConstraintConfig& config,
                              const TrainHyperparams& hyper);

// Mean binary cross-entropy.
double logistic_loss(const ClassifierParams& params, const LabeledDataset& data);

struct SurrogateRates {
  std::optional<double> fnr;
  std::optional<double> fpr;
};

struct SurrogateTable {
  SurrogateRates overall;
  std::vector<SurrogateRates> groups;
  std::vector<SurrogateRates> identities;
};

// Rates with each hard decision replaced by sigmoid(+-temperature * logit).
SurrogateTable surrogate_rates(const ClassifierParams& params, const LabeledDataset& data, double temperature);

// Logistic loss plus the constraint penalty at fixed parameters.
double penalized_objective(const ClassifierParams& params, const LabeledDataset& data,
                           const std::vector<RateConstraint>& constraints, const TrainHyperparams& hyper);

// Columns: epoch,loss,f1,accuracy,fned_j,fped_j,total_bias
void write_trace_csv(const std::vector<EpochRecord>& trace, const std::filesystem::path& path);

nlohmann::ordered_json to_json(const TrainResult& result);

}  // namespace debiaskit::fair
