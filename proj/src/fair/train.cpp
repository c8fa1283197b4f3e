#include "debiaskit/fair/train.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

namespace debiaskit::fair {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

constexpr double kNearFeasible = 1e-3;

struct Population {
  std::vector<std::size_t> positives;
  std::vector<std::size_t> negatives;
};

struct Link {
  std::size_t group = 0;      // population index
  std::size_t reference = 0;  // population index
  bool false_negative = true;
  double tau = 0.0;
};

// Populations: 0 = overall, 1..T = identities, T+1.. = groups.
struct Problem {
  std::vector<Population> populations;
  std::vector<Link> links;
  std::size_t identity_offset = 1;
  std::size_t group_offset = 1;
};

Problem make_problem(const LabeledDataset& data, const std::vector<RateConstraint>& constraints) {
  Problem p;
  const std::size_t identities = data.identities().size();
  p.group_offset = 1 + identities;
  p.populations.resize(1 + identities + data.group_count());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const bool positive = data.labels()[i] != 0;
    auto add = [&](std::size_t pop) { (positive ? p.populations[pop].positives : p.populations[pop].negatives).push_back(i); };
    add(0);
    for (std::size_t t = 0; t < identities; ++t) {
      if (data.in_identity(i, t)) add(p.identity_offset + t);
    }
    for (std::size_t g = 0; g < data.group_count(); ++g) {
      if (data.member(i, g)) add(p.group_offset + g);
    }
  }
  for (const auto& c : constraints) {
    Link link;
    link.false_negative = c.false_negative;
    link.tau = c.tau;
    const auto g = std::find_if(data.groups().begin(), data.groups().end(),
                                [&](const GroupKey& k) { return k.label() == c.group; });
    if (g == data.groups().end()) throw ValidationError(fmt::format("constraint names unknown group '{}'", c.group));
    link.group = p.group_offset + static_cast<std::size_t>(g - data.groups().begin());
    if (c.reference == "overall") {
      link.reference = 0;
    } else {
      const auto t = std::find(data.identities().begin(), data.identities().end(), c.reference);
      if (t == data.identities().end()) {
        throw ValidationError(fmt::format("constraint names unknown identity '{}'", c.reference));
      }
      link.reference = p.identity_offset + static_cast<std::size_t>(t - data.identities().begin());
    }
    p.links.push_back(link);
  }
  return p;
}

Vector logits(const ClassifierParams& params, const LabeledDataset& data) {
  Vector z = data.features() * params.weights;
  z.array() += params.bias;
  return z;
}

// Surrogate rate of every population; NaN where undefined.
struct SurrogateState {
  Vector miss;         // sigmoid(-beta z): soft false negative for a positive row
  Vector alarm;        // sigmoid(+beta z): soft false positive for a negative row
  std::vector<double> fnr;
  std::vector<double> fpr;
};

SurrogateState surrogate_state(const Problem& p, const Vector& z, double beta) {
  SurrogateState s;
  s.miss.resize(z.size());
  s.alarm.resize(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    s.alarm(i) = sigmoid(beta * z(i));
    s.miss(i) = 1.0 - s.alarm(i);
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& pop : p.populations) {
    double sum = 0.0;
    for (std::size_t i : pop.positives) sum += s.miss(static_cast<Eigen::Index>(i));
    s.fnr.push_back(pop.positives.empty() ? nan : sum / static_cast<double>(pop.positives.size()));
    sum = 0.0;
    for (std::size_t i : pop.negatives) sum += s.alarm(static_cast<Eigen::Index>(i));
    s.fpr.push_back(pop.negatives.empty() ? nan : sum / static_cast<double>(pop.negatives.size()));
  }
  return s;
}

double violation(const SurrogateState& s, const Link& link) {
  const auto& rates = link.false_negative ? s.fnr : s.fpr;
  const double v = std::fabs(rates[link.reference] - rates[link.group]);
  return std::isnan(v) ? 0.0 : v;
}

double penalty_value(double excess, double multiplier, double rho) {
  if (excess <= 0.0) return 0.0;
  return multiplier * excess + 0.5 * rho * excess * excess;
}

// Adds d(penalty)/d(z_i) for every row into `coef`.
void accumulate_penalty_gradient(const Problem& p, const SurrogateState& s, const std::vector<double>& multipliers,
                                 double rho, double beta, Vector& coef) {
  for (std::size_t c = 0; c < p.links.size(); ++c) {
    const Link& link = p.links[c];
    const auto& rates = link.false_negative ? s.fnr : s.fpr;
    const double diff = rates[link.reference] - rates[link.group];
    if (std::isnan(diff)) continue;
    const double excess = std::fabs(diff) - link.tau;
    if (excess <= 0.0) continue;
    const double scale = (multipliers[c] + rho * excess) * (diff >= 0.0 ? 1.0 : -1.0);
    auto add = [&](std::size_t pop, double sign) {
      const auto& rows = link.false_negative ? p.populations[pop].positives : p.populations[pop].negatives;
      if (rows.empty()) return;
      const double w = sign * scale * beta / static_cast<double>(rows.size());
      for (std::size_t i : rows) {
        const auto r = static_cast<Eigen::Index>(i);
        // d miss/dz = -beta m (1-m); d alarm/dz = +beta a (1-a)
        const double slope = s.alarm(r) * s.miss(r);
        coef(r) += link.false_negative ? -w * slope : w * slope;
      }
    };
    add(link.reference, 1.0);
    add(link.group, -1.0);
  }
}

double exact_excess(const LabeledDataset& data, const std::vector<std::uint8_t>& predictions, const Problem& p) {
  const RateTable table = compute_rates(predictions, data);
  auto rate = [&](std::size_t pop, bool fnr) -> std::optional<double> {
    const Confusion* c = nullptr;
    if (pop == 0) {
      c = &table.overall;
    } else if (pop < p.group_offset) {
      c = &table.identities[pop - p.identity_offset];
    } else {
      c = &table.groups[pop - p.group_offset];
    }
    return fnr ? c->fnr() : c->fpr();
  };
  double total = 0.0;
  for (const auto& link : p.links) {
    const auto ref = rate(link.reference, link.false_negative);
    const auto grp = rate(link.group, link.false_negative);
    if (ref && grp) total += std::max(0.0, std::fabs(*ref - *grp) - link.tau);
  }
  return total;
}

struct Adam {
  Vector m;
  Vector v;
  std::size_t step = 0;

  explicit Adam(Eigen::Index size) : m(Vector::Zero(size)), v(Vector::Zero(size)) {}

  void apply(Vector& params, const Vector& grad, double lr) {
    constexpr double beta1 = 0.9;
    constexpr double beta2 = 0.999;
    constexpr double eps = 1e-8;
    ++step;
    m = beta1 * m + (1.0 - beta1) * grad;
    v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    params.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  }
};

}  // namespace

std::string_view to_string(ConstraintMode mode) {
  switch (mode) {
    case ConstraintMode::none: return "none";
    case ConstraintMode::uniform: return "uniform";
    case ConstraintMode::joint: return "joint";
  }
  return "unknown";
}

ConstraintMode parse_constraint_mode(std::string_view text) {
  if (text == "none") return ConstraintMode::none;
  if (text == "uniform") return ConstraintMode::uniform;
  if (text == "joint") return ConstraintMode::joint;
  throw ValidationError(fmt::format("unknown constraint mode '{}'", text));
}

std::vector<double> ClassifierParams::scores(const LabeledDataset& data) const {
  if (static_cast<std::size_t>(weights.size()) != data.feature_dim()) {
    throw DimensionError(fmt::format("classifier expects {} features, dataset has {}", weights.size(), data.feature_dim()));
  }
  const Vector z = logits(*this, data);
  std::vector<double> out(static_cast<std::size_t>(z.size()));
  for (Eigen::Index i = 0; i < z.size(); ++i) out[static_cast<std::size_t>(i)] = sigmoid(z(i));
  return out;
}

std::vector<std::uint8_t> ClassifierParams::predict(const LabeledDataset& data) const {
  const std::vector<double> s = scores(data);
  std::vector<std::uint8_t> out(s.size());
  std::transform(s.begin(), s.end(), out.begin(), [this](double v) { return static_cast<std::uint8_t>(v >= threshold); });
  return out;
}

std::vector<RateConstraint> build_constraints(const LabeledDataset& data, const ConstraintConfig& config) {
  if (!(config.tau_fnr >= 0.0) || !(config.tau_fpr >= 0.0)) throw ValidationError("tolerances must be non-negative");
  std::vector<RateConstraint> out;
  if (config.mode == ConstraintMode::none) return out;
  data.require_constrainable(config.identities);
  for (std::size_t t = 0; t < data.identities().size(); ++t) {
    const std::string& identity = data.identities()[t];
    if (!config.identities.empty() &&
        std::find(config.identities.begin(), config.identities.end(), identity) == config.identities.end()) {
      continue;
    }
    const std::string reference = config.mode == ConstraintMode::uniform ? "overall" : identity;
    for (std::size_t g : data.groups_of(t)) {
      out.push_back({data.groups()[g].label(), reference, true, config.tau_fnr, 0.0});
      out.push_back({data.groups()[g].label(), reference, false, config.tau_fpr, 0.0});
    }
  }
  return out;
}

double logistic_loss(const ClassifierParams& params, const LabeledDataset& data) {
  const Vector z = logits(params, data);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    // -log sigmoid(z) for positives, -log(1 - sigmoid(z)) for negatives
    sum += data.labels()[static_cast<std::size_t>(i)] ? softplus(-z(i)) : softplus(z(i));
  }
  return data.size() == 0 ? 0.0 : sum / static_cast<double>(data.size());
}

SurrogateTable surrogate_rates(const ClassifierParams& params, const LabeledDataset& data, double temperature) {
  const Problem p = make_problem(data, {});
  const SurrogateState s = surrogate_state(p, logits(params, data), temperature);
  auto pick = [&](std::size_t pop) {
    SurrogateRates r;
    if (!std::isnan(s.fnr[pop])) r.fnr = s.fnr[pop];
    if (!std::isnan(s.fpr[pop])) r.fpr = s.fpr[pop];
    return r;
  };
  SurrogateTable table;
  table.overall = pick(0);
  for (std::size_t t = 0; t < data.identities().size(); ++t) table.identities.push_back(pick(p.identity_offset + t));
  for (std::size_t g = 0; g < data.group_count(); ++g) table.groups.push_back(pick(p.group_offset + g));
  return table;
}

double penalized_objective(const ClassifierParams& params, const LabeledDataset& data,
                           const std::vector<RateConstraint>& constraints, const TrainHyperparams& hyper) {
  const Problem p = make_problem(data, constraints);
  const SurrogateState s = surrogate_state(p, logits(params, data), hyper.temperature);
  double total = logistic_loss(params, data);
  for (std::size_t c = 0; c < p.links.size(); ++c) {
    total += penalty_value(violation(s, p.links[c]) - p.links[c].tau, constraints[c].multiplier, hyper.penalty_weight);
  }
  return total;
}

TrainResult train_constrained(const LabeledDataset& data, const ConstraintConfig& config,
                              const TrainHyperparams& hyper) {
  if (data.size() == 0) throw ValidationError("cannot train on an empty dataset");
  if (hyper.epochs < 1 || hyper.batch_size < 1) throw ValidationError("epochs and batch size must be positive");
  if (!(hyper.learning_rate > 0.0) || !(hyper.temperature > 0.0)) {
    throw ValidationError("learning rate and temperature must be positive");
  }

  TrainResult result;
  result.constraints = build_constraints(data, config);
  const Problem problem = make_problem(data, result.constraints);
  std::vector<double> multipliers(result.constraints.size(), 0.0);

  const auto n = data.size();
  const auto d = static_cast<Eigen::Index>(data.feature_dim());
  const Matrix& x = data.features();

  std::mt19937_64 rng(hyper.seed);
  std::normal_distribution<double> init(0.0, 0.01);
  // theta = [weights..., bias]
  Vector theta(d + 1);
  for (Eigen::Index j = 0; j < d; ++j) theta(j) = init(rng);
  theta(d) = 0.0;
  Adam adam(d + 1);

  auto as_params = [&](const Vector& t) {
    ClassifierParams params;
    params.weights = t.head(d);
    params.bias = t(d);
    params.threshold = hyper.threshold;
    return params;
  };

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  Vector last_stable = theta;
  std::size_t last_stable_epoch = 0;
  Vector best = theta;
  std::size_t best_epoch = 0;
  double best_exact = std::numeric_limits<double>::infinity();
  double best_loss = std::numeric_limits<double>::infinity();
  double best_surrogate = std::numeric_limits<double>::infinity();
  std::size_t stalled = 0;

  Vector coef(static_cast<Eigen::Index>(n));
  for (std::size_t epoch = 1; epoch <= hyper.epochs && !result.diverged && !result.unsatisfiable; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const double step_size = hyper.learning_rate / std::sqrt(static_cast<double>(epoch));
    for (std::size_t start = 0; start < n; start += hyper.batch_size) {
      const std::size_t end = std::min(n, start + hyper.batch_size);
      const double batch = static_cast<double>(end - start);
      Vector grad = Vector::Zero(d + 1);
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t i = order[k];
        const auto r = static_cast<Eigen::Index>(i);
        const double z = x.row(r).dot(theta.head(d)) + theta(d);
        const double residual = (sigmoid(z) - static_cast<double>(data.labels()[i])) / batch;
        grad.head(d) += residual * x.row(r).transpose();
        grad(d) += residual;
      }
      if (!problem.links.empty()) {
        Vector z = x * theta.head(d);
        z.array() += theta(d);
        const SurrogateState s = surrogate_state(problem, z, hyper.temperature);
        coef.setZero();
        accumulate_penalty_gradient(problem, s, multipliers, hyper.penalty_weight, hyper.temperature, coef);
        grad.head(d) += x.transpose() * coef;
        grad(d) += coef.sum();
      }
      adam.apply(theta, grad, step_size);
      if (!theta.allFinite()) {
        result.diverged = true;
        break;
      }
    }
    if (result.diverged) break;

    const ClassifierParams params = as_params(theta);
    const double loss = logistic_loss(params, data);
    if (!std::isfinite(loss)) {
      result.diverged = true;
      break;
    }
    const std::vector<std::uint8_t> predictions = params.predict(data);
    const BiasReport report = bias_report(predictions, data);
    const JointBias joint = joint_bias(report);

    EpochRecord record;
    record.epoch = epoch;
    record.loss = loss;
    record.f1 = report.f1;
    record.accuracy = report.accuracy;
    record.fned_j = joint.fned_j;
    record.fped_j = joint.fped_j;
    record.total_bias = joint.total;

    if (!problem.links.empty()) {
      const SurrogateState s = surrogate_state(problem, logits(params, data), hyper.temperature);
      for (std::size_t c = 0; c < problem.links.size(); ++c) {
        const double v = violation(s, problem.links[c]);
        record.surrogate_excess += std::max(0.0, v - problem.links[c].tau);
        multipliers[c] = std::max(0.0, multipliers[c] + hyper.penalty_step * (v - problem.links[c].tau));
      }
      record.exact_excess = exact_excess(data, predictions, problem);
    }
    result.trace.push_back(record);
    last_stable = theta;
    last_stable_epoch = epoch;

    if (record.exact_excess < best_exact || (record.exact_excess == best_exact && loss < best_loss)) {
      best = theta;
      best_epoch = epoch;
      best_exact = record.exact_excess;
      best_loss = loss;
    }
    // Patience counts consecutive violating epochs without a 1% improvement;
    // an average excess below kNearFeasible per constraint counts as met.
    if (record.surrogate_excess <= kNearFeasible * static_cast<double>(problem.links.size())) {
      best_surrogate = std::numeric_limits<double>::infinity();
      stalled = 0;
    } else if (record.surrogate_excess < best_surrogate * (1.0 - 1e-2)) {
      best_surrogate = record.surrogate_excess;
      stalled = 0;
    } else if (++stalled >= hyper.patience) {
      result.unsatisfiable = true;
    }
  }

  for (std::size_t c = 0; c < multipliers.size(); ++c) result.constraints[c].multiplier = multipliers[c];
  if (result.unsatisfiable) {
    result.params = as_params(best);
    result.returned_epoch = best_epoch;
  } else {
    result.params = as_params(last_stable);
    result.returned_epoch = last_stable_epoch;
  }
  return result;
}

void write_trace_csv(const std::vector<EpochRecord>& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write trace '{}'", path.string()));
  out << "epoch,loss,f1,accuracy,fned_j,fped_j,total_bias\n";
  for (const auto& r : trace) {
    out << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", r.epoch, r.loss, r.f1, r.accuracy,
                       r.fned_j, r.fped_j, r.total_bias);
  }
  if (!out) throw Error(fmt::format("failed while writing '{}'", path.string()));
}

nlohmann::ordered_json to_json(const TrainResult& result) {
  nlohmann::ordered_json out;
  std::vector<double> weights(result.params.weights.data(), result.params.weights.data() + result.params.weights.size());
  out["weights"] = weights;
  out["bias"] = result.params.bias;
  out["threshold"] = result.params.threshold;
  out["diverged"] = result.diverged;
  out["unsatisfiable"] = result.unsatisfiable;
  out["best_feasible_returned"] = result.unsatisfiable;
  out["returned_epoch"] = result.returned_epoch;
  out["epochs_run"] = result.trace.size();
  nlohmann::ordered_json constraints = nlohmann::ordered_json::array();
  for (const auto& c : result.constraints) {
    constraints.push_back({{"group", c.group},
                           {"reference", c.reference},
                           {"rate", c.false_negative ? "fnr" : "fpr"},
                           {"tau", c.tau},
                           {"multiplier", c.multiplier}});
  }
  out["constraints"] = std::move(constraints);
  nlohmann::ordered_json trace = nlohmann::ordered_json::array();
  for (const auto& r : result.trace) {
    trace.push_back({{"epoch", r.epoch},
                     {"loss", r.loss},
                     {"f1", r.f1},
                     {"accuracy", r.accuracy},
                     {"fned_j", r.fned_j},
                     {"fped_j", r.fped_j},
                     {"total_bias", r.total_bias},
                     {"surrogate_excess", r.surrogate_excess},
                     {"exact_excess", r.exact_excess}});
  }
  out["trace"] = std::move(trace);
  return out;
}

}  // namespace debiaskit::fair
