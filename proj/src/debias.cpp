#include "debiaskit/debias.hpp"

#include "debiaskit/parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace debiaskit {

namespace {

struct PassOutput {
  Matrix vectors;
  std::vector<WordStatus> status;
  PassSummary summary;
};

std::vector<const Identity*> lookup_identities(const IdentityTaxonomy& taxonomy, std::span<const std::string> names) {
  std::vector<const Identity*> out;
  for (const auto& name : names) out.push_back(&taxonomy.find(name));
  return out;
}

// One neutralize + equalize sweep against an orthonormal basis. Equality
// sets of every identity in `identities` are equalized; all other words are
// neutralized.
PassOutput run_pass(const EmbeddingStore& store, const Matrix& basis, std::span<const Identity* const> identities,
                    std::vector<std::string>& warnings, std::set<std::string>& oov) {
  PassOutput out;
  out.vectors = store.matrix();
  out.status.assign(store.size(), WordStatus::neutralized);
  out.summary.basis_rank = static_cast<std::size_t>(basis.rows());
  for (const Identity* identity : identities) out.summary.identities.push_back(identity->name);

  struct ResolvedSet {
    std::string identity;
    std::size_t set_index;
    std::vector<std::size_t> members;
  };
  std::vector<ResolvedSet> sets;
  std::vector<char> is_equality(store.size(), 0);
  for (const Identity* identity : identities) {
    for (std::size_t s = 0; s < identity->equality_sets.size(); ++s) {
      ResolvedWords resolved = resolve_words(store, identity->equality_sets[s]);
      for (auto& word : resolved.missing) oov.insert(std::move(word));
      for (std::size_t index : resolved.found_indices) is_equality[index] = 1;
      sets.push_back({identity->name, s, std::move(resolved.found_indices)});
    }
  }

  std::vector<char> degenerate(store.size(), 0);
  parallel_for(store.size(), [&](std::size_t i) {
    if (is_equality[i]) return;
    if (auto w = neutralize(store.vector(i), basis)) {
      out.vectors.row(static_cast<Eigen::Index>(i)) = w->transpose();
    } else {
      degenerate[i] = 1;
    }
  });
  for (std::size_t i = 0; i < store.size(); ++i) {
    if (is_equality[i]) continue;
    if (degenerate[i]) {
      out.status[i] = WordStatus::skipped_degenerate;
      warnings.push_back(fmt::format("'{}' lies inside the bias subspace and was left unchanged", store.vocab()[i]));
    }
  }

  for (const auto& set : sets) {
    std::vector<std::size_t> members = set.members;
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    if (members.size() < 2) {
      warnings.push_back(fmt::format("identity '{}': equality set {} has {} in-vocabulary word(s), skipped",
                                     set.identity, set.set_index, members.size()));
      for (std::size_t index : members) out.status[index] = WordStatus::skipped_degenerate;
      continue;
    }
    // Keep the declared order of the set for the equalize call.
    std::vector<std::size_t> ordered;
    for (std::size_t index : set.members) {
      if (std::find(ordered.begin(), ordered.end(), index) == ordered.end()) ordered.push_back(index);
    }
    std::vector<Vector> vectors;
    for (std::size_t index : ordered) vectors.push_back(out.vectors.row(static_cast<Eigen::Index>(index)).transpose());
    const EqualizeOutcome result = equalize(vectors, basis);
    if (result.clamped) {
      warnings.push_back(fmt::format("identity '{}': equality set {} needed a clamped square root", set.identity,
                                     set.set_index));
    }
    if (result.degenerate) {
      warnings.push_back(fmt::format("identity '{}': equality set {} is degenerate in the subspace, skipped",
                                     set.identity, set.set_index));
      for (std::size_t index : ordered) out.status[index] = WordStatus::skipped_degenerate;
      continue;
    }
    for (std::size_t m = 0; m < ordered.size(); ++m) {
      out.vectors.row(static_cast<Eigen::Index>(ordered[m])) = result.vectors[m].transpose();
      out.status[ordered[m]] = WordStatus::equalized;
    }
  }

  for (WordStatus status : out.status) {
    switch (status) {
      case WordStatus::neutralized: ++out.summary.neutralized; break;
      case WordStatus::equalized: ++out.summary.equalized; break;
      case WordStatus::skipped_degenerate: ++out.summary.skipped_degenerate; break;
      case WordStatus::skipped_oov: break;
    }
  }
  return out;
}

std::vector<StatusConflict> find_conflicts(const EmbeddingStore& store, std::span<const Identity* const> identities) {
  std::vector<std::unordered_set<std::string>> equality_words;
  for (const Identity* identity : identities) {
    auto& words = equality_words.emplace_back();
    for (const auto& set : identity->equality_sets) {
      for (const auto& word : set) {
        if (store.contains(word)) words.insert(nfc(word));
      }
    }
  }
  std::vector<StatusConflict> conflicts;
  for (std::size_t a = 0; a < identities.size(); ++a) {
    std::vector<std::string> sorted(equality_words[a].begin(), equality_words[a].end());
    std::sort(sorted.begin(), sorted.end());
    for (const auto& word : sorted) {
      for (std::size_t b = 0; b < identities.size(); ++b) {
        if (b != a && !equality_words[b].contains(word)) {
          conflicts.push_back({word, identities[a]->name, identities[b]->name});
        }
      }
    }
  }
  return conflicts;
}

}  // namespace

std::string_view to_string(DebiasMode mode) {
  switch (mode) {
    case DebiasMode::single: return "single";
    case DebiasMode::sequential: return "sequential";
    case DebiasMode::joint: return "joint";
  }
  return "unknown";
}

std::string_view to_string(WordStatus status) {
  switch (status) {
    case WordStatus::neutralized: return "neutralized";
    case WordStatus::equalized: return "equalized";
    case WordStatus::skipped_oov: return "skipped-oov";
    case WordStatus::skipped_degenerate: return "skipped-degenerate";
  }
  return "unknown";
}

DebiasMode parse_debias_mode(std::string_view text) {
  if (text == "single") return DebiasMode::single;
  if (text == "sequential") return DebiasMode::sequential;
  if (text == "joint") return DebiasMode::joint;
  throw ValidationError(fmt::format("unknown debias mode '{}'", text));
}

std::size_t DebiasPlan::components_for(std::size_t identity_index) const {
  if (components.empty()) return kDefaultComponents;
  if (components.size() == 1) return components.front();
  return components.at(identity_index);
}

std::optional<Vector> neutralize(const Vector& w, const Matrix& basis) {
  Vector residual = w - project(w, basis);
  const double norm = residual.norm();
  if (!(norm > kDegenerateNorm)) return std::nullopt;
  residual /= norm;
  // A second projection removes what cancellation left behind when most of
  // w was inside the subspace.
  residual -= project(residual, basis);
  return Vector(residual.normalized());
}

EqualizeOutcome equalize(std::span<const Vector> members, const Matrix& basis) {
  if (members.size() < 2) throw ValidationError("equalize needs at least two vectors");
  const Eigen::Index d = basis.cols();
  Vector mean = Vector::Zero(d);
  for (const auto& w : members) {
    if (w.size() != d) throw DimensionError("equality-set vector and basis disagree on dimension");
    mean += w;
  }
  mean /= static_cast<double>(members.size());
  const Vector mean_bias = project(mean, basis);
  const Vector center = mean - mean_bias;

  EqualizeOutcome out;
  double spread_sq = 1.0 - center.squaredNorm();
  if (spread_sq < 0.0) {
    out.clamped = true;
    spread_sq = 0.0;
  }
  const double spread = std::sqrt(spread_sq);

  out.vectors.reserve(members.size());
  for (const auto& w : members) {
    const Vector offset = project(w, basis) - mean_bias;
    const double norm = offset.norm();
    if (!(norm > kDegenerateNorm)) {
      out.vectors.clear();
      out.degenerate = true;
      return out;
    }
    out.vectors.push_back(center + spread * offset / norm);
  }
  return out;
}

DebiasResult hard_debias(const EmbeddingStore& store, const IdentityTaxonomy& taxonomy, const DebiasPlan& plan) {
  if (plan.identities.empty()) throw ValidationError("debias plan names no identities");
  if (plan.mode == DebiasMode::single && plan.identities.size() != 1) {
    throw ValidationError(fmt::format("single mode takes exactly one identity, got {}", plan.identities.size()));
  }
  if (plan.components.size() > 1 && plan.components.size() != plan.identities.size()) {
    throw ValidationError("per-identity k list must match the identity list");
  }
  {
    std::set<std::string> distinct(plan.identities.begin(), plan.identities.end());
    if (distinct.size() != plan.identities.size()) throw ValidationError("debias plan repeats an identity");
  }
  const std::vector<const Identity*> identities = lookup_identities(taxonomy, plan.identities);

  DebiasReport report;
  report.mode = plan.mode;
  report.order = plan.identities;
  std::set<std::string> oov;

  EmbeddingStore current = store;
  std::vector<WordStatus> status(store.size(), WordStatus::neutralized);

  auto record_missing = [&](const BiasSubspace& subspace) {
    for (const auto& word : subspace.missing_words) oov.insert(word);
  };

  if (plan.mode == DebiasMode::joint) {
    std::vector<BiasSubspace> subspaces;
    for (std::size_t i = 0; i < identities.size(); ++i) {
      subspaces.push_back(identify_subspace(store, *identities[i], plan.components_for(i)));
      record_missing(subspaces.back());
      report.subspaces.push_back({0, subspaces.back()});
    }
    const JointSubspace joint = join_subspaces(subspaces);
    if (joint.rank() < static_cast<std::size_t>(joint.basis.rows())) {
      report.warnings.push_back(fmt::format("joint basis has rank {} of {} rows; dependent directions dropped",
                                            joint.rank(), joint.basis.rows()));
    }
    PassOutput pass = run_pass(store, joint.orthonormal_basis, identities, report.warnings, oov);
    current = store.with_vectors(std::move(pass.vectors));
    status = std::move(pass.status);
    report.passes.push_back(std::move(pass.summary));
  } else {
    for (std::size_t i = 0; i < identities.size(); ++i) {
      BiasSubspace subspace = identify_subspace(current, *identities[i], plan.components_for(i));
      record_missing(subspace);
      const std::span<const Identity* const> one(&identities[i], 1);
      PassOutput pass = run_pass(current, subspace.basis, one, report.warnings, oov);
      report.subspaces.push_back({i, std::move(subspace)});
      current = current.with_vectors(std::move(pass.vectors));
      status = std::move(pass.status);
      report.passes.push_back(std::move(pass.summary));
    }
  }

  if (identities.size() > 1) report.conflicts = find_conflicts(store, identities);
  report.status = std::move(status);
  report.oov_words.assign(oov.begin(), oov.end());
  for (const auto& word : report.oov_words) report.warnings.push_back(fmt::format("'{}' is not in the vocabulary", word));
  return {std::move(current), std::move(report)};
}

nlohmann::ordered_json to_json(const DebiasReport& report, const EmbeddingStore& store) {
  nlohmann::ordered_json out;
  out["mode"] = to_string(report.mode);
  out["order"] = report.order;

  nlohmann::ordered_json subspaces = nlohmann::ordered_json::array();
  for (const auto& record : report.subspaces) {
    nlohmann::ordered_json entry;
    entry["pass"] = record.pass;
    entry["identity"] = record.subspace.identity;
    entry["k"] = record.subspace.k();
    entry["eigenvalues"] = record.subspace.eigenvalues;
    subspaces.push_back(std::move(entry));
  }
  out["subspaces"] = std::move(subspaces);

  nlohmann::ordered_json passes = nlohmann::ordered_json::array();
  for (const auto& pass : report.passes) {
    passes.push_back({{"identities", pass.identities},
                      {"basis_rank", pass.basis_rank},
                      {"neutralized", pass.neutralized},
                      {"equalized", pass.equalized},
                      {"skipped_degenerate", pass.skipped_degenerate}});
  }
  out["passes"] = std::move(passes);

  nlohmann::ordered_json conflicts = nlohmann::ordered_json::array();
  const std::string_view resolution = report.mode == DebiasMode::joint ? "equalized" : "per-pass";
  for (const auto& c : report.conflicts) {
    conflicts.push_back(
        {{"word", c.word}, {"equalized_for", c.equalized_for}, {"neutral_for", c.neutral_for}, {"resolution", resolution}});
  }
  out["conflicts"] = std::move(conflicts);
  out["warnings"] = report.warnings;

  nlohmann::ordered_json status = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < report.status.size() && i < store.size(); ++i) {
    status[store.vocab()[i]] = to_string(report.status[i]);
  }
  for (const auto& word : report.oov_words) {
    if (!status.contains(word)) status[word] = to_string(WordStatus::skipped_oov);
  }
  out["status"] = std::move(status);
  return out;
}

}  // namespace debiaskit
