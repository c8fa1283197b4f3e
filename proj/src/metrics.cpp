#include "debiaskit/metrics.hpp"

#include "debiaskit/parallel.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <tuple>

namespace debiaskit {

double cosine_distance(const Vector& u, const Vector& v) {
  if (u.size() != v.size()) throw DimensionError("cosine distance of vectors with different dimensions");
  const double nu = u.norm();
  const double nv = v.norm();
  if (!(nu > 0.0) || !(nv > 0.0)) throw ValidationError("cosine distance of a zero-norm vector");
  return std::clamp(1.0 - u.dot(v) / (nu * nv), 0.0, 2.0);
}

MacResult mac(const EmbeddingStore& store, const EvalSpec& eval) {
  MacResult out;
  ResolvedWords targets = resolve_words(store, eval.targets);
  out.targets = std::move(targets.found_words);
  out.missing_targets = std::move(targets.missing);
  for (const auto& word : out.missing_targets) {
    out.warnings.push_back(fmt::format("target '{}' is not in the vocabulary", word));
  }
  if (out.targets.empty()) {
    throw ValidationError(fmt::format("eval '{}': none of the {} targets is in the vocabulary", eval.identity,
                                      eval.targets.size()));
  }

  std::vector<std::vector<Vector>> attributes;
  for (std::size_t j = 0; j < eval.attribute_sets.size(); ++j) {
    ResolvedWords resolved = resolve_words(store, eval.attribute_sets[j]);
    for (auto& word : resolved.missing) {
      out.warnings.push_back(fmt::format("attribute '{}' is not in the vocabulary", word));
      out.missing_attributes.push_back(std::move(word));
    }
    if (resolved.found.empty()) {
      out.dropped_sets.push_back(j);
      out.warnings.push_back(fmt::format("attribute set {} has no in-vocabulary word and was dropped", j));
      continue;
    }
    out.attribute_sets.push_back(j);
    attributes.push_back(std::move(resolved.found));
  }
  if (attributes.empty()) {
    throw ValidationError(fmt::format("eval '{}': every attribute set is out of vocabulary", eval.identity));
  }

  const auto rows = static_cast<Eigen::Index>(targets.found.size());
  const auto cols = static_cast<Eigen::Index>(attributes.size());
  out.distances.resize(rows, cols);
  parallel_for(targets.found.size(), [&](std::size_t i) {
    const Vector& s = targets.found[i];
    for (Eigen::Index j = 0; j < cols; ++j) {
      const auto& set = attributes[static_cast<std::size_t>(j)];
      double sum = 0.0;
      for (const auto& a : set) sum += cosine_distance(s, a);
      out.distances(static_cast<Eigen::Index>(i), j) = sum / static_cast<double>(set.size());
    }
  });
  double total = 0.0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) total += out.distances(i, j);
  }
  out.mac = total / static_cast<double>(rows * cols);
  return out;
}

std::vector<Analogy> rank_analogies(const Vector& a, const Vector& b, std::span<const NamedVector> pool, std::size_t n,
                                    double delta, std::span<const std::string> excluded) {
  if (n < 1) throw ValidationError("number of analogies must be at least 1");
  const Vector direction = a - b;
  const double direction_norm = direction.norm();
  if (!(direction_norm > 0.0)) throw ValidationError("analogy pair vectors are identical");

  auto is_excluded = [&](const std::string& word) {
    return std::find(excluded.begin(), excluded.end(), word) != excluded.end();
  };
  std::vector<Analogy> candidates;
  for (const auto& x : pool) {
    if (is_excluded(x.word)) continue;
    for (const auto& y : pool) {
      if (x.word == y.word || is_excluded(y.word)) continue;
      const Vector diff = x.vector - y.vector;
      const double diff_norm = diff.norm();
      if (!(diff_norm > 0.0) || diff_norm > delta) continue;
      candidates.push_back({x.word, y.word, direction.dot(diff) / (direction_norm * diff_norm)});
    }
  }
  const std::size_t keep = std::min(n, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end(),
                    [](const Analogy& l, const Analogy& r) {
                      if (l.score != r.score) return l.score > r.score;
                      return std::tie(l.x, l.y) < std::tie(r.x, r.y);
                    });
  candidates.resize(keep);
  return candidates;
}

std::vector<Analogy> top_analogies(const EmbeddingStore& store, const std::string& a, const std::string& b,
                                   std::span<const std::string> pool, std::size_t n, double delta) {
  const auto ia = store.index_of(a);
  const auto ib = store.index_of(b);
  if (!ia) throw ValidationError(fmt::format("analogy word '{}' is not in the vocabulary", a));
  if (!ib) throw ValidationError(fmt::format("analogy word '{}' is not in the vocabulary", b));

  std::vector<NamedVector> candidates;
  for (const auto& word : pool) {
    const auto index = store.index_of(word);
    if (!index) continue;
    const std::string& canonical = store.vocab()[*index];
    const bool seen = std::any_of(candidates.begin(), candidates.end(),
                                  [&](const NamedVector& c) { return c.word == canonical; });
    if (!seen) candidates.push_back({canonical, store.vector(*index)});
  }
  if (candidates.empty()) throw ValidationError("analogy candidate pool has no in-vocabulary word");
  const std::vector<std::string> excluded{store.vocab()[*ia], store.vocab()[*ib]};
  return rank_analogies(store.vector(*ia), store.vector(*ib), candidates, n, delta, excluded);
}

CompareReport compare_report(std::span<const NamedStore> stores, std::span<const EvalSpec> evals) {
  if (stores.size() < 2) throw ValidationError("a comparison needs at least two stores");
  if (evals.empty()) throw ValidationError("a comparison needs at least one eval spec");
  CompareReport report;

  auto in_all = [&](const std::string& word) {
    return std::all_of(stores.begin(), stores.end(), [&](const NamedStore& s) { return s.store->contains(word); });
  };

  for (const auto& eval : evals) {
    EvalSpec common;
    common.identity = eval.identity;
    for (const auto& word : eval.targets) {
      if (in_all(word)) common.targets.push_back(word);
    }
    for (const auto& set : eval.attribute_sets) {
      WordList kept;
      for (const auto& word : set) {
        if (in_all(word)) kept.push_back(word);
      }
      common.attribute_sets.push_back(std::move(kept));
    }
    if (common.targets.empty()) {
      throw ValidationError(fmt::format("eval '{}': no target word is present in every store", eval.identity));
    }

    std::vector<MacResult> results;
    for (const auto& named : stores) {
      MacResult result = mac(*named.store, common);
      for (const auto& w : result.warnings) report.warnings.push_back(fmt::format("{}/{}: {}", named.name, eval.identity, w));
      results.push_back(std::move(result));
    }
    for (const auto& word : eval.targets) {
      if (!in_all(word)) report.warnings.push_back(fmt::format("{}: target '{}' missing from some store", eval.identity, word));
    }

    const MacResult& baseline = results.front();
    for (std::size_t s = 0; s < stores.size(); ++s) {
      CompareRow row;
      row.store = stores[s].name;
      row.identity = eval.identity;
      row.mac = results[s].mac;
      row.mac_delta = results[s].mac - baseline.mac;
      row.test = paired_t_test(baseline.distances, results[s].distances);
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

void write_compare_report(const CompareReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write report '{}'", path.string()));
  if (path.extension() == ".json") {
    nlohmann::ordered_json doc;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : report.rows) {
      nlohmann::ordered_json entry;
      entry["store"] = row.store;
      entry["identity"] = row.identity;
      entry["mac"] = row.mac;
      entry["mac_delta"] = row.mac_delta;
      // JSON has no infinity; a degenerate t is reported through its flag.
      entry["t_stat"] = std::isfinite(row.test.t_statistic) ? nlohmann::ordered_json(row.test.t_statistic)
                                                            : nlohmann::ordered_json(nullptr);
      entry["df"] = row.test.degrees_of_freedom;
      entry["p_value"] = row.test.p_value;
      entry["significant"] = row.test.significant_at_0_05;
      entry["degenerate_variance"] = row.test.degenerate_variance;
      rows.push_back(std::move(entry));
    }
    doc["rows"] = std::move(rows);
    doc["warnings"] = report.warnings;
    out << doc.dump(2) << '\n';
  } else {
    out << "store,identity,mac,t_stat,p_value,significant\n";
    for (const auto& row : report.rows) {
      out << fmt::format("{},{},{:.17g},{:.17g},{:.17g},{}\n", row.store, row.identity, row.mac, row.test.t_statistic,
                         row.test.p_value, row.test.significant_at_0_05 ? "true" : "false");
    }
  }
  if (!out) throw Error(fmt::format("failed while writing '{}'", path.string()));
}

}  // namespace debiaskit
