#pragma once

#include "debiaskit/embedding_store.hpp"
#include "debiaskit/lexicon.hpp"
#include "debiaskit/ttest.hpp"
#include "debiaskit/types.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace debiaskit {

inline constexpr double kDefaultAnalogyDelta = 1.0;

// 1 - u.v / (|u| |v|), clamped to [0, 2]. Throws on a zero-norm input.
double cosine_distance(const Vector& u, const Vector& v);

struct MacResult {
  double mac = 0.0;
  // distances(i, j) is the mean cosine distance from target i to attribute set j.
  Matrix distances;
  std::vector<std::string> targets;         // resolved targets, row order
  std::vector<std::size_t> attribute_sets;  // indices of the sets kept, column order
  std::vector<std::string> missing_targets;
  std::vector<std::string> missing_attributes;
  std::vector<std::size_t> dropped_sets;
  std::vector<std::string> warnings;
};

// Mean average cosine distance of the eval targets to the attribute sets.
// OOV words are skipped and reported; an attribute set with no resolvable
// word is dropped. Throws when no target or no attribute set survives.
MacResult mac(const EmbeddingStore& store, const EvalSpec& eval);

struct Analogy {
  std::string x;
  std::string y;
  double score = 0.0;
};

struct NamedVector {
  std::string word;
  Vector vector;
};

// Ranks ordered pairs (x, y) from `pool` by cos(a - b, x - y). Pairs are
// kept only when x != y, both differ from the excluded words and
// 0 < |x - y| <= delta. Ties fall back to lexicographic (x, y).
std::vector<Analogy> rank_analogies(const Vector& a, const Vector& b, std::span<const NamedVector> pool, std::size_t n,
                                    double delta = kDefaultAnalogyDelta,
                                    std::span<const std::string> excluded = {});

// "a is to x as b is to y" over a caller-supplied candidate pool. OOV pool
// words are ignored; throws when a or b is OOV or no pool word resolves.
std::vector<Analogy> top_analogies(const EmbeddingStore& store, const std::string& a, const std::string& b,
                                   std::span<const std::string> pool, std::size_t n,
                                   double delta = kDefaultAnalogyDelta);

struct NamedStore {
  std::string name;
  const EmbeddingStore* store = nullptr;
};

struct CompareRow {
  std::string store;
  std::string identity;
  double mac = 0.0;
  double mac_delta = 0.0;  // relative to the first store
  TTestResult test;        // against the first store
};

struct CompareReport {
  std::vector<CompareRow> rows;  // identity-major, stores in input order
  std::vector<std::string> warnings;
};

// MAC of every eval spec in every store plus paired t-tests of each store's
// per-pair distances against the first store. Each eval spec is first
// restricted to words present in all stores so the distance matrices pair up.
CompareReport compare_report(std::span<const NamedStore> stores, std::span<const EvalSpec> evals);

// CSV (store,identity,mac,t_stat,p_value,significant) unless the path ends in .json.
void write_compare_report(const CompareReport& report, const std::filesystem::path& path);

}  // namespace debiaskit
