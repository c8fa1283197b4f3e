#pragma once

#include "debiaskit/embedding_store.hpp"
#include "debiaskit/fair/dataset.hpp"
#include "debiaskit/fair/synthetic.hpp"
#include "debiaskit/lexicon.hpp"

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace fixtures {

using debiaskit::EmbeddingStore;
using debiaskit::Matrix;
using debiaskit::Vector;

Vector gaussian_vector(std::size_t d, std::mt19937_64& rng, double scale = 1.0);

// n words "<prefix><i>" with standard normal coordinates (normalized on load).
EmbeddingStore random_store(std::size_t n, std::size_t d, std::uint64_t seed, const std::string& prefix = "w");

// Identity whose defining and equality sets are the given word pairs.
debiaskit::Identity pair_identity(const std::string& name, const std::vector<std::pair<std::string, std::string>>& pairs);

// Store of random words where each listed pair is pulled apart along a
// planted direction. Returns the store and the identity over those pairs.
struct PlantedIdentity {
  EmbeddingStore store;
  debiaskit::Identity identity;
};
PlantedIdentity planted_identity_store(std::size_t n, std::size_t d, std::size_t pairs, std::uint64_t seed);

// Two identities whose planted directions meet at 20 degrees, sharing a
// common component with the attribute words. Used to compare sequential and
// joint debiasing on the second identity.
struct OverlapFixture {
  EmbeddingStore store;
  debiaskit::IdentityTaxonomy taxonomy;  // "first", "second"
  debiaskit::EvalSpec eval;              // targets: second identity's words
  double planted_angle_degrees = 20.0;
};
OverlapFixture overlap_fixture(std::uint64_t seed);

// Ten rows, six groups over three identities, with fixed predictions.
struct SmallRates {
  debiaskit::fair::LabeledDataset data;
  std::vector<std::uint8_t> predictions;
};
SmallRates ten_row_dataset();

// Three identities, seven groups, toxicity rates that differ sharply within
// each identity so an unconstrained classifier picks up group bias.
debiaskit::fair::SyntheticSpec planted_bias_spec();

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// JSON documents in the formats read by the loaders.
std::string taxonomy_json(const debiaskit::IdentityTaxonomy& taxonomy);
std::string eval_json(const debiaskit::EvalSpec& eval);

// Runs the command-line tool with `args`, stderr going to `log`. `env` is a
// "NAME=value" prefix for the shell, or empty.
int run_tool(const std::string& binary, const std::vector<std::string>& args, const std::filesystem::path& log,
             const std::string& env = {});

void write_file(const std::filesystem::path& path, const std::string& text);
std::string read_file(const std::filesystem::path& path);

}  // namespace fixtures
