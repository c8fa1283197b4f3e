#pragma once

#include "debiaskit/embedding_store.hpp"
#include "debiaskit/lexicon.hpp"
#include "debiaskit/subspace.hpp"

#include <json.hpp>

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace debiaskit {

inline constexpr double kDegenerateNorm = 1e-10;

enum class DebiasMode { single, sequential, joint };
enum class WordStatus { neutralized, equalized, skipped_oov, skipped_degenerate };

std::string_view to_string(DebiasMode mode);
std::string_view to_string(WordStatus status);
DebiasMode parse_debias_mode(std::string_view text);

struct DebiasPlan {
  DebiasMode mode = DebiasMode::single;
  // Order matters for sequential mode and for the joint basis layout.
  std::vector<std::string> identities;
  // Empty: default k for every identity. One entry: shared by all identities.
  std::vector<std::size_t> components;

  std::size_t components_for(std::size_t identity_index) const;
};

struct SubspaceRecord {
  std::size_t pass = 0;
  BiasSubspace subspace;
};

struct PassSummary {
  std::vector<std::string> identities;
  std::size_t basis_rank = 0;
  std::size_t neutralized = 0;
  std::size_t equalized = 0;
  std::size_t skipped_degenerate = 0;
};

// A word that one identity equalizes while another treats it as neutral.
struct StatusConflict {
  std::string word;
  std::string equalized_for;
  std::string neutral_for;
};

struct DebiasReport {
  DebiasMode mode = DebiasMode::single;
  std::vector<std::string> order;
  std::vector<WordStatus> status;      // one entry per vocabulary word, final pass wins
  std::vector<std::string> oov_words;  // lexicon words missing from the store
  std::vector<SubspaceRecord> subspaces;
  std::vector<PassSummary> passes;
  std::vector<StatusConflict> conflicts;
  std::vector<std::string> warnings;
};

struct DebiasResult {
  EmbeddingStore store;
  DebiasReport report;
};

// (w - w_B) / |w - w_B|. Returns nullopt when w lies in the subspace.
std::optional<Vector> neutralize(const Vector& w, const Matrix& basis);

struct EqualizeOutcome {
  std::vector<Vector> vectors;  // empty when the set is degenerate
  bool degenerate = false;
  bool clamped = false;  // |mu - mu_B| exceeded 1 and the square root was clamped at 0
};

// Re-centers an equality set on the subspace-free part of its mean and
// spreads the members symmetrically inside the subspace:
//   w' = (mu - mu_B) + sqrt(1 - |mu - mu_B|^2) (w_B - mu_B) / |w_B - mu_B|
// Needs at least two vectors. A member whose bias component coincides with
// mu_B makes the whole set degenerate.
EqualizeOutcome equalize(std::span<const Vector> members, const Matrix& basis);

// Hard debiasing of `store` for the identities in `plan`.
//   single:     one identity, neutralize + equalize against its subspace
//   sequential: single passes folded in order; each subspace is identified
//               on the output of the previous pass
//   joint:      all subspaces identified on the input store, concatenated,
//               orthonormalized, then one neutralize + equalize pass
DebiasResult hard_debias(const EmbeddingStore& store, const IdentityTaxonomy& taxonomy, const DebiasPlan& plan);

nlohmann::ordered_json to_json(const DebiasReport& report, const EmbeddingStore& store);

}  // namespace debiaskit
