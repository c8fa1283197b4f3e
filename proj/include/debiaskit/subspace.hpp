#pragma once

#include "debiaskit/embedding_store.hpp"
#include "debiaskit/lexicon.hpp"
#include "debiaskit/types.hpp"

#include <json.hpp>

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace debiaskit {

inline constexpr std::size_t kDefaultComponents = 2;
inline constexpr double kGramSchmidtDropTolerance = 1e-8;

// Top-k principal directions of an identity's centered defining sets.
struct BiasSubspace {
  std::string identity;
  Matrix basis;                     // k x d, orthonormal rows
  std::vector<double> eigenvalues;  // scatter eigenvalues, descending
  std::vector<std::string> missing_words;

  std::size_t k() const { return static_cast<std::size_t>(basis.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(basis.cols()); }
};

struct JointSubspace {
  std::vector<std::pair<std::string, std::size_t>> sources;  // (identity, k) in input order
  Matrix basis;                                              // row concatenation of the sources
  Matrix orthonormal_basis;                                  // r x d, r <= sum of k

  std::size_t rank() const { return static_cast<std::size_t>(orthonormal_basis.rows()); }
};

// PCA over the defining sets of `identity`: each set is centered on its own
// mean, the centered vectors are stacked, and the top-k eigenvectors of the
// d x d scatter matrix are returned. Every component is sign-fixed so that
// its largest-magnitude coordinate is positive.
//
// Throws ValidationError when a defining set resolves to fewer than two
// in-vocabulary words, or when k exceeds d or the number of stacked vectors.
BiasSubspace identify_subspace(const EmbeddingStore& store, const Identity& identity,
                               std::size_t k = kDefaultComponents);

// Same PCA on explicit vectors; each inner list is one defining set.
BiasSubspace principal_subspace(std::span<const std::vector<Vector>> defining_sets, std::size_t k);

// Concatenates bases in order and orthonormalizes the result with modified
// Gram-Schmidt, dropping rows whose residual norm falls below 1e-8.
JointSubspace join_subspaces(std::span<const BiasSubspace> subspaces);

Matrix orthonormalize_rows(const Matrix& rows, double drop_tolerance = kGramSchmidtDropTolerance);

// Component of w inside the span of the orthonormal rows of `basis`.
Vector project(const Vector& w, const Matrix& basis);

// Principal angles in radians, ascending. Both bases must have orthonormal
// rows. Cosines come from the singular values of A * B^T; angles whose cosine
// is above 1/sqrt(2) are taken from the matching sines instead, which keeps
// nearly-parallel directions accurate.
std::vector<double> principal_angles(const Matrix& a, const Matrix& b);
inline std::vector<double> principal_angles(const BiasSubspace& a, const BiasSubspace& b) {
  return principal_angles(a.basis, b.basis);
}

nlohmann::ordered_json to_json(const BiasSubspace& subspace);

}  // namespace debiaskit
