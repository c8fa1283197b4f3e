#pragma once

#include "debiaskit/types.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace debiaskit {

enum class EmbeddingFormat { text, binary };

// Picks binary for a ".bin" extension, text otherwise.
EmbeddingFormat format_from_path(const std::filesystem::path& path);

// Unicode NFC normalization of a UTF-8 token. ASCII input is returned as is.
std::string nfc(std::string_view token);

// Vocabulary-indexed matrix of unit-norm word vectors.
//
// The store is immutable once built. Every row is L2-normalized on
// construction, tokens are NFC-normalized and must be distinct. Lookups
// normalize the query the same way, comparison is otherwise case-sensitive.
class EmbeddingStore {
 public:
  EmbeddingStore(std::vector<std::string> vocab, Matrix vectors);

  std::size_t size() const { return vocab_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(vectors_.cols()); }

  const std::vector<std::string>& vocab() const { return vocab_; }
  const Matrix& matrix() const { return vectors_; }

  std::optional<std::size_t> index_of(std::string_view token) const;
  bool contains(std::string_view token) const { return index_of(token).has_value(); }

  Matrix::ConstRowXpr row(std::size_t index) const { return vectors_.row(static_cast<Eigen::Index>(index)); }
  Vector vector(std::size_t index) const { return row(index).transpose(); }

  // New store over the same vocabulary; rows are re-normalized.
  EmbeddingStore with_vectors(Matrix vectors) const;

 private:
  std::vector<std::string> vocab_;
  Matrix vectors_;
  std::unordered_map<std::string, std::size_t> index_;
};

EmbeddingStore load_embeddings(const std::filesystem::path& path, EmbeddingFormat format);
inline EmbeddingStore load_embeddings(const std::filesystem::path& path) {
  return load_embeddings(path, format_from_path(path));
}

// Text output uses 17 significant digits so a reload reproduces every double.
// Binary output narrows to 32-bit floats.
void save_embeddings(const EmbeddingStore& store, const std::filesystem::path& path, EmbeddingFormat format);
inline void save_embeddings(const EmbeddingStore& store, const std::filesystem::path& path) {
  save_embeddings(store, path, format_from_path(path));
}

struct ResolvedWords {
  std::vector<std::string> found_words;
  std::vector<Vector> found;
  std::vector<std::size_t> found_indices;
  std::vector<std::string> missing;
};

// Order-preserving split of `words` into in-vocabulary vectors and OOV words.
ResolvedWords resolve_words(const EmbeddingStore& store, std::span<const std::string> words);

}  // namespace debiaskit
