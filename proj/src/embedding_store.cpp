#include "debiaskit/embedding_store.hpp"

#include <fmt/format.h>
#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace debiaskit {

namespace {

bool is_ascii(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return static_cast<unsigned char>(c) < 0x80; });
}

struct Header {
  std::size_t vocab_size = 0;
  std::size_t dim = 0;
};

Header parse_header(const std::string& line, const std::filesystem::path& path) {
  std::istringstream in(line);
  long long count = -1;
  long long dim = -1;
  std::string extra;
  if (!(in >> count >> dim) || (in >> extra) || count < 0 || dim < 1) {
    throw FormatError(fmt::format("{}: malformed header '{}', expected '<vocab_size> <dim>'", path.string(), line));
  }
  return {static_cast<std::size_t>(count), static_cast<std::size_t>(dim)};
}

double parse_double(std::string_view field, const std::filesystem::path& path, std::size_t line_no) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || !std::isfinite(value)) {
    throw FormatError(fmt::format("{}:{}: invalid number '{}'", path.string(), line_no, field));
  }
  return value;
}

EmbeddingStore load_text(std::istream& in, const std::filesystem::path& path) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError(fmt::format("{}: empty file", path.string()));
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const Header header = parse_header(line, path);

  std::vector<std::string> vocab;
  vocab.reserve(header.vocab_size);
  Matrix vectors(static_cast<Eigen::Index>(header.vocab_size), static_cast<Eigen::Index>(header.dim));
  std::vector<std::string_view> fields;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (vocab.size() == header.vocab_size) {
      throw FormatError(fmt::format("{}:{}: more rows than the declared {}", path.string(), line_no, header.vocab_size));
    }
    fields.clear();
    std::string_view rest(line);
    while (!rest.empty()) {
      const auto start = rest.find_first_not_of(' ');
      if (start == std::string_view::npos) break;
      rest.remove_prefix(start);
      const auto end = rest.find(' ');
      fields.push_back(rest.substr(0, end));
      rest.remove_prefix(end == std::string_view::npos ? rest.size() : end);
    }
    if (fields.size() != header.dim + 1) {
      throw FormatError(fmt::format("{}:{}: expected {} values for '{}', found {}", path.string(), line_no, header.dim,
                                    fields.empty() ? std::string_view{} : fields.front(),
                                    fields.empty() ? 0 : fields.size() - 1));
    }
    const auto row = static_cast<Eigen::Index>(vocab.size());
    for (std::size_t j = 0; j < header.dim; ++j) {
      vectors(row, static_cast<Eigen::Index>(j)) = parse_double(fields[j + 1], path, line_no);
    }
    vocab.emplace_back(fields.front());
  }
  if (vocab.size() != header.vocab_size) {
    throw FormatError(
        fmt::format("{}: header declares {} words but file has {}", path.string(), header.vocab_size, vocab.size()));
  }
  return EmbeddingStore(std::move(vocab), std::move(vectors));
}

float read_le_float(const unsigned char* bytes) {
  std::uint32_t bits = 0;
  for (int i = 3; i >= 0; --i) bits = (bits << 8) | bytes[i];
  return std::bit_cast<float>(bits);
}

void write_le_float(std::ostream& out, float value) {
  const auto bits = std::bit_cast<std::uint32_t>(value);
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xFFu);
  out.write(bytes, 4);
}

EmbeddingStore load_binary(std::istream& in, const std::filesystem::path& path) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError(fmt::format("{}: empty file", path.string()));
  const Header header = parse_header(line, path);

  std::vector<std::string> vocab;
  vocab.reserve(header.vocab_size);
  Matrix vectors(static_cast<Eigen::Index>(header.vocab_size), static_cast<Eigen::Index>(header.dim));
  std::vector<unsigned char> buffer(4 * header.dim);
  for (std::size_t i = 0; i < header.vocab_size; ++i) {
    std::string token;
    int c = in.get();
    // word2vec writes a newline after each vector; accept it on read.
    while (c == '\n') c = in.get();
    while (c != EOF && c != ' ') {
      token.push_back(static_cast<char>(c));
      c = in.get();
    }
    if (c == EOF || token.empty()) {
      throw FormatError(fmt::format("{}: truncated at word {} of {}", path.string(), i + 1, header.vocab_size));
    }
    if (!in.read(reinterpret_cast<char*>(buffer.data()), static_cast<std::streamsize>(buffer.size()))) {
      throw FormatError(fmt::format("{}: truncated vector for '{}'", path.string(), token));
    }
    for (std::size_t j = 0; j < header.dim; ++j) {
      const float value = read_le_float(buffer.data() + 4 * j);
      if (!std::isfinite(value)) {
        throw FormatError(fmt::format("{}: non-finite value in vector for '{}'", path.string(), token));
      }
      vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = value;
    }
    vocab.push_back(std::move(token));
  }
  int c = in.get();
  while (c == '\n') c = in.get();
  if (c != EOF) throw FormatError(fmt::format("{}: trailing data after {} words", path.string(), header.vocab_size));
  return EmbeddingStore(std::move(vocab), std::move(vectors));
}

}  // namespace

EmbeddingFormat format_from_path(const std::filesystem::path& path) {
  return path.extension() == ".bin" ? EmbeddingFormat::binary : EmbeddingFormat::text;
}

std::string nfc(std::string_view token) {
  if (is_ascii(token)) return std::string(token);
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* normalizer = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
  const auto source = icu::UnicodeString::fromUTF8(icu::StringPiece(token.data(), static_cast<int32_t>(token.size())));
  const icu::UnicodeString normalized = normalizer->normalize(source, status);
  if (U_FAILURE(status)) throw FormatError(fmt::format("cannot NFC-normalize token '{}'", token));
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

EmbeddingStore::EmbeddingStore(std::vector<std::string> vocab, Matrix vectors)
    : vocab_(std::move(vocab)), vectors_(std::move(vectors)) {
  if (static_cast<Eigen::Index>(vocab_.size()) != vectors_.rows()) {
    throw DimensionError(fmt::format("{} tokens but {} vectors", vocab_.size(), vectors_.rows()));
  }
  if (vectors_.cols() < 1) throw DimensionError("embedding dimension must be at least 1");
  index_.reserve(vocab_.size());
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    vocab_[i] = nfc(vocab_[i]);
    if (vocab_[i].empty()) throw FormatError(fmt::format("empty token at row {}", i));
    if (!index_.emplace(vocab_[i], i).second) throw FormatError(fmt::format("duplicate token '{}'", vocab_[i]));
    const auto r = static_cast<Eigen::Index>(i);
    const double norm = vectors_.row(r).norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw ValidationError(fmt::format("zero or non-finite vector for '{}' cannot be normalized", vocab_[i]));
    }
    vectors_.row(r) /= norm;
  }
}

std::optional<std::size_t> EmbeddingStore::index_of(std::string_view token) const {
  const auto it = index_.find(nfc(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

EmbeddingStore EmbeddingStore::with_vectors(Matrix vectors) const {
  if (vectors.rows() != vectors_.rows() || vectors.cols() != vectors_.cols()) {
    throw DimensionError("replacement matrix must keep the store's shape");
  }
  return EmbeddingStore(vocab_, std::move(vectors));
}

EmbeddingStore load_embeddings(const std::filesystem::path& path, EmbeddingFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open embedding file '{}'", path.string()));
  try {
    return format == EmbeddingFormat::text ? load_text(in, path) : load_binary(in, path);
  } catch (const FormatError&) {
    throw;
  } catch (const Error& e) {
    throw FormatError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void save_embeddings(const EmbeddingStore& store, const std::filesystem::path& path, EmbeddingFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write embedding file '{}'", path.string()));
  const Matrix& m = store.matrix();
  out << store.size() << ' ' << store.dim() << '\n';
  std::string line;
  for (std::size_t i = 0; i < store.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    if (format == EmbeddingFormat::text) {
      line = store.vocab()[i];
      for (Eigen::Index j = 0; j < m.cols(); ++j) fmt::format_to(std::back_inserter(line), " {:.17g}", m(r, j));
      line.push_back('\n');
      out << line;
    } else {
      out << store.vocab()[i] << ' ';
      for (Eigen::Index j = 0; j < m.cols(); ++j) write_le_float(out, static_cast<float>(m(r, j)));
    }
  }
  if (!out) throw Error(fmt::format("failed while writing '{}'", path.string()));
}

ResolvedWords resolve_words(const EmbeddingStore& store, std::span<const std::string> words) {
  ResolvedWords out;
  for (const auto& word : words) {
    if (const auto index = store.index_of(word)) {
      out.found_words.push_back(word);
      out.found.push_back(store.vector(*index));
      out.found_indices.push_back(*index);
    } else {
      out.missing.push_back(word);
    }
  }
  return out;
}

}  // namespace debiaskit
