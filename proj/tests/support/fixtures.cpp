#include "fixtures.hpp"

#include <Eigen/QR>
#include <fmt/format.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

namespace fixtures {

Vector gaussian_vector(std::size_t d, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector v(static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = normal(rng);
  return v;
}

EmbeddingStore random_store(std::size_t n, std::size_t d, std::uint64_t seed, const std::string& prefix) {
  std::mt19937_64 rng(seed);
  std::vector<std::string> vocab;
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    vocab.push_back(prefix + std::to_string(i));
    m.row(static_cast<Eigen::Index>(i)) = gaussian_vector(d, rng).transpose();
  }
  return EmbeddingStore(std::move(vocab), std::move(m));
}

debiaskit::Identity pair_identity(const std::string& name, const std::vector<std::pair<std::string, std::string>>& pairs) {
  debiaskit::Identity identity;
  identity.name = name;
  identity.groups = {name + "_a", name + "_b"};
  for (const auto& [x, y] : pairs) identity.defining_sets.push_back({x, y});
  identity.equality_sets = identity.defining_sets;
  return identity;
}

PlantedIdentity planted_identity_store(std::size_t n, std::size_t d, std::size_t pairs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Vector direction = gaussian_vector(d, rng);
  direction.normalize();
  std::vector<std::string> vocab;
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  std::vector<std::pair<std::string, std::string>> defining;
  for (std::size_t i = 0; i < n; ++i) {
    vocab.push_back("w" + std::to_string(i));
    m.row(static_cast<Eigen::Index>(i)) = gaussian_vector(d, rng).transpose();
  }
  for (std::size_t p = 0; p < pairs; ++p) {
    const auto i = static_cast<Eigen::Index>(2 * p);
    const Vector base = gaussian_vector(d, rng, 0.3);
    m.row(i) = (base + direction).transpose();
    m.row(i + 1) = (base - direction).transpose();
    defining.emplace_back(vocab[2 * p], vocab[2 * p + 1]);
  }
  return {EmbeddingStore(vocab, std::move(m)), pair_identity("planted", defining)};
}

OverlapFixture overlap_fixture(std::uint64_t seed) {
  constexpr std::size_t d = 20;
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd g(d, 3);
  for (Eigen::Index j = 0; j < 3; ++j) g.col(j) = gaussian_vector(d, rng);
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ() * Eigen::MatrixXd::Identity(d, 3);
  const Vector a = q.col(0);
  const Vector shared = q.col(2);
  const double angle = 20.0 * std::numbers::pi / 180.0;
  const Vector b = std::cos(angle) * a + std::sin(angle) * q.col(1);

  std::vector<std::string> vocab;
  std::vector<Vector> rows;
  auto add = [&](std::string word, Vector v) {
    vocab.push_back(std::move(word));
    rows.push_back(std::move(v));
  };

  auto planted_pairs = [&](const std::string& prefix, const Vector& direction) {
    std::vector<std::pair<std::string, std::string>> pairs;
    for (int i = 0; i < 4; ++i) {
      const Vector base = gaussian_vector(d, rng, 0.15) + 0.5 * shared;
      const std::string plus = fmt::format("{}_p{}", prefix, i);
      const std::string minus = fmt::format("{}_m{}", prefix, i);
      add(plus, base + 0.7 * direction + gaussian_vector(d, rng, 0.02));
      add(minus, base - 0.7 * direction + gaussian_vector(d, rng, 0.02));
      pairs.emplace_back(plus, minus);
    }
    return pairs;
  };

  OverlapFixture fx{EmbeddingStore({"x"}, Matrix::Ones(1, d)), {}, {}, 20.0};
  const auto first = planted_pairs("first", a);
  const auto second = planted_pairs("second", b);
  fx.taxonomy.identities = {pair_identity("first", first), pair_identity("second", second)};

  fx.eval.identity = "second";
  for (const auto& [x, y] : second) {
    fx.eval.targets.push_back(x);
    fx.eval.targets.push_back(y);
  }
  for (int set = 0; set < 3; ++set) {
    debiaskit::WordList words;
    for (int m = 0; m < 5; ++m) {
      const std::string word = fmt::format("attr{}_{}", set, m);
      const double sign = (set + m) % 2 == 0 ? 1.0 : -1.0;
      add(word, 0.5 * shared + gaussian_vector(d, rng, 0.15) + sign * 0.3 * b);
      words.push_back(word);
    }
    fx.eval.attribute_sets.push_back(std::move(words));
  }
  for (int i = 0; i < 200; ++i) add(fmt::format("neutral{}", i), gaussian_vector(d, rng));

  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  fx.store = EmbeddingStore(std::move(vocab), std::move(m));
  return fx;
}

SmallRates ten_row_dataset() {
  using debiaskit::fair::GroupKey;
  // columns: gender:male gender:female race:black race:white religion:christian religion:muslim
  const std::vector<GroupKey> groups = {{"gender", "male"},      {"gender", "female"},      {"race", "black"},
                                        {"race", "white"},       {"religion", "christian"}, {"religion", "muslim"}};
  struct Row {
    std::uint8_t label;
    std::uint8_t prediction;
    std::vector<std::uint8_t> member;
  };
  // Eight positives and two negatives so every rate below has a power-of-two
  // denominator and is exact in binary floating point.
  const std::vector<Row> rows = {
      {1, 1, {1, 0, 1, 0, 1, 0}}, {1, 0, {1, 0, 1, 0, 0, 0}}, {1, 1, {0, 1, 0, 0, 1, 0}}, {1, 1, {0, 1, 0, 0, 0, 0}},
      {1, 0, {0, 0, 0, 1, 0, 1}}, {1, 0, {0, 0, 0, 1, 0, 0}}, {1, 0, {0, 0, 0, 0, 0, 1}}, {1, 0, {0, 0, 0, 0, 0, 0}},
      {0, 1, {1, 0, 1, 0, 1, 0}}, {0, 0, {0, 1, 0, 1, 0, 1}},
  };
  std::vector<std::string> ids;
  std::vector<std::uint8_t> labels;
  std::vector<std::uint8_t> membership;
  SmallRates out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ids.push_back("row" + std::to_string(i));
    labels.push_back(rows[i].label);
    out.predictions.push_back(rows[i].prediction);
    membership.insert(membership.end(), rows[i].member.begin(), rows[i].member.end());
  }
  Matrix features = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), 1);
  out.data = debiaskit::fair::LabeledDataset(ids, features, labels, groups, membership);
  return out;
}

debiaskit::fair::SyntheticSpec planted_bias_spec() {
  debiaskit::fair::SyntheticSpec spec;
  spec.base_rate = 0.15;
  spec.feature_dim = 16;
  spec.bias_strength = 2.0;
  spec.signal_strength = 2.0;
  spec.size = 20000;
  spec.identities = {{"gender", {"male", "female"}},
                     {"race", {"black", "white"}},
                     {"religion", {"christian", "jewish", "muslim"}}};
  spec.groups = {{{"gender", "male"}, 0.20, 0.30},       {{"gender", "female"}, 0.20, 0.05},
                 {{"race", "black"}, 0.10, 0.50},        {{"race", "white"}, 0.15, 0.05},
                 {{"religion", "christian"}, 0.15, 0.04}, {{"religion", "jewish"}, 0.05, 0.25},
                 {{"religion", "muslim"}, 0.08, 0.50}};
  return spec;
}

TempDir::TempDir() {
  std::random_device device;
  const auto base = std::filesystem::temp_directory_path();
  for (int attempt = 0; attempt < 100; ++attempt) {
    auto candidate = base / fmt::format("debiaskit-test-{:08x}", device());
    if (std::filesystem::create_directory(candidate)) {
      path_ = candidate;
      return;
    }
  }
  throw std::runtime_error("could not create a temporary directory");
}

TempDir::~TempDir() {
  std::error_code ignored;
  std::filesystem::remove_all(path_, ignored);
}

std::string taxonomy_json(const debiaskit::IdentityTaxonomy& taxonomy) {
  nlohmann::json doc;
  doc["identities"] = nlohmann::json::array();
  for (const auto& identity : taxonomy.identities) {
    doc["identities"].push_back({{"name", identity.name},
                                 {"groups", identity.groups},
                                 {"defining_sets", identity.defining_sets},
                                 {"equality_sets", identity.equality_sets}});
  }
  return doc.dump(2);
}

std::string eval_json(const debiaskit::EvalSpec& eval) {
  nlohmann::json doc = {{"identity", eval.identity}, {"targets", eval.targets}, {"attribute_sets", eval.attribute_sets}};
  return doc.dump(2);
}

namespace {

std::string shell_quote(const std::string& text) {
  std::string out = "'";
  for (char c : text) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

}  // namespace

int run_tool(const std::string& binary, const std::vector<std::string>& args, const std::filesystem::path& log,
             const std::string& env) {
  std::string command = env.empty() ? "" : env + " ";
  command += shell_quote(binary);
  for (const auto& arg : args) command += " " + shell_quote(arg);
  command += " 2>" + shell_quote(log.string()) + " >/dev/null";
  const int status = std::system(command.c_str());
  if (status == -1 || !WIFEXITED(status)) return -1;
  return WEXITSTATUS(status);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace fixtures
