#include "debiaskit/fair/dataset.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

namespace debiaskit::fair {

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

bool is_feature_column(std::string_view name, std::size_t expected_index) {
  return name == fmt::format("f{}", expected_index);
}

}  // namespace

LabeledDataset::LabeledDataset(std::vector<std::string> ids, Matrix features, std::vector<std::uint8_t> labels,
                               std::vector<GroupKey> groups, std::vector<std::uint8_t> membership)
    : ids_(std::move(ids)),
      features_(std::move(features)),
      labels_(std::move(labels)),
      groups_(std::move(groups)),
      membership_(std::move(membership)) {
  const std::size_t n = labels_.size();
  if (ids_.size() != n || static_cast<std::size_t>(features_.rows()) != n) {
    throw DimensionError("dataset ids, features and labels disagree on row count");
  }
  if (membership_.size() != n * groups_.size()) throw DimensionError("membership table has the wrong size");
  for (auto label : labels_) {
    if (label > 1) throw ValidationError("labels must be 0 or 1");
  }
  if (!features_.allFinite()) throw ValidationError("dataset features must be finite");
  std::set<std::string> seen;
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    const auto& key = groups_[g];
    if (key.identity.empty() || key.group.empty()) throw ValidationError("group keys need an identity and a group");
    if (!seen.insert(key.label()).second) throw ValidationError(fmt::format("duplicate group column '{}'", key.label()));
    auto it = std::find(identities_.begin(), identities_.end(), key.identity);
    if (it == identities_.end()) {
      identities_.push_back(key.identity);
      identity_groups_.emplace_back();
      it = identities_.end() - 1;
    }
    identity_groups_[static_cast<std::size_t>(it - identities_.begin())].push_back(g);
  }
}

bool LabeledDataset::in_identity(std::size_t row, std::size_t t) const {
  for (std::size_t g : identity_groups_[t]) {
    if (member(row, g)) return true;
  }
  return false;
}

void LabeledDataset::require_constrainable(const std::vector<std::string>& identities) const {
  for (std::size_t t = 0; t < identities_.size(); ++t) {
    if (!identities.empty() && std::find(identities.begin(), identities.end(), identities_[t]) == identities.end()) {
      continue;
    }
    for (std::size_t g : identity_groups_[t]) {
      std::size_t positives = 0;
      std::size_t negatives = 0;
      for (std::size_t i = 0; i < size(); ++i) {
        if (!member(i, g)) continue;
        (labels_[i] ? positives : negatives) += 1;
      }
      if (positives == 0 || negatives == 0) {
        throw ValidationError(fmt::format("group '{}' has {} positive and {} negative rows; constraints need both",
                                          groups_[g].label(), positives, negatives));
      }
    }
  }
  for (const auto& name : identities) {
    if (std::find(identities_.begin(), identities_.end(), name) == identities_.end()) {
      throw ValidationError(fmt::format("identity '{}' has no group columns in the dataset", name));
    }
  }
}

LabeledDataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open dataset '{}'", path.string()));
  std::string line;
  if (!std::getline(in, line)) throw FormatError(fmt::format("{}: empty file", path.string()));
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_commas(line);
  if (header.size() < 2 || header[0] != "id" || header[1] != "label") {
    throw FormatError(fmt::format("{}: header must start with 'id,label'", path.string()));
  }
  std::vector<GroupKey> groups;
  std::size_t column = 2;
  for (; column < header.size(); ++column) {
    const auto name = header[column];
    const auto colon = name.find(':');
    if (colon == std::string_view::npos) break;
    groups.push_back({std::string(name.substr(0, colon)), std::string(name.substr(colon + 1))});
  }
  const std::size_t feature_start = column;
  const std::size_t dim = header.size() - feature_start;
  for (std::size_t j = 0; j < dim; ++j) {
    if (!is_feature_column(header[feature_start + j], j)) {
      throw FormatError(fmt::format("{}: expected feature column 'f{}', found '{}'", path.string(), j,
                                    header[feature_start + j]));
    }
  }

  std::vector<std::string> ids;
  std::vector<std::uint8_t> labels;
  std::vector<std::uint8_t> membership;
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != header.size()) {
      throw FormatError(fmt::format("{}:{}: expected {} fields, found {}", path.string(), line_no, header.size(),
                                    fields.size()));
    }
    auto flag = [&](std::string_view field, const char* what) -> std::uint8_t {
      if (field == "0") return 0;
      if (field == "1") return 1;
      throw FormatError(fmt::format("{}:{}: {} must be 0 or 1, found '{}'", path.string(), line_no, what, field));
    };
    ids.emplace_back(fields[0]);
    labels.push_back(flag(fields[1], "label"));
    for (std::size_t g = 0; g < groups.size(); ++g) membership.push_back(flag(fields[2 + g], "membership"));
    for (std::size_t j = 0; j < dim; ++j) {
      const auto field = fields[feature_start + j];
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
      if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(value)) {
        throw FormatError(fmt::format("{}:{}: invalid feature value '{}'", path.string(), line_no, field));
      }
      values.push_back(value);
    }
  }
  Matrix features(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * dim + j];
    }
  }
  return LabeledDataset(std::move(ids), std::move(features), std::move(labels), std::move(groups),
                        std::move(membership));
}

void write_dataset_csv(const LabeledDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write dataset '{}'", path.string()));
  std::string line = "id,label";
  for (const auto& key : data.groups()) line += "," + key.label();
  for (std::size_t j = 0; j < data.feature_dim(); ++j) fmt::format_to(std::back_inserter(line), ",f{}", j);
  out << line << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    line = data.ids()[i];
    line += data.labels()[i] ? ",1" : ",0";
    for (std::size_t g = 0; g < data.group_count(); ++g) line += data.member(i, g) ? ",1" : ",0";
    for (std::size_t j = 0; j < data.feature_dim(); ++j) {
      fmt::format_to(std::back_inserter(line), ",{:.17g}",
                     data.features()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    line.push_back('\n');
    out << line;
  }
  if (!out) throw Error(fmt::format("failed while writing '{}'", path.string()));
}

}  // namespace debiaskit::fair
