#pragma once

#include "debiaskit/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace debiaskit::fair {

struct GroupKey {
  std::string identity;
  std::string group;

  std::string label() const { return identity + ":" + group; }
  bool operator==(const GroupKey&) const = default;
};

// Rows of (features, binary label, per-group membership flags). A row may
// belong to groups of several identities, and to several or no groups of a
// single identity.
class LabeledDataset {
 public:
  LabeledDataset() = default;
  LabeledDataset(std::vector<std::string> ids, Matrix features, std::vector<std::uint8_t> labels,
                 std::vector<GroupKey> groups, std::vector<std::uint8_t> membership);

  std::size_t size() const { return labels_.size(); }
  std::size_t feature_dim() const { return static_cast<std::size_t>(features_.cols()); }
  std::size_t group_count() const { return groups_.size(); }

  const std::vector<std::string>& ids() const { return ids_; }
  const Matrix& features() const { return features_; }
  const std::vector<std::uint8_t>& labels() const { return labels_; }
  const std::vector<GroupKey>& groups() const { return groups_; }

  bool member(std::size_t row, std::size_t group) const { return membership_[row * groups_.size() + group] != 0; }

  // Identity names in first-appearance order of the group columns.
  const std::vector<std::string>& identities() const { return identities_; }
  // Group column indices belonging to `identities()[t]`.
  const std::vector<std::size_t>& groups_of(std::size_t t) const { return identity_groups_[t]; }
  bool in_identity(std::size_t row, std::size_t t) const;

  // Throws ValidationError unless every group of the listed identities (all
  // identities when empty) has at least one positive and one negative row.
  void require_constrainable(const std::vector<std::string>& identities = {}) const;

 private:
  std::vector<std::string> ids_;
  Matrix features_;
  std::vector<std::uint8_t> labels_;
  std::vector<GroupKey> groups_;
  std::vector<std::uint8_t> membership_;  // row-major, size() x group_count()
  std::vector<std::string> identities_;
  std::vector<std::vector<std::size_t>> identity_groups_;
};

// Header: id,label,<identity>:<group>...,f0..f{d-1}
LabeledDataset read_dataset_csv(const std::filesystem::path& path);
void write_dataset_csv(const LabeledDataset& data, const std::filesystem::path& path);

}  // namespace debiaskit::fair
