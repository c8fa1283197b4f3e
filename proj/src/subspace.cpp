#include "debiaskit/subspace.hpp"

#include <fmt/format.h>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <set>

namespace debiaskit {

namespace {

void fix_sign(Eigen::Ref<Vector> component) {
  Eigen::Index arg = 0;
  component.cwiseAbs().maxCoeff(&arg);
  if (component(arg) < 0.0) component = -component;
}

}  // namespace

BiasSubspace principal_subspace(std::span<const std::vector<Vector>> defining_sets, std::size_t k) {
  if (defining_sets.empty()) throw ValidationError("no defining sets");
  const Eigen::Index d = defining_sets.front().empty() ? 0 : defining_sets.front().front().size();
  std::size_t stacked = 0;
  for (const auto& set : defining_sets) {
    if (set.size() < 2) throw ValidationError("each defining set needs at least 2 vectors");
    for (const auto& v : set) {
      if (v.size() != d) throw DimensionError("defining-set vectors disagree on dimension");
    }
    stacked += set.size();
  }
  if (k < 1) throw ValidationError("k must be at least 1");
  if (k > static_cast<std::size_t>(d)) throw ValidationError(fmt::format("k = {} exceeds dimension {}", k, d));
  if (k > stacked) throw ValidationError(fmt::format("k = {} exceeds the {} stacked vectors", k, stacked));

  Matrix centered(static_cast<Eigen::Index>(stacked), d);
  Eigen::Index row = 0;
  for (const auto& set : defining_sets) {
    Vector mean = Vector::Zero(d);
    for (const auto& v : set) mean += v;
    mean /= static_cast<double>(set.size());
    for (const auto& v : set) centered.row(row++) = (v - mean).transpose();
  }
  const Eigen::MatrixXd scatter = centered.transpose() * centered;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(scatter);
  if (solver.info() != Eigen::Success) throw Error("eigendecomposition of the scatter matrix failed");

  BiasSubspace out;
  out.basis.resize(static_cast<Eigen::Index>(k), d);
  // Eigen returns eigenvalues in ascending order.
  for (std::size_t i = 0; i < k; ++i) {
    const Eigen::Index col = d - 1 - static_cast<Eigen::Index>(i);
    Vector component = solver.eigenvectors().col(col);
    fix_sign(component);
    out.basis.row(static_cast<Eigen::Index>(i)) = component.transpose();
    out.eigenvalues.push_back(solver.eigenvalues()(col));
  }
  return out;
}

BiasSubspace identify_subspace(const EmbeddingStore& store, const Identity& identity, std::size_t k) {
  std::vector<std::vector<Vector>> sets;
  std::vector<std::string> missing;
  for (std::size_t s = 0; s < identity.defining_sets.size(); ++s) {
    ResolvedWords resolved = resolve_words(store, identity.defining_sets[s]);
    if (resolved.found.size() < 2) {
      throw ValidationError(fmt::format("identity '{}': defining set {} resolves to {} in-vocabulary word(s), need 2",
                                        identity.name, s, resolved.found.size()));
    }
    missing.insert(missing.end(), resolved.missing.begin(), resolved.missing.end());
    sets.push_back(std::move(resolved.found));
  }
  BiasSubspace out = principal_subspace(sets, k);
  out.identity = identity.name;
  out.missing_words = std::move(missing);
  return out;
}

Matrix orthonormalize_rows(const Matrix& rows, double drop_tolerance) {
  Matrix out(rows.rows(), rows.cols());
  Eigen::Index kept = 0;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    Vector v = rows.row(i).transpose();
    // Two sweeps of modified Gram-Schmidt keep the rows orthonormal to
    // machine precision even when the inputs are nearly dependent.
    for (int sweep = 0; sweep < 2; ++sweep) {
      for (Eigen::Index j = 0; j < kept; ++j) v -= out.row(j).dot(v) * out.row(j).transpose();
    }
    const double residual = v.norm();
    if (residual < drop_tolerance) continue;
    out.row(kept++) = (v / residual).transpose();
  }
  out.conservativeResize(kept, rows.cols());
  return out;
}

JointSubspace join_subspaces(std::span<const BiasSubspace> subspaces) {
  if (subspaces.empty()) throw ValidationError("join_subspaces needs at least one subspace");
  const Eigen::Index d = subspaces.front().basis.cols();
  std::set<std::string> seen;
  Eigen::Index total = 0;
  for (const auto& s : subspaces) {
    if (s.basis.cols() != d) {
      throw DimensionError(fmt::format("subspace '{}' has dimension {}, expected {}", s.identity, s.basis.cols(), d));
    }
    if (!seen.insert(s.identity).second) throw ValidationError(fmt::format("duplicate identity '{}'", s.identity));
    total += s.basis.rows();
  }

  JointSubspace joint;
  joint.basis.resize(total, d);
  Eigen::Index row = 0;
  for (const auto& s : subspaces) {
    joint.sources.emplace_back(s.identity, s.k());
    joint.basis.middleRows(row, s.basis.rows()) = s.basis;
    row += s.basis.rows();
  }
  joint.orthonormal_basis = orthonormalize_rows(joint.basis);
  return joint;
}

Vector project(const Vector& w, const Matrix& basis) {
  if (w.size() != basis.cols()) {
    throw DimensionError(fmt::format("vector of dimension {} projected on basis of dimension {}", w.size(), basis.cols()));
  }
  Vector out = Vector::Zero(w.size());
  for (Eigen::Index i = 0; i < basis.rows(); ++i) out += basis.row(i).dot(w) * basis.row(i).transpose();
  return out;
}

std::vector<double> principal_angles(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw DimensionError("principal angles need bases of the same dimension");
  // Angles are symmetric in the two subspaces; let `wide` have at least as many rows.
  const bool swap = a.rows() < b.rows();
  const Matrix& wide = swap ? b : a;
  const Matrix& narrow = swap ? a : b;
  const Eigen::Index count = narrow.rows();
  if (count == 0) return {};

  const Eigen::MatrixXd cross = wide * narrow.transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> cos_svd(cross);
  const Vector cosines = cos_svd.singularValues();  // descending

  // Rows of `narrow` with their `wide` component removed; singular values
  // are the sines of the same angles.
  const Eigen::MatrixXd residual = narrow - (narrow * wide.transpose()) * wide;
  Eigen::JacobiSVD<Eigen::MatrixXd> sin_svd(residual);
  Vector sines = sin_svd.singularValues();
  std::sort(sines.data(), sines.data() + sines.size());

  std::vector<double> angles(static_cast<std::size_t>(count));
  for (Eigen::Index i = 0; i < count; ++i) {
    const double c = std::clamp(cosines(i), 0.0, 1.0);
    const double s = i < sines.size() ? std::clamp(sines(i), 0.0, 1.0) : 0.0;
    angles[static_cast<std::size_t>(i)] = c * c >= 0.5 ? std::asin(s) : std::acos(c);
  }
  std::sort(angles.begin(), angles.end());
  return angles;
}

nlohmann::ordered_json to_json(const BiasSubspace& subspace) {
  nlohmann::ordered_json out;
  out["identity"] = subspace.identity;
  out["k"] = subspace.k();
  out["d"] = subspace.dim();
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(subspace.basis.size()));
  for (Eigen::Index i = 0; i < subspace.basis.rows(); ++i) {
    for (Eigen::Index j = 0; j < subspace.basis.cols(); ++j) flat.push_back(subspace.basis(i, j));
  }
  out["basis"] = flat;
  out["eigenvalues"] = subspace.eigenvalues;
  if (!subspace.missing_words.empty()) out["missing_words"] = subspace.missing_words;
  return out;
}

}  // namespace debiaskit
