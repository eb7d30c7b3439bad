#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dropreg {

/// One observation in sparse form. Indices are 0-based, strictly ascending,
/// and every stored value is finite and nonzero; `dim` is the ambient
/// dimension shared by all rows of a dataset.
struct SparseVector {
  std::vector<std::uint32_t> indices;
  std::vector<double> values;
  std::uint32_t dim = 0;

  std::size_t nnz() const { return indices.size(); }

  /// Append an entry; enforces ascending order, finiteness, and value != 0.
  void push(std::uint32_t j, double v) {
    if (j >= dim)
      throw std::invalid_argument("sparse entry index " + std::to_string(j) +
                                  " out of range for dim " + std::to_string(dim));
    if (!indices.empty() && j <= indices.back())
      throw std::invalid_argument("sparse entry indices must be strictly ascending");
    if (!std::isfinite(v))
      throw std::invalid_argument("sparse entry value must be finite");
    if (v == 0.0) return;  // zeros are represented by absence
    indices.push_back(j);
    values.push_back(v);
  }

  static SparseVector from_dense(const std::vector<double>& x) {
    SparseVector out;
    out.dim = static_cast<std::uint32_t>(x.size());
    for (std::size_t j = 0; j < x.size(); ++j)
      if (x[j] != 0.0) out.push(static_cast<std::uint32_t>(j), x[j]);
    return out;
  }

  std::vector<double> to_dense() const {
    std::vector<double> x(dim, 0.0);
    for (std::size_t k = 0; k < indices.size(); ++k) x[indices[k]] = values[k];
    return x;
  }
};

/// x . beta over the stored entries.
inline double dot(const SparseVector& x, const std::vector<double>& beta) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.indices.size(); ++k) s += x.values[k] * beta[x.indices[k]];
  return s;
}

/// acc += c * x.
inline void add_scaled(std::vector<double>& acc, const SparseVector& x, double c) {
  for (std::size_t k = 0; k < x.indices.size(); ++k) acc[x.indices[k]] += c * x.values[k];
}

/// Labeled dataset with a uniform ambient dimension.
struct Dataset {
  std::vector<SparseVector> rows;
  std::vector<double> labels;
  std::uint32_t dim = 0;

  std::size_t n() const { return rows.size(); }

  void add(SparseVector row, double label) {
    if (row.dim != dim)
      throw std::invalid_argument("row dim " + std::to_string(row.dim) +
                                  " does not match dataset dim " + std::to_string(dim));
    rows.push_back(std::move(row));
    labels.push_back(label);
  }

  void check() const {
    if (rows.size() != labels.size())
      throw std::invalid_argument("dataset has " + std::to_string(rows.size()) +
                                  " rows but " + std::to_string(labels.size()) + " labels");
    for (const SparseVector& r : rows)
      if (r.dim != dim) throw std::invalid_argument("dataset rows disagree on dim");
  }
};

/// Unlabeled rows with a uniform ambient dimension.
struct UnlabeledSet {
  std::vector<SparseVector> rows;
  std::uint32_t dim = 0;

  std::size_t m() const { return rows.size(); }

  void add(SparseVector row) {
    if (row.dim != dim)
      throw std::invalid_argument("unlabeled row dim does not match set dim");
    rows.push_back(std::move(row));
  }
};

}  // namespace dropreg
