#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dropreg/glm.hpp"
#include "dropreg/rng.hpp"
#include "dropreg/sparse.hpp"

namespace dropreg {

/// Rare-feature simulation layout: a handful of discriminative feature
/// groups, each active in a small fraction of rows, plus dense
/// standard-normal nuisance features.
struct SimConfig {
  std::size_t n = 0;
  std::size_t n_groups = 25;
  std::size_t discriminative_groups = 5;
  std::size_t group_size = 10;
  std::size_t nuisance = 1000;
  double beta_signal = 0.057;
  std::uint64_t seed = 0;

  std::uint32_t dim() const {
    return static_cast<std::uint32_t>(discriminative_groups * group_size + nuisance);
  }

  void check() const {
    if (n == 0) throw std::invalid_argument("simulation needs at least one example");
    if (n_groups == 0 || discriminative_groups == 0 || group_size == 0)
      throw std::invalid_argument("group counts must be positive");
    if (discriminative_groups > n_groups)
      throw std::invalid_argument("discriminative groups cannot exceed total groups");
  }

  std::vector<double> beta_true() const {
    std::vector<double> beta(dim(), 0.0);
    for (std::size_t j = 0; j < discriminative_groups * group_size; ++j)
      beta[j] = beta_signal;
    return beta;
  }
};

/// Row-at-a-time generator so large evaluation sets never need to be stored.
/// The group number cycles deterministically 1..n_groups over rows; each row
/// draws a fair-coin sign. Rows whose group g is discriminative fill
/// coordinates group_size*(g-1)..group_size*g-1 with sign-flipped
/// exponential draws whose marginal second moment is one; every row appends
/// standard-normal nuisance coordinates. Labels are
/// Bernoulli(sigmoid(x . beta_true)). One sequential seeded stream drives
/// all draws, so the emitted sequence is a pure function of the config.
class RareFeatureStream {
 public:
  explicit RareFeatureStream(const SimConfig& config)
      : config_(config), rng_(config.seed), beta_(config.beta_true()) {
    config_.check();
    // The coordinate is active in 1/n_groups of rows, so a unit marginal
    // second moment needs a conditional second moment 2/rate^2 = n_groups.
    rate_ = std::sqrt(2.0 / static_cast<double>(config_.n_groups));
  }

  /// Emits the next row; false once config.n rows have been produced.
  bool next(SparseVector& row, double& label, bool& signal) {
    if (i_ >= config_.n) return false;
    std::size_t g = i_ % config_.n_groups + 1;
    signal = g <= config_.discriminative_groups;
    double sgn = rng_.bernoulli(0.5) ? 1.0 : -1.0;
    row.indices.clear();
    row.values.clear();
    row.dim = config_.dim();
    if (signal) {
      std::size_t base = (g - 1) * config_.group_size;
      for (std::size_t k = 0; k < config_.group_size; ++k)
        row.push(static_cast<std::uint32_t>(base + k), sgn * rng_.exponential(rate_));
    }
    std::size_t nuisance_base = config_.discriminative_groups * config_.group_size;
    for (std::size_t k = 0; k < config_.nuisance; ++k) {
      double v = rng_.normal();
      if (v != 0.0) row.push(static_cast<std::uint32_t>(nuisance_base + k), v);
    }
    label = rng_.bernoulli(sigmoid(dot(row, beta_))) ? 1.0 : 0.0;
    ++i_;
    return true;
  }

  const std::vector<double>& beta_true() const { return beta_; }

 private:
  SimConfig config_;
  Rng rng_;
  std::vector<double> beta_;
  double rate_ = 0.0;
  std::size_t i_ = 0;
};

struct SimDataset {
  Dataset data;
  std::vector<double> beta_true;
  std::vector<bool> signal_mask;  // true where the row's group is discriminative
};

/// Materializes the whole simulated dataset via RareFeatureStream.
inline SimDataset generate_rare_feature_dataset(const SimConfig& config) {
  RareFeatureStream stream(config);
  SimDataset out;
  out.data.dim = config.dim();
  out.beta_true = stream.beta_true();
  out.signal_mask.reserve(config.n);
  SparseVector row;
  double label;
  bool signal;
  while (stream.next(row, label, signal)) {
    out.signal_mask.push_back(signal);
    out.data.add(row, label);
  }
  return out;
}

}  // namespace dropreg
