#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dropreg/fit.hpp"
#include "dropreg/glm.hpp"
#include "dropreg/noising.hpp"
#include "dropreg/optimize.hpp"
#include "dropreg/rng.hpp"
#include "dropreg/sparse.hpp"

namespace dropreg {

/// Discount weight on the unlabeled part of the semi-supervised penalty.
struct DiscountAlpha {
  double alpha = 0.0;

  static DiscountAlpha of(double a) {
    if (!(a > 0.0 && a <= 1.0))
      throw std::invalid_argument("discount alpha must lie in (0, 1]");
    return {a};
  }
};

inline const std::vector<double>& default_alpha_grid() {
  static const std::vector<double> grid{0.1, 0.2, 0.3, 0.4};
  return grid;
}

namespace detail {

inline void check_semisup_dims(const Dataset& labeled, const UnlabeledSet& unlabeled) {
  labeled.check();
  if (unlabeled.m() > 0 && unlabeled.dim != labeled.dim)
    throw std::invalid_argument("unlabeled set dimension does not match labeled data");
}

inline double semisup_scale(std::size_t n, std::size_t m, double alpha) {
  double nn = static_cast<double>(n), mm = static_cast<double>(m);
  return nn / (nn + alpha * mm);
}

}  // namespace detail

/// Discounted semi-supervised surrogate penalty
/// n/(n + alpha m) * (R_quad_labeled + alpha * R_quad_unlabeled).
/// Labels are never read; both parts are label-free.
inline PenaltyValue semisup_quad_penalty(Family f, const Dataset& labeled,
                                         const UnlabeledSet& unlabeled,
                                         const std::vector<double>& beta, const NoiseModel& noise,
                                         DiscountAlpha alpha) {
  detail::check_semisup_dims(labeled, unlabeled);
  double scale = detail::semisup_scale(labeled.n(), unlabeled.m(), alpha.alpha);
  double lab = detail::quad_penalty_rows(f, labeled.rows, beta, noise);
  double unl = detail::quad_penalty_rows(f, unlabeled.rows, beta, noise);
  return {scale * (lab + alpha.alpha * unl), PenaltyMethod::quadratic};
}

/// Same combination with the exact penalties in place of the surrogates;
/// subject to the enumeration support cap, so intended for small problems.
inline PenaltyValue semisup_exact_penalty(Family f, const Dataset& labeled,
                                          const UnlabeledSet& unlabeled,
                                          const std::vector<double>& beta, const NoiseModel& noise,
                                          DiscountAlpha alpha,
                                          const GaussHermiteRule& rule = default_gauss_hermite()) {
  detail::check_semisup_dims(labeled, unlabeled);
  double scale = detail::semisup_scale(labeled.n(), unlabeled.m(), alpha.alpha);
  double lab = detail::exact_penalty_rows(f, labeled.rows, beta, noise, rule);
  double unl = detail::exact_penalty_rows(f, unlabeled.rows, beta, noise, rule);
  PenaltyMethod m = noise.kind == NoiseKind::dropout ? PenaltyMethod::enumeration
                                                     : PenaltyMethod::quadrature;
  return {scale * (lab + alpha.alpha * unl), m};
}

/// Objective closure: labeled nll plus the semi-supervised surrogate penalty.
inline Objective semisup_objective(Family f, const Dataset& labeled, const UnlabeledSet& unlabeled,
                                   const NoiseModel& noise, DiscountAlpha alpha) {
  double scale = detail::semisup_scale(labeled.n(), unlabeled.m(), alpha.alpha);
  double a = alpha.alpha;
  return [f, &labeled, &unlabeled, noise, scale, a](const std::vector<double>& beta,
                                                    std::vector<double>& g) {
    double v = nll(f, labeled, beta, &g);
    v += scale * detail::quad_penalty_rows(f, labeled.rows, beta, noise);
    v += scale * a * detail::quad_penalty_rows(f, unlabeled.rows, beta, noise);
    detail::add_quad_penalty_grad_rows(f, labeled.rows, beta, noise, g, scale);
    detail::add_quad_penalty_grad_rows(f, unlabeled.rows, beta, noise, g, scale * a);
    return v;
  };
}

/// Fits the GLM under the semi-supervised surrogate penalty.
inline FitReport fit_semisup(Family f, const Dataset& labeled, const UnlabeledSet& unlabeled,
                             const NoiseModel& noise, DiscountAlpha alpha,
                             const BatchConfig& config = {},
                             const std::vector<double>* beta0 = nullptr) {
  detail::check_semisup_dims(labeled, unlabeled);
  check_labels(f, labeled);
  std::vector<double> start = beta0 ? *beta0 : std::vector<double>(labeled.dim, 0.0);
  return minimize(semisup_objective(f, labeled, unlabeled, noise, alpha), start, config);
}

struct AlphaSelection {
  DiscountAlpha choice;
  std::vector<double> grid;    // ascending
  std::vector<double> scores;  // mean held-out accuracy (logistic) or loss (others)
};

/// Selects the discount by k-fold cross-validation on the labeled data with
/// seeded fold assignment. Logistic scores by held-out accuracy (higher is
/// better); other families by mean held-out loss (lower is better). Ties
/// break toward the smaller alpha.
inline AlphaSelection select_alpha(Family f, const Dataset& labeled, const UnlabeledSet& unlabeled,
                                   const NoiseModel& noise, const std::vector<double>& grid,
                                   std::size_t folds, std::uint64_t seed,
                                   const BatchConfig& config = {}) {
  detail::check_semisup_dims(labeled, unlabeled);
  check_labels(f, labeled);
  if (grid.empty()) throw std::invalid_argument("alpha grid must be non-empty");
  std::vector<double> sorted(grid);
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  for (double a : sorted) DiscountAlpha::of(a);  // validate range

  AlphaSelection out;
  out.grid = sorted;
  if (sorted.size() == 1) {
    out.choice = DiscountAlpha::of(sorted[0]);
    out.scores.assign(1, 0.0);
    return out;
  }
  if (folds < 2) throw std::invalid_argument("cross-validation needs at least 2 folds");
  if (labeled.n() < folds) throw std::invalid_argument("fewer labeled examples than folds");
  if (f == Family::logistic) {
    bool all_same = true;
    for (double y : labeled.labels)
      if (y != labeled.labels.front()) {
        all_same = false;
        break;
      }
    if (all_same)
      throw std::invalid_argument("labeled data carries a single class; cannot cross-validate");
  }

  // Seeded shuffle, then round-robin fold assignment for balanced folds.
  std::vector<std::size_t> perm(labeled.n());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  Rng rng(mix_seed(seed, 0x5e1ec7ULL));
  for (std::size_t i = perm.size(); i > 1; --i)
    std::swap(perm[i - 1], perm[static_cast<std::size_t>(rng.below(i))]);
  std::vector<std::size_t> fold_of(labeled.n());
  for (std::size_t i = 0; i < perm.size(); ++i) fold_of[perm[i]] = i % folds;

  out.scores.assign(sorted.size(), 0.0);
  for (std::size_t ai = 0; ai < sorted.size(); ++ai) {
    DiscountAlpha alpha = DiscountAlpha::of(sorted[ai]);
    double score_sum = 0.0;
    for (std::size_t k = 0; k < folds; ++k) {
      Dataset train;
      train.dim = labeled.dim;
      std::vector<std::size_t> held;
      for (std::size_t i = 0; i < labeled.n(); ++i) {
        if (fold_of[i] == k)
          held.push_back(i);
        else
          train.add(labeled.rows[i], labeled.labels[i]);
      }
      if (held.empty() || train.n() == 0)
        throw std::invalid_argument("empty cross-validation fold; reduce folds");
      FitReport fit = fit_semisup(f, train, unlabeled, noise, alpha, config);
      double score = 0.0;
      for (std::size_t i : held) {
        if (f == Family::logistic)
          score += predict_label(f, labeled.rows[i], fit.beta) == labeled.labels[i] ? 1.0 : 0.0;
        else
          score += example_loss(f, labeled.rows[i], labeled.labels[i], fit.beta);
      }
      score_sum += score / static_cast<double>(held.size());
    }
    out.scores[ai] = score_sum / static_cast<double>(folds);
  }

  std::size_t best = 0;
  for (std::size_t ai = 1; ai < sorted.size(); ++ai) {
    bool better = f == Family::logistic ? out.scores[ai] > out.scores[best]
                                        : out.scores[ai] < out.scores[best];
    if (better) best = ai;  // strict improvement only, so ties keep the smaller alpha
  }
  out.choice = DiscountAlpha::of(sorted[best]);
  return out;
}

}  // namespace dropreg
