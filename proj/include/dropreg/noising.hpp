#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dropreg/gauss_hermite.hpp"
#include "dropreg/glm.hpp"
#include "dropreg/rng.hpp"
#include "dropreg/sparse.hpp"

namespace dropreg {

enum class NoiseKind { dropout, additive_gaussian };

/// Feature noise applied to inputs. Both kinds are mean-preserving:
/// dropout zeroes each nonzero coordinate with probability delta and scales
/// survivors by 1/(1-delta); additive noise adds N(0, sigma2) to every one
/// of the d ambient coordinates, stored zeros included.
struct NoiseModel {
  NoiseKind kind = NoiseKind::dropout;
  double param = 0.0;  // delta for dropout, sigma2 for additive

  static NoiseModel dropout(double delta) {
    if (!(delta >= 0.0 && delta < 1.0))
      throw std::invalid_argument("dropout rate must lie in [0, 1), got " + std::to_string(delta));
    return {NoiseKind::dropout, delta};
  }

  static NoiseModel additive(double sigma2) {
    if (!(sigma2 >= 0.0))
      throw std::invalid_argument("additive noise variance must be nonnegative, got " +
                                  std::to_string(sigma2));
    return {NoiseKind::additive_gaussian, sigma2};
  }

  bool is_identity() const { return param == 0.0; }
};

/// One random noised copy of x. Dropout draws one uniform per stored entry in
/// index order; additive noise draws one normal per ambient coordinate in
/// order, so a draw is a pure function of the generator state.
inline SparseVector draw_noised(const SparseVector& x, const NoiseModel& noise, Rng& rng) {
  SparseVector out;
  out.dim = x.dim;
  if (noise.kind == NoiseKind::dropout) {
    double keep_scale = 1.0 / (1.0 - noise.param);
    for (std::size_t k = 0; k < x.indices.size(); ++k) {
      bool dropped = rng.uniform() < noise.param;
      if (!dropped) out.push(x.indices[k], x.values[k] * keep_scale);
    }
  } else {
    double sd = std::sqrt(noise.param);
    std::vector<double> dense = x.to_dense();
    for (std::uint32_t j = 0; j < x.dim; ++j) {
      double v = dense[j] + sd * rng.normal();
      if (v != 0.0) out.push(j, v);
    }
  }
  return out;
}

inline SparseVector draw_noised(const SparseVector& x, const NoiseModel& noise,
                                std::uint64_t seed) {
  Rng rng(seed);
  return draw_noised(x, noise, rng);
}

/// Var[x_noised . beta] for one row under the noise model.
inline double linearization_variance(const SparseVector& x, const std::vector<double>& beta,
                                     const NoiseModel& noise) {
  if (noise.kind == NoiseKind::dropout) {
    double s = 0.0;
    for (std::size_t k = 0; k < x.indices.size(); ++k) {
      double t = x.values[k] * beta[x.indices[k]];
      s += t * t;
    }
    return noise.param / (1.0 - noise.param) * s;
  }
  double norm2 = 0.0;
  for (double b : beta) norm2 += b * b;
  return noise.param * norm2;
}

enum class PenaltyMethod { enumeration, quadrature, monte_carlo, quadratic };

struct PenaltyValue {
  double value = 0.0;
  PenaltyMethod method = PenaltyMethod::quadratic;
};

/// Largest per-example nonzero count accepted by the dropout enumeration.
constexpr std::size_t kMaxExactDropoutSupport = 20;

namespace detail {

/// Exact dropout penalty for one row by enumerating keep patterns over the
/// active support. Entries with beta_j = 0 cannot move x.beta, so their
/// patterns marginalize out and only coordinates with x_j, beta_j both
/// nonzero are enumerated.
inline double exact_dropout_row(Family f, const SparseVector& x, const std::vector<double>& beta,
                                double delta) {
  if (x.nnz() > kMaxExactDropoutSupport)
    throw std::length_error("exact dropout penalty: example has " + std::to_string(x.nnz()) +
                            " nonzero coordinates, above the enumeration cap " +
                            std::to_string(kMaxExactDropoutSupport) +
                            "; use mc_noised_objective for larger supports");
  std::vector<double> terms;  // x_j * beta_j over the active support
  for (std::size_t k = 0; k < x.indices.size(); ++k)
    if (beta[x.indices[k]] != 0.0) terms.push_back(x.values[k] * beta[x.indices[k]]);
  std::size_t m = terms.size();
  double a_clean = partition(f, dot(x, beta));
  double keep_scale = 1.0 / (1.0 - delta);
  std::vector<double> pow_drop(m + 1), pow_keep(m + 1);
  pow_drop[0] = pow_keep[0] = 1.0;
  for (std::size_t k = 1; k <= m; ++k) {
    pow_drop[k] = pow_drop[k - 1] * delta;
    pow_keep[k] = pow_keep[k - 1] * (1.0 - delta);
  }
  double total = 0.0;
  for (std::uint64_t mask = 0; mask < (1ULL << m); ++mask) {
    double kept = 0.0;
    int kept_count = 0;
    for (std::size_t k = 0; k < m; ++k)
      if (mask & (1ULL << k)) {
        kept += terms[k];
        ++kept_count;
      }
    double prob = pow_keep[kept_count] * pow_drop[m - kept_count];
    total += prob * (partition(f, kept * keep_scale) - a_clean);
  }
  return total;
}

/// Exact additive penalty for one row: E[A(N(z, s2))] - A(z). Quadrature for
/// logistic; closed forms for linear (s2/2) and poisson (log-normal moment).
inline double exact_additive_row(Family f, double z, double s2, const GaussHermiteRule& rule) {
  if (s2 == 0.0) return 0.0;
  switch (f) {
    case Family::linear:
      return 0.5 * s2;
    case Family::poisson: {
      if (z + 0.5 * s2 > kPoissonZMax)
        throw std::range_error("poisson log-partition overflow: z = " +
                               std::to_string(z + 0.5 * s2) + " exceeds " +
                               std::to_string(kPoissonZMax));
      return std::exp(z) * std::expm1(0.5 * s2);
    }
    default: {
      double s = std::sqrt(s2);
      double mean_a = gauss_hermite_expect(rule, z, s,
                                           [](double t) { return partition(Family::logistic, t); });
      return mean_a - partition(Family::logistic, z);
    }
  }
}

inline double exact_penalty_rows(Family f, const std::vector<SparseVector>& rows,
                                 const std::vector<double>& beta, const NoiseModel& noise,
                                 const GaussHermiteRule& rule) {
  double total = 0.0;
  if (noise.kind == NoiseKind::dropout) {
    if (noise.param == 0.0) return 0.0;
    for (const SparseVector& x : rows) total += exact_dropout_row(f, x, beta, noise.param);
  } else {
    double norm2 = 0.0;
    for (double b : beta) norm2 += b * b;
    double s2 = noise.param * norm2;
    for (const SparseVector& x : rows) total += exact_additive_row(f, dot(x, beta), s2, rule);
  }
  return total;
}

inline double quad_penalty_rows(Family f, const std::vector<SparseVector>& rows,
                                const std::vector<double>& beta, const NoiseModel& noise) {
  double total = 0.0;
  for (const SparseVector& x : rows) {
    double v = linearization_variance(x, beta, noise);
    if (v != 0.0) total += 0.5 * partition_derivs(f, dot(x, beta)).a2 * v;
  }
  return total;
}

inline void add_quad_penalty_grad_rows(Family f, const std::vector<SparseVector>& rows,
                                       const std::vector<double>& beta, const NoiseModel& noise,
                                       std::vector<double>& g, double weight = 1.0) {
  if (noise.kind == NoiseKind::dropout) {
    double ratio = noise.param / (1.0 - noise.param);
    if (ratio == 0.0) return;
    for (const SparseVector& x : rows) {
      double v = linearization_variance(x, beta, noise);
      PartitionDerivs d = partition_derivs(f, dot(x, beta));
      add_scaled(g, x, weight * 0.5 * d.a3 * v);
      for (std::size_t k = 0; k < x.indices.size(); ++k) {
        std::uint32_t j = x.indices[k];
        g[j] += weight * d.a2 * ratio * x.values[k] * x.values[k] * beta[j];
      }
    }
  } else {
    double norm2 = 0.0;
    for (double b : beta) norm2 += b * b;
    double v = noise.param * norm2;
    double a2_sum = 0.0;
    for (const SparseVector& x : rows) {
      PartitionDerivs d = partition_derivs(f, dot(x, beta));
      add_scaled(g, x, weight * 0.5 * d.a3 * v);
      a2_sum += d.a2;
    }
    for (std::size_t j = 0; j < g.size(); ++j)
      g[j] += weight * a2_sum * noise.param * beta[j];
  }
}

}  // namespace detail

/// Exact noising penalty R = sum_i E[A(x_noised_i . beta)] - A(x_i . beta),
/// nonnegative by Jensen's inequality. Dropout enumerates keep patterns over
/// each example's support (capped); additive noise integrates the scalar
/// x_noised . beta ~ N(x . beta, sigma2 ||beta||^2) by quadrature or closed
/// form. Labels are never read.
inline PenaltyValue exact_penalty(Family f, const Dataset& data, const std::vector<double>& beta,
                                  const NoiseModel& noise,
                                  const GaussHermiteRule& rule = default_gauss_hermite()) {
  double v = detail::exact_penalty_rows(f, data.rows, beta, noise, rule);
  PenaltyMethod m = noise.kind == NoiseKind::dropout ? PenaltyMethod::enumeration
                                                     : PenaltyMethod::quadrature;
  return {v, m};
}

/// Quadratic surrogate penalty
/// R_quad = (1/2) sum_i A''(x_i . beta) Var[x_noised_i . beta].
inline PenaltyValue quad_penalty(Family f, const Dataset& data, const std::vector<double>& beta,
                                 const NoiseModel& noise) {
  return {detail::quad_penalty_rows(f, data.rows, beta, noise), PenaltyMethod::quadratic};
}

/// Adds the gradient of quad_penalty to g (length dim, already initialized).
inline void add_quad_penalty_grad(Family f, const Dataset& data, const std::vector<double>& beta,
                                  const NoiseModel& noise, std::vector<double>& g) {
  detail::add_quad_penalty_grad_rows(f, data.rows, beta, noise, g);
}

/// Gradient of quad_penalty as a fresh vector.
inline std::vector<double> quad_penalty_grad(Family f, const Dataset& data,
                                             const std::vector<double>& beta,
                                             const NoiseModel& noise) {
  std::vector<double> g(data.dim, 0.0);
  detail::add_quad_penalty_grad_rows(f, data.rows, beta, noise, g);
  return g;
}

/// Monte Carlo value with a standard error across the per-sample totals.
struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;  // zero when samples == 1
  std::uint64_t samples = 0;
};

/// Average noised loss (1/S) sum_s sum_i loss(x_noised_i_s, y_i; beta).
/// Sample s of example i is drawn from seed mix(seed, i, s), so the result
/// is independent of evaluation order. Equals dataset nll plus a Monte Carlo
/// estimate of the noising penalty.
inline McEstimate mc_noised_objective(Family f, const Dataset& data,
                                      const std::vector<double>& beta, const NoiseModel& noise,
                                      std::uint64_t samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("mc_noised_objective needs at least 1 sample");
  std::vector<double> per_sample(samples, 0.0);
  for (std::size_t i = 0; i < data.n(); ++i) {
    for (std::uint64_t s = 0; s < samples; ++s) {
      Rng rng(mix_seed(seed, i, s));
      SparseVector xt = draw_noised(data.rows[i], noise, rng);
      double z = dot(xt, beta);
      per_sample[s] += partition(f, z) - data.labels[i] * z;
    }
  }
  double total = 0.0;
  for (double v : per_sample) total += v;
  double mean = total / static_cast<double>(samples);
  double se = 0.0;
  if (samples > 1) {
    double ss = 0.0;
    for (double v : per_sample) ss += (v - mean) * (v - mean);
    se = std::sqrt(ss / static_cast<double>(samples - 1)) /
         std::sqrt(static_cast<double>(samples));
  }
  return {mean, se, samples};
}

/// Exact and quadratic-surrogate penalties for a single logistic example
/// under additive noise, parameterized by the clean prediction p.
struct PenaltyPair {
  double exact = 0.0;
  double quadratic = 0.0;
};

inline PenaltyPair gaussian_logistic_penalty(double p, double sigma2,
                                             const GaussHermiteRule& rule = default_gauss_hermite()) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("prediction p must lie strictly inside (0, 1)");
  double mu = std::log(p / (1.0 - p));
  PenaltyPair out;
  out.exact = detail::exact_additive_row(Family::logistic, mu, sigma2, rule);
  out.quadratic = 0.5 * p * (1.0 - p) * sigma2;
  return out;
}

}  // namespace dropreg
