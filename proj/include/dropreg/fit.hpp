#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dropreg/glm.hpp"
#include "dropreg/noising.hpp"
#include "dropreg/optimize.hpp"
#include "dropreg/sparse.hpp"

namespace dropreg {

enum class PenaltyKind { none, l2, quad_noising, mc_noising };

/// Which regularizer fit_glm adds to the negative log-likelihood.
struct PenaltyMode {
  PenaltyKind kind = PenaltyKind::none;
  double lambda = 0.0;        // l2 strength
  NoiseModel noise{};         // quad_noising and mc_noising
  std::uint64_t mc_samples = 0;
  std::uint64_t mc_seed = 0;

  static PenaltyMode none() { return {}; }

  static PenaltyMode l2(double lambda) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("l2 lambda must be nonnegative");
    PenaltyMode m;
    m.kind = PenaltyKind::l2;
    m.lambda = lambda;
    return m;
  }

  static PenaltyMode quad_noising(const NoiseModel& noise) {
    PenaltyMode m;
    m.kind = PenaltyKind::quad_noising;
    m.noise = noise;
    return m;
  }

  static PenaltyMode mc_noising(const NoiseModel& noise, std::uint64_t samples,
                                std::uint64_t seed) {
    if (samples < 1) throw std::invalid_argument("mc_noising needs at least 1 sample");
    PenaltyMode m;
    m.kind = PenaltyKind::mc_noising;
    m.noise = noise;
    m.mc_samples = samples;
    m.mc_seed = seed;
    return m;
  }
};

/// Objective closure for sum of per-example losses plus the mode's penalty.
/// The mc_noising objective re-draws its fixed noise set per evaluation from
/// the stored seed, so minimize sees one deterministic function.
inline Objective penalized_objective(Family f, const Dataset& data, const PenaltyMode& mode) {
  switch (mode.kind) {
    case PenaltyKind::none:
      return [f, &data](const std::vector<double>& beta, std::vector<double>& g) {
        return nll(f, data, beta, &g);
      };
    case PenaltyKind::l2: {
      double lambda = mode.lambda;
      return [f, &data, lambda](const std::vector<double>& beta, std::vector<double>& g) {
        double v = nll(f, data, beta, &g);
        double norm2 = 0.0;
        for (std::size_t j = 0; j < beta.size(); ++j) {
          norm2 += beta[j] * beta[j];
          g[j] += lambda * beta[j];
        }
        return v + 0.5 * lambda * norm2;
      };
    }
    case PenaltyKind::quad_noising: {
      NoiseModel noise = mode.noise;
      return [f, &data, noise](const std::vector<double>& beta, std::vector<double>& g) {
        double v = nll(f, data, beta, &g);
        v += detail::quad_penalty_rows(f, data.rows, beta, noise);
        detail::add_quad_penalty_grad_rows(f, data.rows, beta, noise, g);
        return v;
      };
    }
    default: {
      NoiseModel noise = mode.noise;
      std::uint64_t samples = mode.mc_samples, seed = mode.mc_seed;
      return [f, &data, noise, samples, seed](const std::vector<double>& beta,
                                              std::vector<double>& g) {
        g.assign(beta.size(), 0.0);
        double total = 0.0;
        for (std::size_t i = 0; i < data.n(); ++i) {
          for (std::uint64_t s = 0; s < samples; ++s) {
            Rng rng(mix_seed(seed, i, s));
            SparseVector xt = draw_noised(data.rows[i], noise, rng);
            double z = dot(xt, beta);
            PartitionDerivs d = partition_derivs(f, z);
            total += d.a - data.labels[i] * z;
            add_scaled(g, xt, d.a1 - data.labels[i]);
          }
        }
        double inv = 1.0 / static_cast<double>(samples);
        for (double& gj : g) gj *= inv;
        return total * inv;
      };
    }
  }
}

/// Fits the GLM under the requested penalty by L-BFGS, starting from beta0
/// (zeros when omitted).
inline FitReport fit_glm(Family f, const Dataset& data, const PenaltyMode& mode,
                         const BatchConfig& config = {},
                         const std::vector<double>* beta0 = nullptr) {
  data.check();
  check_labels(f, data);
  if (beta0 && beta0->size() != data.dim)
    throw std::invalid_argument("beta0 length does not match dataset dim");
  std::vector<double> start = beta0 ? *beta0 : std::vector<double>(data.dim, 0.0);
  return minimize(penalized_objective(f, data, mode), start, config);
}

}  // namespace dropreg
