#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dropreg/rng.hpp"
#include "dropreg/stats.hpp"

namespace dropreg {

/// Smooth objective: returns the value at beta and fills grad (same length).
using Objective = std::function<double(const std::vector<double>&, std::vector<double>&)>;

struct BatchConfig {
  std::size_t max_iterations = 500;
  double gradient_tolerance = 1e-6;  // sup norm of the gradient
  std::size_t memory_pairs = 10;
  bool record_iterates = false;
  std::size_t num_starts = 1;    // additional starts perturb beta0 at random
  std::uint64_t start_seed = 0;
  double start_scale = 0.1;      // sd of the random start perturbations
};

struct FitReport {
  std::vector<double> beta;
  double objective = 0.0;
  double gradient_norm = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  std::vector<double> objective_trace;        // value at start, then after each step
  std::vector<std::vector<double>> iterates;  // only when record_iterates is set
};

/// Raised when the objective is non-finite at the current iterate; carries
/// the point so callers can diagnose which coordinates blew up.
class NonFiniteObjective : public std::runtime_error {
 public:
  NonFiniteObjective(const std::string& what, std::vector<double> at)
      : std::runtime_error(what), beta(std::move(at)) {}
  std::vector<double> beta;
};

namespace detail {

struct LbfgsPair {
  std::vector<double> s, y;
  double rho;
};

inline FitReport lbfgs_single(const Objective& obj, std::vector<double> beta,
                              const BatchConfig& cfg) {
  const std::size_t d = beta.size();
  FitReport rep;
  std::vector<double> g(d), g_new(d), beta_new(d), dir(d), alpha;
  std::vector<LbfgsPair> mem;
  std::size_t head = 0;  // ring position of the oldest stored pair

  double f = obj(beta, g);
  if (!std::isfinite(f))
    throw NonFiniteObjective("objective is non-finite at the starting point", beta);
  rep.objective_trace.push_back(f);
  if (cfg.record_iterates) rep.iterates.push_back(beta);

  for (std::size_t iter = 0; iter < cfg.max_iterations; ++iter) {
    if (sup_norm(g) <= cfg.gradient_tolerance) {
      rep.converged = true;
      break;
    }

    // Two-loop recursion for dir = -H g.
    dir = g;
    std::size_t m = mem.size();
    alpha.assign(m, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
      const LbfgsPair& p = mem[(head + m - 1 - k) % m];  // newest first
      double a = 0.0;
      for (std::size_t j = 0; j < d; ++j) a += p.s[j] * dir[j];
      a *= p.rho;
      alpha[k] = a;
      for (std::size_t j = 0; j < d; ++j) dir[j] -= a * p.y[j];
    }
    if (m > 0) {
      const LbfgsPair& last = mem[(head + m - 1) % m];
      double yy = 0.0, sy = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        yy += last.y[j] * last.y[j];
        sy += last.s[j] * last.y[j];
      }
      double gamma = sy / yy;
      for (std::size_t j = 0; j < d; ++j) dir[j] *= gamma;
    }
    for (std::size_t k = 0; k < m; ++k) {
      const LbfgsPair& p = mem[(head + k) % m];  // oldest first
      double b = 0.0;
      for (std::size_t j = 0; j < d; ++j) b += p.y[j] * dir[j];
      b *= p.rho;
      double a = alpha[m - 1 - k];
      for (std::size_t j = 0; j < d; ++j) dir[j] += (a - b) * p.s[j];
    }
    for (std::size_t j = 0; j < d; ++j) dir[j] = -dir[j];

    double gd = 0.0;
    for (std::size_t j = 0; j < d; ++j) gd += g[j] * dir[j];
    if (gd >= 0.0) {
      // Not a descent direction; drop the history and fall back to steepest descent.
      mem.clear();
      head = 0;
      for (std::size_t j = 0; j < d; ++j) dir[j] = -g[j];
      gd = 0.0;
      for (std::size_t j = 0; j < d; ++j) gd += g[j] * dir[j];
    }

    // Armijo backtracking; non-finite trial values are treated as rejections.
    double step = mem.empty() ? 1.0 / std::max(1.0, sup_norm(g)) : 1.0;
    const double c1 = 1e-4;
    double f_new = 0.0;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      for (std::size_t j = 0; j < d; ++j) beta_new[j] = beta[j] + step * dir[j];
      bool ok = true;
      try {
        f_new = obj(beta_new, g_new);
      } catch (const std::range_error&) {
        ok = false;  // family overflow guard hit; shrink the step
      }
      if (ok && std::isfinite(f_new) && f_new <= f + c1 * step * gd) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no admissible step; report the best point found

    LbfgsPair pair;
    pair.s.resize(d);
    pair.y.resize(d);
    double sy = 0.0, snorm = 0.0, ynorm = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      pair.s[j] = beta_new[j] - beta[j];
      pair.y[j] = g_new[j] - g[j];
      sy += pair.s[j] * pair.y[j];
      snorm += pair.s[j] * pair.s[j];
      ynorm += pair.y[j] * pair.y[j];
    }
    if (sy > 1e-10 * std::sqrt(snorm * ynorm)) {
      pair.rho = 1.0 / sy;
      if (mem.size() < cfg.memory_pairs) {
        mem.push_back(std::move(pair));
      } else {
        mem[head] = std::move(pair);
        head = (head + 1) % mem.size();
      }
    }

    beta.swap(beta_new);
    g.swap(g_new);
    f = f_new;
    ++rep.iterations;
    rep.objective_trace.push_back(f);
    if (cfg.record_iterates) rep.iterates.push_back(beta);
    if (sup_norm(g) <= cfg.gradient_tolerance) {
      rep.converged = true;
      break;
    }
  }

  rep.beta = std::move(beta);
  rep.objective = f;
  rep.gradient_norm = sup_norm(g);
  return rep;
}

}  // namespace detail

/// L-BFGS with Armijo backtracking. With num_starts > 1, additional runs
/// start from beta0 plus Gaussian perturbations and the lowest final
/// objective wins.
inline FitReport minimize(const Objective& obj, const std::vector<double>& beta0,
                          const BatchConfig& cfg = {}) {
  if (cfg.num_starts == 0) throw std::invalid_argument("num_starts must be positive");
  FitReport best = detail::lbfgs_single(obj, beta0, cfg);
  for (std::size_t k = 1; k < cfg.num_starts; ++k) {
    Rng rng(mix_seed(cfg.start_seed, k));
    std::vector<double> start(beta0);
    for (double& v : start) v += cfg.start_scale * rng.normal();
    FitReport rep = detail::lbfgs_single(obj, start, cfg);
    if (rep.objective < best.objective) best = std::move(rep);
  }
  return best;
}

}  // namespace dropreg
