#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dropreg/glm.hpp"
#include "dropreg/rng.hpp"
#include "dropreg/sparse.hpp"

namespace dropreg {

enum class OnlineKind { sgd, adagrad, dropout_descent };
enum class StepSchedule { constant, inv_sqrt };

/// Online update rule. sgd takes plain gradient steps (optionally with an
/// eta/sqrt(t) schedule); adagrad divides per coordinate by sqrt of the
/// accumulated squared gradients; dropout_descent divides by the accumulated
/// per-example curvature diag(H), the closed-form solution of the linearized
/// dropout-regularized step.
struct OnlineRule {
  OnlineKind kind = OnlineKind::sgd;
  double eta = 0.1;
  double epsilon = 1e-8;  // floor for never-seen coordinates
  StepSchedule schedule = StepSchedule::constant;

  static OnlineRule sgd(double eta, StepSchedule schedule = StepSchedule::constant) {
    if (!(eta >= 0.0)) throw std::invalid_argument("eta must be nonnegative");
    return {OnlineKind::sgd, eta, 0.0, schedule};
  }

  static OnlineRule adagrad(double eta, double epsilon = 1e-8) {
    if (!(eta >= 0.0) || !(epsilon >= 0.0))
      throw std::invalid_argument("eta and epsilon must be nonnegative");
    return {OnlineKind::adagrad, eta, epsilon, StepSchedule::constant};
  }

  static OnlineRule dropout_descent(double eta, double epsilon = 1e-8) {
    if (!(eta >= 0.0) || !(epsilon >= 0.0))
      throw std::invalid_argument("eta and epsilon must be nonnegative");
    return {OnlineKind::dropout_descent, eta, epsilon, StepSchedule::constant};
  }
};

struct OnlineState {
  std::vector<double> beta;
  std::vector<double> diagG;  // sum of squared gradient coordinates
  std::vector<double> diagH;  // sum of per-example curvature A''(x.beta) x^2
  std::uint64_t t = 0;        // completed steps

  static OnlineState init(std::vector<double> beta0) {
    OnlineState s;
    s.diagG.assign(beta0.size(), 0.0);
    s.diagH.assign(beta0.size(), 0.0);
    s.beta = std::move(beta0);
    return s;
  }

  static OnlineState init(std::size_t dim) { return init(std::vector<double>(dim, 0.0)); }
};

/// One online update. The step's accumulator update happens before the
/// coordinate scaling reads it, so the very first adagrad step moves each
/// seen coordinate by eta * sign(g).
inline void online_step(const OnlineRule& rule, OnlineState& state, const SparseVector& x,
                        double y, Family f) {
  double z = dot(x, state.beta);
  PartitionDerivs d = partition_derivs(f, z);
  double gc = d.a1 - y;  // gradient is gc * x
  state.t += 1;
  switch (rule.kind) {
    case OnlineKind::sgd: {
      double eta = rule.schedule == StepSchedule::inv_sqrt
                       ? rule.eta / std::sqrt(static_cast<double>(state.t))
                       : rule.eta;
      add_scaled(state.beta, x, -eta * gc);
      break;
    }
    case OnlineKind::adagrad:
      for (std::size_t k = 0; k < x.indices.size(); ++k) {
        std::uint32_t j = x.indices[k];
        double gj = gc * x.values[k];
        state.diagG[j] += gj * gj;
        state.beta[j] -= rule.eta * gj / (std::sqrt(state.diagG[j]) + rule.epsilon);
      }
      break;
    default:
      for (std::size_t k = 0; k < x.indices.size(); ++k) {
        std::uint32_t j = x.indices[k];
        state.diagH[j] += d.a2 * x.values[k] * x.values[k];
        state.beta[j] -= rule.eta * gc * x.values[k] / (state.diagH[j] + rule.epsilon);
      }
  }
}

struct OnlineOptions {
  std::size_t snapshot_stride = 1;          // record beta every this many steps
  const std::vector<double>* beta0 = nullptr;
};

struct OnlineTrajectory {
  std::vector<std::vector<double>> snapshots;  // beta at recorded steps
  std::vector<std::uint64_t> snapshot_steps;
  std::vector<double> cumulative_loss;         // running loss total, one entry per step
  std::vector<double> diagG;  // both statistics tracked over the whole run,
  std::vector<double> diagH;  // independent of which rule drove the updates
  std::vector<double> beta_final;
  std::uint64_t steps = 0;
};

/// Runs the rule over the dataset for the given number of passes, shuffling
/// example order each pass with a seeded permutation. The per-step loss is
/// evaluated before the update. diagG and diagH are both accumulated across
/// all steps regardless of rule so trajectories support the Fisher
/// comparison; the rule's own state still follows online_step exactly.
inline OnlineTrajectory run_online(const OnlineRule& rule, const Dataset& data,
                                   std::size_t passes, Family f, std::uint64_t seed,
                                   const OnlineOptions& options = {}) {
  data.check();
  check_labels(f, data);
  if (passes == 0) throw std::invalid_argument("passes must be positive");
  if (options.snapshot_stride == 0) throw std::invalid_argument("snapshot_stride must be positive");
  if (options.beta0 && options.beta0->size() != data.dim)
    throw std::invalid_argument("beta0 length does not match dataset dim");

  OnlineState state = options.beta0 ? OnlineState::init(*options.beta0)
                                    : OnlineState::init(data.dim);
  OnlineTrajectory traj;
  traj.diagG.assign(data.dim, 0.0);
  traj.diagH.assign(data.dim, 0.0);
  traj.snapshots.push_back(state.beta);
  traj.snapshot_steps.push_back(0);

  const std::size_t n = data.n();
  std::vector<std::size_t> order(n);
  double loss_total = 0.0;
  for (std::size_t pass = 0; pass < passes; ++pass) {
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(mix_seed(seed, pass));
    for (std::size_t i = n; i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(rng.below(i));
      std::swap(order[i - 1], order[j]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const SparseVector& x = data.rows[order[i]];
      double y = data.labels[order[i]];
      double z = dot(x, state.beta);
      PartitionDerivs d = partition_derivs(f, z);
      loss_total += d.a - y * z;
      traj.cumulative_loss.push_back(loss_total);
      double gc = d.a1 - y;
      for (std::size_t k = 0; k < x.indices.size(); ++k) {
        std::uint32_t jj = x.indices[k];
        double gj = gc * x.values[k];
        traj.diagG[jj] += gj * gj;
        traj.diagH[jj] += d.a2 * x.values[k] * x.values[k];
      }
      online_step(rule, state, x, y, f);
      std::uint64_t step = state.t;
      if (step % options.snapshot_stride == 0 || (pass + 1 == passes && i + 1 == n)) {
        traj.snapshots.push_back(state.beta);
        traj.snapshot_steps.push_back(step);
      }
    }
  }
  traj.beta_final = state.beta;
  traj.steps = state.t;
  return traj;
}

}  // namespace dropreg
