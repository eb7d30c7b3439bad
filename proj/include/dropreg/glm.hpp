#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "dropreg/sparse.hpp"

namespace dropreg {

enum class Family { linear, logistic, poisson };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::linear: return "linear";
    case Family::logistic: return "logistic";
    default: return "poisson";
  }
}

inline Family family_from_name(const std::string& s) {
  if (s == "linear") return Family::linear;
  if (s == "logistic") return Family::logistic;
  if (s == "poisson") return Family::poisson;
  throw std::invalid_argument("unknown family: " + s);
}

/// Log-partition function of the natural exponential family and its first
/// three derivatives at a natural parameter value.
struct PartitionDerivs {
  double a;    // A(z)
  double a1;   // A'(z)  = mean
  double a2;   // A''(z) = variance
  double a3;   // A'''(z)
};

/// Numerically stable sigmoid.
inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

constexpr double kPoissonZMax = 30.0;

inline PartitionDerivs partition_derivs(Family f, double z) {
  switch (f) {
    case Family::linear:
      return {0.5 * z * z, z, 1.0, 0.0};
    case Family::logistic: {
      double a = z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
      double p = sigmoid(z);
      double v = p * (1.0 - p);
      return {a, p, v, v * (1.0 - 2.0 * p)};
    }
    default: {
      if (z > kPoissonZMax)
        throw std::range_error("poisson log-partition overflow: z = " + std::to_string(z) +
                               " exceeds " + std::to_string(kPoissonZMax));
      double e = std::exp(z);
      return {e, e, e, e};
    }
  }
}

inline double partition(Family f, double z) { return partition_derivs(f, z).a; }

/// Throws unless the label is admissible for the family: any finite real for
/// linear, {0,1} for logistic, a nonnegative integer for poisson.
inline void check_label(Family f, double y) {
  if (!std::isfinite(y)) throw std::invalid_argument("label must be finite");
  switch (f) {
    case Family::linear:
      return;
    case Family::logistic:
      if (y != 0.0 && y != 1.0)
        throw std::invalid_argument("logistic label must be 0 or 1, got " + std::to_string(y));
      return;
    default:
      if (y < 0.0 || y != std::floor(y))
        throw std::invalid_argument("poisson label must be a nonnegative integer, got " +
                                    std::to_string(y));
  }
}

inline void check_labels(Family f, const Dataset& data) {
  for (double y : data.labels) check_label(f, y);
}

/// Per-example negative log-likelihood up to the label-only base measure:
/// A(x.beta) - y * (x.beta).
inline double example_loss(Family f, const SparseVector& x, double y,
                           const std::vector<double>& beta) {
  double z = dot(x, beta);
  return partition(f, z) - y * z;
}

/// Gradient contribution of one example: (A'(x.beta) - y) * x, added to g.
inline void add_example_grad(Family f, const SparseVector& x, double y,
                             const std::vector<double>& beta, std::vector<double>& g) {
  double z = dot(x, beta);
  add_scaled(g, x, partition_derivs(f, z).a1 - y);
}

/// Total negative log-likelihood over the dataset; if g is non-null it is
/// resized and filled with the gradient. Summation is sequential in row order.
inline double nll(Family f, const Dataset& data, const std::vector<double>& beta,
                  std::vector<double>* g = nullptr) {
  if (beta.size() != data.dim)
    throw std::invalid_argument("beta length does not match dataset dim");
  if (g) g->assign(data.dim, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    double z = dot(data.rows[i], beta);
    PartitionDerivs d = partition_derivs(f, z);
    total += d.a - data.labels[i] * z;
    if (g) add_scaled(*g, data.rows[i], d.a1 - data.labels[i]);
  }
  return total;
}

/// Predicted mean A'(x.beta).
inline double predict_mean(Family f, const SparseVector& x, const std::vector<double>& beta) {
  return partition_derivs(f, dot(x, beta)).a1;
}

/// Hard label: thresholded at 1/2 for logistic, the mean itself for linear,
/// the floor of the mean for poisson.
inline double predict_label(Family f, const SparseVector& x, const std::vector<double>& beta) {
  double mu = predict_mean(f, x, beta);
  switch (f) {
    case Family::linear: return mu;
    case Family::logistic: return mu >= 0.5 ? 1.0 : 0.0;
    default: return std::floor(mu);
  }
}

struct FisherDiagonals {
  std::vector<double> diagH;  // curvature: sum_i A''(x_i.beta) x_ij^2
  std::vector<double> diagG;  // squared gradient: sum_i (A'(x_i.beta) - y_i)^2 x_ij^2
};

/// Two diagonal Fisher-information estimates over a dataset. diagH depends on
/// features only; diagG also uses the labels. At the population optimum the
/// two agree in expectation.
inline FisherDiagonals fisher_diagonals(Family f, const Dataset& data,
                                        const std::vector<double>& beta) {
  if (data.n() == 0) throw std::invalid_argument("fisher_diagonals needs a non-empty dataset");
  if (beta.size() != data.dim)
    throw std::invalid_argument("beta length does not match dataset dim");
  FisherDiagonals out;
  out.diagH.assign(data.dim, 0.0);
  out.diagG.assign(data.dim, 0.0);
  for (std::size_t i = 0; i < data.n(); ++i) {
    const SparseVector& x = data.rows[i];
    PartitionDerivs d = partition_derivs(f, dot(x, beta));
    double r = d.a1 - data.labels[i];
    for (std::size_t k = 0; k < x.nnz(); ++k) {
      double sq = x.values[k] * x.values[k];
      out.diagH[x.indices[k]] += d.a2 * sq;
      out.diagG[x.indices[k]] += r * r * sq;
    }
  }
  return out;
}

}  // namespace dropreg
