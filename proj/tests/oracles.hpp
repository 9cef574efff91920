#pragma once

// Independent oracles used by the tests. These stay deliberately naive
// (quadratic loops, finite differences) so they cannot share a bug with the
// implementation they check.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "eea/features.hpp"
#include "eea/rng.hpp"

namespace oracles {

// AUC by exhaustive pair enumeration, ties credited 0.5.
inline double auc_brute_force(std::span<const double> probs, std::span<const double> y) {
  double concordant = 0.0;
  std::size_t n_pos = 0, n_neg = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] > 0.5) {
      ++n_pos;
      continue;
    }
    ++n_neg;
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] <= 0.5) continue;
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (y[j] > 0.5) continue;
      if (probs[i] > probs[j]) concordant += 1.0;
      else if (probs[i] == probs[j]) concordant += 0.5;
    }
  }
  return concordant / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

inline double weighted_auc_brute_force(std::span<const double> probs,
                                       std::span<const double> y,
                                       std::span<const double> w) {
  double concordant = 0.0, w_pos = 0.0, w_neg = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) (y[i] > 0.5 ? w_pos : w_neg) += w[i];
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] <= 0.5) continue;
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (y[j] > 0.5) continue;
      if (probs[i] > probs[j]) concordant += w[i] * w[j];
      else if (probs[i] == probs[j]) concordant += 0.5 * w[i] * w[j];
    }
  }
  return concordant / (w_pos * w_neg);
}

// Central finite differences of a scalar function of theta.
template <typename F>
std::vector<double> finite_difference_gradient(const F& f, std::vector<double> theta,
                                               double h = 1e-6) {
  std::vector<double> grad(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double keep = theta[i];
    theta[i] = keep + h;
    const double up = f(theta);
    theta[i] = keep - h;
    const double down = f(theta);
    theta[i] = keep;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

// Small random binary-classification instance.
struct Instance {
  eea::FeatureMatrix x;
  std::vector<double> y;
};

inline Instance random_instance(std::uint64_t seed, std::size_t n, std::size_t p,
                                bool force_both_classes = true) {
  eea::rng::Stream stream(seed);
  Instance inst;
  inst.x.n_rows = n;
  for (std::size_t c = 0; c < p; ++c) inst.x.names.push_back("f" + std::to_string(c));
  inst.x.values.resize(n * p);
  for (auto& v : inst.x.values) v = stream.normal();
  inst.y.resize(n);
  for (auto& v : inst.y) v = stream.bernoulli(0.5) ? 1.0 : 0.0;
  if (force_both_classes) {
    inst.y[0] = 0.0;
    inst.y[n - 1] = 1.0;
  }
  return inst;
}

}  // namespace oracles
