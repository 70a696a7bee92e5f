#pragma once

// Softmax, cross-entropy over distributions, and the fused softmax +
// cross-entropy used at the output heads (gradient w.r.t. logits is p - t,
// which avoids dividing by clamped probabilities).

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "actinet/nn/tensor.hpp"

namespace actinet {

// Documented clamp floor for log() in cross-entropy.
constexpr double kLogFloor = 1e-12;

inline std::vector<double> softmax(const double* x, int n) {
  double mx = x[0];
  for (int i = 1; i < n; ++i) mx = std::max(mx, x[i]);
  std::vector<double> p(n);
  double z = 0.0;
  for (int i = 0; i < n; ++i) {
    p[i] = std::exp(x[i] - mx);
    z += p[i];
  }
  for (int i = 0; i < n; ++i) p[i] /= z;
  return p;
}

inline std::vector<double> softmax(const std::vector<double>& x) {
  return softmax(x.data(), static_cast<int>(x.size()));
}

// -sum target * log(max(predicted, 1e-12)); accepts soft targets.
inline double cross_entropy(const std::vector<double>& predicted,
                            const std::vector<double>& target) {
  if (predicted.size() != target.size())
    throw std::invalid_argument("cross_entropy: size mismatch");
  if (predicted.empty()) throw std::invalid_argument("cross_entropy: empty");
  double loss = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] < 0.0 || target[i] < 0.0)
      throw std::invalid_argument("cross_entropy: negative entry");
    if (target[i] > 0.0) loss -= target[i] * std::log(std::max(predicted[i], kLogFloor));
  }
  return loss;
}

// Fused per-sample loss on logits. Writes dloss/dlogits = (p - target) into
// grad (not scaled; callers apply weights / batch averaging).
inline double softmax_ce(const double* logits, const double* target, int n,
                         double* grad) {
  std::vector<double> p = softmax(logits, n);
  double loss = 0.0;
  for (int i = 0; i < n; ++i) {
    if (target[i] > 0.0) loss -= target[i] * std::log(std::max(p[i], kLogFloor));
    if (grad) grad[i] = p[i] - target[i];
  }
  return loss;
}

// Batch mean loss for one head; dlogits gets (p - t)/batch scaled by weight.
inline double softmax_ce_batch(const Tensor& logits, const Tensor& targets,
                               double weight, Tensor& dlogits) {
  if (!logits.same_shape(targets))
    throw std::invalid_argument("softmax_ce_batch: logits " + logits.shape_str() +
                                " vs targets " + targets.shape_str());
  dlogits.reshape(logits.batch, logits.channels, logits.length);
  const int n = logits.features();
  double total = 0.0;
  for (int b = 0; b < logits.batch; ++b) {
    total += softmax_ce(logits.sample(b), targets.sample(b), n, dlogits.sample(b));
  }
  const double scale = weight / logits.batch;
  for (double& g : dlogits.v) g *= scale;
  return weight * total / logits.batch;
}

}  // namespace actinet
