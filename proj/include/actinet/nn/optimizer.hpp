#pragma once

// Classical (heavy-ball) SGD with momentum:
//   v <- momentum * v - lr * g;  p <- p + v
// With momentum 0 this reproduces vanilla gradient descent bit-for-bit.

#include <stdexcept>
#include <string>
#include <vector>

#include "actinet/nn/layers.hpp"

namespace actinet {

struct OptimizerState {
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::vector<std::vector<double>> velocity;  // one buffer per param block

  void attach(const std::vector<ParamBlock*>& params) {
    velocity.clear();
    velocity.reserve(params.size());
    for (const ParamBlock* p : params) velocity.emplace_back(p->value.size(), 0.0);
  }
};

inline void sgd_momentum_step(const std::vector<ParamBlock*>& params,
                              OptimizerState& state) {
  if (!(state.learning_rate > 0.0))
    throw std::invalid_argument("sgd: learning rate must be positive");
  if (state.velocity.size() != params.size())
    throw std::invalid_argument("sgd: velocity buffers do not match parameters");
  for (std::size_t i = 0; i < params.size(); ++i) {
    ParamBlock& p = *params[i];
    std::vector<double>& v = state.velocity[i];
    if (v.size() != p.value.size() || p.grad.size() != p.value.size())
      throw std::invalid_argument("sgd: shape mismatch on block '" + p.name + "'");
    for (std::size_t j = 0; j < v.size(); ++j) {
      v[j] = state.momentum * v[j] - state.learning_rate * p.grad[j];
      p.value[j] += v[j];
    }
  }
}

}  // namespace actinet
