#pragma once

// Central finite-difference verification of backward() through a whole
// graph. The scalar objective is the weighted sum of per-head batch-mean
// softmax cross-entropies, the same objective the trainer minimizes.
//
// Reported error per parameter: |analytic - numeric| / max(|analytic|,
// |numeric|, 0.01) - relative above the 0.01 floor, absolute below it, so
// finite-difference noise on near-zero gradients does not drown the signal.

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "actinet/nn/graph.hpp"
#include "actinet/nn/loss.hpp"
#include "actinet/rng.hpp"

namespace actinet {

struct GradCheckEntry {
  std::string block;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double error = 0.0;
};

struct GradCheckReport {
  double max_error = 0.0;
  double mean_error = 0.0;
  int checked = 0;
  GradCheckEntry worst;

  bool pass(double tolerance) const { return checked > 0 && max_error < tolerance; }
};

namespace detail {
inline double graph_loss(const Graph& g, const Tensor& input,
                         const std::vector<Tensor>& targets,
                         const std::vector<double>& weights, Mode mode,
                         Graph::Pass& p, Tensor& scratch) {
  g.forward(input, mode, nullptr, p);
  double loss = 0.0;
  for (int h = 0; h < g.num_heads(); ++h)
    loss += softmax_ce_batch(g.head_out(p, h), targets[h], weights[h], scratch);
  return loss;
}
}  // namespace detail

inline GradCheckReport grad_check(Graph& g, const Tensor& input,
                                  const std::vector<Tensor>& targets,
                                  const std::vector<double>& weights,
                                  int num_samples = 200, double step = 1e-5,
                                  std::uint64_t seed = 0, Mode mode = Mode::Eval) {
  if (mode == Mode::Train && g.has_layer_kind("dropout"))
    throw std::invalid_argument(
        "grad_check: graph contains stochastic layers; freeze them by checking "
        "in Eval mode (dropout off, batchnorm on running statistics)");
  if (static_cast<int>(targets.size()) != g.num_heads() ||
      weights.size() != targets.size())
    throw std::invalid_argument("grad_check: one target and weight per head required");

  // Analytic gradients.
  g.zero_grads();
  Graph::Pass p = g.forward(input, mode, nullptr);
  std::vector<Tensor> head_grads(g.num_heads());
  for (int h = 0; h < g.num_heads(); ++h)
    softmax_ce_batch(g.head_out(p, h), targets[h], weights[h], head_grads[h]);
  g.backward(p, head_grads);

  auto params = g.params();
  std::size_t total = 0;
  for (ParamBlock* b : params) total += b->value.size();
  if (total == 0) throw std::invalid_argument("grad_check: graph has no parameters");

  auto named = g.named_params();
  Rng rng(seed);
  Graph::Pass pass;
  Tensor scratch;
  GradCheckReport report;
  double err_sum = 0.0;
  const bool exhaustive = total <= static_cast<std::size_t>(num_samples);
  const int n = exhaustive ? static_cast<int>(total) : num_samples;
  for (int s = 0; s < n; ++s) {
    std::size_t flat =
        exhaustive
            ? static_cast<std::size_t>(s)
            : static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(total) - 1));
    std::size_t bi = 0;
    while (flat >= params[bi]->value.size()) {
      flat -= params[bi]->value.size();
      ++bi;
    }
    ParamBlock& blk = *params[bi];
    const double saved = blk.value[flat];
    blk.value[flat] = saved + step;
    const double lp = detail::graph_loss(g, input, targets, weights, mode, pass, scratch);
    blk.value[flat] = saved - step;
    const double lm = detail::graph_loss(g, input, targets, weights, mode, pass, scratch);
    blk.value[flat] = saved;

    const double numeric = (lp - lm) / (2.0 * step);
    const double analytic = blk.grad[flat];
    const double err = std::abs(analytic - numeric) /
                       std::max({std::abs(analytic), std::abs(numeric), 0.01});
    err_sum += err;
    ++report.checked;
    if (err >= report.max_error) {
      report.max_error = err;
      report.worst = {named[bi].first, flat, analytic, numeric, err};
    }
  }
  report.mean_error = report.checked ? err_sum / report.checked : 0.0;
  return report;
}

}  // namespace actinet
