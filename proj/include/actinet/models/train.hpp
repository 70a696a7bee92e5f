#pragma once

// Minibatch training loop (shuffled epochs, seed-deterministic), evaluation,
// and per-epoch prediction. The multi-task loss is the sum of the two branch
// cross-entropies; the returned parameters are the best-test-accuracy
// snapshot seen during training.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "actinet/eval/metrics.hpp"
#include "actinet/models/dataset.hpp"
#include "actinet/models/specs.hpp"
#include "actinet/nn/graph.hpp"
#include "actinet/nn/loss.hpp"
#include "actinet/nn/optimizer.hpp"
#include "actinet/rng.hpp"

namespace actinet {

enum class ModelKind { SequentialCnn, MultiTaskCnn, MlpBaseline };

inline const char* model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::SequentialCnn: return "seq-cnn";
    case ModelKind::MultiTaskCnn: return "mtl-cnn";
    case ModelKind::MlpBaseline: return "mlp";
  }
  return "?";
}

inline ModelKind model_kind_from_name(const std::string& name) {
  if (name == "seq-cnn") return ModelKind::SequentialCnn;
  if (name == "mtl-cnn") return ModelKind::MultiTaskCnn;
  if (name == "mlp") return ModelKind::MlpBaseline;
  throw std::invalid_argument("unknown model kind '" + name +
                              "' (expected seq-cnn, mtl-cnn or mlp)");
}

// Everything inference needs besides the graph itself.
struct Preprocess {
  InputScaler input;
  FeatureScaler features;  // only populated for the MLP
};

struct HeadWeights {
  double main = 1.0;
  double aux = 1.0;
};

struct TrainResult {
  ConvergenceCurve curve;
  int optimizer_steps = 0;
  int best_epoch = 0;
  double best_test_accuracy = 0.0;
};

namespace detail {

inline void make_input(ModelKind kind, const std::vector<WindowRef>& refs,
                       std::size_t offset, int batch, const Preprocess& prep,
                       Tensor& x) {
  if (kind == ModelKind::MlpBaseline)
    fill_mlp_input(refs, offset, batch, prep.features, x);
  else
    fill_cnn_input(refs, offset, batch, prep.input, x);
}

inline int argmax_row(const double* p, int n) {
  int best = 0;
  for (int i = 1; i < n; ++i)
    if (p[i] > p[best]) best = i;  // ties keep the lowest ordinal
  return best;
}

}  // namespace detail

// Argmax predictions for a pool of windows; used for test accuracy during
// training and for the evaluation report.
inline ConfusionMatrix evaluate_model(const Graph& g, ModelKind kind,
                                      const std::vector<WindowRef>& refs,
                                      const Preprocess& prep, int batch_size = 64) {
  if (refs.empty()) throw std::invalid_argument("evaluate_model: no windows");
  ConfusionMatrix cm;
  Tensor x;
  Graph::Pass p;
  const int main_head = g.num_heads() - 1;  // "main" is marked last
  for (std::size_t off = 0; off < refs.size();) {
    const int b = static_cast<int>(
        std::min<std::size_t>(batch_size, refs.size() - off));
    detail::make_input(kind, refs, off, b, prep, x);
    g.forward(x, Mode::Eval, nullptr, p);
    const Tensor& logits = g.head_out(p, main_head);
    for (int i = 0; i < b; ++i) {
      const int pred = detail::argmax_row(logits.sample(i), logits.features());
      cm.add(state_from_ordinal(pred), refs[off + i].center_label());
    }
    off += b;
  }
  return cm;
}

inline TrainResult train_model(Graph& g, ModelKind kind,
                               const std::vector<WindowRef>& train_refs,
                               const std::vector<WindowRef>& test_refs,
                               const Preprocess& prep, const TrainConfig& cfg,
                               const HeadWeights& weights = {}) {
  cfg.validate();
  if (train_refs.empty()) throw std::invalid_argument("train: empty dataset");

  auto params = g.params();
  OptimizerState opt;
  opt.momentum = cfg.momentum;
  opt.attach(params);

  const bool multitask = g.num_heads() == 2;
  const int main_head = g.num_heads() - 1;

  TrainResult result;
  result.curve.model_name = model_kind_name(kind);

  // Best-test-accuracy parameter snapshot (ties keep the earlier epoch).
  std::vector<std::vector<double>> best_params;
  std::vector<std::vector<double>> best_state;
  auto snapshot = [&]() {
    best_params.clear();
    for (ParamBlock* p : params) best_params.push_back(p->value);
    best_state.clear();
    for (auto& [name, s] : g.named_state()) best_state.push_back(s->value);
  };

  std::vector<WindowRef> order(train_refs);
  Tensor x, main_t, aux_t;
  Graph::Pass pass;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    opt.learning_rate =
        cfg.lr_decay_every > 0
            ? cfg.learning_rate * std::pow(cfg.lr_decay, (epoch - 1) / cfg.lr_decay_every)
            : cfg.learning_rate;

    Rng shuffle_rng(derive_seed(cfg.seed, 0x5u | (static_cast<std::uint64_t>(epoch) << 8)));
    shuffle_rng.shuffle(order);
    Rng dropout_rng(derive_seed(cfg.seed, 0xdu | (static_cast<std::uint64_t>(epoch) << 8)));

    double loss_sum = 0.0;
    std::int64_t seen = 0, correct = 0;
    int batch_index = 0;
    for (std::size_t off = 0; off < order.size(); ++batch_index) {
      const int b =
          static_cast<int>(std::min<std::size_t>(cfg.batch_size, order.size() - off));
      detail::make_input(kind, order, off, b, prep, x);
      fill_main_targets(order, off, b, main_t);

      g.zero_grads();
      g.forward(x, Mode::Train, &dropout_rng, pass);
      std::vector<Tensor> head_grads(g.num_heads());
      double loss = 0.0;
      if (multitask) {
        fill_aux_targets(order, off, b, aux_t);
        loss += softmax_ce_batch(g.head_out(pass, 0), aux_t, weights.aux, head_grads[0]);
      }
      loss += softmax_ce_batch(g.head_out(pass, main_head), main_t, weights.main,
                               head_grads[main_head]);
      if (!std::isfinite(loss))
        throw std::runtime_error("train: non-finite loss at epoch " +
                                 std::to_string(epoch) + ", batch " +
                                 std::to_string(batch_index));
      g.backward(pass, head_grads);
      sgd_momentum_step(params, opt);
      ++result.optimizer_steps;

      loss_sum += loss * b;
      const Tensor& logits = g.head_out(pass, main_head);
      for (int i = 0; i < b; ++i)
        if (detail::argmax_row(logits.sample(i), logits.features()) ==
            ordinal(order[off + i].center_label()))
          ++correct;
      seen += b;
      off += b;
    }

    EpochPoint pt;
    pt.epoch = epoch;
    pt.loss = loss_sum / static_cast<double>(seen);
    pt.train_accuracy = static_cast<double>(correct) / static_cast<double>(seen);
    if (!test_refs.empty()) {
      const ConfusionMatrix cm = evaluate_model(g, kind, test_refs, prep);
      pt.test_accuracy = static_cast<double>(cm.diagonal()) / static_cast<double>(cm.total());
    }
    pt.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.curve.points.push_back(pt);

    // With no held-out pool the final parameters win.
    if (best_params.empty() || test_refs.empty() ||
        pt.test_accuracy > result.best_test_accuracy) {
      result.best_test_accuracy = pt.test_accuracy;
      result.best_epoch = epoch;
      snapshot();
    }
  }

  // Leave the graph at the best snapshot.
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = best_params[i];
  auto state = g.named_state();
  for (std::size_t i = 0; i < state.size(); ++i) state[i].second->value = best_state[i];
  return result;
}

// Distribution over the four states for one window sample.
inline std::vector<double> predict_window(const Graph& g, ModelKind kind,
                                          const WindowSample& sample,
                                          const Preprocess& prep) {
  if (static_cast<int>(sample.values.size()) != g.input_shape().length &&
      kind != ModelKind::MlpBaseline)
    throw std::invalid_argument("predict_window: wrong window length");
  Tensor x;
  if (kind == ModelKind::MlpBaseline) {
    const auto f = engineer_features(sample);
    x = Tensor(1, kNumEngineeredFeatures, 1);
    for (int i = 0; i < kNumEngineeredFeatures; ++i)
      x.at(0, i, 0) = (f[i] - prep.features.mean[i]) / prep.features.std[i];
  } else {
    x = Tensor(1, 1, kWindowLength);
    for (int t = 0; t < kWindowLength; ++t)
      x.at(0, 0, t) = prep.input.apply(sample.values[t]);
  }
  Graph::Pass p = g.forward(x, Mode::Eval, nullptr);
  const Tensor& logits = g.head_out(p, g.num_heads() - 1);
  return softmax(logits.sample(0), logits.features());
}

// Per-epoch state sequence for a whole series. Boundary epochs without full
// context receive the nearest modeled prediction; argmax ties resolve to the
// lowest ordinal code.
inline std::vector<SleepState> predict_series(const Graph& g, ModelKind kind,
                                              const LabeledSeries& series,
                                              const Preprocess& prep,
                                              int batch_size = 64) {
  const std::size_t n = series.size();
  if (n < static_cast<std::size_t>(kWindowLength))
    throw std::invalid_argument("predict_series: series '" + series.patient_id +
                                "' shorter than one full context window (" +
                                std::to_string(kWindowLength) + " epochs)");
  std::vector<WindowRef> refs;
  refs.reserve(n - 2 * kWindowContext);
  for (std::size_t c = kWindowContext; c <= n - kWindowContext - 1; ++c)
    refs.push_back({&series, c});

  std::vector<SleepState> out(n, SleepState::Wake);
  Tensor x;
  Graph::Pass p;
  const int main_head = g.num_heads() - 1;
  for (std::size_t off = 0; off < refs.size();) {
    const int b = static_cast<int>(std::min<std::size_t>(batch_size, refs.size() - off));
    detail::make_input(kind, refs, off, b, prep, x);
    g.forward(x, Mode::Eval, nullptr, p);
    const Tensor& logits = g.head_out(p, main_head);
    for (int i = 0; i < b; ++i)
      out[refs[off + i].center] = state_from_ordinal(
          detail::argmax_row(logits.sample(i), logits.features()));
    off += b;
  }
  for (std::size_t i = 0; i < kWindowContext; ++i) out[i] = out[kWindowContext];
  for (std::size_t i = n - kWindowContext; i < n; ++i)
    out[i] = out[n - kWindowContext - 1];
  return out;
}

}  // namespace actinet
