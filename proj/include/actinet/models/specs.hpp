#pragma once

// Architecture descriptions for the three classifiers and the training
// hyperparameters. Defaults are the shipped configuration; every field is
// overridable from the run config.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "actinet/core/types.hpp"

namespace actinet {

struct ConvStage {
  int filters = 0;
  int kernel_width = 0;
  int pool_width = 0;  // pool stride equals pool width (non-overlapping)
};

struct SequentialCnnSpec {
  int input_length = kWindowLength;
  std::vector<ConvStage> stages{{32, 16, 4}, {64, 8, 4}, {96, 8, 2}};
  std::vector<int> dense{512, 32};
  int classes = kNumStates;
};

struct MultiTaskCnnSpec {
  int input_length = kWindowLength;
  // Shared trunk: three stacked convolution+pool stages.
  std::vector<ConvStage> trunk{{32, 16, 4}, {64, 8, 4}, {96, 8, 2}};
  // Branch 1: dense head estimating the (sleep, awake) fraction pair.
  std::vector<int> aux_dense{128};
  int aux_classes = 2;
  // Branch 2: extra conv stage(s), dense, then the center-epoch activity is
  // concatenated right before the remaining dense layers.
  std::vector<ConvStage> main_convs{{96, 4, 2}};
  std::vector<int> main_dense_pre_concat{512};
  std::vector<int> main_dense_post_concat{32};
  int classes = kNumStates;
  double aux_loss_weight = 1.0;
  double main_loss_weight = 1.0;
};

struct MlpBaselineSpec {
  int input_features = 80;
  std::vector<int> hidden{1024, 512, 64, 128, 32};
  int classes = kNumStates;
  bool batchnorm = true;
  double dropout_keep = 0.9;

  void validate() const {
    if (hidden.size() != 5)
      throw std::invalid_argument("mlp spec: exactly 5 hidden layers expected");
  }
};

struct TrainConfig {
  int batch_size = 32;
  double momentum = 0.9;
  double learning_rate = 0.01;
  int lr_decay_every = 5;     // epochs; 0 disables decay
  double lr_decay = 0.5;
  int epochs = 20;
  std::uint64_t seed = 0;

  void validate() const {
    if (batch_size < 1) throw std::invalid_argument("train config: batch_size >= 1");
    if (!(learning_rate > 0.0))
      throw std::invalid_argument("train config: learning rate must be positive");
    if (epochs < 1) throw std::invalid_argument("train config: epochs >= 1");
  }
};

// Auxiliary multi-task target: the fraction of window epochs spent in Sleep
// or Siesta, its complement, and the center one-hot.
struct MtlTarget {
  double sleep_fraction = 0.0;
  double awake_fraction = 1.0;
  SleepState center_label = SleepState::Wake;
};

inline MtlTarget make_mtl_targets(const WindowSample& sample) {
  if (sample.window_labels.empty())
    throw std::invalid_argument("make_mtl_targets: window labels missing");
  std::size_t s = 0;
  for (SleepState st : sample.window_labels)
    if (st == SleepState::Sleep || st == SleepState::Siesta) ++s;
  MtlTarget t;
  t.sleep_fraction = static_cast<double>(s) / static_cast<double>(sample.window_labels.size());
  t.awake_fraction = 1.0 - t.sleep_fraction;
  t.center_label = sample.center_label;
  return t;
}

}  // namespace actinet
