#pragma once

// Lazy window dataset over labeled series. A WindowRef is (series, center):
// materializing all 721-value windows of a multi-week cohort would need
// gigabytes, so batches are sliced out of the source series on demand.
//
// Training pools keep every rare-state (FallingAsleep/Siesta) center and
// stride-subsample the abundant Wake/Sleep centers; evaluation pools stride
// uniformly over all states.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "actinet/core/types.hpp"
#include "actinet/models/features.hpp"
#include "actinet/models/specs.hpp"
#include "actinet/nn/tensor.hpp"

namespace actinet {

struct WindowRef {
  const LabeledSeries* series = nullptr;
  std::size_t center = 0;

  SleepState center_label() const { return *series->epochs[center].state; }
};

// Affine standardization of raw activity, fitted on the training epochs and
// frozen into the checkpoint.
struct InputScaler {
  double mean = 0.0;
  double std = 1.0;

  double apply(double x) const { return (x - mean) / std; }
};

struct FeatureScaler {
  std::vector<double> mean;  // kNumEngineeredFeatures each
  std::vector<double> std;

  bool empty() const { return mean.empty(); }
};

struct SamplingConfig {
  double train_fraction = 0.8;
  int common_stride = 24;  // Wake/Sleep training centers
  int rare_stride = 1;     // FallingAsleep/Siesta training centers
  int eval_stride = 8;     // held-out centers, all states

  void validate() const {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
      throw std::invalid_argument("sampling: train_fraction in (0,1)");
    if (common_stride < 1 || rare_stride < 1 || eval_stride < 1)
      throw std::invalid_argument("sampling: strides must be >= 1");
  }
};

struct SplitRefs {
  std::vector<WindowRef> train;
  std::vector<WindowRef> test;
};

// Contiguous per-patient split of valid centers, then per-pool sampling.
inline SplitRefs build_split_refs(const std::vector<LabeledSeries>& cohort,
                                  const SamplingConfig& cfg = {}) {
  cfg.validate();
  SplitRefs out;
  for (const LabeledSeries& s : cohort) {
    if (s.size() < static_cast<std::size_t>(kWindowLength)) continue;
    if (!s.fully_labeled())
      throw std::invalid_argument("build_split_refs: series '" + s.patient_id +
                                  "' is not fully labeled");
    const std::size_t first = kWindowContext;
    const std::size_t last = s.size() - kWindowContext - 1;
    const std::size_t n_centers = last - first + 1;
    const std::size_t cut =
        first + static_cast<std::size_t>(std::llround(cfg.train_fraction *
                                                      static_cast<double>(n_centers)));
    for (std::size_t c = first; c <= last; ++c) {
      const SleepState st = *s.epochs[c].state;
      const bool rare =
          st == SleepState::FallingAsleep || st == SleepState::Siesta;
      if (c < cut) {
        const int stride = rare ? cfg.rare_stride : cfg.common_stride;
        if ((c - first) % static_cast<std::size_t>(stride) == 0)
          out.train.push_back({&s, c});
      } else {
        if ((c - cut) % static_cast<std::size_t>(cfg.eval_stride) == 0)
          out.test.push_back({&s, c});
      }
    }
  }
  if (out.train.empty() || out.test.empty())
    throw std::invalid_argument("build_split_refs: empty train or test pool");
  return out;
}

// Fit on the union of epochs any training window touches (contiguous by
// construction of the pools).
inline InputScaler fit_input_scaler(const std::vector<WindowRef>& train_refs) {
  if (train_refs.empty())
    throw std::invalid_argument("fit_input_scaler: no training windows");
  double sum = 0.0, sq = 0.0;
  std::size_t n = 0;
  const LabeledSeries* cur = nullptr;
  std::size_t lo = 0, hi = 0;  // covered range in the current series
  auto flush = [&]() {
    if (!cur) return;
    for (std::size_t i = lo; i <= hi; ++i) {
      const double v = cur->epochs[i].activity;
      sum += v;
      sq += v * v;
      ++n;
    }
  };
  for (const WindowRef& r : train_refs) {
    const std::size_t a = r.center - kWindowContext;
    const std::size_t b = r.center + kWindowContext;
    if (r.series != cur || a > hi + 1) {
      flush();
      cur = r.series;
      lo = a;
      hi = b;
    } else {
      hi = std::max(hi, b);
    }
  }
  flush();
  InputScaler sc;
  sc.mean = sum / static_cast<double>(n);
  sc.std = std::sqrt(std::max(1e-12, sq / static_cast<double>(n) - sc.mean * sc.mean));
  return sc;
}

inline FeatureScaler fit_feature_scaler(const std::vector<WindowRef>& train_refs) {
  FeatureScaler fs;
  fs.mean.assign(kNumEngineeredFeatures, 0.0);
  fs.std.assign(kNumEngineeredFeatures, 0.0);
  WindowSample w;
  w.values.resize(kWindowLength);
  for (const WindowRef& r : train_refs) {
    for (int i = 0; i < kWindowLength; ++i)
      w.values[i] = r.series->epochs[r.center - kWindowContext + i].activity;
    const auto f = engineer_features(w);
    for (int i = 0; i < kNumEngineeredFeatures; ++i) {
      fs.mean[i] += f[i];
      fs.std[i] += f[i] * f[i];
    }
  }
  const double n = static_cast<double>(train_refs.size());
  for (int i = 0; i < kNumEngineeredFeatures; ++i) {
    fs.mean[i] /= n;
    fs.std[i] = std::sqrt(std::max(1e-12, fs.std[i] / n - fs.mean[i] * fs.mean[i]));
  }
  return fs;
}

// Batch materialization ------------------------------------------------------

inline void fill_cnn_input(const std::vector<WindowRef>& refs, std::size_t offset,
                           int batch, const InputScaler& sc, Tensor& x) {
  x.reshape(batch, 1, kWindowLength);
  for (int b = 0; b < batch; ++b) {
    const WindowRef& r = refs[offset + b];
    double* row = x.row(b, 0);
    const Epoch* e = &r.series->epochs[r.center - kWindowContext];
    for (int t = 0; t < kWindowLength; ++t) row[t] = sc.apply(e[t].activity);
  }
}

inline void fill_mlp_input(const std::vector<WindowRef>& refs, std::size_t offset,
                           int batch, const FeatureScaler& fs, Tensor& x) {
  x.reshape(batch, kNumEngineeredFeatures, 1);
  WindowSample w;
  w.values.resize(kWindowLength);
  for (int b = 0; b < batch; ++b) {
    const WindowRef& r = refs[offset + b];
    for (int i = 0; i < kWindowLength; ++i)
      w.values[i] = r.series->epochs[r.center - kWindowContext + i].activity;
    const auto f = engineer_features(w);
    for (int i = 0; i < kNumEngineeredFeatures; ++i)
      x.at(b, i, 0) = (f[i] - fs.mean[i]) / fs.std[i];
  }
}

inline void fill_main_targets(const std::vector<WindowRef>& refs, std::size_t offset,
                              int batch, Tensor& t) {
  t.reshape(batch, kNumStates, 1);
  t.fill(0.0);
  for (int b = 0; b < batch; ++b)
    t.at(b, ordinal(refs[offset + b].center_label()), 0) = 1.0;
}

// Soft (sleep fraction, awake fraction) target over the window.
inline void fill_aux_targets(const std::vector<WindowRef>& refs, std::size_t offset,
                             int batch, Tensor& t) {
  t.reshape(batch, 2, 1);
  for (int b = 0; b < batch; ++b) {
    const WindowRef& r = refs[offset + b];
    int s = 0;
    const Epoch* e = &r.series->epochs[r.center - kWindowContext];
    for (int i = 0; i < kWindowLength; ++i) {
      const SleepState st = *e[i].state;
      if (st == SleepState::Sleep || st == SleepState::Siesta) ++s;
    }
    const double frac = static_cast<double>(s) / kWindowLength;
    t.at(b, 0, 0) = frac;
    t.at(b, 1, 0) = 1.0 - frac;
  }
}

}  // namespace actinet
