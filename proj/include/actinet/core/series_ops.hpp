#pragma once

// Pure operations on labeled series: smoothing, context windowing,
// train/test splitting and day partitioning.

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "actinet/core/types.hpp"

namespace actinet {

// Centered moving average with edge-truncated windows; labels, tags and
// timestamps pass through unchanged.
inline LabeledSeries smooth_series(const LabeledSeries& series, int half_width) {
  if (series.epochs.empty())
    throw std::invalid_argument("smooth_series: empty series");
  if (half_width < 0)
    throw std::invalid_argument("smooth_series: half_width must be >= 0");
  LabeledSeries out = series;
  const std::int64_t n = static_cast<std::int64_t>(series.epochs.size());
  for (std::int64_t i = 0; i < n; ++i) {
    const std::int64_t lo = std::max<std::int64_t>(0, i - half_width);
    const std::int64_t hi = std::min<std::int64_t>(n - 1, i + half_width);
    double sum = 0.0;
    for (std::int64_t j = lo; j <= hi; ++j) sum += series.epochs[j].activity;
    out.epochs[i].activity = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

// One sample per center index in [context, len-context-1], stepping by
// stride. Boundary epochs without full context produce no sample.
inline std::vector<WindowSample> extract_windows(const LabeledSeries& series,
                                                 int context = kWindowContext,
                                                 int stride = 1) {
  if (context < 0) throw std::invalid_argument("extract_windows: negative context");
  if (stride < 1) throw std::invalid_argument("extract_windows: stride must be >= 1");
  const std::size_t min_len = 2 * static_cast<std::size_t>(context) + 1;
  if (series.size() < min_len)
    throw std::invalid_argument(
        "extract_windows: series '" + series.patient_id + "' has " +
        std::to_string(series.size()) + " epochs, need at least " +
        std::to_string(min_len));
  const bool labeled = series.fully_labeled();
  std::vector<WindowSample> samples;
  const std::size_t last = series.size() - static_cast<std::size_t>(context) - 1;
  for (std::size_t c = context; c <= last; c += stride) {
    WindowSample s;
    s.patient_id = series.patient_id;
    s.center_index = c;
    s.values.resize(min_len);
    for (std::size_t k = 0; k < min_len; ++k)
      s.values[k] = series.epochs[c - context + k].activity;
    if (labeled) {
      s.center_label = *series.epochs[c].state;
      s.window_labels.resize(min_len);
      for (std::size_t k = 0; k < min_len; ++k)
        s.window_labels[k] = *series.epochs[c - context + k].state;
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

// Deterministic 80/20-style split on contiguous per-patient blocks: for each
// patient, the first round(fraction*n) samples (in input order) go to train,
// the rest to test. Contiguous blocks limit leakage between overlapping
// windows across the split. The seed is accepted for interface stability; the
// block rule itself has no random choice to make.
inline std::pair<std::vector<WindowSample>, std::vector<WindowSample>>
split_train_test(const std::vector<WindowSample>& samples, double train_fraction = 0.8,
                 std::uint64_t seed = 0) {
  (void)seed;
  if (samples.empty())
    throw std::invalid_argument("split_train_test: empty sample list");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("split_train_test: fraction must be in (0,1)");
  // Group indices per patient, preserving encounter order.
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    auto [it, inserted] = groups.try_emplace(samples[i].patient_id);
    if (inserted) order.push_back(samples[i].patient_id);
    it->second.push_back(i);
  }
  std::vector<WindowSample> train, test;
  for (const std::string& pid : order) {
    const auto& idx = groups[pid];
    const auto n = static_cast<double>(idx.size());
    auto n_train = static_cast<std::size_t>(std::llround(train_fraction * n));
    n_train = std::min(n_train, idx.size());
    for (std::size_t j = 0; j < idx.size(); ++j)
      (j < n_train ? train : test).push_back(samples[idx[j]]);
  }
  return {std::move(train), std::move(test)};
}

// Consecutive blocks of 2880 epochs starting at the first epoch; a trailing
// partial day is dropped. has_attack is true iff any epoch in the block
// carries an attack tag.
inline std::vector<DayVector> partition_days(const LabeledSeries& series) {
  if (!series.fully_labeled())
    throw std::invalid_argument("partition_days: series '" + series.patient_id +
                                "' is not fully labeled");
  std::vector<DayVector> days;
  const std::size_t full_days = series.size() / kEpochsPerDay;
  for (std::size_t d = 0; d < full_days; ++d) {
    DayVector day;
    day.patient_id = series.patient_id;
    day.day_index = static_cast<int>(d);
    day.states.resize(kEpochsPerDay);
    for (std::size_t k = 0; k < kEpochsPerDay; ++k) {
      const Epoch& e = series.epochs[d * kEpochsPerDay + k];
      day.states[k] = static_cast<std::uint8_t>(ordinal(*e.state));
      if (e.attack && *e.attack) day.has_attack = true;
    }
    days.push_back(std::move(day));
  }
  return days;
}

}  // namespace actinet
