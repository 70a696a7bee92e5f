#pragma once

// Confusion matrices (rows = predicted, columns = actual), per-state
// precision/recall, and convergence-curve comparison.
//
// Published-table formatting note: 3-decimal metric cells are truncated
// toward zero, not rounded; truncate3(7684, 7900) = 0.972. Integer
// arithmetic keeps this exact.

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "actinet/core/types.hpp"

namespace actinet {

class ConfusionMatrix {
 public:
  ConfusionMatrix() { for (auto& r : counts_) r.fill(0); }

  static ConfusionMatrix from_pairs(const std::vector<SleepState>& predicted,
                                    const std::vector<SleepState>& actual) {
    if (predicted.size() != actual.size())
      throw std::invalid_argument("confusion_matrix: length mismatch");
    if (predicted.empty())
      throw std::invalid_argument("confusion_matrix: empty input");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < predicted.size(); ++i)
      cm.add(predicted[i], actual[i]);
    return cm;
  }

  void add(SleepState predicted, SleepState actual, std::int64_t n = 1) {
    counts_[ordinal(predicted)][ordinal(actual)] += n;
  }

  std::int64_t at(SleepState predicted, SleepState actual) const {
    return counts_[ordinal(predicted)][ordinal(actual)];
  }
  std::int64_t at(int predicted, int actual) const { return counts_[predicted][actual]; }
  std::int64_t& cell(int predicted, int actual) { return counts_[predicted][actual]; }

  std::int64_t row_sum(int predicted) const {
    std::int64_t s = 0;
    for (int a = 0; a < kNumStates; ++a) s += counts_[predicted][a];
    return s;
  }
  std::int64_t col_sum(int actual) const {
    std::int64_t s = 0;
    for (int p = 0; p < kNumStates; ++p) s += counts_[p][actual];
    return s;
  }
  std::int64_t total() const {
    std::int64_t s = 0;
    for (int p = 0; p < kNumStates; ++p) s += row_sum(p);
    return s;
  }
  std::int64_t diagonal() const {
    std::int64_t s = 0;
    for (int i = 0; i < kNumStates; ++i) s += counts_[i][i];
    return s;
  }

 private:
  std::array<std::array<std::int64_t, kNumStates>, kNumStates> counts_;
};

struct StateMetrics {
  double precision = 0.0;
  double recall = 0.0;
  bool precision_defined = false;  // false when the predicted row is empty
  bool recall_defined = false;     // false when the actual column is empty
};

struct MetricsReport {
  std::array<StateMetrics, kNumStates> per_state;
  double accuracy = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
};

// precision = diagonal / predicted-row sum; recall = diagonal / actual-column
// sum. Zero-denominator states are flagged undefined, not reported as zero,
// and are skipped by the macro averages.
inline MetricsReport precision_recall(const ConfusionMatrix& cm) {
  if (cm.total() <= 0)
    throw std::invalid_argument("precision_recall: empty confusion matrix");
  MetricsReport r;
  double psum = 0.0, rsum = 0.0, fsum = 0.0;
  int pn = 0, rn = 0, fn = 0;
  for (int s = 0; s < kNumStates; ++s) {
    StateMetrics& m = r.per_state[s];
    const std::int64_t rs = cm.row_sum(s), cs = cm.col_sum(s);
    if (rs > 0) {
      m.precision = static_cast<double>(cm.at(s, s)) / static_cast<double>(rs);
      m.precision_defined = true;
      psum += m.precision;
      ++pn;
    }
    if (cs > 0) {
      m.recall = static_cast<double>(cm.at(s, s)) / static_cast<double>(cs);
      m.recall_defined = true;
      rsum += m.recall;
      ++rn;
    }
    if (m.precision_defined && m.recall_defined && m.precision + m.recall > 0.0) {
      fsum += 2.0 * m.precision * m.recall / (m.precision + m.recall);
      ++fn;
    }
  }
  r.accuracy = static_cast<double>(cm.diagonal()) / static_cast<double>(cm.total());
  r.macro_precision = pn ? psum / pn : 0.0;
  r.macro_recall = rn ? rsum / rn : 0.0;
  r.macro_f1 = fn ? fsum / fn : 0.0;
  return r;
}

// Exact truncation of num/den to 3 decimals, as the published tables do.
inline double truncate3(std::int64_t num, std::int64_t den) {
  if (den <= 0) throw std::invalid_argument("truncate3: empty denominator");
  return static_cast<double>((num * 1000) / den) / 1000.0;
}

// Truncation for already-computed ratios; a half-ulp guard absorbs binary
// representation dust (0.998 stored as 0.99799...).
inline double truncate3(double x) {
  return std::floor(x * 1000.0 + 1e-9) / 1000.0;
}

struct EpochPoint {
  int epoch = 0;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  double loss = 0.0;
  double seconds = 0.0;  // wall clock, informational only
};

struct ConvergenceCurve {
  std::string model_name;
  std::vector<EpochPoint> points;
};

struct CurveComparisonRow {
  std::string model_name;
  // First epoch whose test accuracy reaches each threshold; -1 = not reached.
  std::vector<int> epochs_to_threshold;
  double final_accuracy = 0.0;
};

inline std::vector<CurveComparisonRow> compare_curves(
    const std::vector<ConvergenceCurve>& curves,
    const std::vector<double>& thresholds = {0.90, 0.95, 0.99}) {
  if (curves.empty()) throw std::invalid_argument("compare_curves: no curves");
  std::vector<CurveComparisonRow> rows;
  for (const ConvergenceCurve& c : curves) {
    if (c.points.empty())
      throw std::invalid_argument("compare_curves: empty curve for '" + c.model_name + "'");
    CurveComparisonRow row;
    row.model_name = c.model_name;
    for (double th : thresholds) {
      int first = -1;
      for (const EpochPoint& p : c.points)
        if (p.test_accuracy >= th) {
          first = p.epoch;
          break;
        }
      row.epochs_to_threshold.push_back(first);
    }
    row.final_accuracy = c.points.back().test_accuracy;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace actinet
