#pragma once

// Plot-ready CSV emitters and the human-readable evaluation report. Metric
// cells in the text report are truncated to 3 decimals (the published-table
// convention); CSVs carry full precision.

#include <cstdio>
#include <string>
#include <vector>

#include "json.hpp"

#include "actinet/cluster/dtw.hpp"
#include "actinet/cluster/newick.hpp"
#include "actinet/cluster/upgma.hpp"
#include "actinet/eval/metrics.hpp"
#include "actinet/io/common.hpp"

namespace actinet::io {

namespace detail {
inline std::string g17(double x) {
  char b[32];
  std::snprintf(b, sizeof(b), "%.17g", x);
  return b;
}
inline std::string f3(double x) {
  char b[32];
  std::snprintf(b, sizeof(b), "%.3f", x);
  return b;
}
}  // namespace detail

inline std::string convergence_to_csv(const ConvergenceCurve& curve) {
  std::string out = "epoch,train_accuracy,test_accuracy,loss,seconds\n";
  for (const EpochPoint& p : curve.points) {
    out += std::to_string(p.epoch);
    out += ',';
    out += detail::g17(p.train_accuracy);
    out += ',';
    out += detail::g17(p.test_accuracy);
    out += ',';
    out += detail::g17(p.loss);
    out += ',';
    out += detail::f3(p.seconds);
    out += '\n';
  }
  return out;
}

inline std::string metrics_to_csv(const ConfusionMatrix& cm) {
  const MetricsReport r = precision_recall(cm);
  std::string out = "state,precision,recall,predicted_count,actual_count\n";
  for (int s = 0; s < kNumStates; ++s) {
    out += state_name(static_cast<SleepState>(s));
    out += ',';
    out += r.per_state[s].precision_defined ? detail::g17(r.per_state[s].precision)
                                            : std::string("undefined");
    out += ',';
    out += r.per_state[s].recall_defined ? detail::g17(r.per_state[s].recall)
                                         : std::string("undefined");
    out += ',';
    out += std::to_string(cm.row_sum(s));
    out += ',';
    out += std::to_string(cm.col_sum(s));
    out += '\n';
  }
  out += "overall_accuracy," + detail::g17(r.accuracy) + ",,,\n";
  out += "macro_f1," + detail::g17(r.macro_f1) + ",,,\n";
  return out;
}

// Per-state precision/recall table over a predicted-by-actual count matrix,
// in the layout of the published evaluation tables.
inline std::string format_evaluation_report(const ConfusionMatrix& cm,
                                            const std::string& title) {
  const MetricsReport r = precision_recall(cm);
  char buf[160];
  std::string out = title + "\n\n";

  out += "Performance by sleep/wake states\n";
  std::snprintf(buf, sizeof(buf), "%-12s %10s %10s %16s %10s\n", "", "Sleep", "Siesta",
                "Falling asleep", "Wake");
  out += buf;
  const int order[4] = {ordinal(SleepState::Sleep), ordinal(SleepState::Siesta),
                        ordinal(SleepState::FallingAsleep), ordinal(SleepState::Wake)};
  const auto metric_row = [&](const char* name, bool precision) {
    out += name;
    out += std::string(12 - std::string(name).size(), ' ');
    for (int s : order) {
      const StateMetrics& m = r.per_state[s];
      const bool defined = precision ? m.precision_defined : m.recall_defined;
      std::string cell = defined
                             ? detail::f3(truncate3(cm.at(s, s),
                                                    precision ? cm.row_sum(s) : cm.col_sum(s)))
                             : std::string("n/a");
      std::snprintf(buf, sizeof(buf), " %*s", s == order[2] ? 16 : 10, cell.c_str());
      out += buf;
    }
    out += '\n';
  };
  metric_row("Precision", true);
  metric_row("Recall", false);

  out += "\nConfusion matrix (rows = predicted, columns = actual)\n";
  std::snprintf(buf, sizeof(buf), "%-16s %10s %10s %16s %10s\n", "Predicted/Actual",
                "Sleep", "Siesta", "Falling asleep", "Wake");
  out += buf;
  for (int p : order) {
    std::snprintf(buf, sizeof(buf), "%-16s", state_name(static_cast<SleepState>(p)));
    out += buf;
    for (int a : order) {
      std::snprintf(buf, sizeof(buf), " %*lld", a == order[2] ? 16 : 10,
                    static_cast<long long>(cm.at(p, a)));
      out += buf;
    }
    out += '\n';
  }
  std::snprintf(buf, sizeof(buf), "\nOverall accuracy: %s (%lld / %lld epochs)\n",
                detail::f3(truncate3(cm.diagonal(), cm.total())).c_str(),
                static_cast<long long>(cm.diagonal()),
                static_cast<long long>(cm.total()));
  out += buf;
  return out;
}

// Confusion-matrix CSV: rows = predicted, columns = actual, ordinal order.
inline std::string confusion_to_csv(const ConfusionMatrix& cm) {
  std::string out = "predicted_actual";
  for (int a = 0; a < kNumStates; ++a)
    out += std::string(",") + state_code(static_cast<SleepState>(a));
  out += '\n';
  for (int p = 0; p < kNumStates; ++p) {
    out += state_code(static_cast<SleepState>(p));
    for (int a = 0; a < kNumStates; ++a) out += ',' + std::to_string(cm.at(p, a));
    out += '\n';
  }
  return out;
}

inline ConfusionMatrix confusion_from_csv(const std::string& text) {
  ConfusionMatrix cm;
  std::size_t pos = 0;
  int row = -1;  // -1 = header
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    const std::string line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i)
      if (i == line.size() || line[i] == ',') {
        f.push_back(line.substr(start, i - start));
        start = i + 1;
      }
    if (f.size() != kNumStates + 1)
      throw std::runtime_error("confusion matrix csv: expected 5 columns");
    if (row == -1) {
      ++row;
      continue;  // header names are fixed by position
    }
    if (row >= kNumStates)
      throw std::runtime_error("confusion matrix csv: too many rows");
    const auto st = state_from_code(f[0].empty() ? '?' : f[0][0]);
    if (!st || ordinal(*st) != row)
      throw std::runtime_error("confusion matrix csv: rows must be in W,F,Z,S order");
    for (int a = 0; a < kNumStates; ++a)
      cm.cell(row, a) = std::stoll(f[a + 1]);
    ++row;
  }
  if (row != kNumStates)
    throw std::runtime_error("confusion matrix csv: expected 4 data rows");
  return cm;
}

inline std::string comparison_to_csv(const std::vector<CurveComparisonRow>& rows,
                                     const std::vector<double>& thresholds) {
  std::string out = "model";
  for (double t : thresholds) out += ",epochs_to_" + detail::f3(t);
  out += ",final_accuracy\n";
  for (const CurveComparisonRow& r : rows) {
    out += r.model_name;
    for (int e : r.epochs_to_threshold)
      out += ',' + (e < 0 ? std::string("not_reached") : std::to_string(e));
    out += ',' + detail::g17(r.final_accuracy) + '\n';
  }
  return out;
}

inline std::string distance_matrix_to_csv(const DistanceMatrix& m,
                                          const std::vector<std::string>& names) {
  std::string out = "day";
  for (const std::string& n : names) out += ',' + n;
  out += '\n';
  for (int i = 0; i < m.n; ++i) {
    out += names[i];
    for (int j = 0; j < m.n; ++j) out += ',' + detail::g17(m.at(i, j));
    out += '\n';
  }
  return out;
}

inline nlohmann::json dendrogram_to_json(const Dendrogram& t, int node) {
  const DendroNode& n = t.nodes[node];
  if (n.is_leaf())
    return {{"name", leaf_label(n.leaf)},
            {"attack", n.leaf.has_attack},
            {"height", 0.0}};
  return {{"height", n.height},
          {"count", n.count},
          {"children", nlohmann::json::array({dendrogram_to_json(t, n.left),
                                              dendrogram_to_json(t, n.right)})}};
}

inline nlohmann::json dendrogram_to_json(const Dendrogram& t) {
  return dendrogram_to_json(t, t.root());
}

}  // namespace actinet::io
