#pragma once

// Dynamic time warping over the full (|a|+1) x (|b|+1) grid with local cost
// |a_i - b_j| and symmetric unit-weight steps {down, right, diagonal}; no
// window constraint. Rolling two-row DP keeps memory linear.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "actinet/core/types.hpp"

namespace actinet {

inline double dtw_distance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("dtw_distance: empty sequence");
  const std::size_t n = a.size(), m = b.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> prev(m + 1, inf), cur(m + 1, inf);
  prev[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = inf;
    for (std::size_t j = 1; j <= m; ++j) {
      const double cost = std::abs(a[i - 1] - b[j - 1]);
      cur[j] = cost + std::min({prev[j], cur[j - 1], prev[j - 1]});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

struct DistanceMatrix {
  int n = 0;
  std::vector<double> d;  // row-major n*n

  DistanceMatrix() = default;
  explicit DistanceMatrix(int size) : n(size), d(static_cast<std::size_t>(size) * size, 0.0) {}

  double& at(int i, int j) { return d[static_cast<std::size_t>(i) * n + j]; }
  double at(int i, int j) const { return d[static_cast<std::size_t>(i) * n + j]; }

  void validate() const {
    for (int i = 0; i < n; ++i) {
      if (at(i, i) != 0.0)
        throw std::invalid_argument("distance matrix: nonzero diagonal at " +
                                    std::to_string(i));
      for (int j = 0; j < i; ++j) {
        if (at(i, j) != at(j, i))
          throw std::invalid_argument("distance matrix: asymmetric at (" +
                                      std::to_string(i) + "," + std::to_string(j) + ")");
        if (at(i, j) < 0.0)
          throw std::invalid_argument("distance matrix: negative entry");
      }
    }
  }
};

// Ordinal state codes per bucket by majority vote; ties pick the lowest code.
// A trailing partial bucket is kept.
inline std::vector<double> encode_day_states(const DayVector& day, int downsample = 1) {
  if (downsample < 1)
    throw std::invalid_argument("encode_day_states: downsample factor must be >= 1");
  std::vector<double> out;
  out.reserve((day.states.size() + downsample - 1) / downsample);
  for (std::size_t i = 0; i < day.states.size(); i += downsample) {
    int counts[kNumStates] = {0, 0, 0, 0};
    const std::size_t hi = std::min(day.states.size(), i + downsample);
    for (std::size_t j = i; j < hi; ++j) ++counts[day.states[j]];
    int best = 0;
    for (int s = 1; s < kNumStates; ++s)
      if (counts[s] > counts[best]) best = s;
    out.push_back(static_cast<double>(best));
  }
  return out;
}

// Each unordered pair is computed once; the same downsampling factor applies
// to every day.
inline DistanceMatrix pairwise_dtw(const std::vector<DayVector>& days,
                                   int downsample = 1) {
  if (days.size() < 2)
    throw std::invalid_argument("pairwise_dtw: need at least 2 days");
  for (std::size_t i = 1; i < days.size(); ++i)
    if (days[i].states.size() != days[0].states.size())
      throw std::invalid_argument("pairwise_dtw: inconsistent day lengths");
  std::vector<std::vector<double>> enc;
  enc.reserve(days.size());
  for (const DayVector& d : days) enc.push_back(encode_day_states(d, downsample));
  DistanceMatrix m(static_cast<int>(days.size()));
  for (int i = 0; i < m.n; ++i)
    for (int j = i + 1; j < m.n; ++j)
      m.at(i, j) = m.at(j, i) = dtw_distance(enc[i], enc[j]);
  return m;
}

// Generic variant for pre-encoded sequences (e.g. raw-activity day vectors).
inline DistanceMatrix pairwise_dtw_sequences(const std::vector<std::vector<double>>& seqs) {
  if (seqs.size() < 2)
    throw std::invalid_argument("pairwise_dtw: need at least 2 sequences");
  DistanceMatrix m(static_cast<int>(seqs.size()));
  for (int i = 0; i < m.n; ++i)
    for (int j = i + 1; j < m.n; ++j)
      m.at(i, j) = m.at(j, i) = dtw_distance(seqs[i], seqs[j]);
  return m;
}

}  // namespace actinet
