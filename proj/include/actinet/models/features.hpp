#pragma once

// The 80-value engineered feature vector for the MLP baseline: 10 statistics
// over each of 8 nested sub-windows centered on the epoch of interest
// (widths 5, 11, 21, 41, 81, 161, 321, 721). Per scale, in order:
//   0 mean
//   1 population standard deviation
//   2 minimum
//   3 maximum
//   4 median (widths are odd, so the exact middle order statistic)
//   5 fraction of values below the full-window median
//   6 zero-crossing rate of the mean-centered signal (strict sign changes
//     divided by width-1)
//   7 mean absolute first difference
//   8 90th percentile (nearest-rank: sorted[ceil(0.9*w)-1])
//   9 energy (mean of squares)

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "actinet/core/types.hpp"

namespace actinet {

constexpr int kNumEngineeredFeatures = 80;
constexpr std::array<int, 8> kFeatureScales{5, 11, 21, 41, 81, 161, 321, 721};

inline std::array<double, kNumEngineeredFeatures> engineer_features(
    const WindowSample& sample) {
  const std::vector<double>& x = sample.values;
  if (static_cast<int>(x.size()) != kWindowLength)
    throw std::invalid_argument("engineer_features: window length " +
                                std::to_string(x.size()) + ", expected " +
                                std::to_string(kWindowLength));
  // Full-window median, shared by the fraction-below feature at all scales.
  std::vector<double> sorted(x);
  std::sort(sorted.begin(), sorted.end());
  const double global_median = sorted[sorted.size() / 2];

  std::array<double, kNumEngineeredFeatures> out{};
  int fi = 0;
  for (int w : kFeatureScales) {
    const int lo = kWindowContext - w / 2;
    std::vector<double> win(x.begin() + lo, x.begin() + lo + w);

    double sum = 0.0, sq = 0.0, mn = win[0], mx = win[0];
    int below = 0;
    for (double v : win) {
      sum += v;
      sq += v * v;
      mn = std::min(mn, v);
      mx = std::max(mx, v);
      if (v < global_median) ++below;
    }
    const double mean = sum / w;
    const double var = std::max(0.0, sq / w - mean * mean);

    int crossings = 0;
    double abs_diff = 0.0;
    for (int i = 0; i + 1 < w; ++i) {
      if ((win[i] - mean) * (win[i + 1] - mean) < 0.0) ++crossings;
      abs_diff += std::abs(win[i + 1] - win[i]);
    }

    std::vector<double> ws(win);
    std::sort(ws.begin(), ws.end());
    const double median = ws[ws.size() / 2];
    const int p90_rank = static_cast<int>(std::ceil(0.9 * w)) - 1;

    out[fi++] = mean;
    out[fi++] = std::sqrt(var);
    out[fi++] = mn;
    out[fi++] = mx;
    out[fi++] = median;
    out[fi++] = static_cast<double>(below) / w;
    out[fi++] = static_cast<double>(crossings) / (w - 1);
    out[fi++] = abs_diff / (w - 1);
    out[fi++] = ws[p90_rank];
    out[fi++] = sq / w;
  }
  return out;
}

}  // namespace actinet
