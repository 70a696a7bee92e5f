#pragma once

// Independent brute-force oracles used by the test suites. These deliberately
// re-derive results from first principles (literal sums, exhaustive path
// enumeration, from-scratch agglomeration) and never call the implementation
// paths they check.

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <vector>

namespace oracle {

// Literal evaluation of the 1-D convolution sum
//   z[i,k] = sum_f sum_n w[k,f,n] * r[i*stride+n, f] + b[k].
// r is indexed [f][t], z is [k][i].
inline std::vector<std::vector<double>> conv1d(
    const std::vector<std::vector<double>>& r, const std::vector<double>& w,
    const std::vector<double>& bias, int in_channels, int out_channels,
    int kernel_width, int stride) {
  const int t = static_cast<int>(r[0].size());
  const int to = (t - kernel_width) / stride + 1;
  std::vector<std::vector<double>> z(out_channels, std::vector<double>(to, 0.0));
  for (int k = 0; k < out_channels; ++k)
    for (int i = 0; i < to; ++i) {
      double sum = bias[k];
      for (int f = 0; f < in_channels; ++f)
        for (int n = 0; n < kernel_width; ++n)
          sum += w[(static_cast<std::size_t>(k) * in_channels + f) * kernel_width + n] *
                 r[f][i * stride + n];
      z[k][i] = sum;
    }
  return z;
}

inline std::vector<double> maxpool(const std::vector<double>& row, int width,
                                   int stride) {
  std::vector<double> out;
  for (int i = 0; i + width <= static_cast<int>(row.size()); i += stride)
    out.push_back(*std::max_element(row.begin() + i, row.begin() + i + width));
  return out;
}

// Exhaustive minimum over all monotone warping paths (steps down, right,
// diagonal) from (0,0) to (n-1,m-1); cost |a_i - b_j| summed over the path.
inline double dtw_exhaustive(const std::vector<double>& a, const std::vector<double>& b,
                             std::size_t i = 0, std::size_t j = 0) {
  const double cost = std::abs(a[i] - b[j]);
  if (i + 1 == a.size() && j + 1 == b.size()) return cost;
  double best = std::numeric_limits<double>::infinity();
  if (i + 1 < a.size()) best = std::min(best, dtw_exhaustive(a, b, i + 1, j));
  if (j + 1 < b.size()) best = std::min(best, dtw_exhaustive(a, b, i, j + 1));
  if (i + 1 < a.size() && j + 1 < b.size())
    best = std::min(best, dtw_exhaustive(a, b, i + 1, j + 1));
  return cost + best;
}

// From-scratch average-linkage agglomeration. Cluster distance is recomputed
// every step as the plain mean over all cross-pair leaf distances from the
// ORIGINAL matrix; ties break on the lexicographically smallest pair of
// smallest-leaf representatives.
struct NaiveMerge {
  int rep_a, rep_b;  // smallest leaf of each merged cluster
  double height;
  std::vector<int> members;  // leaves of the merged cluster, sorted
};

inline std::vector<NaiveMerge> upgma_naive(const std::vector<std::vector<double>>& d) {
  const int n = static_cast<int>(d.size());
  std::vector<std::vector<int>> clusters;
  for (int i = 0; i < n; ++i) clusters.push_back({i});
  std::vector<NaiveMerge> merges;
  while (clusters.size() > 1) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < clusters.size(); ++i)
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        double sum = 0.0;
        for (int a : clusters[i])
          for (int b : clusters[j]) sum += d[a][b];
        const double avg = sum / (clusters[i].size() * clusters[j].size());
        const int ri = std::min(clusters[i][0], clusters[j][0]);
        const int rj = std::max(clusters[i][0], clusters[j][0]);
        bool better = avg < best;
        if (!better && avg == best) {
          const int cri = std::min(clusters[bi][0], clusters[bj][0]);
          const int crj = std::max(clusters[bi][0], clusters[bj][0]);
          better = ri < cri || (ri == cri && rj < crj);
        }
        if (better) {
          best = avg;
          bi = i;
          bj = j;
        }
      }
    NaiveMerge m;
    m.rep_a = clusters[bi][0];
    m.rep_b = clusters[bj][0];
    m.height = best;
    m.members = clusters[bi];
    m.members.insert(m.members.end(), clusters[bj].begin(), clusters[bj].end());
    std::sort(m.members.begin(), m.members.end());
    merges.push_back(m);
    clusters[bi] = merges.back().members;
    clusters.erase(clusters.begin() + bj);
  }
  return merges;
}

}  // namespace oracle
