#pragma once

// Average-linkage (UPGMA) agglomerative clustering. At every step the
// closest pair of clusters merges at height = their distance; the distance
// from the merged cluster AB to any C is the leaf-count-weighted average
//   d(AB,C) = (|A| d(A,C) + |B| d(B,C)) / (|A|+|B|),
// i.e. the unweighted mean over all cross-pair leaf distances. Ties pick the
// pair whose (smallest-leaf) representatives are lexicographically lowest.

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "actinet/cluster/dtw.hpp"

namespace actinet {

struct DendroLeaf {
  std::string patient_id;
  int day_index = 0;
  bool has_attack = false;
};

struct DendroNode {
  int left = -1;   // child node ids; -1 on leaves
  int right = -1;
  double height = 0.0;
  int count = 1;   // leaves under this node
  DendroLeaf leaf; // payload, meaningful on leaves only

  bool is_leaf() const { return left < 0; }
};

struct Dendrogram {
  // Nodes 0..n-1 are leaves; merges follow in creation order; the root is
  // the last node.
  std::vector<DendroNode> nodes;
  int num_leaves = 0;

  int root() const { return static_cast<int>(nodes.size()) - 1; }

  // Ultrametric sanity: merge heights never decrease from leaves to root.
  bool heights_monotone() const {
    for (const DendroNode& n : nodes) {
      if (n.is_leaf()) continue;
      if (nodes[n.left].height > n.height || nodes[n.right].height > n.height)
        return false;
    }
    return true;
  }
};

inline Dendrogram upgma(const DistanceMatrix& matrix,
                        const std::vector<DendroLeaf>& leaves = {}) {
  if (matrix.n < 2) throw std::invalid_argument("upgma: need at least 2 items");
  matrix.validate();
  if (!leaves.empty() && static_cast<int>(leaves.size()) != matrix.n)
    throw std::invalid_argument("upgma: leaf payload count mismatch");

  Dendrogram tree;
  tree.num_leaves = matrix.n;
  tree.nodes.resize(matrix.n);
  for (int i = 0; i < matrix.n; ++i) {
    tree.nodes[i] = DendroNode{};
    if (!leaves.empty()) tree.nodes[i].leaf = leaves[i];
  }

  struct Cluster {
    int node;  // id in tree.nodes
    int rep;   // smallest leaf index, for deterministic tie-breaking
    int count;
  };
  std::vector<Cluster> active;
  for (int i = 0; i < matrix.n; ++i) active.push_back({i, i, 1});
  // Cross-pair distance SUMS between active clusters. Sums merge exactly
  // (s(AB,C) = s(A,C) + s(B,C)); the mean s/(|A||B|) is computed fresh at
  // each comparison, so no intermediate rounding accumulates and the result
  // is bit-identical to a from-scratch averaging reference on integer-valued
  // distances (which state-code DTW always produces).
  std::vector<std::vector<double>> s(matrix.n, std::vector<double>(matrix.n));
  for (int i = 0; i < matrix.n; ++i)
    for (int j = 0; j < matrix.n; ++j) s[i][j] = matrix.at(i, j);

  while (active.size() > 1) {
    int bi = -1, bj = -1;
    double best = 0.0;
    for (std::size_t i = 0; i < active.size(); ++i)
      for (std::size_t j = i + 1; j < active.size(); ++j) {
        const double dist =
            s[i][j] / (static_cast<double>(active[i].count) * active[j].count);
        const int ri = std::min(active[i].rep, active[j].rep);
        const int rj = std::max(active[i].rep, active[j].rep);
        bool better = bi < 0 || dist < best;
        if (!better && dist == best) {
          const int cri = std::min(active[bi].rep, active[bj].rep);
          const int crj = std::max(active[bi].rep, active[bj].rep);
          better = ri < cri || (ri == cri && rj < crj);
        }
        if (better) {
          best = dist;
          bi = static_cast<int>(i);
          bj = static_cast<int>(j);
        }
      }

    DendroNode merged;
    merged.left = active[bi].node;
    merged.right = active[bj].node;
    merged.height = best;
    merged.count = active[bi].count + active[bj].count;
    tree.nodes.push_back(merged);

    // Merged sums overwrite slot bi.
    for (std::size_t k = 0; k < active.size(); ++k) {
      if (static_cast<int>(k) == bi || static_cast<int>(k) == bj) continue;
      const double ns = s[bi][k] + s[bj][k];
      s[bi][k] = s[k][bi] = ns;
    }
    active[bi].node = static_cast<int>(tree.nodes.size()) - 1;
    active[bi].rep = std::min(active[bi].rep, active[bj].rep);
    active[bi].count += active[bj].count;
    // Remove slot bj.
    active.erase(active.begin() + bj);
    s.erase(s.begin() + bj);
    for (auto& row : s) row.erase(row.begin() + bj);
  }
  return tree;
}

// Cut into k clusters by undoing the k-1 highest merges. UPGMA merge heights
// are non-decreasing over time, so with the tie rule "later merge first"
// those are exactly the last k-1 merges. Returns a cluster id per leaf;
// ids are ordered by each cluster's smallest leaf index.
inline std::vector<int> cut_tree(const Dendrogram& tree, int k) {
  const int n = tree.num_leaves;
  if (k < 1 || k > n)
    throw std::invalid_argument("cut_tree: k must be in [1, leaf count]");
  const int total = static_cast<int>(tree.nodes.size());
  const int first_removed = total - (k - 1);
  std::vector<int> assignment(n, -1);
  std::vector<std::pair<int, int>> roots;  // (smallest leaf, node)
  for (int r = 0; r < total; ++r) {
    // Roots of the cut forest: kept nodes whose parent is removed (the root
    // itself counts as removed-parent).
    if (r >= first_removed) continue;
    bool is_root = true;
    for (int p = 0; p < first_removed; ++p) {
      if (tree.nodes[p].left == r || tree.nodes[p].right == r) {
        is_root = false;
        break;
      }
    }
    if (!is_root) continue;
    // Collect leaves under r.
    int smallest = n;
    std::vector<int> stack{r}, members;
    while (!stack.empty()) {
      const int x = stack.back();
      stack.pop_back();
      if (tree.nodes[x].is_leaf()) {
        members.push_back(x);
        smallest = std::min(smallest, x);
      } else {
        stack.push_back(tree.nodes[x].left);
        stack.push_back(tree.nodes[x].right);
      }
    }
    roots.emplace_back(smallest, r);
    for (int leaf : members) assignment[leaf] = smallest;  // temporary key
  }
  std::sort(roots.begin(), roots.end());
  std::map<int, int> relabel;
  for (std::size_t i = 0; i < roots.size(); ++i)
    relabel[roots[i].first] = static_cast<int>(i);
  for (int& a : assignment) a = relabel.at(a);
  return assignment;
}

struct SeparationScore {
  double purity = 0.0;
  double adjusted_rand_index = 0.0;
};

// External validity of a flat clustering against ground-truth labels:
// purity and the pair-counting adjusted Rand index.
inline SeparationScore separation_score(const std::vector<int>& assignment,
                                        const std::vector<int>& labels) {
  if (assignment.size() != labels.size() || assignment.empty())
    throw std::invalid_argument("separation_score: label count mismatch");
  const std::size_t n = assignment.size();
  std::map<std::pair<int, int>, std::int64_t> joint;
  std::map<int, std::int64_t> by_cluster, by_label;
  for (std::size_t i = 0; i < n; ++i) {
    ++joint[{assignment[i], labels[i]}];
    ++by_cluster[assignment[i]];
    ++by_label[labels[i]];
  }

  SeparationScore s;
  std::map<int, std::int64_t> cluster_max;
  for (const auto& [key, c] : joint)
    cluster_max[key.first] = std::max(cluster_max[key.first], c);
  std::int64_t purity_sum = 0;
  for (const auto& [cl, c] : cluster_max) purity_sum += c;
  s.purity = static_cast<double>(purity_sum) / static_cast<double>(n);

  const auto comb2 = [](std::int64_t x) -> double {
    return 0.5 * static_cast<double>(x) * static_cast<double>(x - 1);
  };
  double sum_ij = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [key, c] : joint) sum_ij += comb2(c);
  for (const auto& [cl, c] : by_cluster) sum_a += comb2(c);
  for (const auto& [lb, c] : by_label) sum_b += comb2(c);
  const double expected = sum_a * sum_b / comb2(static_cast<std::int64_t>(n));
  const double max_index = 0.5 * (sum_a + sum_b);
  const double denom = max_index - expected;
  s.adjusted_rand_index = denom == 0.0 ? 1.0 : (sum_ij - expected) / denom;
  return s;
}

}  // namespace actinet
