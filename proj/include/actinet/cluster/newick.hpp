#pragma once

// Parenthesized tree serialization with branch lengths, plus the matching
// parser for round trips. Leaf names are "<patient>_day<N>". The branch from
// a node at height h up to its parent at height H has length (H - h) / 2,
// so leaf-to-root path lengths equal half the root height (ultrametric).

#include <cctype>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "actinet/cluster/upgma.hpp"

namespace actinet {

inline std::string leaf_label(const DendroLeaf& leaf) {
  return leaf.patient_id + "_day" + std::to_string(leaf.day_index);
}

namespace detail {

inline std::string format_length(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline void write_subtree(const Dendrogram& t, int node, double parent_height,
                          bool is_root, std::string& out) {
  const DendroNode& n = t.nodes[node];
  if (n.is_leaf()) {
    out += leaf_label(n.leaf);
  } else {
    out += '(';
    write_subtree(t, n.left, n.height, false, out);
    out += ',';
    write_subtree(t, n.right, n.height, false, out);
    out += ')';
  }
  if (!is_root) {
    out += ':';
    out += format_length((parent_height - n.height) / 2.0);
  }
}

}  // namespace detail

inline std::string export_tree(const Dendrogram& tree) {
  std::string out;
  detail::write_subtree(tree, tree.root(), 0.0, true, out);
  out += ";";
  return out;
}

// Recursive-descent parser for the exported format. Restores node heights
// from the half-height branch convention; returns nodes with leaves first,
// merges in depth order, root last, matching the Dendrogram layout.
class NewickParser {
 public:
  Dendrogram parse(const std::string& text) {
    text_ = &text;
    pos_ = 0;
    raw_.clear();
    const int root = parse_node();
    skip_ws();
    if (pos_ >= text.size() || text[pos_] != ';')
      throw std::invalid_argument("newick: missing terminating ';'");

    // Recover heights bottom-up, then re-index leaves-first.
    std::vector<double> height(raw_.size(), 0.0);
    for (std::size_t i = 0; i < raw_.size(); ++i) {  // children precede parents
      if (raw_[i].left >= 0)
        height[i] = height[raw_[i].left] + 2.0 * raw_[raw_[i].left].branch;
    }
    Dendrogram out;
    std::vector<int> remap(raw_.size(), -1);
    for (std::size_t i = 0; i < raw_.size(); ++i)
      if (raw_[i].left < 0) {
        remap[i] = static_cast<int>(out.nodes.size());
        DendroNode n;
        n.leaf = parse_label(raw_[i].name);
        out.nodes.push_back(n);
      }
    out.num_leaves = static_cast<int>(out.nodes.size());
    for (std::size_t i = 0; i < raw_.size(); ++i)
      if (raw_[i].left >= 0) {
        remap[i] = static_cast<int>(out.nodes.size());
        DendroNode n;
        n.left = remap[raw_[i].left];
        n.right = remap[raw_[i].right];
        n.height = height[i];
        n.count = out.nodes[n.left].count + out.nodes[n.right].count;
        out.nodes.push_back(n);
      }
    if (remap[root] != static_cast<int>(out.nodes.size()) - 1)
      throw std::invalid_argument("newick: root is not the last merge");
    return out;
  }

  static DendroLeaf parse_label(const std::string& name) {
    const std::size_t at = name.rfind("_day");
    if (at == std::string::npos)
      throw std::invalid_argument("newick: leaf '" + name + "' lacks _day suffix");
    DendroLeaf leaf;
    leaf.patient_id = name.substr(0, at);
    leaf.day_index = std::stoi(name.substr(at + 4));
    return leaf;
  }

 private:
  struct RawNode {
    int left = -1, right = -1;
    double branch = 0.0;
    std::string name;
  };

  void skip_ws() {
    while (pos_ < text_->size() && std::isspace(static_cast<unsigned char>((*text_)[pos_])))
      ++pos_;
  }

  int parse_node() {
    skip_ws();
    RawNode n;
    if (pos_ < text_->size() && (*text_)[pos_] == '(') {
      ++pos_;
      n.left = parse_node();
      skip_ws();
      if (pos_ >= text_->size() || (*text_)[pos_] != ',')
        throw std::invalid_argument("newick: expected ',' (binary trees only)");
      ++pos_;
      n.right = parse_node();
      skip_ws();
      if (pos_ >= text_->size() || (*text_)[pos_] != ')')
        throw std::invalid_argument("newick: expected ')'");
      ++pos_;
    } else {
      while (pos_ < text_->size() && !strchr_like((*text_)[pos_])) {
        n.name += (*text_)[pos_];
        ++pos_;
      }
      if (n.name.empty()) throw std::invalid_argument("newick: empty leaf name");
    }
    skip_ws();
    if (pos_ < text_->size() && (*text_)[pos_] == ':') {
      ++pos_;
      std::size_t used = 0;
      n.branch = std::stod(text_->substr(pos_), &used);
      pos_ += used;
    }
    raw_.push_back(n);
    return static_cast<int>(raw_.size()) - 1;
  }

  static bool strchr_like(char c) {
    return c == ':' || c == ',' || c == ')' || c == '(' || c == ';' ||
           std::isspace(static_cast<unsigned char>(c));
  }

  const std::string* text_ = nullptr;
  std::size_t pos_ = 0;
  std::vector<RawNode> raw_;
};

inline Dendrogram parse_newick(const std::string& text) {
  return NewickParser().parse(text);
}

}  // namespace actinet
