#pragma once

// Graph builders for the three architectures. Builders validate shape
// feasibility as they go; an infeasible stage throws naming the node.

#include <memory>
#include <string>

#include "actinet/models/specs.hpp"
#include "actinet/nn/graph.hpp"

namespace actinet {

namespace detail {

// conv -> relu -> pool, returning the node id of the stage output.
inline int add_conv_stage(Graph& g, const std::string& prefix, int stage_index,
                          const ConvStage& st, int in_node, int in_channels) {
  const std::string tag = prefix + "conv" + std::to_string(stage_index);
  int n = g.add(tag, std::make_unique<Conv1d>(in_channels, st.filters, st.kernel_width), {in_node});
  n = g.add(tag + ".relu", std::make_unique<Relu>(), {n});
  if (st.pool_width > 1)
    n = g.add(prefix + "pool" + std::to_string(stage_index),
              std::make_unique<MaxPool1d>(st.pool_width, st.pool_width), {n});
  return n;
}

inline int add_dense_relu(Graph& g, const std::string& name, int in_node,
                          int in_features, int units) {
  int n = g.add(name, std::make_unique<Dense>(in_features, units), {in_node});
  return g.add(name + ".relu", std::make_unique<Relu>(), {n});
}

inline int features_at(const Graph& g, int node) {
  const FeatShape& s = g.node(node).shape;
  return s.channels * s.length;
}

}  // namespace detail

// Single-stream 1-D CNN: conv/pool stack over the 721-value window, dense
// head, 4-class logits on head "main".
inline Graph build_sequential_cnn(const SequentialCnnSpec& spec = {}) {
  Graph g;
  int n = g.add_input(1, spec.input_length);
  int ch = 1;
  for (std::size_t i = 0; i < spec.stages.size(); ++i) {
    n = detail::add_conv_stage(g, "", static_cast<int>(i + 1), spec.stages[i], n, ch);
    ch = spec.stages[i].filters;
  }
  for (std::size_t i = 0; i < spec.dense.size(); ++i)
    n = detail::add_dense_relu(g, "dense" + std::to_string(i + 1), n,
                               detail::features_at(g, n), spec.dense[i]);
  n = g.add("output", std::make_unique<Dense>(detail::features_at(g, n), spec.classes), {n});
  g.mark_head("main", n);
  return g;
}

// Bifurcated network: shared trunk, a 2-unit head scoring the window's
// sleep/awake proportion, and a 4-class branch that sees the center-epoch
// activity again just before its final dense layers.
inline Graph build_multitask_cnn(const MultiTaskCnnSpec& spec = {}) {
  Graph g;
  const int input = g.add_input(1, spec.input_length);
  int n = input;
  int ch = 1;
  for (std::size_t i = 0; i < spec.trunk.size(); ++i) {
    n = detail::add_conv_stage(g, "trunk.", static_cast<int>(i + 1), spec.trunk[i], n, ch);
    ch = spec.trunk[i].filters;
  }
  const int trunk_out = n;

  // Branch 1 (auxiliary): MLP with a 2-unit output.
  int a = trunk_out;
  for (std::size_t i = 0; i < spec.aux_dense.size(); ++i)
    a = detail::add_dense_relu(g, "aux.dense" + std::to_string(i + 1), a,
                               detail::features_at(g, a), spec.aux_dense[i]);
  a = g.add("aux.output", std::make_unique<Dense>(detail::features_at(g, a), spec.aux_classes), {a});
  g.mark_head("aux", a);

  // Branch 2 (main): extra conv stages, dense, concat center epoch, dense.
  int m = trunk_out;
  for (std::size_t i = 0; i < spec.main_convs.size(); ++i) {
    m = detail::add_conv_stage(g, "main.", static_cast<int>(i + 1), spec.main_convs[i], m, ch);
    ch = spec.main_convs[i].filters;
  }
  for (std::size_t i = 0; i < spec.main_dense_pre_concat.size(); ++i)
    m = detail::add_dense_relu(g, "main.dense" + std::to_string(i + 1), m,
                               detail::features_at(g, m), spec.main_dense_pre_concat[i]);
  const int center = g.add("main.center",
                           std::make_unique<CenterPick>((spec.input_length - 1) / 2), {input});
  m = g.add("main.concat", std::make_unique<Concat>(), {m, center});
  for (std::size_t i = 0; i < spec.main_dense_post_concat.size(); ++i)
    m = detail::add_dense_relu(
        g, "main.dense" + std::to_string(spec.main_dense_pre_concat.size() + i + 1), m,
        detail::features_at(g, m), spec.main_dense_post_concat[i]);
  m = g.add("main.output", std::make_unique<Dense>(detail::features_at(g, m), spec.classes), {m});
  g.mark_head("main", m);
  return g;
}

// Five-hidden-layer perceptron over the 80 engineered features, with
// batchnorm and dropout as regularization.
inline Graph build_mlp_baseline(const MlpBaselineSpec& spec = {}) {
  spec.validate();
  Graph g;
  int n = g.add_input(spec.input_features, 1);
  int in_features = spec.input_features;
  for (std::size_t i = 0; i < spec.hidden.size(); ++i) {
    const std::string name = "dense" + std::to_string(i + 1);
    n = g.add(name, std::make_unique<Dense>(in_features, spec.hidden[i]), {n});
    if (spec.batchnorm)
      n = g.add(name + ".bn", std::make_unique<BatchNorm1d>(spec.hidden[i]), {n});
    n = g.add(name + ".relu", std::make_unique<Relu>(), {n});
    if (spec.dropout_keep < 1.0)
      n = g.add(name + ".drop", std::make_unique<Dropout>(spec.dropout_keep), {n});
    in_features = spec.hidden[i];
  }
  n = g.add("output", std::make_unique<Dense>(in_features, spec.classes), {n});
  g.mark_head("main", n);
  return g;
}

}  // namespace actinet
