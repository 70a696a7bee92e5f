#pragma once

// Layered DAG with a single input node, optional branch points and named
// output heads. Node insertion order is the topological order. At a branch
// point (a node consumed by several others) backward sums the incoming
// gradients; Concat splits its gradient by position.

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "actinet/nn/layers.hpp"
#include "actinet/nn/tensor.hpp"
#include "actinet/rng.hpp"

namespace actinet {

class Graph {
 public:
  struct Node {
    std::string name;
    std::unique_ptr<Layer> layer;  // null for the input node
    std::vector<int> inputs;
    FeatShape shape;
  };

  // Holds everything forward produced; backward consumes it. Reusing one
  // Pass across minibatches keeps every buffer allocation-free in steady
  // state, which is where most of the training wall-clock otherwise goes.
  struct Pass {
    std::vector<Tensor> outs;
    std::vector<Trace> traces;
    std::vector<Tensor> grads;     // backward scratch, one per node
    std::vector<char> grad_live;   // backward bookkeeping
  };

  int add_input(int channels, int length) {
    if (!nodes_.empty())
      throw std::logic_error("graph: exactly one input node is allowed");
    nodes_.push_back(Node{"input", nullptr, {}, FeatShape{channels, length}});
    return 0;
  }

  int add(const std::string& name, std::unique_ptr<Layer> layer,
          std::vector<int> inputs) {
    if (nodes_.empty()) throw std::logic_error("graph: add an input node first");
    if (static_cast<int>(inputs.size()) != layer->arity())
      throw std::invalid_argument("graph: node '" + name + "' arity mismatch");
    std::vector<FeatShape> in_shapes;
    for (int i : inputs) {
      if (i < 0 || i >= static_cast<int>(nodes_.size()))
        throw std::invalid_argument("graph: node '" + name + "' references unknown input");
      in_shapes.push_back(nodes_[i].shape);
    }
    FeatShape out;
    try {
      out = layer->infer(in_shapes);
    } catch (const std::exception& e) {
      throw std::invalid_argument("graph: node '" + name + "': " + e.what());
    }
    nodes_.push_back(Node{name, std::move(layer), std::move(inputs), out});
    return static_cast<int>(nodes_.size()) - 1;
  }

  void mark_head(const std::string& head_name, int node) {
    heads_.push_back(node);
    head_names_.push_back(head_name);
  }

  int num_heads() const { return static_cast<int>(heads_.size()); }
  const std::string& head_name(int h) const { return head_names_[h]; }
  const FeatShape& head_shape(int h) const { return nodes_[heads_[h]].shape; }
  const FeatShape& input_shape() const { return nodes_.front().shape; }
  std::size_t num_nodes() const { return nodes_.size(); }
  const Node& node(std::size_t i) const { return nodes_[i]; }

  void forward(const Tensor& input, Mode mode, Rng* rng, Pass& p) const {
    if (nodes_.empty()) throw std::logic_error("graph: empty");
    if (input.channels != nodes_[0].shape.channels ||
        input.length != nodes_[0].shape.length)
      throw std::invalid_argument("graph: input shape " + input.shape_str() +
                                  " does not match expected (b," +
                                  nodes_[0].shape.str() + ")");
    p.outs.resize(nodes_.size());
    p.traces.resize(nodes_.size());
    p.outs[0] = input;
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
      std::vector<const Tensor*> in;
      for (int j : nodes_[i].inputs) in.push_back(&p.outs[j]);
      nodes_[i].layer->forward(in, mode, rng, p.outs[i], p.traces[i]);
    }
  }

  Pass forward(const Tensor& input, Mode mode, Rng* rng = nullptr) const {
    Pass p;
    forward(input, mode, rng, p);
    return p;
  }

  const Tensor& head_out(const Pass& p, int h) const { return p.outs[heads_[h]]; }

  // head_grads[h] = dLoss/d(head h logits). Parameter gradients accumulate
  // into the layers' grad buffers; call zero_grads() between minibatches.
  void backward(Pass& p, const std::vector<Tensor>& head_grads) {
    if (head_grads.size() != heads_.size())
      throw std::invalid_argument("graph: expected " + std::to_string(heads_.size()) +
                                  " head gradients");
    p.grads.resize(nodes_.size());
    p.grad_live.assign(nodes_.size(), 0);
    auto touch = [&p](std::size_t i, const Tensor& like) -> Tensor& {
      Tensor& g = p.grads[i];
      if (!p.grad_live[i]) {
        g.reshape(like.batch, like.channels, like.length);
        g.fill(0.0);
        p.grad_live[i] = 1;
      }
      return g;
    };
    for (std::size_t h = 0; h < heads_.size(); ++h) {
      Tensor& g = touch(heads_[h], head_grads[h]);
      for (std::size_t i = 0; i < g.v.size(); ++i) g.v[i] += head_grads[h].v[i];
    }
    for (std::size_t i = nodes_.size(); i-- > 1;) {
      if (!p.grad_live[i]) continue;  // node feeds no head
      std::vector<const Tensor*> in;
      std::vector<Tensor*> din;
      for (int j : nodes_[i].inputs) {
        in.push_back(&p.outs[j]);
        // Gradients w.r.t. the raw input are unused.
        din.push_back(j == 0 ? nullptr : &touch(j, p.outs[j]));
      }
      nodes_[i].layer->backward(in, p.outs[i], p.traces[i], p.grads[i], din);
    }
  }

  std::vector<ParamBlock*> params() {
    std::vector<ParamBlock*> out;
    for (auto& n : nodes_)
      if (n.layer)
        for (ParamBlock* p : n.layer->params()) out.push_back(p);
    return out;
  }

  // (node name, block) pairs in graph order; names are unique per graph and
  // used by the checkpoint format.
  std::vector<std::pair<std::string, ParamBlock*>> named_params() {
    std::vector<std::pair<std::string, ParamBlock*>> out;
    for (auto& n : nodes_)
      if (n.layer)
        for (ParamBlock* p : n.layer->params())
          out.emplace_back(n.name + "." + p->name, p);
    return out;
  }

  std::vector<std::pair<std::string, StateBlock*>> named_state() {
    std::vector<std::pair<std::string, StateBlock*>> out;
    for (auto& n : nodes_)
      if (n.layer)
        for (StateBlock* s : n.layer->state())
          out.emplace_back(n.name + "." + s->name, s);
    return out;
  }

  std::size_t param_count() {
    std::size_t c = 0;
    for (ParamBlock* p : params()) c += p->value.size();
    return c;
  }

  void zero_grads() {
    for (ParamBlock* p : params()) std::fill(p->grad.begin(), p->grad.end(), 0.0);
  }

  void init_params(std::uint64_t seed) {
    Rng rng(seed);
    for (auto& n : nodes_)
      if (n.layer) n.layer->init_params(rng);
  }

  bool has_layer_kind(const char* kind) const {
    for (const auto& n : nodes_)
      if (n.layer && std::string(n.layer->kind()) == kind) return true;
    return false;
  }

 private:
  std::vector<Node> nodes_;
  std::vector<int> heads_;
  std::vector<std::string> head_names_;
};

}  // namespace actinet
