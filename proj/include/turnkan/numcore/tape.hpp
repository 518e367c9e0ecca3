#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "turnkan/numcore/tensor.hpp"

namespace turnkan::num {

class Tape;

// Handle to a value recorded on a tape.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
};

class BackwardContext;

// Dynamic reverse-mode tape. Values are appended in evaluation order and
// backward() walks them in reverse, so a tape is single-use per pass.
class Tape {
 public:
  using BackwardFn = std::function<void(BackwardContext&)>;

  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) { nodes_.reserve(64); }

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool grad_enabled() const { return grad_enabled_; }

  Var constant(Tensor value) {
    Node n;
    n.owned = std::move(value);
    n.op = "constant";
    return push(std::move(n));
  }

  // Leaf that receives a gradient but is not tied to a Parameter.
  Var input(Tensor value) {
    Node n;
    n.owned = std::move(value);
    n.requires_grad = grad_enabled_;
    n.op = "input";
    return push(std::move(n));
  }

  // Leaf referencing a parameter's value; backward() accumulates into param.grad.
  Var param(Parameter& p) {
    Node n;
    n.ref = &p.value;
    n.param = &p;
    n.requires_grad = grad_enabled_ && p.requires_grad;
    n.op = "param";
    return push(std::move(n));
  }

  Var record(Tensor value, std::vector<Var> parents, BackwardFn fn, const char* op) {
    Node n;
    n.owned = std::move(value);
    n.op = op;
    bool needs = false;
    n.parents.reserve(parents.size());
    for (const Var& p : parents) {
      if (p.tape != this) throw ShapeError(std::string(op) + ": operand recorded on a different tape");
      n.parents.push_back(p.id);
      needs = needs || nodes_[p.id].requires_grad;
    }
    n.requires_grad = grad_enabled_ && needs;
    if (n.requires_grad) n.backward = std::move(fn);
    return push(std::move(n));
  }

  const Tensor& value(Var v) const { return node_value(nodes_.at(v.id)); }
  const Tensor& grad(Var v) const { return nodes_.at(v.id).grad; }
  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  // Propagate d(root)/d(node) for every node; root must hold a single value.
  void backward(Var root);

 private:
  friend class BackwardContext;

  struct Node {
    Tensor owned;
    const Tensor* ref = nullptr;
    Tensor grad;
    bool requires_grad = false;
    std::vector<std::size_t> parents;
    BackwardFn backward;
    Parameter* param = nullptr;
    const char* op = "";
  };

  static const Tensor& node_value(const Node& n) { return n.ref ? *n.ref : n.owned; }

  Var push(Node n) {
    nodes_.push_back(std::move(n));
    return Var{this, nodes_.size() - 1};
  }

  Tensor* grad_slot(std::size_t id) {
    Node& n = nodes_[id];
    if (!n.requires_grad) return nullptr;
    if (n.grad.empty()) n.grad = Tensor(node_value(n).shape(), 0.0);
    return &n.grad;
  }

  std::vector<Node> nodes_;
  bool grad_enabled_;
};

// View handed to an op's backward function.
class BackwardContext {
 public:
  BackwardContext(Tape& tape, std::size_t id) : tape_(tape), id_(id) {}

  const Tensor& grad_output() const { return tape_.nodes_[id_].grad; }
  const Tensor& output() const { return Tape::node_value(tape_.nodes_[id_]); }
  const Tensor& input(std::size_t i) const { return Tape::node_value(tape_.nodes_[parent(i)]); }
  // Accumulator for the i-th operand's gradient, or nullptr when it needs none.
  Tensor* input_grad(std::size_t i) { return tape_.grad_slot(parent(i)); }

 private:
  std::size_t parent(std::size_t i) const { return tape_.nodes_[id_].parents.at(i); }

  Tape& tape_;
  std::size_t id_;
};

inline const Tensor& Var::value() const { return tape->value(*this); }

inline void Tape::backward(Var root) {
  if (root.tape != this) throw ShapeError("backward: root recorded on a different tape");
  Node& r = nodes_.at(root.id);
  if (node_value(r).size() != 1) {
    throw ShapeError(std::string("backward: root '") + r.op + "' is not scalar, shape " +
                     shape_string(node_value(r).shape()));
  }
  if (!r.requires_grad) return;
  r.grad = Tensor(node_value(r).shape(), 1.0);
  for (std::size_t id = root.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (n.backward) {
      BackwardContext ctx(*this, id);
      n.backward(ctx);
    }
    if (n.param) {
      auto& dst = n.param->grad;
      if (dst.shape() != n.grad.shape()) dst = Tensor(n.grad.shape(), 0.0);
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += n.grad[i];
    }
  }
}

}  // namespace turnkan::num
