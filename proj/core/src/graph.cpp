#include "klcpd/graph.hpp"

#include "klcpd/error.hpp"

namespace klcpd {

const Matrix& Var::value() const {
  if (!graph_) throw StateError("Var: use of an unbound variable");
  return graph_->value(*this);
}

void Graph::check_owned(Var v) const {
  if (!v.valid()) throw StateError("Graph: variable was never produced by a forward pass");
  if (v.graph() != this || v.id() >= nodes_.size())
    throw StateError("Graph: variable belongs to a different graph");
}

Var Graph::constant(Matrix value) { return push(std::move(value), nullptr, false); }

Var Graph::param(Parameter& p) {
  if (auto it = bound_.find(&p); it != bound_.end()) return Var(this, it->second);
  Var v = push(p.value, nullptr, record_);
  nodes_[v.id()].param = &p;
  bound_.emplace(&p, v.id());
  return v;
}

const Matrix& Graph::value(Var v) const {
  check_owned(v);
  return nodes_[v.id()].value;
}

Matrix Graph::grad(Var v) const {
  check_owned(v);
  const Node& n = nodes_[v.id()];
  if (n.grad.empty() && !n.value.empty()) return Matrix(n.value.rows(), n.value.cols());
  return n.grad;
}

Var Graph::push(Matrix value, BackwardFn fn, bool requires_grad) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = record_ && requires_grad;
  if (n.requires_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

bool Graph::requires_grad(Var v) const {
  check_owned(v);
  return nodes_[v.id()].requires_grad;
}

Matrix& Graph::grad_ref(Var v) {
  check_owned(v);
  Node& n = nodes_[v.id()];
  if (n.grad.empty() && !n.value.empty()) n.grad = Matrix(n.value.rows(), n.value.cols());
  return n.grad;
}

void Graph::backward(Var loss) {
  check_owned(loss);
  if (!record_) throw StateError("Graph::backward on a graph built without recording");
  const Node& root = nodes_[loss.id()];
  if (root.value.rows() != 1 || root.value.cols() != 1)
    throw ShapeError("Graph::backward: loss must be 1x1, got " + root.value.shape_string());

  for (auto& n : nodes_) n.grad = Matrix();
  grad_ref(loss)(0, 0) = 1.0;

  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || !n.backward || n.grad.empty()) continue;
    n.backward(*this, n.grad);
  }

  for (auto& [param, id] : bound_) {
    Node& n = nodes_[id];
    Parameter* p = n.param;
    if (n.grad.empty())
      p->grad = Matrix(p->value.rows(), p->value.cols());
    else
      p->grad = n.grad;
  }
}

}  // namespace klcpd
