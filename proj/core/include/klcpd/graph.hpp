#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <unordered_map>

#include "klcpd/matrix.hpp"
#include "klcpd/params.hpp"

namespace klcpd {

class Graph;

/// Handle to a node recorded on a Graph. Cheap to copy; valid while the
/// graph lives.
class Var {
 public:
  Var() = default;

  [[nodiscard]] bool valid() const noexcept { return graph_ != nullptr; }
  [[nodiscard]] Graph* graph() const noexcept { return graph_; }
  [[nodiscard]] std::size_t id() const noexcept { return id_; }
  [[nodiscard]] const Matrix& value() const;
  [[nodiscard]] std::size_t rows() const { return value().rows(); }
  [[nodiscard]] std::size_t cols() const { return value().cols(); }

 private:
  friend class Graph;
  Var(Graph* g, std::size_t id) : graph_(g), id_(id) {}
  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

/// Reverse-mode tape. Every op appends a node holding its forward value and
/// a closure that scatters the node's gradient into its inputs.
///
/// A graph built with `record = false` evaluates forward values only; this
/// is what scoring and frozen-model passes use.
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, const Matrix& out_grad)>;

  explicit Graph(bool record = true) : record_(record) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Matrix value);
  /// Leaf bound to a trainable parameter. Binding the same parameter twice
  /// returns the same node.
  Var param(Parameter& p);

  [[nodiscard]] const Matrix& value(Var v) const;
  /// Gradient of the last backward() loss w.r.t. `v` (zeros if unreachable).
  [[nodiscard]] Matrix grad(Var v) const;

  /// Propagates d(loss)/d(node) for every recorded node and writes the
  /// result into the grad buffer of every bound parameter. Bound parameters
  /// the loss does not reach receive zeros.
  void backward(Var loss);

  [[nodiscard]] bool recording() const noexcept { return record_; }
  [[nodiscard]] std::size_t node_count() const noexcept { return nodes_.size(); }

  // Op-implementer interface.
  Var push(Matrix value, BackwardFn fn, bool requires_grad);
  [[nodiscard]] bool requires_grad(Var v) const;
  /// Accumulation buffer for `v`, allocated on first use.
  Matrix& grad_ref(Var v);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    BackwardFn backward;
    bool requires_grad = false;
    Parameter* param = nullptr;
  };

  void check_owned(Var v) const;

  std::deque<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> bound_;
  bool record_;
};

}  // namespace klcpd
