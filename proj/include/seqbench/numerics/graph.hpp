#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "seqbench/numerics/ops.hpp"
#include "seqbench/numerics/tensor.hpp"

namespace seqbench::ad {

class Graph;

/// Handle to a node recorded on a Graph tape.
class Var {
 public:
  Var() = default;
  Var(Graph* graph, std::size_t id) : graph_(graph), id_(id) {}

  Graph* graph() const { return graph_; }
  std::size_t id() const { return id_; }
  bool valid() const { return graph_ != nullptr; }
  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }

 private:
  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

/// Reverse-mode tape. Nodes are appended in evaluation order, so a reverse
/// sweep over node ids is a valid topological order for backward().
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  /// A leaf whose gradient is accumulated by backward().
  Var parameter(Tensor value);

  const Tensor& value(Var v) const { return nodes_[v.id()].value; }
  bool requires_grad(Var v) const { return nodes_[v.id()].requires_grad; }
  /// Gradient of the last backward() target with respect to v (zeros if untouched).
  std::vector<double> gradient(Var v) const;

  /// Seeds d(target)/d(target) = 1 for a single-element target and sweeps the tape.
  void backward(Var target);

  std::size_t size() const { return nodes_.size(); }

  // Node construction for op implementations.
  Var record(Tensor value, bool requires_grad, std::function<void(Graph&, std::size_t)> backward);
  std::span<double> grad_of(std::size_t id) { return nodes_[id].value.grad(); }
  const Tensor& value_of(std::size_t id) const { return nodes_[id].value; }
  bool needs_grad(std::size_t id) const { return nodes_[id].requires_grad; }

 private:
  struct Node {
    Tensor value;
    bool requires_grad = false;
    std::function<void(Graph&, std::size_t)> backward;
  };
  std::vector<Node> nodes_;
};

Var matmul(Var a, Var b);
/// Adds a length-n bias to every row of an m x n operand.
Var add_row(Var x, Var bias);
Var affine(Var x, Var w, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
/// 1 - a, elementwise.
Var one_minus(Var a);
Var sigmoid(Var a);
Var tanh(Var a);
/// Multiplies row r of a[m x n] by s[r] where s is m x 1.
Var scale_rows(Var a, Var s);
Var concat_cols(std::span<const Var> parts);
Var slice_cols(Var a, std::size_t start, std::size_t count);
/// Row r comes from `when_true` if mask[r] != 0, else from `when_false`. Exact copy, no arithmetic.
Var select_rows(std::span<const std::uint8_t> mask, Var when_true, Var when_false);
/// Softmax along each row restricted to entries with mask != 0; masked entries are exactly 0.
Var masked_softmax_rows(Var x, std::span<const std::uint8_t> mask);
/// For each of `rows` groups of `width` code ids, the mean of the matching
/// embedding rows over entries whose mask is set; all-masked groups yield zeros.
Var embed_mean(Var table, std::span<const std::int32_t> ids, std::span<const std::uint8_t> mask,
               std::size_t rows, std::size_t width);
/// Mean binary cross-entropy of m x 1 logits against 0/1 labels; a 1 x 1 result.
Var bce_with_logits(Var logits, std::span<const double> labels);
/// Sum of all elements; a 1 x 1 result.
Var sum(Var a);

}  // namespace seqbench::ad
