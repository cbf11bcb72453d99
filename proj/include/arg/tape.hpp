#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "arg/matrix.hpp"

namespace arg {

/// Handle to a node on a Tape.
struct ValueId {
  std::int64_t idx = -1;
  bool valid() const { return idx >= 0; }
};

/// Reverse-mode gradient tape over dense matrices. Records each primitive
/// application in order; backward() accumulates gradients of a 1x1 scalar
/// output into every leaf created with requires_grad. Replaying the same
/// sequence on identical inputs reproduces forward values bit-for-bit.
class Tape {
 public:
  ValueId leaf(const Matrix& value, bool requires_grad);
  ValueId constant(const Matrix& value) { return leaf(value, false); }

  ValueId matmul(ValueId a, ValueId b);
  ValueId add(ValueId a, ValueId b);
  /// Adds a 1 x k row vector to every row of a.
  ValueId add_row(ValueId a, ValueId row);
  ValueId scale(ValueId a, double c);
  ValueId relu(ValueId a);
  ValueId transpose(ValueId a);
  ValueId masked_row_softmax(ValueId scores, const Matrix& mask);
  /// Columnwise max; gradient routes to the lowest-index maximizer per column.
  ValueId col_max(ValueId a);
  /// Mean softmax cross-entropy over rows of logits whose label is >= 0.
  /// Returns a 1x1 scalar. Rows labeled -1 are excluded from the mean.
  ValueId softmax_cross_entropy(ValueId logits, const std::vector<int>& labels);

  const Matrix& value(ValueId v) const { return nodes_[v.idx].value; }
  const Matrix& grad(ValueId v) const { return nodes_[v.idx].grad; }

  /// Backpropagates from a 1x1 scalar node. Clears previous gradients.
  void backward(ValueId scalar_output);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    std::function<void(Tape&, Node&)> back;  // null for leaves
  };

  ValueId push(Matrix value, std::function<void(Tape&, Node&)> back);
  Matrix& grad_mut(ValueId v) { return nodes_[v.idx].grad; }

  std::vector<Node> nodes_;
};

/// Central-difference gradient of a scalar function, (f(p+eps e_k) -
/// f(p-eps e_k)) / (2 eps) per coordinate. Verification oracle.
std::vector<double> finite_diff_grad(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& p, double eps);

}  // namespace arg
