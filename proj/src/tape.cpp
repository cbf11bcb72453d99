#include "arg/tape.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace arg {

ValueId Tape::push(Matrix value, std::function<void(Tape&, Node&)> back) {
  Node n;
  n.value = std::move(value);
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return ValueId{static_cast<std::int64_t>(nodes_.size()) - 1};
}

ValueId Tape::leaf(const Matrix& value, bool requires_grad) {
  ValueId id = push(value, nullptr);
  nodes_[id.idx].requires_grad = requires_grad;
  return id;
}

ValueId Tape::matmul(ValueId a, ValueId b) {
  Matrix c = arg::matmul(value(a), value(b));
  return push(std::move(c), [a, b](Tape& t, Node& self) {
    t.grad_mut(a) = arg::add(t.grad_mut(a),
                             arg::matmul(self.grad, arg::transpose(t.value(b))));
    t.grad_mut(b) = arg::add(t.grad_mut(b),
                             arg::matmul(arg::transpose(t.value(a)), self.grad));
  });
}

ValueId Tape::add(ValueId a, ValueId b) {
  Matrix c = arg::add(value(a), value(b));
  return push(std::move(c), [a, b](Tape& t, Node& self) {
    t.grad_mut(a) = arg::add(t.grad_mut(a), self.grad);
    t.grad_mut(b) = arg::add(t.grad_mut(b), self.grad);
  });
}

ValueId Tape::add_row(ValueId a, ValueId row) {
  const Matrix& av = value(a);
  const Matrix& rv = value(row);
  if (rv.rows() != 1 || rv.cols() != av.cols())
    throw std::invalid_argument("add_row: row vector shape mismatch");
  Matrix c = av;
  for (std::size_t i = 0; i < c.rows(); ++i)
    for (std::size_t j = 0; j < c.cols(); ++j) c(i, j) += rv(0, j);
  return push(std::move(c), [a, row](Tape& t, Node& self) {
    t.grad_mut(a) = arg::add(t.grad_mut(a), self.grad);
    Matrix& rg = t.grad_mut(row);
    for (std::size_t i = 0; i < self.grad.rows(); ++i)
      for (std::size_t j = 0; j < self.grad.cols(); ++j)
        rg(0, j) += self.grad(i, j);
  });
}

ValueId Tape::scale(ValueId a, double c) {
  Matrix v = arg::scale(value(a), c);
  return push(std::move(v), [a, c](Tape& t, Node& self) {
    t.grad_mut(a) = arg::add(t.grad_mut(a), arg::scale(self.grad, c));
  });
}

ValueId Tape::relu(ValueId a) {
  Matrix v = arg::relu(value(a));
  return push(std::move(v), [a](Tape& t, Node& self) {
    Matrix& ag = t.grad_mut(a);
    const Matrix& av = t.value(a);
    // subgradient 0 at exactly zero
    for (std::size_t i = 0; i < av.size(); ++i)
      if (av.data()[i] > 0.0) ag.data()[i] += self.grad.data()[i];
  });
}

ValueId Tape::transpose(ValueId a) {
  Matrix v = arg::transpose(value(a));
  return push(std::move(v), [a](Tape& t, Node& self) {
    t.grad_mut(a) = arg::add(t.grad_mut(a), arg::transpose(self.grad));
  });
}

ValueId Tape::masked_row_softmax(ValueId scores, const Matrix& mask) {
  Matrix g = arg::masked_row_softmax(value(scores), mask);
  return push(std::move(g), [scores](Tape& t, Node& self) {
    // dS_ij = G_ij * (dG_ij - sum_k dG_ik G_ik); masked entries have G=0.
    Matrix& sg = t.grad_mut(scores);
    const Matrix& g = self.value;
    for (std::size_t i = 0; i < g.rows(); ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < g.cols(); ++j) dot += self.grad(i, j) * g(i, j);
      for (std::size_t j = 0; j < g.cols(); ++j)
        sg(i, j) += g(i, j) * (self.grad(i, j) - dot);
    }
  });
}

ValueId Tape::col_max(ValueId a) {
  const Matrix& av = value(a);
  Matrix v = arg::col_max(av);
  std::vector<std::size_t> argmax(av.cols(), 0);
  for (std::size_t j = 0; j < av.cols(); ++j)
    for (std::size_t i = 1; i < av.rows(); ++i)
      if (av(i, j) > av(argmax[j], j)) argmax[j] = i;
  return push(std::move(v), [a, argmax](Tape& t, Node& self) {
    Matrix& ag = t.grad_mut(a);
    for (std::size_t j = 0; j < ag.cols(); ++j)
      ag(argmax[j], j) += self.grad(0, j);
  });
}

ValueId Tape::softmax_cross_entropy(ValueId logits, const std::vector<int>& labels) {
  const Matrix& lv = value(logits);
  if (labels.size() != lv.rows())
    throw std::invalid_argument("softmax_cross_entropy: label count != rows");
  std::size_t labeled = 0;
  double total = 0.0;
  for (std::size_t i = 0; i < lv.rows(); ++i) {
    if (labels[i] < 0) continue;
    if (static_cast<std::size_t>(labels[i]) >= lv.cols())
      throw std::invalid_argument("softmax_cross_entropy: label out of range");
    double row_max = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < lv.cols(); ++j) row_max = std::max(row_max, lv(i, j));
    double lse = 0.0;
    for (std::size_t j = 0; j < lv.cols(); ++j) lse += std::exp(lv(i, j) - row_max);
    lse = row_max + std::log(lse);
    total += lse - lv(i, static_cast<std::size_t>(labels[i]));
    ++labeled;
  }
  if (labeled == 0)
    throw std::invalid_argument("softmax_cross_entropy: no labeled rows");
  Matrix out(1, 1);
  out(0, 0) = total / static_cast<double>(labeled);
  const double inv_count = 1.0 / static_cast<double>(labeled);
  return push(std::move(out), [logits, labels, inv_count](Tape& t, Node& self) {
    const Matrix& lv = t.value(logits);
    Matrix& lg = t.grad_mut(logits);
    const double g = self.grad(0, 0) * inv_count;
    for (std::size_t i = 0; i < lv.rows(); ++i) {
      if (labels[i] < 0) continue;
      double row_max = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < lv.cols(); ++j)
        row_max = std::max(row_max, lv(i, j));
      double denom = 0.0;
      for (std::size_t j = 0; j < lv.cols(); ++j)
        denom += std::exp(lv(i, j) - row_max);
      for (std::size_t j = 0; j < lv.cols(); ++j) {
        double p = std::exp(lv(i, j) - row_max) / denom;
        double onehot = (static_cast<std::size_t>(labels[i]) == j) ? 1.0 : 0.0;
        lg(i, j) += g * (p - onehot);
      }
    }
  });
}

void Tape::backward(ValueId scalar_output) {
  const Matrix& out = value(scalar_output);
  if (out.rows() != 1 || out.cols() != 1)
    throw std::invalid_argument("backward: output must be 1x1");
  for (Node& n : nodes_) n.grad = Matrix(n.value.rows(), n.value.cols());
  nodes_[scalar_output.idx].grad(0, 0) = 1.0;
  for (std::int64_t i = scalar_output.idx; i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.back) n.back(*this, n);
  }
}

std::vector<double> finite_diff_grad(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& p, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("finite_diff_grad: eps must be > 0");
  std::vector<double> g(p.size());
  std::vector<double> probe = p;
  for (std::size_t k = 0; k < p.size(); ++k) {
    probe[k] = p[k] + eps;
    double hi = f(probe);
    probe[k] = p[k] - eps;
    double lo = f(probe);
    probe[k] = p[k];
    if (!std::isfinite(hi) || !std::isfinite(lo))
      throw std::runtime_error("finite_diff_grad: non-finite value at probe");
    g[k] = (hi - lo) / (2.0 * eps);
  }
  return g;
}

}  // namespace arg
