#include "arg/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace arg {

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw std::invalid_argument("matmul: inner dimensions disagree (" +
                                std::to_string(a.cols()) + " vs " +
                                std::to_string(b.rows()) + ")");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

Matrix transpose(const Matrix& m) {
  Matrix t(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
  return t;
}

Matrix add(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("add: shape mismatch");
  Matrix c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] += b.data()[i];
  return c;
}

Matrix sub(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("sub: shape mismatch");
  Matrix c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] -= b.data()[i];
  return c;
}

Matrix scale(const Matrix& m, double c) {
  Matrix r = m;
  for (double& v : r.data()) v *= c;
  return r;
}

Matrix relu(const Matrix& m) {
  Matrix r = m;
  for (double& v : r.data()) v = std::max(v, 0.0);
  return r;
}

Matrix masked_row_softmax(const Matrix& scores, const Matrix& mask) {
  if (!scores.same_shape(mask))
    throw std::invalid_argument("masked_row_softmax: shape mismatch");
  Matrix out(scores.rows(), scores.cols());
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    double row_max = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < scores.cols(); ++j)
      if (mask(i, j) != 0.0) row_max = std::max(row_max, scores(i, j));
    if (!std::isfinite(row_max))
      throw std::invalid_argument("masked_row_softmax: all-zero mask row " +
                                  std::to_string(i));
    std::vector<double> terms;
    terms.reserve(scores.cols());
    for (std::size_t j = 0; j < scores.cols(); ++j) {
      if (mask(i, j) != 0.0) {
        out(i, j) = std::exp(scores(i, j) - row_max);
        terms.push_back(out(i, j));
      }
    }
    // summing in sorted order makes the denominator independent of the
    // actor ordering, so permuting actors permutes G exactly
    std::sort(terms.begin(), terms.end());
    double denom = 0.0;
    for (double t : terms) denom += t;
    for (std::size_t j = 0; j < scores.cols(); ++j) out(i, j) /= denom;
  }
  return out;
}

Matrix col_max(const Matrix& m) {
  if (m.rows() == 0) throw std::invalid_argument("col_max: empty matrix");
  Matrix r(1, m.cols());
  for (std::size_t j = 0; j < m.cols(); ++j) {
    double best = m(0, j);
    for (std::size_t i = 1; i < m.rows(); ++i) best = std::max(best, m(i, j));
    r(0, j) = best;
  }
  return r;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

}  // namespace arg
