#include "seqbench/numerics/ops.hpp"

#include <algorithm>
#include <cmath>

#include "seqbench/error.hpp"

namespace seqbench {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw DimensionError("matmul: " + shape_to_string(a.shape()) + " x " + shape_to_string(b.shape()));
  }
  Tensor c({m, n});
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* pc = c.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = pc + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = pa[i * k + p];
      if (av == 0.0) continue;
      const double* brow = pb + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  check_finite(c, "matmul");
  return c;
}

void matmul_backward(const Tensor& a, const Tensor& b, std::span<const double> d_out,
                     std::span<double> d_a, std::span<double> d_b) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  const double* dc = d_out.data();
  if (!d_a.empty()) {
    for (std::size_t i = 0; i < m; ++i) {
      const double* dcrow = dc + i * n;
      for (std::size_t p = 0; p < k; ++p) {
        const double* brow = pb + p * n;
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += dcrow[j] * brow[j];
        d_a[i * k + p] += s;
      }
    }
  }
  if (!d_b.empty()) {
    for (std::size_t i = 0; i < m; ++i) {
      const double* dcrow = dc + i * n;
      for (std::size_t p = 0; p < k; ++p) {
        const double av = pa[i * k + p];
        if (av == 0.0) continue;
        double* dbrow = d_b.data() + p * n;
        for (std::size_t j = 0; j < n; ++j) dbrow[j] += av * dcrow[j];
      }
    }
  }
}

Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b) {
  if (b.numel() != w.cols()) {
    throw DimensionError("affine: bias " + shape_to_string(b.shape()) + " vs weight " +
                         shape_to_string(w.shape()));
  }
  Tensor y = matmul(x, w);
  const std::size_t n = y.cols();
  for (std::size_t i = 0; i < y.rows(); ++i) {
    for (std::size_t j = 0; j < n; ++j) y.at(i, j) += b[j];
  }
  return y;
}

void affine_backward(const Tensor& x, const Tensor& w, std::span<const double> d_out,
                     std::span<double> d_x, std::span<double> d_w, std::span<double> d_b) {
  matmul_backward(x, w, d_out, d_x, d_w);
  if (!d_b.empty()) {
    const std::size_t n = w.cols();
    const std::size_t m = d_out.size() / n;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) d_b[j] += d_out[i * n + j];
    }
  }
}

Tensor activate(const Tensor& x, Activation kind) {
  Tensor y(x.shape());
  const auto in = x.data();
  auto out = y.data();
  switch (kind) {
    case Activation::Sigmoid:
      for (std::size_t i = 0; i < in.size(); ++i) out[i] = sigmoid(in[i]);
      break;
    case Activation::Tanh:
      for (std::size_t i = 0; i < in.size(); ++i) out[i] = std::tanh(in[i]);
      break;
    case Activation::Softmax: {
      const std::size_t n = x.cols();
      for (std::size_t r = 0; r < x.rows(); ++r) {
        const double* row = in.data() + r * n;
        double* orow = out.data() + r * n;
        const double mx = *std::max_element(row, row + n);
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) sum += (orow[j] = std::exp(row[j] - mx));
        for (std::size_t j = 0; j < n; ++j) orow[j] /= sum;
      }
      break;
    }
  }
  check_finite(y, "activate");
  return y;
}

void activate_backward(const Tensor& y, Activation kind, std::span<const double> d_out,
                       std::span<double> d_in) {
  const auto out = y.data();
  switch (kind) {
    case Activation::Sigmoid:
      for (std::size_t i = 0; i < out.size(); ++i) d_in[i] += d_out[i] * out[i] * (1.0 - out[i]);
      break;
    case Activation::Tanh:
      for (std::size_t i = 0; i < out.size(); ++i) d_in[i] += d_out[i] * (1.0 - out[i] * out[i]);
      break;
    case Activation::Softmax: {
      const std::size_t n = y.cols();
      for (std::size_t r = 0; r < y.rows(); ++r) {
        double dot = 0.0;
        for (std::size_t j = 0; j < n; ++j) dot += d_out[r * n + j] * out[r * n + j];
        for (std::size_t j = 0; j < n; ++j) {
          d_in[r * n + j] += out[r * n + j] * (d_out[r * n + j] - dot);
        }
      }
      break;
    }
  }
}

namespace {
void check_labels(std::span<const double> logits, std::span<const double> labels) {
  if (logits.size() != labels.size()) throw DimensionError("bce: logits and labels differ in length");
  if (logits.empty()) throw DimensionError("bce: empty input");
  for (double y : labels) {
    if (y != 0.0 && y != 1.0) throw ValidationError("bce: labels must be 0 or 1");
  }
}

// log(1 + exp(x)) without overflow.
double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
}  // namespace

double bce_with_logits(std::span<const double> logits, std::span<const double> labels) {
  check_labels(logits, labels);
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double sign = 2.0 * labels[i] - 1.0;
    total += softplus(-sign * logits[i]);
  }
  return total / static_cast<double>(logits.size());
}

void bce_with_logits_backward(std::span<const double> logits, std::span<const double> labels,
                              double d_loss, std::span<double> d_logits) {
  check_labels(logits, labels);
  const double scale = d_loss / static_cast<double>(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    d_logits[i] += (sigmoid(logits[i]) - labels[i]) * scale;
  }
}

}  // namespace seqbench
