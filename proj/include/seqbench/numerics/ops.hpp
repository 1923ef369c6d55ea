#pragma once

#include <span>

#include "seqbench/numerics/tensor.hpp"

namespace seqbench {

enum class Activation { Sigmoid, Tanh, Softmax };

double sigmoid(double x);

/// C = A * B for A[m x k], B[k x n].
Tensor matmul(const Tensor& a, const Tensor& b);
/// Accumulates dA += dC * B^T and dB += A^T * dC. Either output may be null.
void matmul_backward(const Tensor& a, const Tensor& b, std::span<const double> d_out,
                     std::span<double> d_a, std::span<double> d_b);

/// x * w + b with b broadcast over rows.
Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b);
void affine_backward(const Tensor& x, const Tensor& w, std::span<const double> d_out,
                     std::span<double> d_x, std::span<double> d_w, std::span<double> d_b);

/// Elementwise sigmoid/tanh, or softmax along the last axis (max-subtracted).
Tensor activate(const Tensor& x, Activation kind);
/// Accumulates the input gradient given the forward output y.
void activate_backward(const Tensor& y, Activation kind, std::span<const double> d_out,
                       std::span<double> d_in);

/// Mean over n of log(1 + exp(-(2y-1) * logit)), computed stably.
double bce_with_logits(std::span<const double> logits, std::span<const double> labels);
/// d loss / d logit = (sigmoid(logit) - y) / n, accumulated into d_logits.
void bce_with_logits_backward(std::span<const double> logits, std::span<const double> labels,
                              double d_loss, std::span<double> d_logits);

}  // namespace seqbench
