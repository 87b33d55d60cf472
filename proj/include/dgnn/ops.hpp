#pragma once

#include <span>

#include "dgnn/tensor.hpp"

// Differentiable operations. All of them record a backward rule when any
// input requires grad, and throw ShapeError/IndexError on malformed inputs.
namespace dgnn::ops {

// [m×k]·[k×n] -> [m×n]
Tensor matmul(const Tensor& a, const Tensor& b);

// Elementwise, identical shapes.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);

// [m×n] + [n] broadcast over rows.
Tensor add_bias(const Tensor& a, const Tensor& bias);
// [m×n] with row r multiplied by s[r]; s has shape [m].
Tensor scale_rows(const Tensor& a, const Tensor& s);

// x·W (+ b). W is [in×out], b is [out].
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);
Tensor linear(const Tensor& x, const Tensor& weight);

// ln(0.5·eˣ + 0.5)
Tensor shifted_softplus(const Tensor& a);
Tensor leaky_relu(const Tensor& a, double slope);
Tensor abs(const Tensor& a);

// Row gather: out[e] = a[index[e]].
Tensor gather_rows(const Tensor& a, std::span<const int> index);
// out[i] = Σ_{e: index[e]==i} values[e]; unindexed rows are zero.
Tensor scatter_add(const Tensor& values, std::span<const int> index, std::size_t out_size);
// Max-stabilized softmax of a rank-1 tensor within each segment id.
Tensor segment_softmax(const Tensor& logits, std::span<const int> segment);

Tensor concat_cols(const Tensor& a, const Tensor& b);
Tensor concat_rows(const Tensor& a, const Tensor& b);
Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end);
Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end);
Tensor reshape(const Tensor& a, Shape shape);

// Normalizes each row to zero mean, unit variance, then gamma ⊙ x̂ + beta.
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps = 1e-5);

Tensor sum(const Tensor& a);   // -> scalar
Tensor mean(const Tensor& a);  // -> scalar

}  // namespace dgnn::ops
