#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "trasa/ad/tape.hpp"

// Differentiable operations over tape values. Every function records its
// result on the tape of its inputs; all inputs must share one tape.
//
// Broadcasting is limited to two cases: a right-hand operand with a single
// element (scalar) or one whose element count equals the last extent of the
// left-hand operand (row vector, repeated over every row).

namespace trasa::ad {

enum class BinaryOp { kAdd, kSub, kMul };
enum class Activation { kSigmoid, kTanh, kRelu };

template <typename T>
Var<T> matmul(Var<T> a, Var<T> b);
template <typename T>
Var<T> transpose(Var<T> a);

template <typename T>
Var<T> elementwise(Var<T> a, Var<T> b, BinaryOp op);
template <typename T>
Var<T> operator+(Var<T> a, Var<T> b) { return elementwise(a, b, BinaryOp::kAdd); }
template <typename T>
Var<T> operator-(Var<T> a, Var<T> b) { return elementwise(a, b, BinaryOp::kSub); }
template <typename T>
Var<T> operator*(Var<T> a, Var<T> b) { return elementwise(a, b, BinaryOp::kMul); }

/// a * factor + offset with constant scalars.
template <typename T>
Var<T> affine(Var<T> a, T factor, T offset = T(0));

template <typename T>
Var<T> activate(Var<T> x, Activation kind);
template <typename T>
Var<T> sigmoid(Var<T> x) { return activate(x, Activation::kSigmoid); }
template <typename T>
Var<T> tanh(Var<T> x) { return activate(x, Activation::kTanh); }
template <typename T>
Var<T> relu(Var<T> x) { return activate(x, Activation::kRelu); }

/// log(clamp(x, lo, hi)); the gradient is zero where clamping is active.
template <typename T>
Var<T> log_clamped(Var<T> x, T lo, T hi);

/// Max-subtracted softmax along `axis`. Throws NumericError on non-finite input.
template <typename T>
Var<T> softmax(Var<T> x, std::size_t axis);

/// Rows of a 2-D table in index order; backward scatter-adds.
template <typename T>
Var<T> gather_rows(Var<T> table, std::span<const std::size_t> indices);

template <typename T>
Var<T> concat(std::span<const Var<T>> parts, std::size_t axis);
template <typename T>
Var<T> slice(Var<T> x, std::size_t axis, std::size_t begin, std::size_t end);
template <typename T>
Var<T> reshape(Var<T> x, Shape shape);

template <typename T>
Var<T> sum(Var<T> x);
template <typename T>
Var<T> sum(Var<T> x, std::size_t axis);
template <typename T>
Var<T> mean(Var<T> x);
template <typename T>
Var<T> mean(Var<T> x, std::size_t axis);

/// Each row divided by sqrt(|row|^2 + 1e-12).
template <typename T>
Var<T> l2_normalize_rows(Var<T> x);

/// Per-row standardization followed by elementwise gain and bias.
template <typename T>
Var<T> layer_norm_rows(Var<T> x, Var<T> gain, Var<T> bias, T eps = T(1e-5));

/// Inverted dropout. The mask depends only on `seed`, so equal seeds give
/// equal masks. Identity when `training` is false or `p` is zero.
template <typename T>
Var<T> dropout(Var<T> x, double p, bool training, std::uint64_t seed);

/// The keep-mask dropout would draw for `count` elements (1 = kept).
std::vector<std::uint8_t> dropout_mask(std::size_t count, double p, std::uint64_t seed);

/// Adjoint of gather_rows on plain tensors: out[indices[i]] += rows[i].
template <typename T>
Tensor<T> scatter_add(const Tensor<T>& rows, std::span<const std::size_t> indices,
                      std::size_t table_rows);

}  // namespace trasa::ad
