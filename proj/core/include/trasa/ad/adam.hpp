#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "trasa/ad/tensor.hpp"

namespace trasa::ad {

struct AdamOptions {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// L2 penalty: lambda * theta is added to the gradient before the
  /// moment updates.
  double weight_decay = 0.0;
};

template <typename T>
struct AdamState {
  AdamOptions options;
  std::uint64_t step = 0;
  std::vector<std::vector<T>> first_moment;
  std::vector<std::vector<T>> second_moment;
};

/// One bias-corrected Adam update of `params` from their gradient buffers.
/// A parameter without a gradient is treated as having a zero gradient.
/// Moments are zero-allocated on the first call; later calls must pass the
/// same parameter list (DimensionError otherwise).
template <typename T>
void adam_step(std::span<Tensor<T>* const> params, AdamState<T>& state);

extern template void adam_step<float>(std::span<Tensor<float>* const>, AdamState<float>&);
extern template void adam_step<double>(std::span<Tensor<double>* const>, AdamState<double>&);

}  // namespace trasa::ad
