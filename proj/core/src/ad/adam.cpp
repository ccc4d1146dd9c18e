#include "trasa/ad/adam.hpp"

#include <cmath>
#include <string>

namespace trasa::ad {

template <typename T>
void adam_step(std::span<Tensor<T>* const> params, AdamState<T>& state) {
  const AdamOptions& opt = state.options;
  if (!(opt.learning_rate > 0.0)) throw ConfigError("Adam learning rate must be positive");
  if (opt.weight_decay < 0.0) throw ConfigError("Adam weight decay must be non-negative");

  if (state.first_moment.empty() && state.step == 0) {
    for (const auto* p : params) {
      state.first_moment.emplace_back(p->size(), T(0));
      state.second_moment.emplace_back(p->size(), T(0));
    }
  }
  if (state.first_moment.size() != params.size()) {
    throw DimensionError("Adam state tracks " + std::to_string(state.first_moment.size()) +
                         " parameters, step got " + std::to_string(params.size()));
  }

  ++state.step;
  const double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(state.step));
  const T b1 = static_cast<T>(opt.beta1), b2 = static_cast<T>(opt.beta2);
  const T lr = static_cast<T>(opt.learning_rate);
  const T eps = static_cast<T>(opt.epsilon);
  const T decay = static_cast<T>(opt.weight_decay);

  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor<T>& param = *params[p];
    auto& m = state.first_moment[p];
    auto& v = state.second_moment[p];
    if (m.size() != param.size()) {
      throw DimensionError("Adam moment buffer of size " + std::to_string(m.size()) +
                           " does not match parameter of shape " + to_string(param.shape()));
    }
    const auto grad = param.grad();
    if (!grad.empty() && grad.size() != param.size()) {
      throw DimensionError("gradient size does not match parameter of shape " +
                           to_string(param.shape()));
    }
    auto data = param.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const T g = (grad.empty() ? T(0) : grad[i]) + decay * data[i];
      m[i] = b1 * m[i] + (T(1) - b1) * g;
      v[i] = b2 * v[i] + (T(1) - b2) * g * g;
      const T m_hat = m[i] / static_cast<T>(bc1);
      const T v_hat = v[i] / static_cast<T>(bc2);
      data[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
  }
}

template void adam_step<float>(std::span<Tensor<float>* const>, AdamState<float>&);
template void adam_step<double>(std::span<Tensor<double>* const>, AdamState<double>&);

}  // namespace trasa::ad
