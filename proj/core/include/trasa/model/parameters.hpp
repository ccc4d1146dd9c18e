#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "trasa/ad/tensor.hpp"
#include "trasa/model/hyperparams.hpp"

namespace trasa::model {

using ad::Shape;
using ad::Tensor;

/// Parameter names and shapes implied by a configuration, in canonical
/// order. This is the inventory a checkpoint must match exactly.
std::vector<std::pair<std::string, Shape>> parameter_inventory(const Hyperparams& hp);

/// Name prefix of encoder layer `k`, e.g. "layer0.".
std::string layer_prefix(std::size_t k);
inline constexpr const char* kSanReadoutPrefix = "readout.san.";

/// Ordered collection of named tensors with stable addresses.
template <typename T>
class ParameterSet {
 public:
  ParameterSet() = default;

  /// Adds a tensor marked requires_grad. Throws on duplicate names.
  Tensor<T>& add(const std::string& name, Tensor<T> value);

  bool contains(const std::string& name) const { return index_.contains(name); }
  /// Throws BoundsError naming the missing parameter.
  Tensor<T>& get(const std::string& name);
  const Tensor<T>& get(const std::string& name) const;

  std::size_t size() const { return tensors_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  Tensor<T>& at(std::size_t i) { return tensors_[i]; }
  const Tensor<T>& at(std::size_t i) const { return tensors_[i]; }
  std::vector<Tensor<T>*> pointers();
  std::size_t element_count() const;

  void zero_grad();
  void clear_grad();

 private:
  std::deque<Tensor<T>> tensors_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Fresh parameters for `hp`: Gaussian(0, init_std) everywhere except
/// layer-norm gains (1) and biases (0).
template <typename T>
ParameterSet<T> initialize_parameters(const Hyperparams& hp, std::uint64_t seed);

extern template class ParameterSet<float>;
extern template class ParameterSet<double>;

}  // namespace trasa::model
