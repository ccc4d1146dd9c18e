#include "trasa/model/parameters.hpp"

#include <random>

#include "trasa/graph/session_graph.hpp"

namespace trasa::model {

namespace {

void add_attention_block(std::vector<std::pair<std::string, Shape>>& out,
                         const std::string& prefix, std::size_t d, std::size_t ffn) {
  for (const char* name : {"W_q", "W_k", "W_v", "W_o"}) out.emplace_back(prefix + name, Shape{d, d});
  out.emplace_back(prefix + "ffn.W_1", Shape{d, ffn});
  out.emplace_back(prefix + "ffn.b_1", Shape{ffn});
  out.emplace_back(prefix + "ffn.W_2", Shape{ffn, d});
  out.emplace_back(prefix + "ffn.b_2", Shape{d});
  for (const char* name : {"ln1.gain", "ln1.bias", "ln2.gain", "ln2.bias"}) {
    out.emplace_back(prefix + name, Shape{d});
  }
}

void add_gru(std::vector<std::pair<std::string, Shape>>& out, const std::string& prefix,
             std::size_t input, std::size_t hidden) {
  for (const char* gate : {"z", "g", "h"}) {
    const std::string g(gate);
    out.emplace_back(prefix + "W_" + g, Shape{input, hidden});
    out.emplace_back(prefix + "U_" + g, Shape{hidden, hidden});
    out.emplace_back(prefix + "b_" + g, Shape{hidden});
  }
}

bool is_layer_norm(const std::string& name) {
  return name.find("ln1.") != std::string::npos || name.find("ln2.") != std::string::npos;
}

}  // namespace

std::string layer_prefix(std::size_t k) { return "layer" + std::to_string(k) + "."; }

std::vector<std::pair<std::string, Shape>> parameter_inventory(const Hyperparams& hp) {
  hp.validate();
  const std::size_t d = hp.dim;
  std::vector<std::pair<std::string, Shape>> out;
  out.emplace_back("item_embedding", Shape{hp.vocab_size, d});
  if (hp.uses_positions()) out.emplace_back("position_embedding", Shape{hp.max_positions, d});
  if (hp.uses_relations()) {
    out.emplace_back("edge_type_embedding", Shape{graph::kEdgeTypeCount, d});
    add_gru(out, "relation.gru_fwd.", d, hp.gru_hidden());
    add_gru(out, "relation.gru_bwd.", d, hp.gru_hidden());
    out.emplace_back("relation.W_r", Shape{d, 2 * d});
  }
  for (std::size_t k = 0; k < hp.encoder_layers(); ++k) {
    add_attention_block(out, layer_prefix(k), d, hp.ffn_width());
  }
  switch (hp.readout) {
    case Readout::kTrasa:
    case Readout::kGraph:
      out.emplace_back("readout.W_4", Shape{d, d});
      out.emplace_back("readout.W_5", Shape{d, d});
      out.emplace_back("readout.b_3", Shape{d});
      out.emplace_back("readout.q", Shape{d, 1});
      break;
    case Readout::kSan:
      add_attention_block(out, kSanReadoutPrefix, d, hp.ffn_width());
      break;
    case Readout::kSum:
      break;
  }
  return out;
}

template <typename T>
Tensor<T>& ParameterSet<T>::add(const std::string& name, Tensor<T> value) {
  if (index_.contains(name)) throw ContractError("duplicate parameter '" + name + "'");
  value.set_requires_grad(true);
  index_.emplace(name, tensors_.size());
  names_.push_back(name);
  tensors_.push_back(std::move(value));
  return tensors_.back();
}

template <typename T>
Tensor<T>& ParameterSet<T>::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw BoundsError("no parameter named '" + name + "'");
  return tensors_[it->second];
}

template <typename T>
const Tensor<T>& ParameterSet<T>::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw BoundsError("no parameter named '" + name + "'");
  return tensors_[it->second];
}

template <typename T>
std::vector<Tensor<T>*> ParameterSet<T>::pointers() {
  std::vector<Tensor<T>*> out;
  out.reserve(tensors_.size());
  for (auto& t : tensors_) out.push_back(&t);
  return out;
}

template <typename T>
std::size_t ParameterSet<T>::element_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += t.size();
  return n;
}

template <typename T>
void ParameterSet<T>::zero_grad() {
  for (auto& t : tensors_) t.zero_grad();
}

template <typename T>
void ParameterSet<T>::clear_grad() {
  for (auto& t : tensors_) t.clear_grad();
}

template <typename T>
ParameterSet<T> initialize_parameters(const Hyperparams& hp, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, hp.init_std);
  ParameterSet<T> params;
  for (auto& [name, shape] : parameter_inventory(hp)) {
    Tensor<T> t(shape);
    if (is_layer_norm(name)) {
      if (name.ends_with(".gain")) std::fill(t.data().begin(), t.data().end(), T(1));
    } else {
      for (auto& v : t.data()) v = static_cast<T>(normal(rng));
    }
    params.add(name, std::move(t));
  }
  return params;
}

template class ParameterSet<float>;
template class ParameterSet<double>;
template ParameterSet<float> initialize_parameters<float>(const Hyperparams&, std::uint64_t);
template ParameterSet<double> initialize_parameters<double>(const Hyperparams&, std::uint64_t);

}  // namespace trasa::model
