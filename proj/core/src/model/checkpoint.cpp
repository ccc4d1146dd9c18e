#include "trasa/model/checkpoint.hpp"

#include <charconv>
#include <cstdio>
#include <string>

namespace trasa::model {

namespace {

const std::string& require(const ad::Metadata& meta, const std::string& key) {
  auto it = meta.find(key);
  if (it == meta.end()) throw FormatError("checkpoint metadata lacks '" + key + "'");
  return it->second;
}

std::size_t parse_size(const ad::Metadata& meta, const std::string& key) {
  const std::string& text = require(meta, key);
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw FormatError("checkpoint metadata '" + key + "' is not an integer: " + text);
  }
  return value;
}

double parse_real(const ad::Metadata& meta, const std::string& key) {
  const std::string& text = require(meta, key);
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw FormatError("checkpoint metadata '" + key + "' is not a number: " + text);
  }
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

ad::Metadata hyperparams_to_metadata(const Hyperparams& hp) {
  return {
      {"format", kCheckpointFormat},
      {"checkpoint_version", kCheckpointVersion},
      {"vocab_size", std::to_string(hp.vocab_size)},
      {"dim", std::to_string(hp.dim)},
      {"num_heads", std::to_string(hp.num_heads)},
      {"num_layers", std::to_string(hp.num_layers)},
      {"ffn_inner", std::to_string(hp.ffn_inner)},
      {"max_positions", std::to_string(hp.max_positions)},
      {"path_cap", std::to_string(hp.path_cap)},
      {"traverse_pre", hp.traverse_pre ? "1" : "0"},
      {"dropout", format_real(hp.dropout)},
      {"init_std", format_real(hp.init_std)},
      {"ablation", std::string(to_string(hp.ablation))},
      {"readout", std::string(to_string(hp.readout))},
      {"loss_mode", std::string(to_string(hp.loss))},
  };
}

Hyperparams hyperparams_from_metadata(const ad::Metadata& meta) {
  if (require(meta, "format") != kCheckpointFormat) throw FormatError("not a trasa checkpoint");
  if (require(meta, "checkpoint_version") != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + require(meta, "checkpoint_version"));
  }
  Hyperparams hp;
  hp.vocab_size = parse_size(meta, "vocab_size");
  hp.dim = parse_size(meta, "dim");
  hp.num_heads = parse_size(meta, "num_heads");
  hp.num_layers = parse_size(meta, "num_layers");
  hp.ffn_inner = parse_size(meta, "ffn_inner");
  hp.max_positions = parse_size(meta, "max_positions");
  hp.path_cap = parse_size(meta, "path_cap");
  hp.traverse_pre = parse_size(meta, "traverse_pre") != 0;
  hp.dropout = parse_real(meta, "dropout");
  hp.init_std = parse_real(meta, "init_std");
  try {
    hp.ablation = parse_ablation(require(meta, "ablation"));
    hp.readout = parse_readout(require(meta, "readout"));
    hp.loss = parse_loss_mode(require(meta, "loss_mode"));
    hp.validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("invalid checkpoint configuration: ") + e.what());
  }
  return hp;
}

template <typename T>
void save_checkpoint(const TrasaModel<T>& model, const std::filesystem::path& path) {
  const auto& params = model.parameters();
  ad::NamedTensors<T> tensors;
  tensors.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor<T> copy(params.at(i).shape(),
                   std::vector<T>(params.at(i).data().begin(), params.at(i).data().end()));
    tensors.emplace_back(params.names()[i], std::move(copy));
  }
  ad::save_container(path, hyperparams_to_metadata(model.hyperparams()), tensors);
}

template <typename T>
TrasaModel<T> load_checkpoint(const std::filesystem::path& path) {
  auto container = ad::load_container<T>(path);
  const Hyperparams hp = hyperparams_from_metadata(container.metadata);
  ParameterSet<T> params;
  for (auto& [name, tensor] : container.tensors) {
    if (params.contains(name)) throw FormatError("duplicate tensor '" + name + "' in checkpoint");
    params.add(name, std::move(tensor));
  }
  return TrasaModel<T>(hp, std::move(params));
}

template void save_checkpoint<float>(const TrasaModel<float>&, const std::filesystem::path&);
template void save_checkpoint<double>(const TrasaModel<double>&, const std::filesystem::path&);
template TrasaModel<float> load_checkpoint<float>(const std::filesystem::path&);
template TrasaModel<double> load_checkpoint<double>(const std::filesystem::path&);

}  // namespace trasa::model
