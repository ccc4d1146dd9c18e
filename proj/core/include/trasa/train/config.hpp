#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "trasa/model/hyperparams.hpp"

namespace trasa::train {

struct TrainConfig {
  double learning_rate = 0.01;
  double lr_decay_factor = 0.1;
  std::size_t lr_decay_every_epochs = 3;
  double weight_decay = 1e-5;
  double dropout = 0.2;
  std::size_t batch_size = 512;
  std::size_t max_epochs = 30;
  std::size_t early_stop_patience = 3;
  /// Cutoff of the validation metric used for model selection.
  std::size_t validation_k = 20;
  std::uint64_t seed = 1;

  model::Ablation ablation = model::Ablation::kFull;
  model::Readout readout = model::Readout::kTrasa;
  model::LossMode loss = model::LossMode::kItemwiseBce;

  std::size_t dim = 64;
  std::size_t num_heads = 4;
  std::size_t num_layers = 1;
  std::size_t ffn_inner = 0;
  std::size_t max_positions = 50;
  std::size_t path_cap = 16;
  bool traverse_pre = false;
  double init_std = 0.02;

  /// Throws ConfigError on non-positive rates, zero batch size or patience,
  /// or an inconsistent model shape.
  void validate() const;

  model::Hyperparams hyperparams(std::size_t vocab_size) const;
};

using ConfigValues = std::map<std::string, std::string>;

/// Lines of `key = value`; '#' starts a comment. Throws ConfigError on a
/// malformed line or a repeated key.
ConfigValues parse_config(std::istream& in);
ConfigValues read_config_file(const std::filesystem::path& path);

/// Applies recognised keys; throws ConfigError naming an unknown key or an
/// unparsable value.
void apply_config(TrainConfig& config, const ConfigValues& values);

/// Every key accepted by apply_config, in documentation order.
const std::vector<std::string>& config_keys();

/// Round-trips through parse_config/apply_config.
std::string format_config(const TrainConfig& config);

}  // namespace trasa::train
