#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace trasa::model {

/// Component ablations. WO_POS drops the reversed position table,
/// WO_REL_POS additionally drops the relation encoder, WO_SAN drops the
/// attention stack.
enum class Ablation { kFull, kWoPos, kWoRelPos, kWoSan };

/// Session representation variants.
enum class Readout { kTrasa, kSan, kSum, kGraph };

enum class LossMode {
  kItemwiseBce,  // binary cross-entropy summed over every item
  kStandardCe,   // -log p(target)
};

std::string_view to_string(Ablation a);
std::string_view to_string(Readout r);
std::string_view to_string(LossMode m);
/// Case-insensitive; accepts "-" or "_" separators. Throws ConfigError.
Ablation parse_ablation(std::string_view text);
Readout parse_readout(std::string_view text);
LossMode parse_loss_mode(std::string_view text);

struct Hyperparams {
  std::size_t vocab_size = 0;
  std::size_t dim = 64;
  std::size_t num_heads = 4;
  std::size_t num_layers = 1;
  /// FFN hidden width; 0 means 4 * dim.
  std::size_t ffn_inner = 0;
  double dropout = 0.2;
  std::size_t max_positions = 50;
  std::size_t path_cap = 16;
  bool traverse_pre = false;
  double init_std = 0.02;
  Ablation ablation = Ablation::kFull;
  Readout readout = Readout::kTrasa;
  LossMode loss = LossMode::kItemwiseBce;

  /// Throws ConfigError on any inconsistency (e.g. dim % num_heads != 0).
  void validate() const;

  std::size_t head_dim() const { return dim / num_heads; }
  std::size_t ffn_width() const { return ffn_inner ? ffn_inner : 4 * dim; }
  std::size_t gru_hidden() const { return dim / 2; }
  bool uses_positions() const { return ablation == Ablation::kFull || ablation == Ablation::kWoSan; }
  /// Whether the relation machinery is part of the inventory. WO_SAN keeps
  /// it, although without attention layers it has no consumer.
  bool uses_relations() const { return ablation != Ablation::kWoRelPos; }
  bool uses_encoder() const { return ablation != Ablation::kWoSan; }
  std::size_t encoder_layers() const { return uses_encoder() ? num_layers : 0; }
};

}  // namespace trasa::model
