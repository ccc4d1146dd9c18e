#include "trasa/model/hyperparams.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "trasa/errors.hpp"

namespace trasa::model {

namespace {

std::string normalize(std::string_view text) {
  std::string out;
  for (char c : text) {
    out.push_back(c == '-' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

}  // namespace

std::string_view to_string(Ablation a) {
  switch (a) {
    case Ablation::kFull: return "FULL";
    case Ablation::kWoPos: return "WO_POS";
    case Ablation::kWoRelPos: return "WO_REL_POS";
    case Ablation::kWoSan: return "WO_SAN";
  }
  return "?";
}

std::string_view to_string(Readout r) {
  switch (r) {
    case Readout::kTrasa: return "TRASA";
    case Readout::kSan: return "SAN";
    case Readout::kSum: return "SUM";
    case Readout::kGraph: return "GRAPH";
  }
  return "?";
}

std::string_view to_string(LossMode m) {
  switch (m) {
    case LossMode::kItemwiseBce: return "paper_eq9";
    case LossMode::kStandardCe: return "standard_ce";
  }
  return "?";
}

Ablation parse_ablation(std::string_view text) {
  const auto s = normalize(text);
  if (s == "full") return Ablation::kFull;
  if (s == "wo_pos") return Ablation::kWoPos;
  if (s == "wo_rel_pos") return Ablation::kWoRelPos;
  if (s == "wo_san") return Ablation::kWoSan;
  throw ConfigError("unknown ablation '" + std::string(text) + "'");
}

Readout parse_readout(std::string_view text) {
  const auto s = normalize(text);
  if (s == "trasa") return Readout::kTrasa;
  if (s == "san") return Readout::kSan;
  if (s == "sum") return Readout::kSum;
  if (s == "graph") return Readout::kGraph;
  throw ConfigError("unknown readout variant '" + std::string(text) + "'");
}

LossMode parse_loss_mode(std::string_view text) {
  const auto s = normalize(text);
  if (s == "paper_eq9" || s == "eq9") return LossMode::kItemwiseBce;
  if (s == "standard_ce" || s == "ce") return LossMode::kStandardCe;
  throw ConfigError("unknown loss mode '" + std::string(text) + "'");
}

void Hyperparams::validate() const {
  if (vocab_size == 0) throw ConfigError("vocab_size must be positive");
  if (dim == 0 || num_heads == 0) throw ConfigError("dim and num_heads must be positive");
  if (dim % num_heads != 0) {
    throw ConfigError("dim (" + std::to_string(dim) + ") must be divisible by num_heads (" +
                      std::to_string(num_heads) + ")");
  }
  if (uses_relations() && dim % 2 != 0) {
    throw ConfigError("dim must be even: each GRU direction has dim/2 hidden units");
  }
  if (num_layers == 0) throw ConfigError("num_layers must be positive");
  if (max_positions == 0) throw ConfigError("max_positions must be positive");
  if (path_cap == 0) throw ConfigError("path_cap must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (!(init_std > 0.0)) throw ConfigError("init_std must be positive");
}

}  // namespace trasa::model
