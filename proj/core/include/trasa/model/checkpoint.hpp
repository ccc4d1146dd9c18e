#pragma once

#include <filesystem>

#include "trasa/ad/serialize.hpp"
#include "trasa/model/trasa_model.hpp"

// A checkpoint is a tensor container whose metadata carries the model
// configuration:
//
//   format            "trasa-checkpoint"
//   checkpoint_version "1"
//   vocab_size, dim, num_heads, num_layers, ffn_inner, max_positions,
//   path_cap          decimal integers
//   dropout, init_std decimal reals (round-trip precision)
//   traverse_pre      "0" | "1"
//   ablation          FULL | WO_POS | WO_REL_POS | WO_SAN
//   readout           TRASA | SAN | SUM | GRAPH
//   loss_mode         paper_eq9 | standard_ce
//
// followed by exactly the tensors of parameter_inventory(), in that order.

namespace trasa::model {

inline constexpr const char* kCheckpointFormat = "trasa-checkpoint";
inline constexpr const char* kCheckpointVersion = "1";

ad::Metadata hyperparams_to_metadata(const Hyperparams& hp);
/// Throws FormatError on missing or malformed keys.
Hyperparams hyperparams_from_metadata(const ad::Metadata& meta);

template <typename T>
void save_checkpoint(const TrasaModel<T>& model, const std::filesystem::path& path);

/// Validates the format tag, every expected parameter name and shape, and
/// rejects extra tensors. Throws FormatError.
template <typename T>
TrasaModel<T> load_checkpoint(const std::filesystem::path& path);

}  // namespace trasa::model
