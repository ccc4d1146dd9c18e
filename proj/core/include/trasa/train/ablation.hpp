#pragma once

#include <string>
#include <vector>

#include "trasa/data/preprocess.hpp"
#include "trasa/model/hyperparams.hpp"
#include "trasa/train/config.hpp"
#include "trasa/train/metrics.hpp"

namespace trasa::train {

struct Variant {
  std::string name;
  model::Ablation ablation = model::Ablation::kFull;
  model::Readout readout = model::Readout::kTrasa;
};

/// FULL, WO_POS, WO_REL_POS, WO_SAN (TRASA readout), then the SAN, SUM and
/// GRAPH readouts on the full model.
std::vector<Variant> default_variants();

/// Checks a parameter-name list against the structural contract of a
/// variant: which tables and blocks must be present or absent. Returns an
/// empty string when it holds, else a description of the first violation.
std::string inventory_violation(const model::Hyperparams& hp, const std::vector<std::string>& names);

struct VariantResult {
  Variant variant;
  EvalReport test;
  std::size_t epochs = 0;
  std::size_t parameter_count = 0;
  std::vector<std::string> parameter_names;
};

struct AblationReport {
  std::vector<std::size_t> ks;
  std::vector<VariantResult> results;
};

/// Trains every variant with `base` (same seed and budget), evaluates it on
/// the test split and verifies its parameter inventory. Throws Error naming
/// the variant when a member run fails.
AblationReport run_ablation_suite(const data::ProcessedDataset& dataset, const TrainConfig& base,
                                  const std::vector<Variant>& variants = default_variants(),
                                  const std::vector<std::size_t>& ks = {20});

/// Side-by-side table, one row per variant.
std::string format_ablation_table(const AblationReport& report);

}  // namespace trasa::train
