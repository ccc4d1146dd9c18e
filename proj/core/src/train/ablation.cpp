#include "trasa/train/ablation.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

#include "trasa/errors.hpp"
#include "trasa/train/trainer.hpp"

namespace trasa::train {

using model::Ablation;
using model::Readout;

std::vector<Variant> default_variants() {
  return {
      {"FULL", Ablation::kFull, Readout::kTrasa},
      {"WO_POS", Ablation::kWoPos, Readout::kTrasa},
      {"WO_REL_POS", Ablation::kWoRelPos, Readout::kTrasa},
      {"WO_SAN", Ablation::kWoSan, Readout::kTrasa},
      {"READOUT_SAN", Ablation::kFull, Readout::kSan},
      {"READOUT_SUM", Ablation::kFull, Readout::kSum},
      {"READOUT_GRAPH", Ablation::kFull, Readout::kGraph},
  };
}

std::string inventory_violation(const model::Hyperparams& hp, const std::vector<std::string>& names) {
  auto has = [&](const std::string& name) {
    return std::find(names.begin(), names.end(), name) != names.end();
  };
  auto any_prefix = [&](const std::string& prefix) {
    return std::any_of(names.begin(), names.end(),
                       [&](const std::string& n) { return n.rfind(prefix, 0) == 0; });
  };
  auto expect = [](bool present, bool wanted, const std::string& what) -> std::string {
    if (present == wanted) return {};
    return what + (wanted ? " missing" : " present but should be absent");
  };

  const bool positions = hp.ablation == Ablation::kFull || hp.ablation == Ablation::kWoSan;
  const bool relations = hp.ablation != Ablation::kWoRelPos;
  const bool encoder = hp.ablation != Ablation::kWoSan;
  const bool soft_readout = hp.readout == Readout::kTrasa || hp.readout == Readout::kGraph;

  std::vector<std::string> problems = {
      expect(has("item_embedding"), true, "item_embedding"),
      expect(has("position_embedding"), positions, "position_embedding"),
      expect(has("edge_type_embedding"), relations, "edge_type_embedding"),
      expect(any_prefix("relation.gru_fwd."), relations, "forward GRU cell"),
      expect(any_prefix("relation.gru_bwd."), relations, "backward GRU cell"),
      expect(has("relation.W_r"), relations, "relation.W_r"),
      expect(any_prefix("layer"), encoder, "encoder layers"),
      expect(has("readout.q"), soft_readout, "readout.q"),
      expect(any_prefix("readout.san."), hp.readout == Readout::kSan, "readout.san block"),
  };
  for (const auto& p : problems) {
    if (!p.empty()) return p;
  }
  if (encoder) {
    for (std::size_t k = 0; k < hp.num_layers; ++k) {
      const std::string layer = "layer" + std::to_string(k) + ".W_q";
      if (!has(layer)) return layer + " missing";
    }
  }
  for (const auto& name : names) {
    if (name.rfind("layer", 0) != 0) continue;
    const auto dot = name.find('.');
    const auto index = name.substr(5, dot == std::string::npos ? std::string::npos : dot - 5);
    if (index.empty() || !std::all_of(index.begin(), index.end(), [](unsigned char c) { return std::isdigit(c); }) ||
        std::stoul(index) >= hp.num_layers) {
      return "unexpected encoder parameter " + name;
    }
  }
  return {};
}

AblationReport run_ablation_suite(const data::ProcessedDataset& dataset, const TrainConfig& base,
                                  const std::vector<Variant>& variants,
                                  const std::vector<std::size_t>& ks) {
  AblationReport report;
  report.ks = ks;
  for (const auto& variant : variants) {
    try {
      TrainConfig config = base;
      config.ablation = variant.ablation;
      config.readout = variant.readout;
      auto trained = train_model(dataset.train, dataset.validation, dataset.vocabulary.size(), config);
      const auto& names = trained.model.parameters().names();
      const std::string violation = inventory_violation(trained.model.hyperparams(), names);
      if (!violation.empty()) throw InvariantError("parameter inventory: " + violation);
      VariantResult r;
      r.variant = variant;
      r.test = evaluate(trained.model, dataset.test, ks);
      r.epochs = trained.log.size();
      r.parameter_count = trained.model.parameters().element_count();
      r.parameter_names = names;
      report.results.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw Error("ablation variant " + variant.name + " failed: " + e.what());
    }
  }
  return report;
}

std::string format_ablation_table(const AblationReport& report) {
  std::string out = "variant";
  for (std::size_t k : report.ks) out += "\tP@" + std::to_string(k) + "\tMRR@" + std::to_string(k);
  out += "\tepochs\tparameters\n";
  char buf[64];
  for (const auto& r : report.results) {
    out += r.variant.name;
    for (std::size_t k : report.ks) {
      std::snprintf(buf, sizeof(buf), "\t%.4f\t%.4f", r.test.precision.at(k), r.test.mrr.at(k));
      out += buf;
    }
    out += "\t" + std::to_string(r.epochs) + "\t" + std::to_string(r.parameter_count) + "\n";
  }
  return out;
}

}  // namespace trasa::train
