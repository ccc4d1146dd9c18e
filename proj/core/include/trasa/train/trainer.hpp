#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "trasa/data/preprocess.hpp"
#include "trasa/model/trasa_model.hpp"
#include "trasa/train/config.hpp"
#include "trasa/train/metrics.hpp"

namespace trasa::train {

/// One line of the training log.
struct EpochRecord {
  std::size_t epoch = 0;
  double learning_rate = 0.0;
  double mean_loss = 0.0;
  /// Absent when there is no validation set.
  std::optional<double> validation_precision;
  std::optional<double> validation_mrr;
  bool improved = false;
};

/// "epoch=E lr=... loss=... val_P@K=... val_MRR@K=..." with full precision.
std::string format_epoch(const EpochRecord& record, std::size_t k);

/// Step schedule: lr * factor^(epoch / every).
double scheduled_learning_rate(const TrainConfig& config, std::size_t epoch);

struct TrainResult {
  /// Parameters of the epoch with the best validation P@K, or of the last
  /// epoch when there is no validation set.
  model::TrasaModel<float> model;
  std::vector<EpochRecord> log;
  std::size_t best_epoch = 0;
  bool early_stopped = false;
  double seconds = 0.0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mini-batch training with one Adam step per batch on the mean instance
/// loss. Throws InputError for an empty training set, BoundsError for an
/// item outside `vocab_size`, and NumericError naming the epoch and batch
/// when a batch loss is not finite.
TrainResult train_model(const std::vector<data::Instance>& train_set,
                        const std::vector<data::Instance>& validation_set, std::size_t vocab_size,
                        const TrainConfig& config, const EpochCallback& on_epoch = {});

/// Continues from an existing model (same schedule, fresh optimizer state).
TrainResult train_model(model::TrasaModel<float> initial,
                        const std::vector<data::Instance>& train_set,
                        const std::vector<data::Instance>& validation_set,
                        const TrainConfig& config, const EpochCallback& on_epoch = {});

}  // namespace trasa::train
