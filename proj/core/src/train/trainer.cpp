#include "trasa/train/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "trasa/ad/adam.hpp"
#include "trasa/data/batching.hpp"
#include "trasa/errors.hpp"

namespace trasa::train {

namespace {

std::uint64_t instance_seed(std::uint64_t seed, std::uint64_t epoch, std::uint64_t index) {
  std::uint64_t z = seed ^ (epoch * 0x9E3779B97F4A7C15ULL) ^ (index * 0xC2B2AE3D27D4EB4FULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void check_items(const std::vector<data::Instance>& instances, std::size_t vocab_size,
                 const char* split) {
  for (std::size_t i = 0; i < instances.size(); ++i) {
    bool ok = instances[i].label < vocab_size && !instances[i].prefix.empty();
    for (auto id : instances[i].prefix) ok = ok && id < vocab_size;
    if (!ok) {
      throw BoundsError(std::string(split) + " instance " + std::to_string(i) +
                        " is empty or references an item outside the vocabulary of " +
                        std::to_string(vocab_size));
    }
  }
}

}  // namespace

std::string format_epoch(const EpochRecord& record, std::size_t k) {
  char buf[256];
  auto metric = [](const std::optional<double>& v) {
    char b[32];
    if (!v) return std::string("nan");
    std::snprintf(b, sizeof(b), "%.6f", *v);
    return std::string(b);
  };
  std::snprintf(buf, sizeof(buf), "epoch=%zu lr=%.6g loss=%.9g val_P@%zu=%s val_MRR@%zu=%s%s",
                record.epoch, record.learning_rate, record.mean_loss, k,
                metric(record.validation_precision).c_str(), k,
                metric(record.validation_mrr).c_str(), record.improved ? " best" : "");
  return buf;
}

double scheduled_learning_rate(const TrainConfig& config, std::size_t epoch) {
  const auto steps = static_cast<double>(epoch / config.lr_decay_every_epochs);
  return config.learning_rate * std::pow(config.lr_decay_factor, steps);
}

TrainResult train_model(const std::vector<data::Instance>& train_set,
                        const std::vector<data::Instance>& validation_set, std::size_t vocab_size,
                        const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  const auto hp = config.hyperparams(vocab_size);
  return train_model(model::TrasaModel<float>(hp, config.seed), train_set, validation_set, config,
                     on_epoch);
}

TrainResult train_model(model::TrasaModel<float> initial,
                        const std::vector<data::Instance>& train_set,
                        const std::vector<data::Instance>& validation_set,
                        const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (train_set.empty()) throw InputError("training set is empty");
  const std::size_t vocab_size = initial.hyperparams().vocab_size;
  check_items(train_set, vocab_size, "training");
  check_items(validation_set, vocab_size, "validation");

  const auto start = std::chrono::steady_clock::now();
  model::TrasaModel<float> model = std::move(initial);
  TrainResult result{model, {}, 0, false, 0.0};
  auto params = model.parameters().pointers();

  ad::AdamState<float> adam;
  adam.options.weight_decay = config.weight_decay;

  std::optional<double> best_precision;
  std::size_t since_best = 0;
  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    const double lr = scheduled_learning_rate(config, epoch);
    adam.options.learning_rate = lr;
    const auto batches = data::make_batches(train_set.size(), config.batch_size, config.seed, epoch);
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const auto& batch = batches[b];
      model.parameters().zero_grad();
      const float scale = 1.0f / static_cast<float>(batch.size());
      double batch_loss = 0.0;
      for (std::size_t idx : batch) {
        const auto& inst = train_set[idx];
        const model::PassOptions pass{true, instance_seed(config.seed, epoch, idx)};
        batch_loss += model.accumulate_gradients(inst.prefix, inst.label, scale, pass);
      }
      if (!std::isfinite(batch_loss)) {
        throw NumericError("non-finite training loss in epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(b));
      }
      ad::adam_step<float>(params, adam);
      loss_sum += batch_loss;
    }

    EpochRecord record;
    record.epoch = epoch;
    record.learning_rate = lr;
    record.mean_loss = loss_sum / static_cast<double>(train_set.size());
    if (!validation_set.empty()) {
      const auto report = evaluate(model, validation_set, {config.validation_k});
      record.validation_precision = report.precision.at(config.validation_k);
      record.validation_mrr = report.mrr.at(config.validation_k);
      record.improved = !best_precision || *record.validation_precision > *best_precision;
    } else {
      record.improved = true;
    }
    if (record.improved) {
      best_precision = record.validation_precision;
      result.model = model;
      result.best_epoch = epoch;
      since_best = 0;
    } else {
      ++since_best;
    }
    result.log.push_back(record);
    if (on_epoch) on_epoch(record);
    if (since_best >= config.early_stop_patience) {
      result.early_stopped = true;
      break;
    }
  }
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  result.seconds = elapsed.count();
  return result;
}

}  // namespace trasa::train
