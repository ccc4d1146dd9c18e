#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "trasa/data/preprocess.hpp"
#include "trasa/model/trasa_model.hpp"

namespace trasa::train {

using data::Instance;
using graph::ItemId;

/// 1-based rank of `target` when items are sorted by descending score,
/// ties broken by ascending item index.
template <typename T>
std::size_t rank_of(std::span<const T> scores, ItemId target);

struct EvalReport {
  std::vector<std::size_t> ks;
  std::map<std::size_t, double> precision;
  std::map<std::size_t, double> mrr;
  std::size_t instances = 0;
  double seconds = 0.0;
};

/// Streams target ranks into P@K and MRR@K sums.
class MetricAccumulator {
 public:
  /// Throws ConfigError for an empty list or K == 0.
  explicit MetricAccumulator(std::vector<std::size_t> ks);

  void add_rank(std::size_t rank);
  EvalReport report(double seconds = 0.0) const;

 private:
  std::vector<std::size_t> ks_;
  std::vector<std::size_t> hits_;
  std::vector<double> reciprocal_;
  std::size_t count_ = 0;
};

/// Eval-mode ranking of every instance. Throws BoundsError when an instance
/// references an item outside the model's vocabulary.
template <typename T>
EvalReport evaluate(model::TrasaModel<T>& model, const std::vector<Instance>& instances,
                    const std::vector<std::size_t>& ks);

/// key=value lines: instances, P@K, MRR@K per K, seconds.
std::string format_report(const EvalReport& report, bool include_time = true);

/// Top-k (item, score) pairs in rank order.
template <typename T>
std::vector<std::pair<ItemId, T>> top_k(std::span<const T> scores, std::size_t k);

}  // namespace trasa::train
