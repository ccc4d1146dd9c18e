#include "trasa/train/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>

#include "trasa/errors.hpp"

namespace trasa::train {

template <typename T>
std::size_t rank_of(std::span<const T> scores, ItemId target) {
  if (target >= scores.size()) {
    throw BoundsError("target " + std::to_string(target) + " outside " +
                      std::to_string(scores.size()) + " scores");
  }
  const T z = scores[target];
  std::size_t rank = 1;
  for (std::size_t b = 0; b < scores.size(); ++b) {
    if (scores[b] > z || (b < target && scores[b] == z)) ++rank;
  }
  return rank;
}

MetricAccumulator::MetricAccumulator(std::vector<std::size_t> ks) : ks_(std::move(ks)) {
  if (ks_.empty()) throw ConfigError("at least one cutoff K is required");
  for (std::size_t k : ks_) {
    if (k == 0) throw ConfigError("cutoff K must be at least 1");
  }
  std::sort(ks_.begin(), ks_.end());
  ks_.erase(std::unique(ks_.begin(), ks_.end()), ks_.end());
  hits_.assign(ks_.size(), 0);
  reciprocal_.assign(ks_.size(), 0.0);
}

void MetricAccumulator::add_rank(std::size_t rank) {
  if (rank == 0) throw ContractError("ranks start at 1");
  ++count_;
  for (std::size_t i = 0; i < ks_.size(); ++i) {
    if (rank <= ks_[i]) {
      ++hits_[i];
      reciprocal_[i] += 1.0 / static_cast<double>(rank);
    }
  }
}

EvalReport MetricAccumulator::report(double seconds) const {
  EvalReport r;
  r.ks = ks_;
  r.instances = count_;
  r.seconds = seconds;
  const double n = static_cast<double>(count_);
  for (std::size_t i = 0; i < ks_.size(); ++i) {
    r.precision[ks_[i]] = count_ == 0 ? 0.0 : static_cast<double>(hits_[i]) / n;
    r.mrr[ks_[i]] = count_ == 0 ? 0.0 : reciprocal_[i] / n;
  }
  return r;
}

template <typename T>
EvalReport evaluate(model::TrasaModel<T>& model, const std::vector<Instance>& instances,
                    const std::vector<std::size_t>& ks) {
  const auto start = std::chrono::steady_clock::now();
  MetricAccumulator acc(ks);
  for (const auto& inst : instances) {
    const auto scores = model.score_items(inst.prefix);
    acc.add_rank(rank_of<T>(scores, inst.label));
  }
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  return acc.report(elapsed.count());
}

std::string format_report(const EvalReport& report, bool include_time) {
  std::string out = "instances=" + std::to_string(report.instances) + "\n";
  char buf[96];
  for (std::size_t k : report.ks) {
    std::snprintf(buf, sizeof(buf), "P@%zu=%.10g\n", k, report.precision.at(k));
    out += buf;
    std::snprintf(buf, sizeof(buf), "MRR@%zu=%.10g\n", k, report.mrr.at(k));
    out += buf;
  }
  if (include_time) {
    std::snprintf(buf, sizeof(buf), "seconds=%.3f\n", report.seconds);
    out += buf;
  }
  return out;
}

template <typename T>
std::vector<std::pair<ItemId, T>> top_k(std::span<const T> scores, std::size_t k) {
  std::vector<ItemId> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  k = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](ItemId a, ItemId b) {
                      return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
                    });
  std::vector<std::pair<ItemId, T>> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.emplace_back(order[i], scores[order[i]]);
  return out;
}

#define TRASA_INSTANTIATE_METRICS(T)                                                        \
  template std::size_t rank_of<T>(std::span<const T>, ItemId);                             \
  template EvalReport evaluate<T>(model::TrasaModel<T>&, const std::vector<Instance>&,      \
                                  const std::vector<std::size_t>&);                         \
  template std::vector<std::pair<ItemId, T>> top_k<T>(std::span<const T>, std::size_t);

TRASA_INSTANTIATE_METRICS(float)
TRASA_INSTANTIATE_METRICS(double)

}  // namespace trasa::train
