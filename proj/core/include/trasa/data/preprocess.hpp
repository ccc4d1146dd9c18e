#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "trasa/data/events.hpp"
#include "trasa/graph/session_graph.hpp"

namespace trasa::data {

using graph::ItemId;
using graph::Session;

/// A training example: the clicks so far and the item clicked next.
struct Instance {
  Session prefix;
  ItemId label = 0;

  friend bool operator==(const Instance&, const Instance&) = default;
};

struct FilterReport {
  std::size_t input_sessions = 0;
  std::size_t removed_items = 0;
  std::size_t removed_clicks = 0;
  std::size_t removed_sessions = 0;
};

/// Drops items seen fewer than `min_item_support` times (counted over the
/// whole input), then drops sessions left with at most one click. One pass.
/// Throws InputError when nothing survives.
std::vector<RawSession> filter_sessions(const std::vector<RawSession>& sessions,
                                        std::size_t min_item_support = 5,
                                        FilterReport* report = nullptr);

/// ([v1], v2), ([v1, v2], v3), ..., ([v1..v_{l-1}], v_l). Throws
/// ContractError for sessions shorter than two clicks.
std::vector<Instance> augment(const Session& session);
void augment_into(const Session& session, std::vector<Instance>& out);

/// One instance per session: (all but the last click, last click).
std::vector<Instance> last_item_instances(const std::vector<Session>& sessions);

/// Bidirectional map between raw item ids and dense indices.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> raw_ids);

  /// Returns the existing index or appends a new one.
  ItemId insert(const std::string& raw);
  std::optional<ItemId> find(const std::string& raw) const;
  const std::string& raw(ItemId index) const;
  std::size_t size() const { return raw_.size(); }
  const std::vector<std::string>& raw_ids() const { return raw_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.raw_ == b.raw_; }

 private:
  std::vector<std::string> raw_;
  std::unordered_map<std::string, ItemId> index_;
};

struct DatasetStats {
  std::size_t clicks = 0;
  std::size_t sessions = 0;
  std::size_t items = 0;
  double average_length = 0.0;

  friend bool operator==(const DatasetStats&, const DatasetStats&) = default;
};

/// Statistics over full sessions.
DatasetStats session_stats(const std::vector<Session>& sessions);

/// Recovers the same statistics from augmented instances: every session of
/// length l contributes l-1 instances, exactly one of them with a
/// one-click prefix.
DatasetStats instance_stats(const std::vector<const std::vector<Instance>*>& splits);

struct SplitOptions {
  double test_fraction = 0.1;
  /// Share of training sessions held out for validation; 0 disables it.
  double validation_fraction = 0.1;
  std::uint64_t seed = 0;
};

struct SplitReport {
  std::size_t train_sessions = 0;
  std::size_t validation_sessions = 0;
  std::size_t test_sessions = 0;
  std::size_t dropped_test_sessions = 0;
  std::size_t dropped_test_instances = 0;
};

struct ProcessedDataset {
  Vocabulary vocabulary;
  std::vector<Instance> train;
  std::vector<Instance> validation;
  std::vector<Instance> test;
  DatasetStats stats;
  SplitReport report;
};

/// Orders sessions by last timestamp (ties keep input order), assigns the
/// latest `test_fraction` to test, holds out a seeded random share of the
/// rest for validation, builds the vocabulary from the training portion,
/// drops test sessions with unseen items and augments every split.
/// Throws InputError when a split would be empty, ConfigError on bad
/// fractions.
ProcessedDataset split_dataset(const std::vector<RawSession>& sessions, const SplitOptions& options);

}  // namespace trasa::data
