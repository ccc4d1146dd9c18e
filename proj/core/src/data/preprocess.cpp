#include "trasa/data/preprocess.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <unordered_set>

#include "trasa/errors.hpp"

namespace trasa::data {

std::vector<RawSession> filter_sessions(const std::vector<RawSession>& sessions,
                                        std::size_t min_item_support, FilterReport* report) {
  std::unordered_map<std::string, std::size_t> support;
  for (const auto& s : sessions) {
    for (const auto& item : s.items) ++support[item];
  }
  FilterReport local;
  local.input_sessions = sessions.size();
  for (const auto& [item, count] : support) {
    if (count < min_item_support) {
      ++local.removed_items;
      local.removed_clicks += count;
    }
  }

  std::vector<RawSession> kept;
  kept.reserve(sessions.size());
  for (const auto& s : sessions) {
    RawSession out{s.id, {}, s.last_timestamp};
    for (const auto& item : s.items) {
      if (support[item] >= min_item_support) out.items.push_back(item);
    }
    if (out.items.size() <= 1) {
      ++local.removed_sessions;
      continue;
    }
    kept.push_back(std::move(out));
  }
  if (report != nullptr) *report = local;
  if (kept.empty()) {
    throw InputError("no session survives filtering (min item support " +
                     std::to_string(min_item_support) + ")");
  }
  return kept;
}

void augment_into(const Session& session, std::vector<Instance>& out) {
  if (session.size() < 2) {
    throw ContractError("cannot augment a session of length " + std::to_string(session.size()));
  }
  for (std::size_t end = 1; end < session.size(); ++end) {
    out.push_back(Instance{Session(session.begin(), session.begin() + static_cast<std::ptrdiff_t>(end)),
                           session[end]});
  }
}

std::vector<Instance> augment(const Session& session) {
  std::vector<Instance> out;
  out.reserve(session.empty() ? 0 : session.size() - 1);
  augment_into(session, out);
  return out;
}

std::vector<Instance> last_item_instances(const std::vector<Session>& sessions) {
  std::vector<Instance> out;
  out.reserve(sessions.size());
  for (const auto& s : sessions) {
    if (s.size() < 2) {
      throw ContractError("cannot take the last click of a session of length " +
                          std::to_string(s.size()));
    }
    out.push_back(Instance{Session(s.begin(), s.end() - 1), s.back()});
  }
  return out;
}

Vocabulary::Vocabulary(std::vector<std::string> raw_ids) {
  for (auto& id : raw_ids) {
    if (!index_.try_emplace(id, raw_.size()).second) {
      throw FormatError("duplicate raw item id '" + id + "' in vocabulary");
    }
    raw_.push_back(std::move(id));
  }
}

ItemId Vocabulary::insert(const std::string& raw) {
  auto [it, inserted] = index_.try_emplace(raw, raw_.size());
  if (inserted) raw_.push_back(raw);
  return it->second;
}

std::optional<ItemId> Vocabulary::find(const std::string& raw) const {
  auto it = index_.find(raw);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocabulary::raw(ItemId index) const {
  if (index >= raw_.size()) {
    throw BoundsError("item index " + std::to_string(index) + " outside vocabulary of size " +
                      std::to_string(raw_.size()));
  }
  return raw_[index];
}

DatasetStats session_stats(const std::vector<Session>& sessions) {
  DatasetStats stats;
  std::unordered_set<ItemId> items;
  for (const auto& s : sessions) {
    stats.clicks += s.size();
    items.insert(s.begin(), s.end());
  }
  stats.sessions = sessions.size();
  stats.items = items.size();
  stats.average_length =
      stats.sessions == 0 ? 0.0 : static_cast<double>(stats.clicks) / static_cast<double>(stats.sessions);
  return stats;
}

DatasetStats instance_stats(const std::vector<const std::vector<Instance>*>& splits) {
  DatasetStats stats;
  std::unordered_set<ItemId> items;
  std::size_t instances = 0;
  for (const auto* split : splits) {
    for (const auto& inst : *split) {
      ++instances;
      if (inst.prefix.size() == 1) ++stats.sessions;
      items.insert(inst.prefix.begin(), inst.prefix.end());
      items.insert(inst.label);
    }
  }
  stats.clicks = instances + stats.sessions;
  stats.items = items.size();
  stats.average_length =
      stats.sessions == 0 ? 0.0 : static_cast<double>(stats.clicks) / static_cast<double>(stats.sessions);
  return stats;
}

namespace {

std::size_t fraction_of(std::size_t n, double fraction) {
  return static_cast<std::size_t>(static_cast<double>(n) * fraction + 1e-9);
}

}  // namespace

ProcessedDataset split_dataset(const std::vector<RawSession>& sessions, const SplitOptions& options) {
  if (!(options.test_fraction > 0.0 && options.test_fraction < 1.0)) {
    throw ConfigError("test fraction must lie in (0, 1)");
  }
  if (!(options.validation_fraction >= 0.0 && options.validation_fraction < 1.0)) {
    throw ConfigError("validation fraction must lie in [0, 1)");
  }
  std::vector<std::size_t> order(sessions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sessions[a].last_timestamp < sessions[b].last_timestamp;
  });

  const std::size_t n_test = fraction_of(sessions.size(), options.test_fraction);
  if (n_test == 0 || n_test >= sessions.size()) {
    throw InputError("cannot split " + std::to_string(sessions.size()) +
                     " sessions with test fraction " + std::to_string(options.test_fraction));
  }
  const std::size_t n_train_portion = sessions.size() - n_test;
  const std::size_t n_valid = fraction_of(n_train_portion, options.validation_fraction);
  if (n_valid >= n_train_portion) throw InputError("validation split leaves no training sessions");

  std::vector<std::size_t> shuffled(n_train_portion);
  std::iota(shuffled.begin(), shuffled.end(), 0);
  std::mt19937_64 rng(options.seed);
  for (std::size_t i = n_train_portion; i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(shuffled[i - 1], shuffled[pick(rng)]);
  }
  std::vector<bool> is_valid(n_train_portion, false);
  for (std::size_t i = 0; i < n_valid; ++i) is_valid[shuffled[i]] = true;

  ProcessedDataset ds;
  for (std::size_t pos = 0; pos < n_train_portion; ++pos) {
    for (const auto& item : sessions[order[pos]].items) ds.vocabulary.insert(item);
  }

  std::vector<Session> kept;
  kept.reserve(sessions.size());
  auto encode = [&](const RawSession& raw, Session& out) {
    out.clear();
    for (const auto& item : raw.items) {
      auto idx = ds.vocabulary.find(item);
      if (!idx) return false;
      out.push_back(*idx);
    }
    return true;
  };

  Session encoded;
  for (std::size_t pos = 0; pos < sessions.size(); ++pos) {
    const RawSession& raw = sessions[order[pos]];
    if (raw.items.size() < 2) {
      throw ContractError("session '" + raw.id + "' has fewer than two clicks; filter first");
    }
    const bool in_vocab = encode(raw, encoded);
    if (pos >= n_train_portion) {
      if (!in_vocab) {
        ++ds.report.dropped_test_sessions;
        ds.report.dropped_test_instances += raw.items.size() - 1;
        continue;
      }
      ++ds.report.test_sessions;
      augment_into(encoded, ds.test);
    } else if (is_valid[pos]) {
      ++ds.report.validation_sessions;
      augment_into(encoded, ds.validation);
    } else {
      ++ds.report.train_sessions;
      augment_into(encoded, ds.train);
    }
    kept.push_back(encoded);
  }
  if (ds.test.empty()) throw InputError("every test session contains items unseen in training");
  ds.stats = session_stats(kept);
  return ds;
}

}  // namespace trasa::data
