// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "formula_fixtures.hpp"
#include "oracles.hpp"
#include "trasa/data/dataset_io.hpp"
#include "trasa/data/events.hpp"
#include "trasa/data/synthetic.hpp"
#include "trasa/model/checkpoint.hpp"
#include "trasa/train/ablation.hpp"
#include "trasa/train/gradcheck_suite.hpp"
#include "trasa/train/metrics.hpp"
#include "trasa/train/trainer.hpp"

using namespace trasa;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

// ------------------------------------------------------------ 1 gradcheck

Verdict gradient_check() {
  const auto t0 = Clock::now();
  const auto report = train::run_gradcheck_suite(train::default_gradcheck_cases(), train::toy_instances());
  const double s = seconds_since(t0);
  const bool ok = report.passed(1e-4) && report.elements > 0 && s < 300.0;
  return {ok, "elements=" + std::to_string(report.elements) +
                  fmt(" max_relative_error=%.3e limit=1e-4 seconds=%.1f limit=300", report.max_relative_error, s)};
}

// ------------------------------------------------------ 2 graph invariants

graph::Session random_session(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> length(1, 12);
  std::uniform_int_distribution<std::size_t> alphabet(1, 8);
  const std::size_t n = length(rng);
  std::uniform_int_distribution<graph::ItemId> item(0, alphabet(rng) - 1);
  graph::Session s(n);
  for (auto& v : s) v = item(rng);
  return s;
}

Verdict graph_properties() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::size_t mismatches = 0, pairs = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = random_session(rng);
    const auto g = graph::build_graph(s);
    const auto types = testing::brute_edge_types(s);
    const std::size_t m = g.node_count();
    if (types.size() != m) ++mismatches;
    for (std::size_t a = 0; a < m && types.size() == m; ++a) {
      for (std::size_t b = 0; b < m; ++b) {
        const auto e = g.edge(a, b);
        const int got = e ? static_cast<int>(*e) : -1;
        if (got != types[a][b]) ++mismatches;
        if (e == graph::EdgeType::kNpl && g.edge(b, a) != graph::EdgeType::kNpl) ++mismatches;
      }
      if (g.edge(a, a) != graph::EdgeType::kSelf) ++mismatches;
    }
    if (g.edges().size() > m + 2 * (s.size() - 1)) ++mismatches;
    graph::Session reverted;
    for (auto node : graph::revert_mapping(g)) reverted.push_back(g.nodes()[node]);
    if (reverted != s) ++mismatches;

    for (bool pre : {false, true}) {
      const auto table = graph::shortest_paths(g, graph::PathOptions{.cap = 64, .traverse_pre = pre});
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i; j < m; ++j) {
          ++pairs;
          const auto want = testing::brute_shortest_path(s, i, j, pre);
          const auto& got = table.at(j, i);
          if (got.from != i || got.to != j || got.length != want.length || got.edge_types != want.edge_types) {
            ++mismatches;
          }
        }
      }
    }
  }
  const double s = seconds_since(t0);
  return {mismatches == 0 && s < 60.0,
          "sessions=200 pairs=" + std::to_string(pairs) + " mismatches=" + std::to_string(mismatches) +
              fmt(" seconds=%.2f limit=60", s)};
}

// --------------------------------------------------------- 3 formulas

Verdict formulas() {
  const auto dev = testing::formula_deviations();
  return {dev.worst() < 1e-6 && dev.zero_relation_exact, dev.describe() + " limit=1e-6"};
}

// ----------------------------------------------------------- 4 overfit

Verdict overfit() {
  const auto t0 = Clock::now();
  data::MarkovOptions mo;
  mo.vocab_size = 20;
  mo.session_count = 50;
  mo.min_length = 4;
  mo.max_length = 8;
  mo.seed = 3;
  const auto instances = data::last_item_instances(data::synthesize_markov(mo).sessions);
  train::TrainConfig c;
  c.dim = 32;
  c.num_heads = 2;
  c.dropout = 0.0;
  c.weight_decay = 0.0;
  c.lr_decay_every_epochs = 1000;
  c.batch_size = 10;
  c.max_epochs = 200;
  c.early_stop_patience = 1000;
  c.seed = 5;
  auto result = train::train_model(instances, {}, mo.vocab_size, c);
  const auto report = train::evaluate(result.model, instances, {1});
  const double s = seconds_since(t0);
  const double p1 = report.precision.at(1);
  return {p1 >= 0.95 && s < 120.0, fmt("train_P@1=%.4f limit=0.95 seconds=%.1f limit=120", p1, s)};
}

// -------------------------------------------------------- 5 long range

Verdict long_range() {
  const auto t0 = Clock::now();
  data::LongRangeOptions lo;
  lo.vocab_size = 30;
  lo.session_count = 2500;
  lo.seed = 11;
  const auto all = data::last_item_instances(data::synthesize_long_range(lo));
  const std::vector<data::Instance> train_set(all.begin(), all.begin() + 2000);
  const std::vector<data::Instance> test_set(all.begin() + 2000, all.end());
  auto precision_for = [&](model::Ablation ablation) {
    train::TrainConfig c;
    c.dim = 32;
    c.num_heads = 2;
    c.batch_size = 32;
    c.max_epochs = 8;
    c.early_stop_patience = 1000;
    c.seed = 5;
    c.ablation = ablation;
    auto result = train::train_model(train_set, {}, lo.vocab_size, c);
    return train::evaluate(result.model, test_set, {1}).precision.at(1);
  };
  const double full = precision_for(model::Ablation::kFull);
  const double without = precision_for(model::Ablation::kWoSan);
  const double s = seconds_since(t0);
  const double gap = 100.0 * (full - without);
  return {gap >= 10.0 && s < 600.0,
          fmt("FULL_P@1=%.4f WO_SAN_P@1=%.4f", full, without) +
              fmt(" gap_points=%.1f limit=10 seconds=%.1f limit=600", gap, s)};
}

// -------------------------------------------------------- 6 rank fixture

Verdict rank_fixture() {
  auto net = testing::rank_fixture_model();
  const auto instances = testing::rank_fixture_instances();
  const auto report = train::evaluate(net, instances, {20});
  const bool library = report.precision.at(20) == 0.75 && report.mrr.at(20) == 0.4375;

  testing::TempDir dir("acceptance-rank");
  model::save_checkpoint(net, dir / "rank.ckpt");
  data::save_instances(dir / "rank.txt", instances);
  std::ostringstream out, err;
  const int code = cli::run({"eval", "--checkpoint", (dir / "rank.ckpt").string(), "--instances",
                             (dir / "rank.txt").string()},
                            out, err);
  const bool cli_ok = code == 0 && out.str().find("P@20=0.75\nMRR@20=0.4375\n") != std::string::npos;
  return {library && cli_ok,
          fmt("P@20=%.10g MRR@20=%.10g", report.precision.at(20), report.mrr.at(20)) +
              " cli=" + (cli_ok ? "match" : "mismatch")};
}

// ------------------------------------------------------- 7 preprocessing

Verdict preprocessing() {
  std::istringstream in(testing::preprocessing_log());
  const auto log = data::ingest(in, data::LogFormat{});
  const auto expected = testing::preprocessing_expectation();
  const auto d = data::split_dataset(data::filter_sessions(log.sessions, 5),
                                     data::SplitOptions{.test_fraction = 0.2, .validation_fraction = 0.0});
  std::vector<std::string> problems;
  if (log.report.malformed != expected.malformed_rows) problems.push_back("malformed");
  if (d.vocabulary.raw_ids() != expected.vocabulary) problems.push_back("vocabulary");
  if (d.train != expected.train) problems.push_back("train");
  if (d.test != expected.test) problems.push_back("test");
  if (!d.validation.empty()) problems.push_back("validation");
  if (d.stats != expected.stats) problems.push_back("stats");
  if (d.report.dropped_test_sessions != expected.dropped_test_sessions) problems.push_back("dropped");

  std::size_t sessions = 0, instances = 0;
  std::set<graph::ItemId> items;
  for (const auto* split : {&d.train, &d.validation, &d.test}) {
    for (const auto& inst : *split) {
      ++instances;
      sessions += inst.prefix.size() == 1;
      items.insert(inst.prefix.begin(), inst.prefix.end());
      items.insert(inst.label);
    }
  }
  const bool recount = d.stats.sessions == sessions && d.stats.clicks == instances + sessions &&
                       d.stats.items == items.size() &&
                       d.stats.average_length == static_cast<double>(instances + sessions) / sessions;
  if (!recount) problems.push_back("recount");

  std::string detail = "train=" + std::to_string(d.train.size()) + " test=" + std::to_string(d.test.size()) +
                       " sessions=" + std::to_string(d.stats.sessions) +
                       " clicks=" + std::to_string(d.stats.clicks);
  for (const auto& p : problems) detail += " mismatch:" + p;
  return {problems.empty(), detail};
}

// ------------------------------------------------------- 8 determinism

Verdict determinism() {
  data::MarkovOptions mo;
  mo.vocab_size = 15;
  mo.session_count = 120;
  mo.seed = 9;
  std::vector<data::Instance> all;
  for (const auto& s : data::synthesize_markov(mo).sessions) data::augment_into(s, all);
  const std::vector<data::Instance> train_set(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(all.size() * 4 / 5));
  const std::vector<data::Instance> val_set(all.begin() + static_cast<std::ptrdiff_t>(all.size() * 4 / 5), all.end());
  train::TrainConfig c;
  c.dim = 16;
  c.num_heads = 2;
  c.batch_size = 32;
  c.max_epochs = 3;
  c.seed = 17;
  auto run = [&](std::vector<std::string>& lines) {
    return train::train_model(train_set, val_set, mo.vocab_size, c, [&](const train::EpochRecord& r) {
      lines.push_back(train::format_epoch(r, c.validation_k));
    });
  };
  std::vector<std::string> first, second;
  auto a = run(first);
  run(second);
  const bool logs = first == second && first.size() == c.max_epochs;

  const auto before = train::evaluate(a.model, val_set, {1, 20});
  testing::TempDir dir("acceptance-det");
  model::save_checkpoint(a.model, dir / "m.ckpt");
  auto loaded = model::load_checkpoint<float>(dir / "m.ckpt");
  const auto after = train::evaluate(loaded, val_set, {1, 20});
  const bool metrics = before.precision == after.precision && before.mrr == after.mrr;
  return {logs && metrics, "epochs=" + std::to_string(first.size()) + " logs=" +
                               (logs ? "identical" : "different") + " reload_metrics=" +
                               (metrics ? "identical" : "different")};
}

// -------------------------------------------------------- 9 inventories

std::set<std::string> expected_names(model::Ablation ablation) {
  std::set<std::string> names{"item_embedding", "readout.W_4", "readout.W_5", "readout.b_3", "readout.q"};
  if (ablation != model::Ablation::kWoPos && ablation != model::Ablation::kWoRelPos) {
    names.insert("position_embedding");
  }
  if (ablation != model::Ablation::kWoRelPos) {
    names.insert({"edge_type_embedding", "relation.W_r"});
    for (const char* dir : {"fwd", "bwd"}) {
      for (const char* kind : {"W_", "U_", "b_"}) {
        for (const char* gate : {"z", "g", "h"}) {
          names.insert(std::string("relation.gru_") + dir + "." + kind + gate);
        }
      }
    }
  }
  if (ablation != model::Ablation::kWoSan) {
    for (const char* n : {"W_q", "W_k", "W_v", "W_o", "ffn.W_1", "ffn.b_1", "ffn.W_2", "ffn.b_2", "ln1.gain",
                          "ln1.bias", "ln2.gain", "ln2.bias"}) {
      names.insert(std::string("layer0.") + n);
    }
  }
  return names;
}

Verdict inventories() {
  std::string detail;
  bool ok = true;
  for (auto [ablation, label] : {std::pair{model::Ablation::kWoPos, "WO_POS"},
                                 std::pair{model::Ablation::kWoRelPos, "WO_REL_POS"},
                                 std::pair{model::Ablation::kWoSan, "WO_SAN"}}) {
    model::Hyperparams hp;
    hp.vocab_size = 7;
    hp.dim = 8;
    hp.num_heads = 2;
    hp.ablation = ablation;
    model::TrasaModel<float> net(hp, 1);
    const auto& got_list = net.parameters().names();
    const std::set<std::string> got(got_list.begin(), got_list.end());
    const bool match = got == expected_names(ablation) && got.size() == got_list.size();
    ok = ok && match;
    detail += std::string(detail.empty() ? "" : " ") + label + "=" + std::to_string(got.size()) +
              (match ? "" : "(mismatch)");
  }
  return {ok, detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"gradient_check", gradient_check}, {"graph_construction", graph_properties},
      {"formula_fidelity", formulas},     {"overfit", overfit},
      {"long_range_relations", long_range}, {"rank_fixture_metrics", rank_fixture},
      {"preprocessing_fixture", preprocessing}, {"determinism", determinism},
      {"ablation_inventories", inventories},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = Clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += v.pass ? 0 : 1;
    std::printf("%s %zu %s %s (%.1fs)\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                v.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
