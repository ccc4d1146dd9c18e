#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "trasa/data/dataset_io.hpp"
#include "trasa/data/events.hpp"
#include "trasa/data/preprocess.hpp"
#include "trasa/data/synthetic.hpp"
#include "trasa/errors.hpp"
#include "trasa/model/checkpoint.hpp"
#include "trasa/train/ablation.hpp"
#include "trasa/train/config.hpp"
#include "trasa/train/gradcheck_suite.hpp"
#include "trasa/train/metrics.hpp"
#include "trasa/train/trainer.hpp"

namespace trasa::cli {

namespace {

std::string dashed(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, sep)) {
    const auto first = part.find_first_not_of(" \t");
    const auto last = part.find_last_not_of(" \t");
    if (first == std::string::npos) throw InputError("empty element in list '" + text + "'");
    out.push_back(part.substr(first, last - first + 1));
  }
  if (out.empty()) throw InputError("empty list");
  return out;
}

// ------------------------------------------------------------------ preprocess

struct PreprocessArgs {
  std::string input;
  std::string output;
  std::string delimiter = ",";
  bool no_header = false;
  data::LogFormat format;
  std::size_t min_support = 5;
  data::SplitOptions split;
};

void run_preprocess(const PreprocessArgs& a, std::ostream& out) {
  data::LogFormat format = a.format;
  if (a.delimiter == "\\t" || a.delimiter == "tab") {
    format.delimiter = '\t';
  } else if (a.delimiter.size() == 1) {
    format.delimiter = a.delimiter[0];
  } else {
    throw ConfigError("delimiter must be a single character or 'tab'");
  }
  format.has_header = !a.no_header;

  const auto ingested = data::ingest(std::filesystem::path(a.input), format);
  data::FilterReport filter;
  const auto kept = data::filter_sessions(ingested.sessions, a.min_support, &filter);
  const auto dataset = data::split_dataset(kept, a.split);
  data::save_dataset(a.output, dataset);

  out << "rows=" << ingested.report.rows << "\n"
      << "malformed_rows=" << ingested.report.malformed << "\n"
      << "raw_sessions=" << ingested.sessions.size() << "\n"
      << "removed_items=" << filter.removed_items << "\n"
      << "removed_sessions=" << filter.removed_sessions << "\n"
      << "train_instances=" << dataset.train.size() << "\n"
      << "validation_instances=" << dataset.validation.size() << "\n"
      << "test_instances=" << dataset.test.size() << "\n"
      << "vocabulary=" << dataset.vocabulary.size() << "\n";
  data::write_stats(out, dataset.stats, dataset.report);
}

// ----------------------------------------------------------------------- train

struct TrainArgs {
  std::string data_dir;
  std::string config_file;
  std::string checkpoint;
  std::string log_file;
  bool ablation_suite = false;
  std::map<std::string, std::string> overrides;
  std::map<std::string, CLI::Option*> override_options;
};

train::TrainConfig resolve_config(const TrainArgs& a) {
  train::TrainConfig config;
  if (!a.config_file.empty()) train::apply_config(config, train::read_config_file(a.config_file));
  train::ConfigValues flags;
  for (const auto& [key, opt] : a.override_options) {
    if (opt->count() > 0) flags[key] = a.overrides.at(key);
  }
  train::apply_config(config, flags);
  config.validate();
  return config;
}

void run_train(const TrainArgs& a, std::ostream& out) {
  const auto config = resolve_config(a);
  const auto dataset = data::load_dataset(a.data_dir);

  if (a.ablation_suite) {
    const auto report = train::run_ablation_suite(dataset, config);
    out << train::format_ablation_table(report);
    return;
  }
  if (a.checkpoint.empty()) throw ConfigError("train needs --checkpoint (or --ablation-suite)");

  std::ofstream log;
  if (!a.log_file.empty()) {
    log.open(a.log_file);
    if (!log) throw InputError("cannot write log file '" + a.log_file + "'");
  }
  const auto on_epoch = [&](const train::EpochRecord& r) {
    const std::string line = train::format_epoch(r, config.validation_k);
    out << line << "\n" << std::flush;
    if (log.is_open()) log << line << "\n" << std::flush;
  };
  auto result = train::train_model(dataset.train, dataset.validation, dataset.vocabulary.size(),
                                   config, on_epoch);
  model::save_checkpoint(result.model, a.checkpoint);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", result.seconds);
  out << "best_epoch=" << result.best_epoch << "\n"
      << "early_stopped=" << (result.early_stopped ? "true" : "false") << "\n"
      << "seconds=" << buf << "\n"
      << "checkpoint=" << a.checkpoint << "\n";
}

// ------------------------------------------------------------------------ eval

struct EvalArgs {
  std::string checkpoint;
  std::string instances;
  std::string data_dir;
  std::string split = "test";
  std::vector<std::size_t> ks{20};
};

void run_eval(const EvalArgs& a, std::ostream& out) {
  auto net = model::load_checkpoint<float>(a.checkpoint);
  std::vector<data::Instance> instances;
  if (!a.instances.empty()) {
    instances = data::load_instances(a.instances);
  } else if (!a.data_dir.empty()) {
    instances = data::load_instances(std::filesystem::path(a.data_dir) / (a.split + ".txt"));
  } else {
    throw ConfigError("eval needs --instances or --data");
  }
  const auto report = train::evaluate(net, instances, a.ks);
  out << train::format_report(report);
}

// ------------------------------------------------------------------- recommend

struct RecommendArgs {
  std::string checkpoint;
  std::string session;
  std::string vocabulary;
  std::size_t k = 20;
};

void run_recommend(const RecommendArgs& a, std::ostream& out) {
  auto net = model::load_checkpoint<float>(a.checkpoint);
  std::optional<data::Vocabulary> vocab;
  if (!a.vocabulary.empty()) {
    std::ifstream in(a.vocabulary);
    if (!in) throw InputError("cannot open vocabulary '" + a.vocabulary + "'");
    vocab = data::read_vocabulary(in);
  }
  graph::Session session;
  for (const auto& token : split_list(a.session, ',')) {
    if (vocab) {
      auto idx = vocab->find(token);
      if (!idx) throw InputError("item '" + token + "' is not in the vocabulary");
      session.push_back(*idx);
    } else {
      std::size_t id = 0;
      std::size_t used = 0;
      try {
        id = std::stoul(token, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != token.size() || token[0] == '-') throw InputError("'" + token + "' is not an item index");
      session.push_back(id);
    }
  }
  const auto scores = net.score_items(session);
  char buf[64];
  for (const auto& [item, score] : train::top_k<float>(scores, a.k)) {
    std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(score));
    out << (vocab ? vocab->raw(item) : std::to_string(item)) << " " << buf << "\n";
  }
}

// ------------------------------------------------------------------- gradcheck

struct GradcheckArgs {
  double tolerance = 1e-4;
  std::vector<std::string> cases;
  bool verbose = false;
};

bool run_gradcheck(const GradcheckArgs& a, std::ostream& out) {
  auto cases = train::default_gradcheck_cases();
  if (!a.cases.empty()) {
    std::vector<train::GradCheckCase> chosen;
    for (const auto& name : a.cases) {
      auto it = std::find_if(cases.begin(), cases.end(), [&](const auto& c) { return c.name == name; });
      if (it == cases.end()) throw ConfigError("unknown gradcheck case '" + name + "'");
      chosen.push_back(*it);
    }
    cases = std::move(chosen);
  }
  const auto report = train::run_gradcheck_suite(cases, train::toy_instances());
  if (a.verbose) {
    out << train::format_gradcheck(report);
  } else {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3e", report.max_relative_error);
    out << "cases=" << cases.size() << "\n"
        << "checked_elements=" << report.elements << "\n"
        << "max_relative_error=" << buf << "\n";
  }
  const bool ok = report.passed(a.tolerance);
  out << "result=" << (ok ? "pass" : "fail") << "\n";
  return ok;
}

// ------------------------------------------------------------------ synthesize

struct SynthesizeArgs {
  std::string kind = "markov";
  std::string output;
  std::size_t sessions = 1000;
  std::size_t vocab_size = 20;
  std::size_t min_length = 0;
  std::size_t max_length = 0;
  std::size_t lag = 5;
  std::size_t shift = 1;
  double sharpness = 4.0;
  std::uint64_t seed = 1;
};

void run_synthesize(const SynthesizeArgs& a, std::ostream& out) {
  std::vector<graph::Session> sessions;
  if (a.kind == "markov") {
    data::MarkovOptions o;
    o.vocab_size = a.vocab_size;
    o.session_count = a.sessions;
    if (a.min_length) o.min_length = a.min_length;
    if (a.max_length) o.max_length = a.max_length;
    o.sharpness = a.sharpness;
    o.seed = a.seed;
    sessions = data::synthesize_markov(o).sessions;
  } else if (a.kind == "long_range") {
    data::LongRangeOptions o;
    o.vocab_size = a.vocab_size;
    o.session_count = a.sessions;
    if (a.min_length) o.min_length = a.min_length;
    if (a.max_length) o.max_length = a.max_length;
    o.lag = a.lag;
    o.shift = a.shift;
    o.seed = a.seed;
    sessions = data::synthesize_long_range(o);
  } else {
    throw ConfigError("unknown corpus kind '" + a.kind + "'");
  }
  std::ofstream file(a.output);
  if (!file) throw InputError("cannot write '" + a.output + "'");
  file << "session_id,item_id,timestamp\n";
  std::size_t clicks = 0;
  for (std::size_t s = 0; s < sessions.size(); ++s) {
    for (std::size_t i = 0; i < sessions[s].size(); ++i) {
      file << s << ',' << sessions[s][i] << ',' << s * 1000 + i << '\n';
      ++clicks;
    }
  }
  file.flush();
  if (!file) throw InputError("failed writing '" + a.output + "'");
  out << "sessions=" << sessions.size() << "\n"
      << "clicks=" << clicks << "\n"
      << "output=" << a.output << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"TRASA session-based next-item recommender", "trasa"};
  app.require_subcommand(1);

  PreprocessArgs pre;
  auto* pre_cmd = app.add_subcommand("preprocess", "raw event log -> filtered, augmented, split dataset");
  pre_cmd->add_option("--input", pre.input, "Delimiter-separated event log")->required()->check(CLI::ExistingFile);
  pre_cmd->add_option("--output", pre.output, "Output directory")->required();
  pre_cmd->add_option("--delimiter", pre.delimiter, "Field delimiter (single character or 'tab')")->capture_default_str();
  pre_cmd->add_flag("--no-header", pre.no_header, "Columns are addressed by index");
  pre_cmd->add_option("--session-column", pre.format.session_column)->capture_default_str();
  pre_cmd->add_option("--item-column", pre.format.item_column)->capture_default_str();
  pre_cmd->add_option("--time-column", pre.format.time_column)->capture_default_str();
  pre_cmd->add_option("--session-index", pre.format.session_index)->capture_default_str();
  pre_cmd->add_option("--item-index", pre.format.item_index)->capture_default_str();
  pre_cmd->add_option("--time-index", pre.format.time_index)->capture_default_str();
  pre_cmd->add_option("--min-support", pre.min_support, "Minimum item occurrences")->capture_default_str();
  pre_cmd->add_option("--test-fraction", pre.split.test_fraction)->capture_default_str();
  pre_cmd->add_option("--validation-fraction", pre.split.validation_fraction)->capture_default_str();
  pre_cmd->add_option("--seed", pre.split.seed, "Validation sampling seed")->capture_default_str();

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "train a model on a processed dataset");
  train_cmd->add_option("--data", tr.data_dir, "Processed dataset directory")->required()->check(CLI::ExistingDirectory);
  train_cmd->add_option("--config", tr.config_file, "key = value configuration file")->check(CLI::ExistingFile);
  train_cmd->add_option("--checkpoint", tr.checkpoint, "Where to write the best checkpoint");
  train_cmd->add_option("--log", tr.log_file, "Also write the epoch log here");
  train_cmd->add_flag("--ablation-suite", tr.ablation_suite, "Train every ablation and readout variant");
  for (const auto& key : train::config_keys()) tr.overrides[key];
  for (auto& [key, value] : tr.overrides) {
    tr.override_options[key] = train_cmd->add_option("--" + dashed(key), value, "Overrides config '" + key + "'");
  }

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "P@K and MRR@K of a checkpoint");
  eval_cmd->add_option("--checkpoint", ev.checkpoint)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--instances", ev.instances, "Instance file")->check(CLI::ExistingFile);
  eval_cmd->add_option("--data", ev.data_dir, "Processed dataset directory")->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--split", ev.split, "Split of --data to evaluate")
      ->check(CLI::IsMember({"train", "validation", "test"}))
      ->capture_default_str();
  eval_cmd->add_option("-k,--k", ev.ks, "Cutoffs")->check(CLI::PositiveNumber)->capture_default_str();

  RecommendArgs rec;
  auto* rec_cmd = app.add_subcommand("recommend", "top-K next items for one session");
  rec_cmd->add_option("--checkpoint", rec.checkpoint)->required()->check(CLI::ExistingFile);
  rec_cmd->add_option("--session", rec.session, "Comma-separated item ids")->required();
  rec_cmd->add_option("--vocabulary", rec.vocabulary, "Map raw ids through this vocabulary file")
      ->check(CLI::ExistingFile);
  rec_cmd->add_option("-k,--k", rec.k)->check(CLI::PositiveNumber)->capture_default_str();

  GradcheckArgs gc;
  auto* gc_cmd = app.add_subcommand("gradcheck", "64-bit finite-difference gradient checks");
  gc_cmd->add_option("--tolerance", gc.tolerance)->capture_default_str();
  gc_cmd->add_option("--case", gc.cases, "Restrict to these cases");
  gc_cmd->add_flag("--verbose", gc.verbose, "Report every parameter");

  SynthesizeArgs syn;
  auto* syn_cmd = app.add_subcommand("synthesize", "write a synthetic event log");
  syn_cmd->add_option("--kind", syn.kind)->check(CLI::IsMember({"markov", "long_range"}))->capture_default_str();
  syn_cmd->add_option("--output", syn.output, "Event log path")->required();
  syn_cmd->add_option("--sessions", syn.sessions)->capture_default_str();
  syn_cmd->add_option("--vocab-size", syn.vocab_size)->capture_default_str();
  syn_cmd->add_option("--min-length", syn.min_length, "Default depends on the kind");
  syn_cmd->add_option("--max-length", syn.max_length, "Default depends on the kind");
  syn_cmd->add_option("--lag", syn.lag, "long_range: anchor distance")->capture_default_str();
  syn_cmd->add_option("--shift", syn.shift, "long_range: label = (anchor + shift) mod n")->capture_default_str();
  syn_cmd->add_option("--sharpness", syn.sharpness, "markov: transition peakiness")->capture_default_str();
  syn_cmd->add_option("--seed", syn.seed)->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*pre_cmd) run_preprocess(pre, out);
    if (*train_cmd) run_train(tr, out);
    if (*eval_cmd) run_eval(ev, out);
    if (*rec_cmd) run_recommend(rec, out);
    if (*gc_cmd && !run_gradcheck(gc, out)) return kExitFailure;
    if (*syn_cmd) run_synthesize(syn, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace trasa::cli
