#include "trasa/data/dataset_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "trasa/errors.hpp"

namespace trasa::data {

namespace {

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

void expect_header(std::istream& in, const char* header, const char* what) {
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != header) {
    throw FormatError(std::string(what) + " file lacks header '" + header + "'");
  }
}

std::size_t parse_index(std::string_view text, std::size_t line_no) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw FormatError("line " + std::to_string(line_no) + ": '" + std::string(text) +
                      "' is not an item index");
  }
  return value;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  return out;
}

void check_written(std::ostream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

}  // namespace

void write_instances(std::ostream& out, const std::vector<Instance>& instances) {
  out << kInstancesHeader << '\n';
  for (const auto& inst : instances) {
    for (std::size_t i = 0; i < inst.prefix.size(); ++i) {
      if (i > 0) out << ' ';
      out << inst.prefix[i];
    }
    out << '\t' << inst.label << '\n';
  }
}

std::vector<Instance> read_instances(std::istream& in) {
  expect_header(in, kInstancesHeader, "instances");
  std::vector<Instance> out;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw FormatError("line " + std::to_string(line_no) + ": missing tab before label");
    }
    Instance inst;
    std::string_view prefix(line.data(), tab);
    std::size_t start = 0;
    while (start < prefix.size()) {
      std::size_t end = prefix.find(' ', start);
      if (end == std::string_view::npos) end = prefix.size();
      inst.prefix.push_back(parse_index(prefix.substr(start, end - start), line_no));
      start = end + 1;
    }
    if (inst.prefix.empty()) {
      throw FormatError("line " + std::to_string(line_no) + ": empty prefix");
    }
    inst.label = parse_index(std::string_view(line).substr(tab + 1), line_no);
    out.push_back(std::move(inst));
  }
  return out;
}

void write_vocabulary(std::ostream& out, const Vocabulary& vocab) {
  out << kVocabularyHeader << '\n';
  for (const auto& raw : vocab.raw_ids()) out << raw << '\n';
}

Vocabulary read_vocabulary(std::istream& in) {
  expect_header(in, kVocabularyHeader, "vocabulary");
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty()) throw FormatError("empty raw id at vocabulary index " + std::to_string(ids.size()));
    ids.push_back(std::move(line));
  }
  return Vocabulary(std::move(ids));
}

void write_stats(std::ostream& out, const DatasetStats& stats, const SplitReport& report) {
  char avg[64];
  std::snprintf(avg, sizeof(avg), "%.17g", stats.average_length);
  out << kStatsHeader << '\n'
      << "clicks=" << stats.clicks << '\n'
      << "sessions=" << stats.sessions << '\n'
      << "items=" << stats.items << '\n'
      << "average_length=" << avg << '\n'
      << "train_sessions=" << report.train_sessions << '\n'
      << "validation_sessions=" << report.validation_sessions << '\n'
      << "test_sessions=" << report.test_sessions << '\n'
      << "dropped_test_sessions=" << report.dropped_test_sessions << '\n'
      << "dropped_test_instances=" << report.dropped_test_instances << '\n';
}

DatasetStats read_stats(std::istream& in, SplitReport* report) {
  expect_header(in, kStatsHeader, "stats");
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("stats line lacks '=': " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw FormatError("stats file lacks '" + key + "'");
    return it->second;
  };
  auto count = [&](const std::string& key) { return parse_index(get(key), 0); };
  DatasetStats stats;
  stats.clicks = count("clicks");
  stats.sessions = count("sessions");
  stats.items = count("items");
  try {
    stats.average_length = std::stod(get("average_length"));
  } catch (const std::exception&) {
    throw FormatError("stats 'average_length' is not a number");
  }
  if (report != nullptr) {
    report->train_sessions = count("train_sessions");
    report->validation_sessions = count("validation_sessions");
    report->test_sessions = count("test_sessions");
    report->dropped_test_sessions = count("dropped_test_sessions");
    report->dropped_test_instances = count("dropped_test_instances");
  }
  return stats;
}

std::vector<Instance> load_instances(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_instances(in);
}

void save_instances(const std::filesystem::path& path, const std::vector<Instance>& instances) {
  auto out = open_out(path);
  write_instances(out, instances);
  check_written(out, path);
}

void save_dataset(const std::filesystem::path& dir, const ProcessedDataset& dataset) {
  std::filesystem::create_directories(dir);
  save_instances(dir / "train.txt", dataset.train);
  save_instances(dir / "validation.txt", dataset.validation);
  save_instances(dir / "test.txt", dataset.test);
  {
    auto out = open_out(dir / "vocabulary.txt");
    write_vocabulary(out, dataset.vocabulary);
    check_written(out, dir / "vocabulary.txt");
  }
  {
    auto out = open_out(dir / "stats.txt");
    write_stats(out, dataset.stats, dataset.report);
    check_written(out, dir / "stats.txt");
  }
}

ProcessedDataset load_dataset(const std::filesystem::path& dir) {
  ProcessedDataset ds;
  ds.train = load_instances(dir / "train.txt");
  ds.validation = load_instances(dir / "validation.txt");
  ds.test = load_instances(dir / "test.txt");
  {
    auto in = open_in(dir / "vocabulary.txt");
    ds.vocabulary = read_vocabulary(in);
  }
  {
    auto in = open_in(dir / "stats.txt");
    ds.stats = read_stats(in, &ds.report);
  }
  const std::size_t n = ds.vocabulary.size();
  for (const auto* split : {&ds.train, &ds.validation, &ds.test}) {
    for (const auto& inst : *split) {
      bool ok = inst.label < n;
      for (ItemId id : inst.prefix) ok = ok && id < n;
      if (!ok) throw FormatError("instance references an item outside the vocabulary");
    }
  }
  return ds;
}

}  // namespace trasa::data
