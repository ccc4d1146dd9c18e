#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "trasa/data/preprocess.hpp"

namespace trasa::data {

inline constexpr const char* kInstancesHeader = "# trasa-instances v1";
inline constexpr const char* kVocabularyHeader = "# trasa-vocabulary v1";
inline constexpr const char* kStatsHeader = "# trasa-stats v1";

/// One instance per line: space-separated prefix indices, a tab, the label.
void write_instances(std::ostream& out, const std::vector<Instance>& instances);
std::vector<Instance> read_instances(std::istream& in);

/// One raw id per line; the line number (from 0) is the index.
void write_vocabulary(std::ostream& out, const Vocabulary& vocab);
Vocabulary read_vocabulary(std::istream& in);

/// key=value lines.
void write_stats(std::ostream& out, const DatasetStats& stats, const SplitReport& report);
DatasetStats read_stats(std::istream& in, SplitReport* report = nullptr);

/// Writes train.txt, validation.txt, test.txt, vocabulary.txt and stats.txt
/// into `dir` (created if needed).
void save_dataset(const std::filesystem::path& dir, const ProcessedDataset& dataset);
/// Throws InputError for a missing file and FormatError for a malformed one.
ProcessedDataset load_dataset(const std::filesystem::path& dir);

std::vector<Instance> load_instances(const std::filesystem::path& path);
void save_instances(const std::filesystem::path& path, const std::vector<Instance>& instances);

}  // namespace trasa::data
