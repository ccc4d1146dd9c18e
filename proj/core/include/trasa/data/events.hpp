#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace trasa::data {

/// One interaction row of a raw log.
struct RawEvent {
  std::string session_id;
  std::string item_id;
  std::int64_t timestamp = 0;
  /// Row position in the input, the tie-breaker for equal timestamps.
  std::size_t order = 0;
};

/// A session of raw item ids in chronological order.
struct RawSession {
  std::string id;
  std::vector<std::string> items;
  std::int64_t last_timestamp = 0;
};

/// Delimiter-separated log layout. With a header the columns are found by
/// name; without one, by zero-based index.
struct LogFormat {
  char delimiter = ',';
  bool has_header = true;
  std::string session_column = "session_id";
  std::string item_column = "item_id";
  std::string time_column = "timestamp";
  std::size_t session_index = 0;
  std::size_t item_index = 1;
  std::size_t time_index = 2;
};

struct IngestReport {
  std::size_t rows = 0;
  std::size_t parsed = 0;
  std::size_t malformed = 0;
  /// 1-based line numbers of the first few malformed rows.
  std::vector<std::size_t> malformed_lines;
};

struct IngestResult {
  /// Sessions in order of first appearance; items sorted by
  /// (timestamp, row order).
  std::vector<RawSession> sessions;
  IngestReport report;
};

/// Parses integer epoch seconds, or an ISO date "YYYY-MM-DD" optionally
/// followed by "THH:MM:SS" / " HH:MM:SS" (UTC). Returns false on failure.
bool parse_timestamp(const std::string& text, std::int64_t& out);

/// Malformed rows are skipped and counted. Throws InputError when the
/// input is unreadable, the header lacks a configured column, or no row parses.
IngestResult ingest(std::istream& in, const LogFormat& format);
IngestResult ingest(const std::filesystem::path& path, const LogFormat& format);

}  // namespace trasa::data
