#include "trasa/data/events.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <istream>
#include <unordered_map>

#include "trasa/errors.hpp"

namespace trasa::data {

namespace {

constexpr std::size_t kMaxReportedLines = 10;

std::vector<std::string> split_fields(const std::string& line, char delimiter) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delimiter, start);
    std::string field = line.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
    // Trim whitespace and a trailing carriage return.
    const auto first = field.find_first_not_of(" \t\r");
    const auto last = field.find_last_not_of(" \t\r");
    out.push_back(first == std::string::npos ? std::string() : field.substr(first, last - first + 1));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

bool parse_int(std::string_view text, int& out) {
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace

bool parse_timestamp(const std::string& text, std::int64_t& out) {
  if (text.empty()) return false;
  {
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    if (ec == std::errc() && ptr == text.data() + text.size()) return true;
  }
  // YYYY-MM-DD[(T| )HH:MM:SS]
  if (text.size() != 10 && text.size() != 19) return false;
  if (text[4] != '-' || text[7] != '-') return false;
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  if (!parse_int(std::string_view(text).substr(0, 4), y) ||
      !parse_int(std::string_view(text).substr(5, 2), mo) ||
      !parse_int(std::string_view(text).substr(8, 2), d)) {
    return false;
  }
  if (text.size() == 19) {
    if ((text[10] != 'T' && text[10] != ' ') || text[13] != ':' || text[16] != ':') return false;
    if (!parse_int(std::string_view(text).substr(11, 2), h) ||
        !parse_int(std::string_view(text).substr(14, 2), mi) ||
        !parse_int(std::string_view(text).substr(17, 2), s)) {
      return false;
    }
    if (h > 23 || mi > 59 || s > 60) return false;
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{static_cast<unsigned>(mo)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return false;
  const auto days = std::chrono::sys_days{ymd}.time_since_epoch().count();
  out = static_cast<std::int64_t>(days) * 86400 + h * 3600 + mi * 60 + s;
  return true;
}

IngestResult ingest(std::istream& in, const LogFormat& format) {
  if (!in) throw InputError("event log is not readable");
  std::size_t session_col = format.session_index;
  std::size_t item_col = format.item_index;
  std::size_t time_col = format.time_index;

  std::string line;
  std::size_t line_no = 0;
  if (format.has_header) {
    if (!std::getline(in, line)) throw InputError("event log is empty");
    ++line_no;
    const auto header = split_fields(line, format.delimiter);
    auto find = [&](const std::string& name) {
      auto it = std::find(header.begin(), header.end(), name);
      if (it == header.end()) throw InputError("event log header lacks column '" + name + "'");
      return static_cast<std::size_t>(it - header.begin());
    };
    session_col = find(format.session_column);
    item_col = find(format.item_column);
    time_col = find(format.time_column);
  }
  const std::size_t needed = std::max({session_col, item_col, time_col}) + 1;

  IngestResult result;
  std::vector<RawEvent> events;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++result.report.rows;
    const auto fields = split_fields(line, format.delimiter);
    RawEvent ev;
    bool ok = fields.size() >= needed;
    if (ok) {
      ev.session_id = fields[session_col];
      ev.item_id = fields[item_col];
      ok = !ev.session_id.empty() && !ev.item_id.empty() &&
           parse_timestamp(fields[time_col], ev.timestamp);
    }
    if (!ok) {
      ++result.report.malformed;
      if (result.report.malformed_lines.size() < kMaxReportedLines) {
        result.report.malformed_lines.push_back(line_no);
      }
      continue;
    }
    ev.order = events.size();
    events.push_back(std::move(ev));
  }
  result.report.parsed = events.size();
  if (events.empty()) throw InputError("event log has no parseable rows");

  std::unordered_map<std::string, std::size_t> session_of;
  std::vector<std::vector<const RawEvent*>> grouped;
  for (const auto& ev : events) {
    auto [it, inserted] = session_of.try_emplace(ev.session_id, grouped.size());
    if (inserted) {
      grouped.emplace_back();
      result.sessions.push_back(RawSession{ev.session_id, {}, 0});
    }
    grouped[it->second].push_back(&ev);
  }
  for (std::size_t s = 0; s < grouped.size(); ++s) {
    auto& evs = grouped[s];
    std::stable_sort(evs.begin(), evs.end(), [](const RawEvent* a, const RawEvent* b) {
      return a->timestamp < b->timestamp;
    });
    auto& session = result.sessions[s];
    session.items.reserve(evs.size());
    for (const auto* ev : evs) session.items.push_back(ev->item_id);
    session.last_timestamp = evs.back()->timestamp;
  }
  return result;
}

IngestResult ingest(const std::filesystem::path& path, const LogFormat& format) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open event log '" + path.string() + "'");
  return ingest(in, format);
}

}  // namespace trasa::data
