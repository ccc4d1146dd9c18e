#include "trasa/data/synthetic.hpp"

#include <cmath>
#include <random>
#include <string>

#include "trasa/errors.hpp"

namespace trasa::data {

namespace {

void check_common(std::size_t vocab_size, std::size_t min_length, std::size_t max_length) {
  if (vocab_size < 4) throw ConfigError("synthetic vocabulary needs at least 4 items");
  if (min_length < 2) throw ConfigError("synthetic sessions need at least 2 clicks");
  if (max_length < min_length) {
    throw ConfigError("max length " + std::to_string(max_length) + " below min length " +
                      std::to_string(min_length));
  }
}

}  // namespace

MarkovCorpus synthesize_markov(const MarkovOptions& options) {
  check_common(options.vocab_size, options.min_length, options.max_length);
  if (!(options.sharpness > 0.0) || !std::isfinite(options.sharpness)) {
    throw ConfigError("markov sharpness must be positive");
  }
  const std::size_t n = options.vocab_size;
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  MarkovCorpus corpus;
  corpus.transition.assign(n, std::vector<double>(n, 0.0));
  for (auto& row : corpus.transition) {
    double total = 0.0;
    for (auto& w : row) {
      w = std::pow(unit(rng), options.sharpness) + 1e-12;
      total += w;
    }
    for (auto& w : row) w /= total;
  }

  std::vector<std::discrete_distribution<std::size_t>> next;
  next.reserve(n);
  for (const auto& row : corpus.transition) next.emplace_back(row.begin(), row.end());
  std::uniform_int_distribution<std::size_t> start(0, n - 1);
  std::uniform_int_distribution<std::size_t> length(options.min_length, options.max_length);

  corpus.sessions.reserve(options.session_count);
  for (std::size_t s = 0; s < options.session_count; ++s) {
    graph::Session session;
    const std::size_t len = length(rng);
    session.push_back(start(rng));
    while (session.size() < len) session.push_back(next[session.back()](rng));
    corpus.sessions.push_back(std::move(session));
  }
  return corpus;
}

std::vector<graph::Session> synthesize_long_range(const LongRangeOptions& options) {
  check_common(options.vocab_size, options.min_length, options.max_length);
  if (options.lag == 0) throw ConfigError("long-range lag must be positive");
  if (options.min_length < options.lag + 1) {
    throw ConfigError("long-range sessions need at least lag + 1 = " +
                      std::to_string(options.lag + 1) + " clicks");
  }
  const std::size_t n = options.vocab_size;
  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<std::size_t> item(0, n - 1);
  std::uniform_int_distribution<std::size_t> length(options.min_length, options.max_length);

  std::vector<graph::Session> sessions;
  sessions.reserve(options.session_count);
  for (std::size_t s = 0; s < options.session_count; ++s) {
    const std::size_t len = length(rng);
    graph::Session session(len);
    for (std::size_t i = 0; i + 1 < len; ++i) session[i] = item(rng);
    const std::size_t anchor = session[len - 1 - options.lag];
    session[len - 1] = (anchor + options.shift) % n;
    sessions.push_back(std::move(session));
  }
  return sessions;
}

}  // namespace trasa::data
