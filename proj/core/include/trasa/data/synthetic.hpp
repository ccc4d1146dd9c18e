#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "trasa/graph/session_graph.hpp"

namespace trasa::data {

struct MarkovOptions {
  std::size_t vocab_size = 20;
  std::size_t session_count = 50;
  std::size_t min_length = 3;
  std::size_t max_length = 8;
  /// Row weights are u^sharpness for u ~ U(0,1); larger values give
  /// peakier transitions.
  double sharpness = 4.0;
  std::uint64_t seed = 1;
};

struct MarkovCorpus {
  std::vector<graph::Session> sessions;
  /// Row-stochastic, vocab_size x vocab_size.
  std::vector<std::vector<double>> transition;
};

struct LongRangeOptions {
  std::size_t vocab_size = 30;
  std::size_t session_count = 2000;
  /// Lengths include the final, determined item.
  std::size_t min_length = 7;
  std::size_t max_length = 9;
  /// Distance from the anchor to the final item.
  std::size_t lag = 5;
  /// Final item = (anchor + shift) mod vocab_size.
  std::size_t shift = 1;
  std::uint64_t seed = 1;
};

/// Draws the transition matrix, then sessions with a uniform start item and
/// uniform length in [min_length, max_length]. Throws ConfigError on
/// inconsistent options.
MarkovCorpus synthesize_markov(const MarkovOptions& options);

/// Items drawn uniformly; the final item is a function of the item `lag`
/// positions before it. Throws ConfigError on inconsistent options.
std::vector<graph::Session> synthesize_long_range(const LongRangeOptions& options);

}  // namespace trasa::data
