#include "trasa/data/batching.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "trasa/errors.hpp"

namespace trasa::data {

std::vector<std::size_t> epoch_order(std::size_t count, std::uint64_t seed, std::uint64_t epoch) {
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(epoch >> 32)};
  std::mt19937_64 rng(seq);
  for (std::size_t i = count; i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(order[i - 1], order[pick(rng)]);
  }
  return order;
}

std::vector<Batch> make_batches(std::size_t count, std::size_t batch_size, std::uint64_t seed,
                                std::uint64_t epoch) {
  if (batch_size == 0) throw ConfigError("batch size must be at least 1");
  const auto order = epoch_order(count, seed, epoch);
  std::vector<Batch> batches;
  batches.reserve((count + batch_size - 1) / batch_size);
  for (std::size_t start = 0; start < count; start += batch_size) {
    const std::size_t end = std::min(count, start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

}  // namespace trasa::data
