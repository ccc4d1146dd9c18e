#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace trasa::data {

/// Indices into an instance list; at most `batch_size` of them.
using Batch = std::vector<std::size_t>;

/// Deterministic permutation of [0, count) keyed by (seed, epoch).
std::vector<std::size_t> epoch_order(std::size_t count, std::uint64_t seed, std::uint64_t epoch);

/// Splits the epoch order into consecutive batches; the last one may be
/// smaller. Throws ConfigError when batch_size is 0.
std::vector<Batch> make_batches(std::size_t count, std::size_t batch_size, std::uint64_t seed,
                                std::uint64_t epoch);

}  // namespace trasa::data
