#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "trasa/ad/tensor.hpp"

// Flat named-tensor container, format version 1. All integers and
// elements are little-endian.
//
//   magic            8 bytes   "TRSATNSR"
//   version          u32       1
//   metadata count   u32
//     key length     u32, key bytes (UTF-8)
//     value length   u32, value bytes
//   tensor count     u32
//     name length    u32, name bytes
//     element bytes  u8        4 (float32) or 8 (float64)
//     rank           u32
//     extents        u64 x rank
//     data           element bytes x product(extents)
//
// Tensors are stored in the order given; names must be unique.

namespace trasa::ad {

inline constexpr std::uint32_t kContainerVersion = 1;

template <typename T>
using NamedTensors = std::vector<std::pair<std::string, Tensor<T>>>;

using Metadata = std::map<std::string, std::string>;

template <typename T>
struct TensorContainer {
  Metadata metadata;
  NamedTensors<T> tensors;
};

template <typename T>
void write_container(std::ostream& os, const Metadata& metadata, const NamedTensors<T>& tensors);

/// Elements stored at either precision are converted to `T`.
/// Throws FormatError on bad magic, unknown version or truncation.
template <typename T>
TensorContainer<T> read_container(std::istream& is);

template <typename T>
void save_container(const std::filesystem::path& path, const Metadata& metadata,
                    const NamedTensors<T>& tensors);
template <typename T>
TensorContainer<T> load_container(const std::filesystem::path& path);

}  // namespace trasa::ad
