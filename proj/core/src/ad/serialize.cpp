#include "trasa/ad/serialize.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

namespace trasa::ad {

namespace {

constexpr std::array<char, 8> kMagic = {'T', 'R', 'S', 'A', 'T', 'N', 'S', 'R'};
// Sanity bound against corrupt length fields.
constexpr std::uint64_t kMaxStringBytes = 1u << 20;

template <typename U>
void put_le(std::ostream& os, U value) {
  std::array<char, sizeof(U)> bytes{};
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  }
  os.write(bytes.data(), bytes.size());
}

template <typename U>
U get_le(std::istream& is) {
  std::array<unsigned char, sizeof(U)> bytes{};
  if (!is.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
    throw FormatError("tensor container truncated");
  }
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
  return value;
}

void put_string(std::ostream& os, const std::string& s) {
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& is) {
  const auto len = get_le<std::uint32_t>(is);
  if (len > kMaxStringBytes) throw FormatError("tensor container string length is implausible");
  std::string s(len, '\0');
  if (len && !is.read(s.data(), len)) throw FormatError("tensor container truncated");
  return s;
}

template <typename F, typename Bits>
void put_float(std::ostream& os, F value) {
  put_le<Bits>(os, std::bit_cast<Bits>(value));
}

}  // namespace

template <typename T>
void write_container(std::ostream& os, const Metadata& metadata, const NamedTensors<T>& tensors) {
  std::set<std::string> seen;
  for (const auto& [name, _] : tensors) {
    if (!seen.insert(name).second) throw FormatError("duplicate tensor name '" + name + "'");
  }
  os.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(os, kContainerVersion);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(metadata.size()));
  for (const auto& [key, value] : metadata) {
    put_string(os, key);
    put_string(os, value);
  }
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, tensor] : tensors) {
    put_string(os, name);
    put_le<std::uint8_t>(os, static_cast<std::uint8_t>(sizeof(T)));
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(tensor.rank()));
    for (auto extent : tensor.shape()) put_le<std::uint64_t>(os, extent);
    for (T v : tensor.data()) {
      if constexpr (sizeof(T) == 4) {
        put_float<T, std::uint32_t>(os, v);
      } else {
        put_float<T, std::uint64_t>(os, v);
      }
    }
  }
  if (!os) throw FormatError("failed writing tensor container");
}

template <typename T>
TensorContainer<T> read_container(std::istream& is) {
  std::array<char, 8> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic) {
    throw FormatError("not a tensor container (bad magic)");
  }
  const auto version = get_le<std::uint32_t>(is);
  if (version != kContainerVersion) {
    throw FormatError("unsupported tensor container version " + std::to_string(version));
  }
  TensorContainer<T> out;
  const auto meta_count = get_le<std::uint32_t>(is);
  for (std::uint32_t i = 0; i < meta_count; ++i) {
    auto key = get_string(is);
    out.metadata[std::move(key)] = get_string(is);
  }
  const auto count = get_le<std::uint32_t>(is);
  for (std::uint32_t t = 0; t < count; ++t) {
    auto name = get_string(is);
    const auto width = get_le<std::uint8_t>(is);
    if (width != 4 && width != 8) {
      throw FormatError("tensor '" + name + "' has unsupported element width " +
                        std::to_string(width));
    }
    const auto rank = get_le<std::uint32_t>(is);
    if (rank == 0 || rank > 8) throw FormatError("tensor '" + name + "' has invalid rank");
    Shape shape(rank);
    for (auto& extent : shape) extent = static_cast<std::size_t>(get_le<std::uint64_t>(is));
    const std::size_t n = numel(shape);
    std::vector<T> data(n);
    for (auto& v : data) {
      if (width == 4) {
        v = static_cast<T>(std::bit_cast<float>(get_le<std::uint32_t>(is)));
      } else {
        v = static_cast<T>(std::bit_cast<double>(get_le<std::uint64_t>(is)));
      }
    }
    try {
      out.tensors.emplace_back(std::move(name), Tensor<T>(std::move(shape), std::move(data)));
    } catch (const DimensionError& e) {
      throw FormatError(std::string("invalid tensor shape in container: ") + e.what());
    }
  }
  return out;
}

template <typename T>
void save_container(const std::filesystem::path& path, const Metadata& metadata,
                    const NamedTensors<T>& tensors) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw FormatError("cannot open '" + path.string() + "' for writing");
  write_container(os, metadata, tensors);
}

template <typename T>
TensorContainer<T> load_container(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open '" + path.string() + "'");
  return read_container<T>(is);
}

template void write_container<float>(std::ostream&, const Metadata&, const NamedTensors<float>&);
template void write_container<double>(std::ostream&, const Metadata&, const NamedTensors<double>&);
template TensorContainer<float> read_container<float>(std::istream&);
template TensorContainer<double> read_container<double>(std::istream&);
template void save_container<float>(const std::filesystem::path&, const Metadata&,
                                    const NamedTensors<float>&);
template void save_container<double>(const std::filesystem::path&, const Metadata&,
                                     const NamedTensors<double>&);
template TensorContainer<float> load_container<float>(const std::filesystem::path&);
template TensorContainer<double> load_container<double>(const std::filesystem::path&);

}  // namespace trasa::ad
