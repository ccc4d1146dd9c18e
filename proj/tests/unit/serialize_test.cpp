#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "trasa/ad/serialize.hpp"
#include "trasa/errors.hpp"

using namespace trasa::ad;

namespace {

NamedTensors<double> sample() {
  NamedTensors<double> t;
  t.emplace_back("alpha", Tensor<double>::matrix({{1.5, -2.0, 3.25}, {0.0, 1e-300, -7.0}}));
  t.emplace_back("beta", Tensor<double>::vector({42.0}));
  Tensor<double> cube(Shape{2, 1, 2});
  cube.data()[3] = 0.125;
  t.emplace_back("gamma/cube", cube);
  return t;
}

std::string serialized() {
  std::ostringstream os;
  write_container(os, Metadata{{"kind", "test"}, {"note", "x=1"}}, sample());
  return os.str();
}

}  // namespace

TEST(Container, RoundTripPreservesNamesShapesValuesAndMetadata) {
  std::istringstream is(serialized());
  const auto c = read_container<double>(is);
  EXPECT_EQ(c.metadata.at("kind"), "test");
  EXPECT_EQ(c.metadata.at("note"), "x=1");
  const auto expected = sample();
  ASSERT_EQ(c.tensors.size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    EXPECT_EQ(c.tensors[i].first, expected[i].first);
    EXPECT_EQ(c.tensors[i].second.shape(), expected[i].second.shape());
    EXPECT_EQ(c.tensors[i].second.data().size(), expected[i].second.data().size());
    for (std::size_t k = 0; k < expected[i].second.size(); ++k) {
      EXPECT_EQ(c.tensors[i].second[k], expected[i].second[k]);
    }
  }
}

TEST(Container, StartsWithMagicAndVersion) {
  const std::string bytes = serialized();
  ASSERT_GE(bytes.size(), 12u);
  EXPECT_EQ(bytes.substr(0, 8), "TRSATNSR");
  EXPECT_EQ(bytes[8], 1);
  EXPECT_EQ(bytes[9], 0);
}

TEST(Container, FloatStorageWidensExactly) {
  NamedTensors<float> t;
  t.emplace_back("w", Tensor<float>::vector({0.1f, -3.5f}));
  std::ostringstream os;
  write_container(os, {}, t);
  std::istringstream is(os.str());
  const auto c = read_container<double>(is);
  EXPECT_EQ(c.tensors[0].second[0], static_cast<double>(0.1f));
}

TEST(Container, BadMagicIsFormatError) {
  std::string bytes = serialized();
  bytes[0] = 'X';
  std::istringstream is(bytes);
  EXPECT_THROW(read_container<double>(is), trasa::FormatError);
}

TEST(Container, UnknownVersionIsFormatError) {
  std::string bytes = serialized();
  bytes[8] = 9;
  std::istringstream is(bytes);
  EXPECT_THROW(read_container<double>(is), trasa::FormatError);
}

TEST(Container, EveryTruncationIsFormatError) {
  const std::string bytes = serialized();
  for (std::size_t cut = 0; cut < bytes.size(); cut += 7) {
    std::istringstream is(bytes.substr(0, cut));
    EXPECT_THROW(read_container<double>(is), trasa::FormatError) << "cut at " << cut;
  }
}

TEST(Container, DuplicateNamesAreRejected) {
  NamedTensors<double> t;
  t.emplace_back("w", Tensor<double>::vector({1}));
  t.emplace_back("w", Tensor<double>::vector({2}));
  std::ostringstream os;
  EXPECT_THROW(write_container(os, {}, t), trasa::FormatError);
}

TEST(Container, FileRoundTripAndMissingFile) {
  trasa::testing::TempDir dir("container");
  save_container(dir / "t.bin", Metadata{}, sample());
  const auto c = load_container<double>(dir / "t.bin");
  EXPECT_EQ(c.tensors.size(), 3u);
  EXPECT_THROW(load_container<double>(dir / "missing.bin"), trasa::FormatError);
}
