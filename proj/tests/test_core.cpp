#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "imsp/core/binary_io.hpp"
#include "imsp/core/hash.hpp"
#include "imsp/core/parallel.hpp"
#include "imsp/core/rng.hpp"

namespace imsp {
namespace {

TEST(SeededRng, SameSeedSameStream) {
  SeededRng a(42, 3);
  SeededRng b(42, 3);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(SeededRng, StreamsDiffer) {
  SeededRng a(42, 0);
  SeededRng b(42, 1);
  int same = 0;
  for (int i = 0; i < 100; ++i) same += a.next_u64() == b.next_u64();
  EXPECT_EQ(same, 0);
}

TEST(SeededRng, DeriveIsDeterministicAndIndependentOfParentPosition) {
  SeededRng a(7);
  SeededRng b(7);
  b.next_u64();
  EXPECT_EQ(a.derive(5).next_u64(), b.derive(5).next_u64());
  EXPECT_NE(a.derive(5).next_u64(), a.derive(6).next_u64());
}

TEST(SeededRng, NormalMomentsAreStandard) {
  SeededRng rng(1);
  const int n = 200000;
  double s = 0.0;
  double s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(SeededRng, UniformIndexStaysInRange) {
  SeededRng rng(2);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 7000; ++i) counts[rng.uniform_index(7)]++;
  for (int c : counts) EXPECT_NEAR(c, 1000, 150);
}

TEST(Shuffle, IsAPermutation) {
  SeededRng rng(3);
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[i] = i;
  shuffle(v, rng);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sorted[i], i);
}

TEST(Hasher, KnownFnv1aVector) {
  // FNV-1a 64 of "a".
  EXPECT_EQ(Hasher{}.bytes("a", 1).digest(), 0xaf63dc4c8601ec8cULL);
}

TEST(Hasher, HexRoundTrip) {
  const std::uint64_t h = 0x0123456789abcdefULL;
  EXPECT_EQ(hex64(h), "0123456789abcdef");
  EXPECT_EQ(parse_hex64(hex64(h)), h);
  EXPECT_THROW(parse_hex64("xyz"), std::invalid_argument);
}

TEST(BinaryIo, MatrixRoundTripIsExact) {
  SeededRng rng(4);
  Matrix m(3, 5);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  std::stringstream ss;
  write_matrix(ss, m);
  EXPECT_EQ(ss.str().size(), 16u + 15u * 8u);
  const Matrix back = read_matrix(ss);
  EXPECT_EQ(back, m);
}

TEST(BinaryIo, LayoutIsLittleEndian) {
  std::stringstream ss;
  write_u32(ss, 0x01020304u);
  const std::string s = ss.str();
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(static_cast<unsigned char>(s[0]), 0x04);
  EXPECT_EQ(static_cast<unsigned char>(s[3]), 0x01);
}

TEST(BinaryIo, RejectsBadMagicAndTruncation) {
  std::stringstream bad("JUNKJUNKJUNKJUNK");
  EXPECT_THROW(read_matrix(bad), FormatError);
  Matrix m = Matrix::Ones(2, 2);
  std::stringstream ss;
  write_matrix(ss, m);
  std::string s = ss.str();
  s.resize(s.size() - 3);
  std::stringstream cut(s);
  EXPECT_THROW(read_matrix(cut), FormatError);
}

TEST(Parallel, EveryIndexRunsOnceAndErrorsPropagate) {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; }, 4);
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(
                   10, [](std::size_t i) {
                     if (i == 7) throw std::runtime_error("boom");
                   },
                   3),
               std::runtime_error);
}

}  // namespace
}  // namespace imsp
