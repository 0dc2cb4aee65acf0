#include <gtest/gtest.h>

#include <numeric>

#include "slaterec/core/distribution.hpp"
#include "slaterec/core/rng.hpp"
#include "slaterec/core/slate.hpp"

using namespace slaterec;

TEST(Rng, EqualSeedsGiveEqualStreams) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, SplitIsDeterministicAndDistinct) {
  Rng a(3), b(3);
  Rng ca = a.split(), cb = b.split();
  EXPECT_EQ(ca.next_u64(), cb.next_u64());
  EXPECT_NE(a.next_u64(), ca.next_u64());
}

TEST(Distribution, SoftmaxIsShiftInvariant) {
  const std::vector<double> z{0.3, -1.2, 2.0};
  std::vector<double> shifted = z;
  for (double& v : shifted) v += 7.5;
  const auto p = softmax(z), q = softmax(shifted);
  for (std::size_t i = 0; i < z.size(); ++i) EXPECT_NEAR(p[i], q[i], 1e-15);
}

TEST(Distribution, IsDistributionChecksSumAndSign) {
  EXPECT_TRUE(is_distribution(std::vector<double>{0.5, 0.5}, 1e-12));
  EXPECT_FALSE(is_distribution(std::vector<double>{0.5, 0.6}, 1e-12));
  EXPECT_FALSE(is_distribution(std::vector<double>{1.5, -0.5}, 1e-12));
  EXPECT_FALSE(is_distribution(std::vector<double>{}, 1e-12));
}

TEST(Distribution, SimplexSamplesAreDistributions) {
  Rng rng(1);
  for (double c : {0.05, 0.3, 1.0, 4.0}) {
    for (int t = 0; t < 50; ++t) EXPECT_TRUE(is_distribution(sample_simplex(rng, 7, c), 1e-12));
  }
}

TEST(Distribution, SampleIndexDegenerate) {
  Rng rng(5);
  for (int t = 0; t < 100; ++t) EXPECT_EQ(sample_index(rng, std::vector<double>{0.0, 1.0, 0.0}), 1u);
}

TEST(Slate, EqualityIgnoresOrder) {
  EXPECT_EQ((Slate{{1, 3}}), (Slate{{3, 1}}));
  EXPECT_FALSE((Slate{{1, 3}}) == (Slate{{1, 2}}));
}

TEST(Slate, ValidateRejectsBadSlates) {
  EXPECT_THROW(validate_slate(Slate{{0, 5}}, 5, 2), InvalidSlate);
  EXPECT_THROW(validate_slate(Slate{{1, 1}}, 5, 2), InvalidSlate);
  EXPECT_THROW(validate_slate(Slate{{1}}, 5, 2), InvalidSlate);
  EXPECT_NO_THROW(validate_slate(Slate{{4, 0}}, 5, 2));
}

TEST(Slate, EnumerationCountsBinomial) {
  EXPECT_EQ(enumerate_slates(5, 2).size(), 10u);
  EXPECT_EQ(enumerate_slates(6, 3).size(), 20u);
  EXPECT_EQ(enumerate_slates(4, 4).size(), 1u);
  const auto all = enumerate_slates(5, 2);
  for (std::size_t a = 0; a < all.size(); ++a) {
    for (std::size_t b = 0; b < a; ++b) EXPECT_FALSE(all[a] == all[b]);
  }
  EXPECT_THROW(enumerate_slates(3, 4), ConfigError);
}

TEST(Slate, NullChoiceMapsToNullId) {
  const Slate s{{2, 4}};
  EXPECT_EQ(consumed_item(UserResponse{2, 0.0}, s, 9), 9u);
  EXPECT_EQ(consumed_item(UserResponse{1, 0.0}, s, 9), 4u);
}
