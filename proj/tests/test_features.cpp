#include "xga/features.hpp"

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "xga/rng.hpp"
#include "xga/world.hpp"

namespace xga {
namespace {

using namespace test;

TEST(Features, KindNamesRoundTrip) {
  for (ExtractorKind kind : {ExtractorKind::identity,
                             ExtractorKind::random_projection,
                             ExtractorKind::frozen_mlp})
    EXPECT_EQ(extractor_kind_from_string(to_string(kind)), kind);
  EXPECT_THROW(extractor_kind_from_string("resnet"), ConfigError);
}

TEST(Features, IdentityPassesThrough) {
  FeatureExtractor f = FeatureExtractor::identity(6);
  Rng r(1);
  const Vec x = r.normal_vector(6);
  EXPECT_TRUE(f.extract(x) == x);
  EXPECT_EQ(f.feature_dim(), 6);
}

TEST(Features, ProjectionRowsOrthonormalAndContractive) {
  FeatureExtractor f = FeatureExtractor::random_projection(3, 32, 16);
  Rng r(2);
  for (int i = 0; i < 100; ++i) {
    const Vec x = r.normal_vector(32);
    EXPECT_LE(f.extract(x).norm(), x.norm() + 1e-12);
  }
}

TEST(Features, ProjectionDeterministicInSeed) {
  FeatureExtractor a = FeatureExtractor::random_projection(9, 16, 8);
  FeatureExtractor b = FeatureExtractor::random_projection(9, 16, 8);
  Rng r(3);
  const Vec x = r.normal_vector(16);
  EXPECT_TRUE(a.extract(x) == b.extract(x));
}

TEST(Features, FrozenMlpZeroInputZeroOutput) {
  FeatureExtractor f = FeatureExtractor::frozen_mlp(4, 8, 5);
  EXPECT_EQ(f.extract(Vec::Zero(8)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Features, DimensionMismatchRejected) {
  FeatureExtractor f = FeatureExtractor::random_projection(5, 12, 4);
  EXPECT_THROW(f.extract(Vec::Zero(11)), ConfigError);
}

TEST(Features, JsonRoundTripAllKinds) {
  Rng r(6);
  const Vec x16 = r.normal_vector(16);
  for (auto f : {FeatureExtractor::identity(16),
                 FeatureExtractor::random_projection(7, 16, 6),
                 FeatureExtractor::frozen_mlp(8, 16, 6)}) {
    const FeatureExtractor back = FeatureExtractor::from_json(f.to_json());
    EXPECT_EQ(back.kind(), f.kind());
    EXPECT_EQ(back.feature_dim(), f.feature_dim());
    EXPECT_TRUE(back.extract(x16) == f.extract(x16));
  }
}

TEST(Features, BackpropMatchesFiniteDifferences) {
  Rng r(7);
  for (auto f : {FeatureExtractor::identity(10),
                 FeatureExtractor::random_projection(11, 10, 4),
                 FeatureExtractor::frozen_mlp(12, 10, 4)}) {
    const Vec x = r.normal_vector(10);
    const Vec df = r.normal_vector(f.feature_dim());
    const Vec grad = f.backprop(x, df);
    for (int i = 0; i < 10; ++i) {
      const auto eval = [&](double eps) {
        Vec xp = x;
        xp(i) += eps;
        return df.dot(f.extract(xp));
      };
      const double fd = (eval(1e-6) - eval(-1e-6)) / 2e-6;
      EXPECT_NEAR(grad(i), fd, 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

class DivergenceTest : public ::testing::Test {
 protected:
  DivergenceTest()
      : world_(small_world(40)), bank_(init_bank(41, 4, 2, 1, 3.0)) {}
  World world_;
  DirectionBank bank_;
};

TEST_F(DivergenceTest, ZeroAlphaGivesZeroDivergence) {
  DirectionBank bank = bank_;
  bank.alpha = 0.0;
  FeatureExtractor f = FeatureExtractor::random_projection(42, 6, 4);
  Rng r(8);
  const Vec h = divergence(world_.reference, f, bank, 0, r.normal_vector(4));
  EXPECT_EQ(h.cwiseAbs().maxCoeff(), 0.0);
}

TEST_F(DivergenceTest, IdentityFeatureEqualsGeneratorDifference) {
  FeatureExtractor f = FeatureExtractor::identity(6);
  Rng r(9);
  const Vec z = r.normal_vector(4);
  const Vec h = divergence(world_.reference, f, bank_, 1, z);
  const Vec direct = world_.reference.generate(bank_.apply(1, z)) -
                     world_.reference.generate(z);
  EXPECT_TRUE(h == direct);
}

TEST_F(DivergenceTest, SmallAlphaMatchesLinearResponse) {
  DirectionBank bank = bank_;
  bank.alpha = 1e-6;
  FeatureExtractor f = FeatureExtractor::identity(6);
  Rng r(10);
  const Vec z = r.normal_vector(4);
  const Vec h = divergence(world_.reference, f, bank, 0, z);
  // directional derivative of x(z) along delta, times alpha
  const Vec delta = bank.direction(0, z);
  Vec linear = Vec::Zero(6);
  for (int j = 0; j < 6; ++j) {
    Vec e = Vec::Zero(6);
    e(j) = 1.0;
    linear(j) =
        world_.reference.backprop(world_.reference.intensities(z), e).dot(
            delta);
  }
  EXPECT_LT((h / bank.alpha - linear).cwiseAbs().maxCoeff(), 1e-5);
}

TEST_F(DivergenceTest, DeterministicGivenInputs) {
  FeatureExtractor f = FeatureExtractor::frozen_mlp(13, 6, 5);
  Rng r(11);
  const Vec z = r.normal_vector(4);
  EXPECT_TRUE(divergence(world_.client, f, bank_, 0, z) ==
              divergence(world_.client, f, bank_, 0, z));
}

}  // namespace
}  // namespace xga
