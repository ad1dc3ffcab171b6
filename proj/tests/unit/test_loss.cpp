#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "seisseg/error.hpp"
#include "seisseg/gradcheck.hpp"
#include "seisseg/loss.hpp"

using namespace seisseg;

namespace {

LabelImage random_labels(std::mt19937_64& rng, std::size_t n_class, std::size_t n_z, std::size_t n_x) {
  std::uniform_int_distribution<ClassId> c(0, static_cast<ClassId>(n_class) - 1);
  LabelImage l{n_z, n_x, n_class, std::vector<ClassId>(n_z * n_x)};
  for (auto& v : l.classes) v = c(rng);
  return l;
}

PartialLabels all_pixels(const LabelImage& l) {
  PartialLabels p{l.n_z, l.n_x, l.n_class, {}};
  for (std::size_t z = 0; z < l.n_z; ++z) {
    for (std::size_t x = 0; x < l.n_x; ++x) p.entries.push_back({z, x, l.at(z, x)});
  }
  return p;
}

}  // namespace

TEST(LogSoftmaxTest, UniformForZeros) {
  auto v = log_softmax(Tensor({6, 1, 1}), 0, 0);
  for (double x : v) EXPECT_NEAR(x, -std::log(6.0), 1e-15);
}

TEST(LogSoftmaxTest, ShiftInvariantAndNormalized) {
  std::mt19937_64 rng(31);
  auto t = oracle::random_tensor(rng, {5, 2, 3}, 10.0);
  Tensor shifted = t;
  for (double& v : shifted.values()) v += 123.456;
  for (std::size_t z = 0; z < 2; ++z) {
    for (std::size_t x = 0; x < 3; ++x) {
      auto a = log_softmax(t, z, x);
      auto b = log_softmax(shifted, z, x);
      double s = 0.0;
      for (std::size_t c = 0; c < 5; ++c) {
        EXPECT_NEAR(a[c], b[c], 1e-12);
        EXPECT_LE(a[c], 0.0);
        s += std::exp(a[c]);
      }
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
  }
}

TEST(LogSoftmaxTest, LargeLogitsStayFinite) {
  auto v = log_softmax(Tensor({2, 1, 1}, std::vector<double>{1000.0, 0.0}), 0, 0);
  // exact: -log(1 + e^-1000) rounds to -0, and -1000 - log(1 + e^-1000) to -1000
  EXPECT_EQ(v[0], 0.0);
  EXPECT_EQ(v[1], -1000.0);
  auto w = log_softmax(Tensor({2, 1, 1}, std::vector<double>{-1000.0, 1000.0}), 0, 0);
  EXPECT_EQ(w[0], -2000.0);
  EXPECT_TRUE(std::isfinite(w[1]));
}

TEST(PartialLossTest, SingleLabeledPixelOfZeroLogits) {
  PartialLabels p{4, 4, 6, {{1, 2, 3}}};
  auto r = partial_cross_entropy(Tensor({6, 4, 4}), p);
  EXPECT_NEAR(r.value, std::log(6.0), 1e-15);
  EXPECT_EQ(r.n_labeled, 1u);
  EXPECT_FALSE(r.empty_labels);
}

TEST(PartialLossTest, EmptyLabelsGiveExactZero) {
  std::mt19937_64 rng(32);
  auto logits = oracle::random_tensor(rng, {6, 4, 4});
  auto r = partial_cross_entropy(logits, PartialLabels{4, 4, 6, {}});
  EXPECT_EQ(r.value, 0.0);
  EXPECT_TRUE(r.empty_labels);
  for (double g : r.gradient.values()) EXPECT_EQ(g, 0.0);
}

TEST(PartialLossTest, AllPixelsEqualsFullLoss) {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    auto logits = oracle::random_tensor(rng, {6, 8, 8}, 3.0);
    auto labels = random_labels(rng, 6, 8, 8);
    auto part = partial_cross_entropy(logits, all_pixels(labels));
    auto full = full_cross_entropy(logits, labels);
    EXPECT_LT(std::abs(part.value - full.value), 1e-12 * std::abs(full.value));
    const std::vector<int> cls(labels.classes.begin(), labels.classes.end());
    EXPECT_LT(std::abs(full.value - oracle::cross_entropy(logits, cls)), 1e-12 * full.value);
    for (std::size_t i = 0; i < logits.size(); ++i) EXPECT_NEAR(part.gradient[i], full.gradient[i], 1e-15);
  }
}

TEST(PartialLossTest, GradientOnlyAtLabeledPixels) {
  std::mt19937_64 rng(34);
  auto logits = oracle::random_tensor(rng, {4, 6, 6});
  PartialLabels p{6, 6, 4, {{0, 1, 2}, {3, 3, 0}, {5, 0, 3}}};
  auto r = partial_cross_entropy(logits, p);
  for (std::size_t z = 0; z < 6; ++z) {
    for (std::size_t x = 0; x < 6; ++x) {
      const bool labeled = (z == 0 && x == 1) || (z == 3 && x == 3) || (z == 5 && x == 0);
      double s = 0.0, mag = 0.0;
      for (std::size_t c = 0; c < 4; ++c) {
        s += r.gradient.at(c, z, x);
        mag += std::abs(r.gradient.at(c, z, x));
      }
      EXPECT_NEAR(s, 0.0, 1e-15);
      if (labeled) {
        EXPECT_GT(mag, 0.0);
      } else {
        EXPECT_EQ(mag, 0.0);
      }
    }
  }
  // (softmax - onehot) / |labeled|
  auto ls = log_softmax(logits, 3, 3);
  EXPECT_NEAR(r.gradient.at(0, 3, 3), (std::exp(ls[0]) - 1.0) / 3.0, 1e-15);
  EXPECT_NEAR(r.gradient.at(1, 3, 3), std::exp(ls[1]) / 3.0, 1e-15);
}

TEST(PartialLossTest, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(35);
  auto logits = oracle::random_tensor(rng, {5, 4, 6}, 2.0);
  PartialLabels p{4, 6, 5, {{0, 0, 4}, {1, 5, 1}, {2, 2, 0}, {3, 4, 2}}};
  for (auto red : {Reduction::mean, Reduction::sum}) {
    DifferentiableFn f = [&](std::span<const double> x, std::vector<double>* g) {
      Tensor t(logits.shape(), std::vector<double>(x.begin(), x.end()));
      auto r = partial_cross_entropy(t, p, red);
      if (g) g->assign(r.gradient.values().begin(), r.gradient.values().end());
      return r.value;
    };
    EXPECT_LT(finite_diff_check(f, logits.values(), 1e-6).max_rel_error, 1e-8);
  }
}

TEST(PartialLossTest, SumIsMeanTimesCount) {
  std::mt19937_64 rng(36);
  auto logits = oracle::random_tensor(rng, {3, 5, 5});
  PartialLabels p{5, 5, 3, {{0, 0, 1}, {2, 2, 2}, {4, 1, 0}, {4, 4, 1}}};
  auto mean = partial_cross_entropy(logits, p, Reduction::mean);
  auto sum = partial_cross_entropy(logits, p, Reduction::sum);
  EXPECT_NEAR(sum.value, 4.0 * mean.value, 1e-13);
}

TEST(PartialLossTest, ContractErrors) {
  Tensor logits({3, 4, 4});
  try {
    partial_cross_entropy(logits, PartialLabels{4, 4, 3, {{4, 1, 0}}});
    FAIL();
  } catch (const ContractError& e) {
    EXPECT_NE(std::string(e.what()).find("(4, 1)"), std::string::npos) << e.what();
  }
  EXPECT_THROW(partial_cross_entropy(logits, PartialLabels{4, 4, 3, {{0, 0, 3}}}), ContractError);
  EXPECT_THROW(partial_cross_entropy(logits, PartialLabels{4, 5, 3, {}}), ShapeError);
}

TEST(FullLossTest, LimitsAndUniform) {
  LabelImage l{2, 2, 4, {0, 1, 2, 3}};
  EXPECT_NEAR(full_cross_entropy(Tensor({4, 2, 2}), l).value, std::log(4.0), 1e-15);
  Tensor sharp({4, 2, 2}, -40.0);
  for (std::size_t i = 0; i < 4; ++i) sharp.channel(static_cast<std::size_t>(l.classes[i]))[i] = 40.0;
  EXPECT_LT(full_cross_entropy(sharp, l).value, 1e-6);
  EXPECT_THROW(full_cross_entropy(Tensor({4, 2, 3}), l), ShapeError);
}
