#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "seisseg/error.hpp"
#include "seisseg/unet.hpp"

using namespace seisseg;

namespace {

SeismicImage random_image(std::uint64_t seed, std::size_t n_z, std::size_t n_x) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  SeismicImage img(n_z, n_x);
  for (double& v : img.values) v = n(rng);
  return img;
}

std::string serialize(const NetworkParams& p) {
  std::ostringstream out;
  write_checkpoint(out, p);
  return out.str();
}

}  // namespace

TEST(ArchTest, DefaultCensus) {
  auto c = census(build_network(ArchConfig{}));
  EXPECT_EQ(c.weighted_layers, 37u);
  EXPECT_EQ(c.conv3x3_layers, 36u);
  EXPECT_EQ(c.conv1x1_layers, 1u);
  EXPECT_EQ(c.fully_connected_layers, 0u);
  EXPECT_EQ(c.min_hidden_width, 6u);
  EXPECT_EQ(c.max_hidden_width, 32u);
  EXPECT_EQ(c.parameter_count, 137664u);
}

TEST(ArchTest, LayerPlanIsConsistent) {
  ArchConfig cfg;
  auto plan = layer_plan(cfg);
  ASSERT_EQ(plan.size(), 37u);
  EXPECT_EQ(plan.front().in_channels, 1u);
  EXPECT_EQ(plan.back().kind, LayerSpec::Kind::classifier);
  EXPECT_EQ(plan.back().kernel, 1u);
  EXPECT_EQ(plan.back().out_channels, cfg.n_class);
  for (std::size_t i = 0; i + 1 < plan.size(); ++i) {
    EXPECT_EQ(plan[i].kernel, 3u);
    EXPECT_GE(plan[i].out_channels, kMinHiddenWidth);
    EXPECT_LE(plan[i].out_channels, kMaxHiddenWidth);
  }
}

TEST(ArchTest, ParameterCountMatchesShapes) {
  ArchConfig cfg;
  std::size_t expected = 0;
  for (const auto& l : layer_plan(cfg)) {
    expected += l.out_channels * l.in_channels * l.kernel * l.kernel + l.out_channels;
    if (l.kind == LayerSpec::Kind::conv_block) expected += 2 * l.out_channels;
  }
  EXPECT_EQ(build_network(cfg).parameter_count(), expected);
}

TEST(ArchTest, RejectsBadConfigs) {
  ArchConfig wide;
  wide.widths = {6, 12, 24, 40};
  EXPECT_THROW(wide.validate(), ConfigError);
  EXPECT_THROW(build_network(wide), ConfigError);

  ArchConfig narrow;
  narrow.widths = {4, 12, 24, 32};
  EXPECT_THROW(narrow.validate(), ConfigError);

  ArchConfig shrinking;
  shrinking.widths = {12, 6, 24, 32};
  EXPECT_THROW(shrinking.validate(), ConfigError);

  ArchConfig short_net;
  short_net.encoder_convs = {5, 5, 4, 3};
  EXPECT_THROW(short_net.validate(), ConfigError);

  ArchConfig mismatched;
  mismatched.decoder_convs = {4, 4, 5};
  EXPECT_THROW(mismatched.validate(), ConfigError);

  ArchConfig other_layout;
  other_layout.encoder_convs = {4, 5, 5, 4};
  other_layout.decoder_convs = {5, 4, 4, 5};
  EXPECT_NO_THROW(other_layout.validate());
}

TEST(InitTest, SameSeedIsBitwiseIdentical) {
  ArchConfig cfg;
  cfg.seed = 42;
  EXPECT_EQ(serialize(build_network(cfg)), serialize(build_network(cfg)));
  EXPECT_EQ(build_network(cfg), build_network(ArchConfig{}, 42));
  EXPECT_NE(build_network(cfg), build_network(ArchConfig{}, 43));
}

TEST(InitTest, KernelScaleAndZeroClassifier) {
  auto p = build_network(ArchConfig{}, 3);
  auto plan = layer_plan(p.config);
  // a wide kernel block in the decoder, fan_in = c_in * 9
  for (std::size_t i = 0, b = 0; i < plan.size(); ++i) {
    const Tensor& k = p.blocks[b];
    if (plan[i].kind == LayerSpec::Kind::classifier) {
      for (double v : k.values()) EXPECT_EQ(v, 0.0);
      for (double v : p.blocks[b + 1].values()) EXPECT_EQ(v, 0.0);
      break;
    }
    if (k.size() > 4000) {
      double s2 = 0.0;
      for (double v : k.values()) s2 += v * v;
      const double fan_in = static_cast<double>(plan[i].in_channels * 9);
      EXPECT_NEAR(s2 / static_cast<double>(k.size()), 1.0 / fan_in, 0.1 / fan_in);
    }
    for (double v : p.blocks[b + 1].values()) EXPECT_EQ(v, 0.0);  // bias
    for (double v : p.blocks[b + 2].values()) EXPECT_EQ(v, 1.0);  // scale
    for (double v : p.blocks[b + 3].values()) EXPECT_EQ(v, 0.0);  // shift
    b += 4;
  }
}

TEST(ForwardTest, SameSizeLogits) {
  auto p = build_network(ArchConfig{}, 1);
  EXPECT_EQ(forward(p, random_image(1, 128, 256)).shape(), (Shape{6, 128, 256}));
  EXPECT_EQ(forward(p, random_image(2, 192, 320)).shape(), (Shape{6, 192, 320}));
  EXPECT_EQ(forward(p, random_image(3, 8, 16)).shape(), (Shape{6, 8, 16}));
}

TEST(ForwardTest, ZeroClassifierGivesZeroLogits) {
  auto p = build_network(ArchConfig{}, 1);
  for (double v : forward(p, SeismicImage(16, 16)).values()) EXPECT_EQ(v, 0.0);
  for (double v : forward(p, random_image(4, 16, 24)).values()) EXPECT_EQ(v, 0.0);
}

TEST(ForwardTest, IndivisibleSizeNamesDivisor) {
  auto p = build_network(ArchConfig{}, 1);
  try {
    forward(p, SeismicImage(20, 16));
    FAIL();
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("8"), std::string::npos) << e.what();
  }
}

TEST(ForwardTest, OutputDependsOnWholeImage) {
  ArchConfig cfg;
  cfg.zero_classifier = false;
  auto p = build_network(cfg, 5);
  auto img = random_image(5, 32, 32);
  auto base = forward(p, img);
  img.at(31, 31) += 5.0;
  auto moved = forward(p, img);
  // receptive field spans the image: the opposite corner changes too
  EXPECT_NE(base.at(0, 0, 0), moved.at(0, 0, 0));
}

TEST(ForwardTest, TapeMatchesDirectForward) {
  ArchConfig cfg;
  cfg.zero_classifier = false;
  auto p = build_network(cfg, 6);
  auto img = random_image(6, 16, 24);
  Tape tape;
  auto g = record_forward(tape, p, img);
  EXPECT_EQ(g.params.size(), p.blocks.size());
  EXPECT_EQ(tape.value(g.logits), forward(p, img));
  EXPECT_TRUE(tape.value(g.logits).all_finite());
}

TEST(PredictTest, ArgmaxAndTies) {
  Tensor logits({3, 1, 3}, std::vector<double>{5, 0, 0, 1, 2, 0, 0, 9, 0});
  auto l = argmax_classes(logits);
  EXPECT_EQ(l.classes, (std::vector<ClassId>{0, 2, 0}));
  EXPECT_EQ(argmax_classes(Tensor({6, 2, 2})).classes, std::vector<ClassId>(4, 0));
}

TEST(PredictTest, InvariantToAddingConstantMap) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    auto logits = oracle::random_tensor(rng, {6, 5, 7});
    auto shift = oracle::random_tensor(rng, {1, 5, 7}, 100.0);
    Tensor shifted = logits;
    for (std::size_t c = 0; c < 6; ++c) {
      for (std::size_t i = 0; i < 35; ++i) shifted.channel(c)[i] += shift[i];
    }
    EXPECT_EQ(argmax_classes(logits), argmax_classes(shifted));
  }
}

TEST(CheckpointTest, RoundTripIsBitwise) {
  ArchConfig cfg;
  cfg.zero_classifier = false;
  cfg.norm_epsilon = 1e-3;
  auto p = build_network(cfg, 9);
  std::stringstream ss;
  write_checkpoint(ss, p);
  auto q = read_checkpoint(ss, "mem");
  EXPECT_EQ(p, q);
  EXPECT_EQ(serialize(p), serialize(q));
}

TEST(CheckpointTest, CorruptFilesAreFormatErrors) {
  auto text = serialize(build_network(ArchConfig{}, 1));
  std::stringstream truncated(text.substr(0, text.size() - 13));
  try {
    read_checkpoint(truncated, "net.segnet");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("net.segnet"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("offset"), std::string::npos) << e.what();
  }
  std::stringstream bad_magic("SEGNET9" + text.substr(7));
  EXPECT_THROW(read_checkpoint(bad_magic, "x"), FormatError);

  auto pos = text.find("widths=");
  std::string bad_shape = text;
  bad_shape.replace(pos, 7 + 10, "widths=6,12,24,30");
  std::stringstream shape(bad_shape);
  EXPECT_ANY_THROW(read_checkpoint(shape, "x"));

  std::stringstream trailing(text + "junk");
  EXPECT_THROW(read_checkpoint(trailing, "x"), FormatError);
}

TEST(CheckpointTest, FileRoundTrip) {
  auto p = build_network(ArchConfig{}, 11);
  const auto path = std::filesystem::temp_directory_path() / "seisseg_unet_test.segnet";
  save_checkpoint(p, path);
  EXPECT_EQ(load_checkpoint(path), p);
  std::filesystem::remove(path);
  EXPECT_THROW(load_checkpoint(path), FormatError);
}
