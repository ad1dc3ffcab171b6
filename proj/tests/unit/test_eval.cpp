#include <gtest/gtest.h>

#include <cmath>
#include <mutex>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "seisseg/error.hpp"
#include "seisseg/eval.hpp"

using namespace seisseg;

namespace {

LabelImage labels(std::size_t n_z, std::size_t n_x, std::size_t n_class, std::vector<ClassId> c) {
  return LabelImage{n_z, n_x, n_class, std::move(c)};
}

Dataset tiny_dataset() {
  GeoModelConfig g;
  g.n_z = 16;
  g.n_x = 24;
  g.n_horizons = 2;
  return gen_dataset(g, 4, 3);
}

TrainConfig short_training() {
  TrainConfig t;
  t.epochs = 2;
  t.decay_every = 1;
  return t;
}

ArchConfig three_classes() {
  ArchConfig a;
  a.n_class = 3;
  return a;
}

}  // namespace

TEST(ConfusionTest, IdenticalMapsAreDiagonal) {
  auto l = labels(2, 3, 4, {0, 1, 2, 3, 3, 1});
  auto cm = confusion(l, l);
  EXPECT_EQ(cm.total(), 6u);
  EXPECT_EQ(cm.trace(), 6u);
  EXPECT_EQ(cm.at(3, 3), 2u);
  EXPECT_EQ(cm.at(1, 1), 2u);
  EXPECT_EQ(pixel_accuracy(cm), 1.0);
  EXPECT_EQ(mean_iou(cm), 1.0);
}

TEST(ConfusionTest, ConstantPredictionFillsOneColumn) {
  auto truth = labels(2, 3, 3, {0, 1, 2, 2, 1, 0});
  auto pred = labels(2, 3, 3, std::vector<ClassId>(6, 1));
  auto cm = confusion(pred, truth);
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t p = 0; p < 3; ++p) EXPECT_EQ(cm.at(t, p), p == 1 ? 2u : 0u);
  }
  EXPECT_DOUBLE_EQ(pixel_accuracy(cm), 1.0 / 3.0);
}

TEST(ConfusionTest, MatchesTallyOracle) {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> c(0, 4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> p(64), t(64);
    for (auto& v : p) v = c(rng);
    for (auto& v : t) v = c(rng);
    auto cm = confusion(labels(8, 8, 5, {p.begin(), p.end()}), labels(8, 8, 5, {t.begin(), t.end()}));
    EXPECT_EQ(cm.counts, oracle::tally(p, t, 5));
  }
}

TEST(ConfusionTest, AccumulatePoolsImages) {
  auto a = labels(1, 2, 2, {0, 1});
  auto b = labels(1, 2, 2, {1, 1});
  auto cm = confusion(a, b);
  accumulate(cm, b, b);
  EXPECT_EQ(cm.total(), 4u);
  EXPECT_EQ(cm.trace(), 3u);
  EXPECT_THROW(confusion(a, labels(2, 1, 2, {0, 1})), ShapeError);
  EXPECT_THROW(confusion(a, labels(1, 2, 2, {0, 2})), ContractError);
}

TEST(MetricsTest, HalfRightTwoByTwo) {
  ConfusionMatrix cm(2);
  cm.counts = {1, 1, 1, 1};
  EXPECT_DOUBLE_EQ(pixel_accuracy(cm), 0.5);
  auto iou = class_iou(cm);
  ASSERT_TRUE(iou[0] && iou[1]);
  EXPECT_DOUBLE_EQ(*iou[0], 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(*iou[1], 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(mean_iou(cm), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(mean_class_accuracy(cm), 0.5);
}

TEST(MetricsTest, AbsentClassIsUndefined) {
  ConfusionMatrix cm(3);
  cm.counts = {4, 0, 0, 1, 5, 0, 0, 0, 0};
  auto iou = class_iou(cm);
  EXPECT_FALSE(iou[2].has_value());
  EXPECT_DOUBLE_EQ(*iou[0], 0.8);
  EXPECT_DOUBLE_EQ(*iou[1], 5.0 / 6.0);
  EXPECT_DOUBLE_EQ(mean_iou(cm), (0.8 + 5.0 / 6.0) / 2.0);
  EXPECT_DOUBLE_EQ(mean_class_accuracy(cm), (1.0 + 5.0 / 6.0) / 2.0);
  EXPECT_THROW(pixel_accuracy(ConfusionMatrix(3)), ContractError);
}

TEST(ErrorMapTest, CountsOffDiagonal) {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<ClassId> c(0, 3);
  for (int trial = 0; trial < 20; ++trial) {
    auto p = labels(6, 7, 4, std::vector<ClassId>(42));
    auto t = p;
    for (auto& v : p.classes) v = c(rng);
    for (auto& v : t.classes) v = c(rng);
    auto err = error_map(p, t);
    auto cm = confusion(p, t);
    EXPECT_EQ(err.count(), cm.total() - cm.trace());
    for (std::size_t i = 0; i < 42; ++i) EXPECT_EQ(err.values[i], p.classes[i] != t.classes[i] ? 1 : 0);
    EXPECT_EQ(error_map(t, t).count(), 0u);
  }
}

TEST(MeanStdTest, SampleStatistics) {
  std::vector<double> v{2, 4, 4, 4, 5, 5, 7, 9};
  auto [m, s] = mean_std(v);
  EXPECT_DOUBLE_EQ(m, 5.0);
  EXPECT_NEAR(s, std::sqrt(32.0 / 7.0), 1e-15);
  std::vector<double> one{3.5};
  EXPECT_EQ(mean_std(one), std::make_pair(3.5, 0.0));
}

TEST(PgmTest, RoundTrip8And16Bit) {
  GrayImage a{3, 2, 255, {0, 10, 255, 7, 8, 9}};
  GrayImage b{2, 2, 65535, {0, 300, 65535, 1}};
  for (const auto& img : {a, b}) {
    std::stringstream ss;
    write_pgm(ss, img);
    EXPECT_EQ(ss.str().substr(0, 2), "P5");
    auto back = read_pgm(ss, "mem.pgm");
    EXPECT_EQ(back.width, img.width);
    EXPECT_EQ(back.height, img.height);
    EXPECT_EQ(back.maxval, img.maxval);
    EXPECT_EQ(back.values, img.values);
  }
  std::stringstream bad("P2\n1 1\n255\n0");
  EXPECT_THROW(read_pgm(bad, "x.pgm"), FormatError);
  std::stringstream full;
  write_pgm(full, a);
  std::stringstream cut(full.str().substr(0, full.str().size() - 2));
  try {
    read_pgm(cut, "cut.pgm");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("cut.pgm"), std::string::npos);
  }
}

TEST(PgmTest, DisplayImages) {
  auto cls = class_map_image(labels(1, 3, 6, {0, 3, 5}));
  EXPECT_EQ(cls.maxval, 5u);
  EXPECT_EQ(cls.values, (std::vector<std::uint16_t>{0, 3, 5}));
  auto err = error_map_image(error_map(labels(1, 2, 2, {0, 1}), labels(1, 2, 2, {1, 1})));
  EXPECT_EQ(err.values, (std::vector<std::uint16_t>{255, 0}));
  SeismicImage s(1, 3);
  s.values = {-2.0, 0.0, 2.0};
  auto g = seismic_image(s);
  EXPECT_EQ(g.maxval, 65535u);
  EXPECT_EQ(g.values.front(), 0);
  EXPECT_EQ(g.values.back(), 65535);
}

TEST(SweepTest, LabelSeedsDifferPerImage) {
  EXPECT_NE(label_seed(1, 0), label_seed(1, 1));
  EXPECT_NE(label_seed(1, 0), label_seed(2, 0));
  EXPECT_EQ(label_seed(7, 3), label_seed(7, 3));
}

TEST(SweepTest, CellExamplesUseTrainImagesOnly) {
  auto ds = tiny_dataset();
  auto split = split_by_index(4, 3);
  SweepCell cell{Strategy::columns, 4, 9};
  auto ex = cell_examples(ds, split, cell);
  ASSERT_EQ(ex.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(ex[i].image, ds.images[i]);
    EXPECT_EQ(ex[i].labels, sample_labels(Strategy::columns, ds.horizons[i], AnnotationBudget(4), label_seed(9, i)));
    EXPECT_EQ(ex[i].labels.entries.size(), 2u * 16u);
  }
}

TEST(SweepTest, SingleCellMatchesRunCell) {
  auto ds = tiny_dataset();
  auto split = split_by_index(4, 3);
  SweepSpec spec{{Strategy::scattered}, {6}, {2}, 1, {}};
  auto report = budget_sweep(ds, split, spec, short_training(), three_classes());
  ASSERT_EQ(report.cells.size(), 1u);
  auto manual = run_cell(ds, split, {Strategy::scattered, 6, 2}, short_training(), three_classes());
  EXPECT_EQ(report.cells[0].train.params, manual.train.params);
  EXPECT_EQ(report.cells[0].eval.cm, manual.eval.cm);

  // the same model evaluated by hand on the held-out image
  std::vector<SeismicImage> imgs{ds.images[3]};
  std::vector<LabelImage> truth{rasterize(ds.horizons[3])};
  EXPECT_EQ(evaluate(manual.train.params, imgs, truth).cm, manual.eval.cm);

  const auto& agg = report.aggregate(Strategy::scattered, 6);
  EXPECT_EQ(agg.n_seeds, 1u);
  EXPECT_EQ(agg.accuracy_mean, manual.eval.accuracy);
  EXPECT_EQ(agg.accuracy_std, 0.0);
  EXPECT_THROW(report.aggregate(Strategy::columns, 6), ContractError);
}

TEST(SweepTest, ResultsIndependentOfJobs) {
  auto ds = tiny_dataset();
  auto split = split_by_index(4, 3);
  SweepSpec spec{{Strategy::scattered, Strategy::columns}, {4}, {1, 2}, 1, {}};
  auto serial = budget_sweep(ds, split, spec, short_training(), three_classes());
  spec.jobs = 3;
  std::size_t called = 0;
  std::mutex m;
  spec.on_cell = [&](const CellResult&) {
    std::lock_guard lock(m);
    ++called;
  };
  auto parallel = budget_sweep(ds, split, spec, short_training(), three_classes());
  EXPECT_EQ(called, 4u);
  ASSERT_EQ(serial.cells.size(), 4u);
  std::ostringstream a, b, sa, sb;
  write_report_csv(a, serial);
  write_report_csv(b, parallel);
  write_summary_csv(sa, serial);
  write_summary_csv(sb, parallel);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(sa.str(), sb.str());
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(serial.cells[i].train.params, parallel.cells[i].train.params);
  EXPECT_EQ(a.str().substr(0, 50), "strategy,budget,seed,test_accuracy,mean_iou,mean_c");
  EXPECT_EQ(serial.aggregates.size(), 2u);
}
