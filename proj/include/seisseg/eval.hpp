#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "seisseg/image.hpp"
#include "seisseg/labels.hpp"
#include "seisseg/synth.hpp"
#include "seisseg/trainer.hpp"
#include "seisseg/unet.hpp"

namespace seisseg {

/// counts[t * n_class + p]: pixels of true class t predicted as p.
struct ConfusionMatrix {
  std::size_t n_class = 0;
  std::vector<std::uint64_t> counts;

  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::size_t classes) : n_class(classes), counts(classes * classes, 0) {}

  std::uint64_t at(std::size_t truth, std::size_t pred) const { return counts[truth * n_class + pred]; }
  std::uint64_t total() const noexcept;
  std::uint64_t trace() const noexcept;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

ConfusionMatrix confusion(const LabelImage& pred, const LabelImage& truth);
/// Adds the pixels of one more image into `cm`.
void accumulate(ConfusionMatrix& cm, const LabelImage& pred, const LabelImage& truth);

double pixel_accuracy(const ConfusionMatrix& cm);
/// Per-class IoU; nullopt for classes that neither occur nor are predicted.
std::vector<std::optional<double>> class_iou(const ConfusionMatrix& cm);
/// Mean over the classes whose IoU is defined.
double mean_iou(const ConfusionMatrix& cm);
/// Mean recall over the classes present in the truth.
double mean_class_accuracy(const ConfusionMatrix& cm);

/// 1 where pred and truth disagree, row-major.
struct BinaryImage {
  std::size_t n_z = 0;
  std::size_t n_x = 0;
  std::vector<std::uint8_t> values;

  std::size_t count() const noexcept;
};
BinaryImage error_map(const LabelImage& pred, const LabelImage& truth);

struct EvalResult {
  ConfusionMatrix cm;
  double accuracy = 0.0;
  std::vector<std::optional<double>> iou;
  double mean_iou = 0.0;
  double mean_class_accuracy = 0.0;
};

EvalResult summarize(const ConfusionMatrix& cm);
/// Predicts every image and pools the confusion over all of them.
EvalResult evaluate(const NetworkParams& params, std::span<const SeismicImage> images,
                    std::span<const LabelImage> truths);

struct SweepCell {
  Strategy strategy = Strategy::columns;
  std::size_t budget = 0;
  std::uint64_t seed = 0;
};

struct CellResult {
  SweepCell cell;
  EvalResult eval;
  TrainResult train;
};

/// Seed of the label sampler for training image `image_index` in a cell.
std::uint64_t label_seed(std::uint64_t cell_seed, std::size_t image_index);

/// Training examples for a cell: partial labels sampled on every training
/// image of the split.
std::vector<TrainingExample> cell_examples(const Dataset& ds, const Split& split,
                                           const SweepCell& cell);

/// Labels the training images, trains from a fresh initialization seeded by
/// cell.seed, and evaluates on the test images against rasterized truth.
CellResult run_cell(const Dataset& ds, const Split& split, const SweepCell& cell,
                    TrainConfig train_cfg, ArchConfig arch);

struct AggregateRow {
  Strategy strategy = Strategy::columns;
  std::size_t budget = 0;
  std::size_t n_seeds = 0;
  double accuracy_mean = 0.0;
  double accuracy_std = 0.0;
  double mean_iou_mean = 0.0;
  double mean_iou_std = 0.0;
  double class_accuracy_mean = 0.0;
  double class_accuracy_std = 0.0;
};

struct ExperimentReport {
  std::size_t n_class = 0;
  std::vector<CellResult> cells;
  std::vector<AggregateRow> aggregates;

  /// Aggregate for one (strategy, budget); throws ContractError when absent.
  const AggregateRow& aggregate(Strategy strategy, std::size_t budget) const;
};

struct SweepSpec {
  std::vector<Strategy> strategies;
  std::vector<std::size_t> budgets;
  std::vector<std::uint64_t> seeds;
  /// Cells trained concurrently. Results do not depend on it.
  std::size_t jobs = 1;
  /// Called after each cell finishes, possibly from a worker thread.
  std::function<void(const CellResult&)> on_cell;
};

ExperimentReport budget_sweep(const Dataset& ds, const Split& split, const SweepSpec& spec,
                              const TrainConfig& train_cfg, const ArchConfig& arch);

/// Sample mean and (n-1) standard deviation; std is 0 for a single value.
std::pair<double, double> mean_std(std::span<const double> values);

/// strategy,budget,seed,test_accuracy,mean_iou,mean_class_accuracy,iou_0,...
/// Undefined IoUs are written as NA.
void write_report_csv(std::ostream& out, const ExperimentReport& report);
/// strategy,budget,n_seeds,accuracy_mean,accuracy_std,...
void write_summary_csv(std::ostream& out, const ExperimentReport& report);

// Binary PGM (P5) images.
struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::uint32_t maxval = 255;
  std::vector<std::uint16_t> values;
};

void write_pgm(std::ostream& out, const GrayImage& image);
GrayImage read_pgm(std::istream& in, const std::string& source);
void save_pgm(const GrayImage& image, const std::filesystem::path& path);

/// Errors white (255) on black.
GrayImage error_map_image(const BinaryImage& errors);
/// Class ids as gray levels, maxval n_class - 1 (at least 1).
GrayImage class_map_image(const LabelImage& classes);
/// 16-bit, amplitudes scaled linearly from [min, max] to [0, 65535].
GrayImage seismic_image(const SeismicImage& image);

}  // namespace seisseg
