#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

#include "seisseg/error.hpp"
#include "seisseg/image.hpp"
#include "seisseg/labels.hpp"
#include "seisseg/loss.hpp"
#include "seisseg/unet.hpp"

namespace seisseg {

struct EpochSummary {
  std::size_t epoch = 0;
  double lr = 0.0;
  double mean_loss = 0.0;
};

struct TrainConfig {
  std::size_t epochs = 120;
  double base_lr = 1.0;
  double decay_factor = 10.0;
  std::size_t decay_every = 30;
  std::uint64_t seed = 0;
  /// Visit images in a seeded random order each epoch (otherwise 0..n-1).
  bool shuffle = true;
  /// Draw each iteration's image independently instead of a permutation.
  bool with_replacement = false;
  /// Save a checkpoint every this many epochs into checkpoint_dir (0: never).
  std::size_t checkpoint_every = 0;
  std::filesystem::path checkpoint_dir;
  Reduction reduction = Reduction::mean;
  std::function<void(const EpochSummary&)> on_epoch;

  void validate() const;
};

/// base_lr / decay_factor^floor(epoch / decay_every).
double lr_schedule(const TrainConfig& cfg, std::size_t epoch);

struct IterationRecord {
  std::size_t epoch = 0;
  std::size_t iteration = 0;
  std::size_t image_id = 0;
  double lr = 0.0;
  double loss = 0.0;

  friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

struct TrainHistory {
  std::vector<IterationRecord> iterations;
  std::vector<double> epoch_mean_loss;

  friend bool operator==(const TrainHistory&, const TrainHistory&) = default;
};

struct TrainingExample {
  SeismicImage image;
  PartialLabels labels;
};

struct TrainResult {
  NetworkParams params;
  TrainHistory history;
};

/// Raised when the loss, a gradient or an updated parameter stops being
/// finite. Carries the parameters from before the failing update.
class TrainingDiverged : public Error {
 public:
  TrainingDiverged(std::size_t iteration, NetworkParams last_finite);
  std::size_t iteration() const noexcept { return iteration_; }
  const NetworkParams& last_finite() const noexcept { return last_finite_; }

 private:
  std::size_t iteration_;
  NetworkParams last_finite_;
};

struct LossAndGradient {
  LossResult loss;
  /// Gradients of every parameter block, in build order.
  std::vector<Tensor> grads;
};

/// Full forward pass on the whole image, partial loss on the labeled pixels
/// and backward pass to every parameter.
LossAndGradient loss_and_gradient(const NetworkParams& params, const TrainingExample& example,
                                  Reduction reduction = Reduction::mean);

/// params <- params - lr * grads.
void sgd_step(NetworkParams& params, std::span<const Tensor> grads, double lr);

/// Image indices visited during one epoch.
std::vector<std::size_t> epoch_order(const TrainConfig& cfg, std::size_t n_examples,
                                     std::mt19937_64& rng);

/// Plain SGD, one whole image per iteration, from build_network(arch).
TrainResult train(std::span<const TrainingExample> dataset, const TrainConfig& cfg,
                  const ArchConfig& arch);

/// History CSV with header epoch,iter,image_id,lr,loss.
void write_history_csv(std::ostream& out, const TrainHistory& history);
TrainHistory read_history_csv(std::istream& in, const std::string& source);

}  // namespace seisseg
