#include "seisseg/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

#include "seisseg/io.hpp"

namespace seisseg {
namespace {

bool all_finite(std::span<const Tensor> tensors) {
  return std::all_of(tensors.begin(), tensors.end(), [](const Tensor& t) { return t.all_finite(); });
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (!(base_lr > 0.0)) throw ConfigError("base learning rate must be positive");
  if (!(decay_factor > 0.0)) throw ConfigError("decay factor must be positive");
  if (decay_every < 1) throw ConfigError("decay interval must be at least 1 epoch");
  if (checkpoint_every > 0 && checkpoint_dir.empty()) {
    throw ConfigError("checkpointing requested without a checkpoint directory");
  }
}

double lr_schedule(const TrainConfig& cfg, std::size_t epoch) {
  if (epoch >= cfg.epochs) {
    throw ContractError("lr_schedule: epoch " + std::to_string(epoch) + " outside [0, " +
                        std::to_string(cfg.epochs) + ")");
  }
  const auto drops = static_cast<double>(epoch / cfg.decay_every);
  return cfg.base_lr / std::pow(cfg.decay_factor, drops);
}

TrainingDiverged::TrainingDiverged(std::size_t iteration, NetworkParams last_finite)
    : Error("diverged", "training diverged at iteration " + std::to_string(iteration) +
                            " (non-finite loss, gradient or parameter)"),
      iteration_(iteration),
      last_finite_(std::move(last_finite)) {}

LossAndGradient loss_and_gradient(const NetworkParams& params, const TrainingExample& example,
                                  Reduction reduction) {
  Tape tape;
  const auto graph = record_forward(tape, params, example.image);
  LossAndGradient out;
  out.loss = partial_cross_entropy(tape.value(graph.logits), example.labels, reduction);
  const NodeId root = tape.external_loss(graph.logits, out.loss.value, out.loss.gradient);
  out.grads = tape.backward(root);
  return out;
}

void sgd_step(NetworkParams& params, std::span<const Tensor> grads, double lr) {
  if (grads.size() != params.blocks.size()) {
    throw ContractError("sgd_step: " + std::to_string(grads.size()) + " gradients for " +
                        std::to_string(params.blocks.size()) + " parameter blocks");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) axpy(-lr, grads[i], params.blocks[i]);
}

std::vector<std::size_t> epoch_order(const TrainConfig& cfg, std::size_t n_examples,
                                     std::mt19937_64& rng) {
  std::vector<std::size_t> order(n_examples);
  if (cfg.with_replacement) {
    std::uniform_int_distribution<std::size_t> pick(0, n_examples - 1);
    for (auto& i : order) i = pick(rng);
    return order;
  }
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (cfg.shuffle) std::shuffle(order.begin(), order.end(), rng);
  return order;
}

TrainResult train(std::span<const TrainingExample> dataset, const TrainConfig& cfg,
                  const ArchConfig& arch) {
  cfg.validate();
  if (dataset.empty()) throw ContractError("train: dataset is empty");
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& ex = dataset[i];
    if (ex.labels.n_z != ex.image.n_z || ex.labels.n_x != ex.image.n_x) {
      throw ContractError("train: labels of example " + std::to_string(i) +
                          " do not match its image size");
    }
    if (ex.labels.n_class > arch.n_class) {
      throw ContractError("train: example " + std::to_string(i) + " has " +
                          std::to_string(ex.labels.n_class) + " classes, network predicts " +
                          std::to_string(arch.n_class));
    }
    validate_partial_labels(ex.labels);
  }

  TrainResult result{build_network(arch), {}};
  auto& params = result.params;
  auto& history = result.history;
  history.iterations.reserve(cfg.epochs * dataset.size());
  std::mt19937_64 rng(cfg.seed);
  std::size_t iteration = 0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_schedule(cfg, epoch);
    double epoch_loss = 0.0;
    for (std::size_t image_id : epoch_order(cfg, dataset.size(), rng)) {
      auto step = loss_and_gradient(params, dataset[image_id], cfg.reduction);
      if (!std::isfinite(step.loss.value) || !all_finite(step.grads)) {
        throw TrainingDiverged(iteration, params);
      }
      NetworkParams before = params;
      sgd_step(params, step.grads, lr);
      if (!all_finite(params.blocks)) throw TrainingDiverged(iteration, std::move(before));

      history.iterations.push_back({epoch, iteration, image_id, lr, step.loss.value});
      epoch_loss += step.loss.value;
      ++iteration;
    }
    const double mean = epoch_loss / static_cast<double>(dataset.size());
    history.epoch_mean_loss.push_back(mean);
    if (cfg.on_epoch) cfg.on_epoch({epoch, lr, mean});
    if (cfg.checkpoint_every > 0 && (epoch + 1) % cfg.checkpoint_every == 0) {
      std::filesystem::create_directories(cfg.checkpoint_dir);
      char name[32];
      std::snprintf(name, sizeof name, "epoch_%04zu.segnet", epoch + 1);
      save_checkpoint(params, cfg.checkpoint_dir / name);
    }
  }
  return result;
}

void write_history_csv(std::ostream& out, const TrainHistory& history) {
  out << "epoch,iter,image_id,lr,loss\n";
  for (const auto& r : history.iterations) {
    out << r.epoch << ',' << r.iteration << ',' << r.image_id << ',' << io::format_double(r.lr)
        << ',' << io::format_double(r.loss) << '\n';
  }
}

TrainHistory read_history_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line) || io::trim(line) != "epoch,iter,image_id,lr,loss") {
    throw FormatError(source + ":1: expected header 'epoch,iter,image_id,lr,loss'");
  }
  TrainHistory h;
  std::size_t lineno = 1;
  std::vector<double> sums;
  std::vector<std::size_t> counts;
  while (std::getline(in, line)) {
    ++lineno;
    if (io::trim(line).empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    const auto f = io::split(line, ',');
    if (f.size() != 5) throw FormatError(where + ": expected 5 fields");
    IterationRecord r{io::parse_uint(f[0], where), io::parse_uint(f[1], where),
                      io::parse_uint(f[2], where), io::parse_double(f[3], where),
                      io::parse_double(f[4], where)};
    if (r.epoch >= sums.size()) {
      sums.resize(r.epoch + 1, 0.0);
      counts.resize(r.epoch + 1, 0);
    }
    sums[r.epoch] += r.loss;
    ++counts[r.epoch];
    h.iterations.push_back(r);
  }
  for (std::size_t e = 0; e < sums.size(); ++e) {
    h.epoch_mean_loss.push_back(counts[e] ? sums[e] / static_cast<double>(counts[e]) : 0.0);
  }
  return h;
}

}  // namespace seisseg
