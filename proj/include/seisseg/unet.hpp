#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "seisseg/image.hpp"
#include "seisseg/labels.hpp"
#include "seisseg/tape.hpp"
#include "seisseg/tensor.hpp"

namespace seisseg {

/// Architecture of the symmetric encoder-decoder.
///
/// Level 0 runs at full resolution, every deeper level halves both spatial
/// dimensions. The encoder applies `encoder_convs[l]` 3x3 conv blocks at
/// level l (shallowest first). The decoder walks back up: `decoder_convs[j]`
/// blocks run at level L-1-j, and every level above the deepest starts with
/// nearest-neighbour upsampling and concatenation of the encoder output at
/// that level. A conv block is conv3x3 -> channel_norm -> relu. A final 1x1
/// classifier maps widths[0] channels to n_class logits.
struct ArchConfig {
  std::size_t n_class = 6;
  std::vector<std::size_t> widths{6, 12, 24, 32};
  std::vector<std::size_t> encoder_convs{5, 5, 4, 4};
  std::vector<std::size_t> decoder_convs{4, 4, 5, 5};
  double norm_epsilon = 1e-5;
  bool zero_classifier = true;
  bool standardize_input = true;
  std::uint64_t seed = 0;

  std::size_t levels() const noexcept { return widths.size(); }
  /// Input height and width must be multiples of this.
  std::size_t divisor() const noexcept { return std::size_t{1} << (levels() - 1); }
  std::size_t weighted_layers() const;

  /// Throws ConfigError when the layout is inconsistent, a hidden width falls
  /// outside [6, 32], widths shrink with depth, or the layer count is not 37.
  void validate() const;

  friend bool operator==(const ArchConfig&, const ArchConfig&) = default;
};

inline constexpr std::size_t kRequiredWeightedLayers = 37;
inline constexpr std::size_t kMinHiddenWidth = 6;
inline constexpr std::size_t kMaxHiddenWidth = 32;

struct LayerSpec {
  enum class Kind { conv_block, classifier };
  Kind kind;
  std::size_t level;
  std::size_t in_channels;
  std::size_t out_channels;
  std::size_t kernel;
};

/// Weighted layers in build order.
std::vector<LayerSpec> layer_plan(const ArchConfig& cfg);

/// All trainable tensors in build order. Each conv block contributes
/// kernels (c_out, c_in, 3, 3), bias, norm scale and norm shift; the
/// classifier contributes kernels (n_class, widths[0], 1, 1) and bias.
struct NetworkParams {
  ArchConfig config;
  std::vector<Tensor> blocks;

  std::size_t parameter_count() const;
  friend bool operator==(const NetworkParams&, const NetworkParams&) = default;
};

struct ParameterCensus {
  std::size_t weighted_layers = 0;
  std::size_t conv3x3_layers = 0;
  std::size_t conv1x1_layers = 0;
  std::size_t fully_connected_layers = 0;
  std::size_t min_hidden_width = 0;
  std::size_t max_hidden_width = 0;
  std::size_t parameter_count = 0;
};

ParameterCensus census(const NetworkParams& params);

/// Deterministic initialization from cfg.seed: kernels ~ N(0, 1/fan_in),
/// zero biases, unit norm scales, zero shifts, and (by default) an all-zero
/// classifier so the initial logits vanish.
NetworkParams build_network(const ArchConfig& cfg);
NetworkParams build_network(ArchConfig cfg, std::uint64_t seed);

/// Zero-filled parameters with the shapes of `cfg`.
NetworkParams empty_network(const ArchConfig& cfg);

/// Records the network on `tape`. Parameters are registered in build order.
struct NetworkGraph {
  NodeId logits;
  std::vector<NodeId> params;
};
NetworkGraph record_forward(Tape& tape, const NetworkParams& params, const SeismicImage& image);

/// Logits (n_class, n_z, n_x). Throws ShapeError when n_z or n_x is not a
/// multiple of cfg.divisor().
Tensor forward(const NetworkParams& params, const SeismicImage& image);

/// Per-pixel argmax; ties go to the lowest class id.
LabelImage argmax_classes(const Tensor& logits);
LabelImage predict(const NetworkParams& params, const SeismicImage& image);

// Checkpoint: "SEGNET1" line, key=value architecture lines closed by "end",
// then every block as little-endian doubles in build order.
void write_checkpoint(std::ostream& out, const NetworkParams& params);
NetworkParams read_checkpoint(std::istream& in, const std::string& source);
void save_checkpoint(const NetworkParams& params, const std::filesystem::path& path);
NetworkParams load_checkpoint(const std::filesystem::path& path);

}  // namespace seisseg
