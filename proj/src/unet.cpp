#include "seisseg/unet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>

#include "seisseg/error.hpp"
#include "seisseg/io.hpp"

namespace seisseg {
namespace {

constexpr std::string_view kCheckpointMagic = "SEGNET1";

std::vector<Shape> block_shapes(const ArchConfig& cfg) {
  std::vector<Shape> shapes;
  for (const auto& layer : layer_plan(cfg)) {
    shapes.push_back({layer.out_channels, layer.in_channels, layer.kernel, layer.kernel});
    shapes.push_back({layer.out_channels});
    if (layer.kind == LayerSpec::Kind::conv_block) {
      shapes.push_back({layer.out_channels});
      shapes.push_back({layer.out_channels});
    }
  }
  return shapes;
}

io::KeyValues config_to_kv(const ArchConfig& cfg) {
  return {
      {"n_class", std::to_string(cfg.n_class)},
      {"widths", io::join(cfg.widths)},
      {"encoder_convs", io::join(cfg.encoder_convs)},
      {"decoder_convs", io::join(cfg.decoder_convs)},
      {"norm_epsilon", io::format_double(cfg.norm_epsilon)},
      {"zero_classifier", cfg.zero_classifier ? "1" : "0"},
      {"standardize_input", cfg.standardize_input ? "1" : "0"},
      {"seed", std::to_string(cfg.seed)},
  };
}

const std::string& required(const io::KeyValues& kv, const std::string& key,
                            const std::string& source) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw FormatError(source + ": checkpoint header lacks '" + key + "'");
  return it->second;
}

}  // namespace

std::size_t ArchConfig::weighted_layers() const {
  return std::accumulate(encoder_convs.begin(), encoder_convs.end(), std::size_t{0}) +
         std::accumulate(decoder_convs.begin(), decoder_convs.end(), std::size_t{0}) + 1;
}

void ArchConfig::validate() const {
  if (levels() == 0) throw ConfigError("architecture needs at least one resolution level");
  if (encoder_convs.size() != levels() || decoder_convs.size() != levels()) {
    throw ConfigError("widths, encoder_convs and decoder_convs must all have " +
                      std::to_string(levels()) + " entries");
  }
  if (n_class == 0) throw ConfigError("n_class must be positive");
  for (std::size_t l = 0; l < levels(); ++l) {
    if (widths[l] < kMinHiddenWidth || widths[l] > kMaxHiddenWidth) {
      throw ConfigError("hidden width " + std::to_string(widths[l]) + " at level " +
                        std::to_string(l) + " outside [" + std::to_string(kMinHiddenWidth) +
                        ", " + std::to_string(kMaxHiddenWidth) + "]");
    }
    if (l > 0 && widths[l] < widths[l - 1]) {
      throw ConfigError("widths must not shrink with depth (level " + std::to_string(l) + ")");
    }
    if (encoder_convs[l] == 0) {
      throw ConfigError("encoder level " + std::to_string(l) + " has no conv layers");
    }
    if (l > 0 && decoder_convs[l] == 0) {
      throw ConfigError("decoder stage " + std::to_string(l) +
                        " needs a conv layer after its skip concatenation");
    }
  }
  if (weighted_layers() != kRequiredWeightedLayers) {
    throw ConfigError("architecture has " + std::to_string(weighted_layers()) +
                      " weighted layers, expected " + std::to_string(kRequiredWeightedLayers));
  }
  if (!(norm_epsilon > 0.0)) throw ConfigError("norm_epsilon must be positive");
}

std::vector<LayerSpec> layer_plan(const ArchConfig& cfg) {
  std::vector<LayerSpec> plan;
  const auto levels = cfg.levels();
  std::size_t in = 1;
  for (std::size_t l = 0; l < levels; ++l) {
    for (std::size_t i = 0; i < cfg.encoder_convs[l]; ++i) {
      plan.push_back({LayerSpec::Kind::conv_block, l, in, cfg.widths[l], 3});
      in = cfg.widths[l];
    }
  }
  for (std::size_t j = 0; j < levels; ++j) {
    const auto l = levels - 1 - j;
    for (std::size_t i = 0; i < cfg.decoder_convs[j]; ++i) {
      const auto c_in = (i == 0 && j > 0) ? in + cfg.widths[l] : in;
      plan.push_back({LayerSpec::Kind::conv_block, l, c_in, cfg.widths[l], 3});
      in = cfg.widths[l];
    }
  }
  plan.push_back({LayerSpec::Kind::classifier, 0, in, cfg.n_class, 1});
  return plan;
}

std::size_t NetworkParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& b : blocks) n += b.size();
  return n;
}

ParameterCensus census(const NetworkParams& params) {
  ParameterCensus c;
  const auto plan = layer_plan(params.config);
  c.min_hidden_width = kMaxHiddenWidth + 1;
  std::size_t b = 0;
  for (const auto& layer : plan) {
    const auto& kernels = params.blocks.at(b);
    ++c.weighted_layers;
    if (kernels.dim(2) == 3 && kernels.dim(3) == 3) ++c.conv3x3_layers;
    if (kernels.dim(2) == 1 && kernels.dim(3) == 1) ++c.conv1x1_layers;
    if (layer.kind == LayerSpec::Kind::conv_block) {
      c.min_hidden_width = std::min(c.min_hidden_width, kernels.dim(0));
      c.max_hidden_width = std::max(c.max_hidden_width, kernels.dim(0));
      b += 4;
    } else {
      b += 2;
    }
  }
  c.parameter_count = params.parameter_count();
  return c;
}

NetworkParams empty_network(const ArchConfig& cfg) {
  cfg.validate();
  NetworkParams p{cfg, {}};
  for (auto& shape : block_shapes(cfg)) p.blocks.emplace_back(std::move(shape));
  return p;
}

NetworkParams build_network(const ArchConfig& cfg) {
  NetworkParams p = empty_network(cfg);
  std::mt19937_64 rng(cfg.seed);
  std::size_t b = 0;
  for (const auto& layer : layer_plan(cfg)) {
    Tensor& kernels = p.blocks[b];
    const bool zero = layer.kind == LayerSpec::Kind::classifier && cfg.zero_classifier;
    if (!zero) {
      const double fan_in = static_cast<double>(layer.in_channels * layer.kernel * layer.kernel);
      std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(fan_in));
      for (double& v : kernels.values()) v = dist(rng);
    }
    if (layer.kind == LayerSpec::Kind::conv_block) {
      p.blocks[b + 2].fill(1.0);
      b += 4;
    } else {
      b += 2;
    }
  }
  return p;
}

NetworkParams build_network(ArchConfig cfg, std::uint64_t seed) {
  cfg.seed = seed;
  return build_network(cfg);
}

NetworkGraph record_forward(Tape& tape, const NetworkParams& params, const SeismicImage& image) {
  const auto& cfg = params.config;
  const auto div = cfg.divisor();
  if (image.n_z == 0 || image.n_x == 0 || image.n_z % div != 0 || image.n_x % div != 0) {
    throw ShapeError("network input " + std::to_string(image.n_z) + "x" +
                     std::to_string(image.n_x) + " must have both dimensions divisible by " +
                     std::to_string(div));
  }
  if (params.blocks.size() != block_shapes(cfg).size()) {
    throw ContractError("network parameters do not match their architecture");
  }

  NetworkGraph g;
  for (const auto& block : params.blocks) g.params.push_back(tape.parameter(block));

  const SeismicImage input = cfg.standardize_input ? standardize(image) : image;
  NodeId cur = tape.input(input.as_tensor());
  std::size_t next = 0;
  auto conv_block = [&](NodeId in) {
    const NodeId conv = tape.conv2d(in, g.params[next], g.params[next + 1]);
    const NodeId norm =
        tape.channel_norm(conv, g.params[next + 2], g.params[next + 3], cfg.norm_epsilon);
    next += 4;
    return tape.relu(norm);
  };

  const auto levels = cfg.levels();
  std::vector<NodeId> skips(levels);
  for (std::size_t l = 0; l < levels; ++l) {
    if (l > 0) cur = tape.downsample2(cur);
    for (std::size_t i = 0; i < cfg.encoder_convs[l]; ++i) cur = conv_block(cur);
    skips[l] = cur;
  }
  for (std::size_t j = 0; j < levels; ++j) {
    const auto l = levels - 1 - j;
    if (j > 0) cur = tape.concat_channels(tape.upsample2(cur), skips[l]);
    for (std::size_t i = 0; i < cfg.decoder_convs[j]; ++i) cur = conv_block(cur);
  }
  g.logits = tape.conv2d(cur, g.params[next], g.params[next + 1]);
  return g;
}

Tensor forward(const NetworkParams& params, const SeismicImage& image) {
  Tape tape;
  const auto g = record_forward(tape, params, image);
  return tape.value(g.logits);
}

LabelImage argmax_classes(const Tensor& logits) {
  const auto n_class = logits.channels();
  LabelImage out{logits.height(), logits.width(), n_class,
                 std::vector<ClassId>(logits.plane(), 0)};
  for (std::size_t i = 0; i < logits.plane(); ++i) {
    double best = logits[i];
    for (std::size_t c = 1; c < n_class; ++c) {
      const double v = logits[c * logits.plane() + i];
      if (v > best) {
        best = v;
        out.classes[i] = static_cast<ClassId>(c);
      }
    }
  }
  return out;
}

LabelImage predict(const NetworkParams& params, const SeismicImage& image) {
  return argmax_classes(forward(params, image));
}

void write_checkpoint(std::ostream& out, const NetworkParams& params) {
  out << kCheckpointMagic << '\n';
  auto kv = config_to_kv(params.config);
  kv["values"] = std::to_string(params.parameter_count());
  io::write_key_values(out, kv);
  out << "end\n";
  for (const auto& b : params.blocks) io::write_le_doubles(out, b.values());
}

NetworkParams read_checkpoint(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line) || line != kCheckpointMagic) {
    throw FormatError(source + ": bad magic at byte offset 0 (expected SEGNET1)");
  }
  io::KeyValues kv;
  bool closed = false;
  while (std::getline(in, line)) {
    if (line == "end") {
      closed = true;
      break;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError(source + ": malformed header line '" + line + "'");
    }
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  if (!closed) throw FormatError(source + ": truncated header (no 'end' line)");

  ArchConfig cfg;
  cfg.n_class = io::parse_uint(required(kv, "n_class", source), source);
  cfg.widths = io::parse_uint_list(required(kv, "widths", source), source);
  cfg.encoder_convs = io::parse_uint_list(required(kv, "encoder_convs", source), source);
  cfg.decoder_convs = io::parse_uint_list(required(kv, "decoder_convs", source), source);
  cfg.norm_epsilon = io::parse_double(required(kv, "norm_epsilon", source), source);
  cfg.zero_classifier = io::parse_uint(required(kv, "zero_classifier", source), source) != 0;
  cfg.standardize_input = io::parse_uint(required(kv, "standardize_input", source), source) != 0;
  cfg.seed = io::parse_uint(required(kv, "seed", source), source);

  NetworkParams params;
  try {
    params = empty_network(cfg);
  } catch (const ConfigError& e) {
    throw FormatError(source + ": " + e.what());
  }
  const auto declared = io::parse_uint(required(kv, "values", source), source);
  if (declared != params.parameter_count()) {
    throw FormatError(source + ": header declares " + std::to_string(declared) +
                      " values but the architecture has " +
                      std::to_string(params.parameter_count()));
  }
  for (auto& b : params.blocks) io::read_le_doubles(in, b.values(), source);
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError(source + ": trailing bytes after parameter data");
  }
  return params;
}

void save_checkpoint(const NetworkParams& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(path.string() + ": cannot open for writing");
  write_checkpoint(out, params);
  if (!out) throw FormatError(path.string() + ": write failed");
}

NetworkParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string() + ": cannot open file");
  return read_checkpoint(in, path.string());
}

}  // namespace seisseg
