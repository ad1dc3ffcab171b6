#include "seisseg/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <thread>
#include <tuple>

#include "seisseg/error.hpp"
#include "seisseg/io.hpp"

namespace seisseg {
namespace {

void check_same_shape(const LabelImage& pred, const LabelImage& truth, const char* what) {
  if (pred.n_z != truth.n_z || pred.n_x != truth.n_x) {
    throw ShapeError(std::string(what) + ": prediction is " + std::to_string(pred.n_z) + "x" +
                     std::to_string(pred.n_x) + ", truth is " + std::to_string(truth.n_z) + "x" +
                     std::to_string(truth.n_x));
  }
}

void check_nonempty(const ConfusionMatrix& cm, const char* what) {
  if (cm.total() == 0) throw ContractError(std::string(what) + ": confusion matrix is empty");
}

}  // namespace

std::uint64_t ConfusionMatrix::total() const noexcept {
  std::uint64_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

std::uint64_t ConfusionMatrix::trace() const noexcept {
  std::uint64_t t = 0;
  for (std::size_t c = 0; c < n_class; ++c) t += at(c, c);
  return t;
}

void accumulate(ConfusionMatrix& cm, const LabelImage& pred, const LabelImage& truth) {
  check_same_shape(pred, truth, "confusion");
  for (std::size_t i = 0; i < truth.classes.size(); ++i) {
    const auto t = truth.classes[i];
    const auto p = pred.classes[i];
    if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= cm.n_class ||
        static_cast<std::size_t>(p) >= cm.n_class) {
      throw ContractError("confusion: class id out of range at pixel " + std::to_string(i));
    }
    ++cm.counts[static_cast<std::size_t>(t) * cm.n_class + static_cast<std::size_t>(p)];
  }
}

ConfusionMatrix confusion(const LabelImage& pred, const LabelImage& truth) {
  ConfusionMatrix cm(std::max(pred.n_class, truth.n_class));
  accumulate(cm, pred, truth);
  return cm;
}

double pixel_accuracy(const ConfusionMatrix& cm) {
  check_nonempty(cm, "pixel_accuracy");
  return static_cast<double>(cm.trace()) / static_cast<double>(cm.total());
}

std::vector<std::optional<double>> class_iou(const ConfusionMatrix& cm) {
  check_nonempty(cm, "class_iou");
  std::vector<std::optional<double>> iou(cm.n_class);
  for (std::size_t c = 0; c < cm.n_class; ++c) {
    std::uint64_t row = 0, col = 0;
    for (std::size_t k = 0; k < cm.n_class; ++k) {
      row += cm.at(c, k);
      col += cm.at(k, c);
    }
    const auto uni = row + col - cm.at(c, c);
    if (uni > 0) iou[c] = static_cast<double>(cm.at(c, c)) / static_cast<double>(uni);
  }
  return iou;
}

double mean_iou(const ConfusionMatrix& cm) {
  double s = 0.0;
  std::size_t n = 0;
  for (const auto& v : class_iou(cm)) {
    if (v) {
      s += *v;
      ++n;
    }
  }
  return s / static_cast<double>(n);
}

double mean_class_accuracy(const ConfusionMatrix& cm) {
  check_nonempty(cm, "mean_class_accuracy");
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t c = 0; c < cm.n_class; ++c) {
    std::uint64_t row = 0;
    for (std::size_t k = 0; k < cm.n_class; ++k) row += cm.at(c, k);
    if (row == 0) continue;
    s += static_cast<double>(cm.at(c, c)) / static_cast<double>(row);
    ++n;
  }
  return s / static_cast<double>(n);
}

std::size_t BinaryImage::count() const noexcept {
  return static_cast<std::size_t>(std::count(values.begin(), values.end(), std::uint8_t{1}));
}

BinaryImage error_map(const LabelImage& pred, const LabelImage& truth) {
  check_same_shape(pred, truth, "error_map");
  BinaryImage e{truth.n_z, truth.n_x, std::vector<std::uint8_t>(truth.classes.size())};
  for (std::size_t i = 0; i < e.values.size(); ++i) e.values[i] = pred.classes[i] != truth.classes[i];
  return e;
}

EvalResult summarize(const ConfusionMatrix& cm) {
  return {cm, pixel_accuracy(cm), class_iou(cm), mean_iou(cm), mean_class_accuracy(cm)};
}

EvalResult evaluate(const NetworkParams& params, std::span<const SeismicImage> images,
                    std::span<const LabelImage> truths) {
  if (images.size() != truths.size()) {
    throw ContractError("evaluate: " + std::to_string(images.size()) + " images but " +
                        std::to_string(truths.size()) + " truth maps");
  }
  if (images.empty()) throw ContractError("evaluate: no test images");
  std::size_t n_class = params.config.n_class;
  for (const auto& t : truths) n_class = std::max(n_class, t.n_class);
  ConfusionMatrix cm(n_class);
  for (std::size_t i = 0; i < images.size(); ++i) accumulate(cm, predict(params, images[i]), truths[i]);
  return summarize(cm);
}

std::uint64_t label_seed(std::uint64_t cell_seed, std::size_t image_index) {
  // offset keeps label streams apart from the init/shuffle stream of the same seed
  return derive_seed(cell_seed + 0x6c6162656c73ULL, image_index);
}

std::vector<TrainingExample> cell_examples(const Dataset& ds, const Split& split,
                                           const SweepCell& cell) {
  std::vector<TrainingExample> examples;
  for (std::size_t i : split.train) {
    if (i >= ds.size()) throw ContractError("split refers to image " + std::to_string(i));
    examples.push_back({ds.images[i], sample_labels(cell.strategy, ds.horizons[i],
                                                    AnnotationBudget(cell.budget),
                                                    label_seed(cell.seed, i))});
  }
  return examples;
}

CellResult run_cell(const Dataset& ds, const Split& split, const SweepCell& cell,
                    TrainConfig train_cfg, ArchConfig arch) {
  for (std::size_t i : split.test) {
    if (std::find(split.train.begin(), split.train.end(), i) != split.train.end()) {
      throw ContractError("image " + std::to_string(i) + " is in both train and test splits");
    }
    if (i >= ds.size()) throw ContractError("split refers to image " + std::to_string(i));
  }
  const auto examples = cell_examples(ds, split, cell);
  train_cfg.seed = cell.seed;
  arch.seed = cell.seed;
  CellResult result{cell, {}, train(examples, train_cfg, arch)};

  std::vector<SeismicImage> images;
  std::vector<LabelImage> truths;
  for (std::size_t i : split.test) {
    images.push_back(ds.images[i]);
    truths.push_back(rasterize(ds.horizons[i]));
  }
  result.eval = evaluate(result.train.params, images, truths);
  return result;
}

const AggregateRow& ExperimentReport::aggregate(Strategy strategy, std::size_t budget) const {
  for (const auto& a : aggregates) {
    if (a.strategy == strategy && a.budget == budget) return a;
  }
  throw ContractError("report has no cells for " + std::string(to_string(strategy)) + " at budget " +
                      std::to_string(budget));
}

std::pair<double, double> mean_std(std::span<const double> values) {
  if (values.empty()) return {0.0, 0.0};
  double m = 0.0;
  for (double v : values) m += v;
  m /= static_cast<double>(values.size());
  if (values.size() < 2) return {m, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return {m, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

ExperimentReport budget_sweep(const Dataset& ds, const Split& split, const SweepSpec& spec,
                              const TrainConfig& train_cfg, const ArchConfig& arch) {
  if (spec.strategies.empty() || spec.budgets.empty() || spec.seeds.empty()) {
    throw ConfigError("sweep needs at least one strategy, budget and seed");
  }
  // fail on bad budgets before spending hours on the valid cells
  for (auto s : spec.strategies) {
    for (auto b : spec.budgets) annotation_yield(s, AnnotationBudget(b), ds.horizons.at(0));
  }

  std::vector<SweepCell> cells;
  for (auto s : spec.strategies) {
    for (auto b : spec.budgets) {
      for (auto seed : spec.seeds) cells.push_back({s, b, seed});
    }
  }

  std::vector<std::optional<CellResult>> results(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr failure;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      {
        std::lock_guard lock(mu);
        if (failure) return;
      }
      try {
        auto r = run_cell(ds, split, cells[i], train_cfg, arch);
        std::lock_guard lock(mu);
        if (spec.on_cell) spec.on_cell(r);
        results[i] = std::move(r);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(spec.jobs, 1, cells.size());
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  ExperimentReport report;
  report.n_class = arch.n_class;
  for (auto& r : results) report.cells.push_back(std::move(*r));
  for (auto s : spec.strategies) {
    for (auto b : spec.budgets) {
      std::vector<double> acc, miou, mca;
      for (const auto& c : report.cells) {
        if (c.cell.strategy != s || c.cell.budget != b) continue;
        acc.push_back(c.eval.accuracy);
        miou.push_back(c.eval.mean_iou);
        mca.push_back(c.eval.mean_class_accuracy);
      }
      AggregateRow row{s, b, acc.size()};
      std::tie(row.accuracy_mean, row.accuracy_std) = mean_std(acc);
      std::tie(row.mean_iou_mean, row.mean_iou_std) = mean_std(miou);
      std::tie(row.class_accuracy_mean, row.class_accuracy_std) = mean_std(mca);
      report.aggregates.push_back(row);
    }
  }
  return report;
}

void write_report_csv(std::ostream& out, const ExperimentReport& report) {
  out << "strategy,budget,seed,test_accuracy,mean_iou,mean_class_accuracy";
  for (std::size_t c = 0; c < report.n_class; ++c) out << ",iou_" << c;
  out << '\n';
  for (const auto& r : report.cells) {
    out << to_string(r.cell.strategy) << ',' << r.cell.budget << ',' << r.cell.seed << ','
        << io::format_double(r.eval.accuracy) << ',' << io::format_double(r.eval.mean_iou) << ','
        << io::format_double(r.eval.mean_class_accuracy);
    for (std::size_t c = 0; c < report.n_class; ++c) {
      out << ',';
      if (c < r.eval.iou.size() && r.eval.iou[c]) {
        out << io::format_double(*r.eval.iou[c]);
      } else {
        out << "NA";
      }
    }
    out << '\n';
  }
}

void write_summary_csv(std::ostream& out, const ExperimentReport& report) {
  out << "strategy,budget,n_seeds,accuracy_mean,accuracy_std,mean_iou_mean,mean_iou_std,"
         "class_accuracy_mean,class_accuracy_std\n";
  for (const auto& a : report.aggregates) {
    out << to_string(a.strategy) << ',' << a.budget << ',' << a.n_seeds << ','
        << io::format_double(a.accuracy_mean) << ',' << io::format_double(a.accuracy_std) << ','
        << io::format_double(a.mean_iou_mean) << ',' << io::format_double(a.mean_iou_std) << ','
        << io::format_double(a.class_accuracy_mean) << ','
        << io::format_double(a.class_accuracy_std) << '\n';
  }
}

void write_pgm(std::ostream& out, const GrayImage& image) {
  if (image.maxval < 1 || image.maxval > 65535) {
    throw ContractError("pgm: maxval " + std::to_string(image.maxval) + " outside [1, 65535]");
  }
  if (image.values.size() != image.width * image.height) {
    throw ShapeError("pgm: " + std::to_string(image.values.size()) + " values for " +
                     std::to_string(image.width) + "x" + std::to_string(image.height));
  }
  out << "P5\n" << image.width << ' ' << image.height << '\n' << image.maxval << '\n';
  const bool wide = image.maxval > 255;
  std::string bytes;
  bytes.reserve(image.values.size() * (wide ? 2 : 1));
  for (auto v : image.values) {
    if (v > image.maxval) throw ContractError("pgm: value " + std::to_string(v) + " exceeds maxval");
    if (wide) bytes.push_back(static_cast<char>(v >> 8));  // big-endian
    bytes.push_back(static_cast<char>(v & 0xff));
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

GrayImage read_pgm(std::istream& in, const std::string& source) {
  auto fail = [&](const std::string& why) -> FormatError {
    return FormatError(source + ": " + why + " at byte offset " +
                       std::to_string(static_cast<long long>(in.tellg())));
  };
  std::string magic;
  in >> magic;
  if (magic != "P5") throw FormatError(source + ": bad magic at byte offset 0");
  auto header_value = [&]() -> std::uint64_t {
    in >> std::ws;
    while (in.peek() == '#') {
      std::string comment;
      std::getline(in, comment);
      in >> std::ws;
    }
    std::uint64_t v = 0;
    if (!(in >> v)) throw fail("bad header field");
    return v;
  };
  GrayImage g;
  g.width = header_value();
  g.height = header_value();
  const auto maxval = header_value();
  if (maxval < 1 || maxval > 65535) throw fail("maxval out of range");
  g.maxval = static_cast<std::uint32_t>(maxval);
  if (in.get() == EOF) throw fail("truncated header");
  const bool wide = g.maxval > 255;
  const std::size_t n = g.width * g.height;
  std::string bytes(n * (wide ? 2 : 1), '\0');
  const auto start = in.tellg();
  in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (static_cast<std::size_t>(in.gcount()) != bytes.size()) {
    throw FormatError(source + ": truncated pixel data at byte offset " +
                      std::to_string(static_cast<long long>(start) + in.gcount()));
  }
  g.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    g.values[i] = wide ? static_cast<std::uint16_t>((static_cast<unsigned char>(bytes[2 * i]) << 8) |
                                                    static_cast<unsigned char>(bytes[2 * i + 1]))
                       : static_cast<unsigned char>(bytes[i]);
  }
  return g;
}

void save_pgm(const GrayImage& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(path.string() + ": cannot open for writing");
  write_pgm(out, image);
}

GrayImage error_map_image(const BinaryImage& errors) {
  GrayImage g{errors.n_x, errors.n_z, 255, std::vector<std::uint16_t>(errors.values.size())};
  for (std::size_t i = 0; i < errors.values.size(); ++i) g.values[i] = errors.values[i] ? 255 : 0;
  return g;
}

GrayImage class_map_image(const LabelImage& classes) {
  const auto maxval = static_cast<std::uint32_t>(std::max<std::size_t>(classes.n_class, 2) - 1);
  GrayImage g{classes.n_x, classes.n_z, maxval, {}};
  g.values.reserve(classes.classes.size());
  for (auto c : classes.classes) g.values.push_back(static_cast<std::uint16_t>(c));
  return g;
}

GrayImage seismic_image(const SeismicImage& image) {
  GrayImage g{image.n_x, image.n_z, 65535, std::vector<std::uint16_t>(image.values.size())};
  if (image.values.empty()) return g;
  const auto [lo, hi] = std::minmax_element(image.values.begin(), image.values.end());
  const double range = *hi - *lo;
  for (std::size_t i = 0; i < image.values.size(); ++i) {
    const double u = range > 0.0 ? (image.values[i] - *lo) / range : 0.0;
    g.values[i] = static_cast<std::uint16_t>(std::lround(u * 65535.0));
  }
  return g;
}

}  // namespace seisseg
