// seisseg command-line front end: gen, label, train, predict, eval, sweep.
#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "seisseg/error.hpp"
#include "seisseg/eval.hpp"
#include "seisseg/io.hpp"
#include "seisseg/synth.hpp"
#include "seisseg/trainer.hpp"
#include "seisseg/unet.hpp"

namespace fs = std::filesystem;
using namespace seisseg;

namespace {

std::string index_name(const char* prefix, std::size_t i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%04zu%s", prefix, i, ext);
  return buf;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw FormatError(p.string() + ": cannot open for writing");
  return out;
}

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw FormatError(p.string() + ": cannot open file");
  return in;
}

// Not part of the resolved config. Leaving out the output location keeps
// reruns into different directories byte-identical.
const std::set<std::string> kMetaOptions = {"help", "config", "out"};

// key=value resolved config of one subcommand, in declaration order.
void write_resolved_config(const CLI::App& sub, const fs::path& path) {
  auto out = open_out(path);
  out << "# seisseg " << sub.get_name() << '\n';
  for (const CLI::Option* opt : sub.get_options()) {
    const auto& names = opt->get_lnames();
    if (names.empty() || kMetaOptions.count(names.front())) continue;
    std::string value;
    if (opt->count() > 0) {
      const auto r = opt->reduced_results();
      for (std::size_t i = 0; i < r.size(); ++i) value += (i ? "," : "") + r[i];
    } else {
      value = opt->get_default_str();
    }
    out << names.front() << '=' << value << '\n';
  }
}

// Expands `--config FILE` into `--key value` pairs placed before the other
// arguments, so explicit flags win. Unknown keys are rejected.
std::vector<std::string> expand_config(const CLI::App& app, std::vector<std::string> args) {
  if (args.empty()) return args;
  const CLI::App* sub = nullptr;
  for (const CLI::App* s : app.get_subcommands({})) {
    if (s->get_name() == args.front()) sub = s;
  }
  if (!sub) return args;

  std::vector<std::string> rest{args.front()};
  std::vector<std::string> from_file;
  for (std::size_t i = 1; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
      continue;
    }
    auto in = open_in(path);
    for (const auto& [key, value] : io::parse_key_values(in, path)) {
      const CLI::Option* opt = nullptr;
      for (const CLI::Option* o : sub->get_options()) {
        const auto& names = o->get_lnames();
        if (!names.empty() && names.front() == key && key != "help" && key != "config") opt = o;
      }
      if (!opt) throw ConfigError(path + ": unknown key '" + key + "' for " + sub->get_name());
      from_file.push_back("--" + key);
      from_file.push_back(value);
    }
  }
  rest.insert(rest.begin() + 1, from_file.begin(), from_file.end());
  return rest;
}

struct GenArgs {
  fs::path out;
  std::size_t n_ex = 24;
  GeoModelConfig geo;
  std::string base_depths;
};

struct LabelArgs {
  fs::path data, out;
  std::string strategy = "columns";
  std::size_t budget = 100;
  std::size_t n_train = 18;
  std::uint64_t seed = 0;
};

struct ModelArgs {
  std::size_t n_class = 0;  // 0: take from the dataset
  std::string widths = "6,12,24,32";
  std::string encoder_convs = "5,5,4,4";
  std::string decoder_convs = "4,4,5,5";
  double norm_epsilon = 1e-5;
  bool zero_classifier = true;
  bool standardize_input = true;
};

struct TrainArgs {
  fs::path data, labels, out;
  std::size_t n_train = 18;
  std::uint64_t seed = 0;
  TrainConfig cfg;
  std::string reduction = "mean";
  ModelArgs model;
};

struct PredictArgs {
  fs::path model, image, data, out;
  std::size_t index = 0;
  bool has_index = false;
};

struct EvalArgs {
  fs::path model, data, pred, truth, out;
  std::size_t n_train = 18;
};

struct SweepArgs {
  fs::path data, out;
  std::size_t n_train = 18;
  std::string strategies = "columns,scattered";
  std::string budgets = "100,600";
  std::string seeds = "1,2,3,4,5";
  std::size_t jobs = 1;
  TrainConfig cfg;
  std::string reduction = "mean";
  ModelArgs model;
};

void add_train_options(CLI::App* sub, TrainConfig& cfg, std::string& reduction, ModelArgs& m) {
  sub->add_option("--epochs", cfg.epochs, "Training epochs")->capture_default_str();
  sub->add_option("--lr", cfg.base_lr, "Initial learning rate")->capture_default_str();
  sub->add_option("--decay-factor", cfg.decay_factor, "LR divisor per decay step")->capture_default_str();
  sub->add_option("--decay-every", cfg.decay_every, "Epochs between LR decays")->capture_default_str();
  sub->add_option("--shuffle", cfg.shuffle, "Random image order each epoch")->capture_default_str();
  sub->add_option("--with-replacement", cfg.with_replacement, "Draw images with replacement")
      ->capture_default_str();
  sub->add_option("--reduction", reduction, "Loss reduction: mean or sum")
      ->check(CLI::IsMember({"mean", "sum"}))
      ->capture_default_str();
  sub->add_option("--n-class", m.n_class, "Output classes (0: horizons + 1)")->capture_default_str();
  sub->add_option("--widths", m.widths, "Channels per level")->capture_default_str();
  sub->add_option("--encoder-convs", m.encoder_convs, "Conv blocks per encoder level")->capture_default_str();
  sub->add_option("--decoder-convs", m.decoder_convs, "Conv blocks per decoder level")->capture_default_str();
  sub->add_option("--norm-epsilon", m.norm_epsilon, "Channel norm epsilon")->capture_default_str();
  sub->add_option("--zero-classifier", m.zero_classifier, "Zero-initialize the classifier")
      ->capture_default_str();
  sub->add_option("--standardize-input", m.standardize_input, "Standardize images in forward")
      ->capture_default_str();
}

ArchConfig make_arch(const ModelArgs& m, std::size_t dataset_classes, std::uint64_t seed) {
  ArchConfig a;
  a.n_class = m.n_class ? m.n_class : dataset_classes;
  try {
    a.widths = io::parse_uint_list(m.widths, "--widths");
    a.encoder_convs = io::parse_uint_list(m.encoder_convs, "--encoder-convs");
    a.decoder_convs = io::parse_uint_list(m.decoder_convs, "--decoder-convs");
  } catch (const FormatError& e) {
    throw ConfigError(e.what());
  }
  a.norm_epsilon = m.norm_epsilon;
  a.zero_classifier = m.zero_classifier;
  a.standardize_input = m.standardize_input;
  a.seed = seed;
  a.validate();
  return a;
}

Reduction parse_reduction(const std::string& s) { return s == "sum" ? Reduction::sum : Reduction::mean; }

void log_epochs(TrainConfig& cfg, const std::string& tag) {
  const auto start = std::chrono::steady_clock::now();
  const auto epochs = cfg.epochs;
  cfg.on_epoch = [start, epochs, tag](const EpochSummary& e) {
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%sepoch %zu/%zu lr=%s loss=%.6f elapsed=%.1fs\n", tag.c_str(), e.epoch + 1, epochs,
                io::format_double(e.lr).c_str(), e.mean_loss, secs);
    std::fflush(stdout);
  };
}

int run_gen(const CLI::App& sub, GenArgs& a) {
  if (!a.base_depths.empty()) {
    for (auto part : io::split(a.base_depths, ',')) {
      a.geo.base_depths.push_back(io::parse_double(part, "--base-depths"));
    }
  }
  const auto ds = gen_dataset(a.geo, a.n_ex, a.geo.seed);
  save_dataset(ds, a.out);
  write_resolved_config(sub, a.out / "gen.cfg");

  std::vector<std::uint64_t> counts(ds.config.n_horizons + 1, 0);
  std::uint64_t total = 0;
  for (const auto& h : ds.horizons) {
    for (auto c : rasterize(h).classes) ++counts[static_cast<std::size_t>(c)];
  }
  for (auto c : counts) total += c;
  std::printf("wrote %zu images of %zux%zu to %s\n", ds.size(), ds.config.n_z, ds.config.n_x,
              a.out.string().c_str());
  for (std::size_t c = 0; c < counts.size(); ++c) {
    std::printf("class %zu pixel fraction %.4f\n", c,
                static_cast<double>(counts[c]) / static_cast<double>(total));
  }
  return 0;
}

int run_label(const CLI::App& sub, const LabelArgs& a) {
  const auto ds = load_dataset(a.data);
  const auto split = split_by_index(ds.size(), a.n_train);
  const auto strategy = parse_strategy(a.strategy);
  const AnnotationBudget budget(a.budget);
  fs::create_directories(a.out);
  std::size_t labeled = 0;
  for (std::size_t i : split.train) {
    const auto labels = sample_labels(strategy, ds.horizons[i], budget, label_seed(a.seed, i));
    auto out = open_out(a.out / index_name("img", i, ".csv"));
    write_partial_labels(out, labels);
    labeled += labels.entries.size();
  }
  write_resolved_config(sub, a.out / "label.cfg");
  const auto yield = annotation_yield(strategy, budget, ds.horizons.front());
  std::printf("strategy %s budget %zu: annotation yield %zu pixels per image", a.strategy.c_str(),
              a.budget, yield);
  if (strategy == Strategy::columns) {
    std::printf(" (%zu columns)", a.budget / ds.config.n_horizons);
  } else {
    const auto q = scattered_quotas(a.budget, ds.config.n_horizons + 1);
    std::printf(" (per class");
    for (auto n : q) std::printf(" %zu", n);
    std::printf(")");
  }
  std::printf("\nlabeled %zu pixels over %zu training images\n", labeled, split.train.size());
  return 0;
}

int run_train(const CLI::App& sub, TrainArgs& a) {
  const auto ds = load_dataset(a.data);
  const auto split = split_by_index(ds.size(), a.n_train);
  const std::size_t n_class = ds.config.n_horizons + 1;
  std::vector<TrainingExample> examples;
  for (std::size_t i : split.train) {
    const auto path = a.labels / index_name("img", i, ".csv");
    auto in = open_in(path);
    examples.push_back({ds.images[i], read_partial_labels(in, path.string(), ds.config.n_z,
                                                          ds.config.n_x, n_class)});
  }
  const auto arch = make_arch(a.model, n_class, a.seed);
  a.cfg.seed = a.seed;
  a.cfg.reduction = parse_reduction(a.reduction);
  fs::create_directories(a.out);
  if (a.cfg.checkpoint_every > 0) a.cfg.checkpoint_dir = a.out / "checkpoints";
  write_resolved_config(sub, a.out / "train.cfg");
  log_epochs(a.cfg, "");

  TrainResult result;
  try {
    result = train(examples, a.cfg, arch);
  } catch (const TrainingDiverged& e) {
    save_checkpoint(e.last_finite(), a.out / "last_finite.segnet");
    throw;
  }
  save_checkpoint(result.params, a.out / "model.segnet");
  auto hist = open_out(a.out / "history.csv");
  write_history_csv(hist, result.history);
  std::printf("saved %s\n", (a.out / "model.segnet").string().c_str());
  return 0;
}

int run_predict(const CLI::App& sub, const PredictArgs& a) {
  const auto params = load_checkpoint(a.model);
  SeismicImage image;
  std::optional<LabelImage> truth;
  if (!a.image.empty()) {
    if (a.has_index) throw ConfigError("give either --image or --data with --index, not both");
    image = load_seis(a.image);
  } else {
    if (a.data.empty() || !a.has_index) throw ConfigError("predict needs --image or --data with --index");
    const auto ds = load_dataset(a.data);
    if (a.index >= ds.size()) {
      throw ConfigError("--index " + std::to_string(a.index) + " but the dataset has " +
                        std::to_string(ds.size()) + " images");
    }
    image = ds.images[a.index];
    truth = rasterize(ds.horizons[a.index]);
  }
  const auto pred = predict(params, image);
  fs::create_directories(a.out);
  save_pgm(class_map_image(pred), a.out / "prediction.pgm");
  save_pgm(seismic_image(image), a.out / "seismic.pgm");
  write_resolved_config(sub, a.out / "predict.cfg");
  std::printf("predicted %zux%zu section\n", pred.n_z, pred.n_x);
  if (truth) {
    const auto errors = error_map(pred, *truth);
    save_pgm(error_map_image(errors), a.out / "errors.pgm");
    const auto r = summarize(confusion(pred, *truth));
    std::printf("pixel accuracy %.6f mean IoU %.6f error pixels %zu\n", r.accuracy, r.mean_iou,
                errors.count());
  }
  return 0;
}

void write_eval_csv(std::ostream& out, const std::vector<std::pair<std::string, EvalResult>>& rows,
                    std::size_t n_class) {
  out << "image,test_accuracy,mean_iou,mean_class_accuracy";
  for (std::size_t c = 0; c < n_class; ++c) out << ",iou_" << c;
  out << '\n';
  for (const auto& [name, r] : rows) {
    out << name << ',' << io::format_double(r.accuracy) << ',' << io::format_double(r.mean_iou) << ','
        << io::format_double(r.mean_class_accuracy);
    for (std::size_t c = 0; c < n_class; ++c) {
      out << ',' << (c < r.iou.size() && r.iou[c] ? io::format_double(*r.iou[c]) : "NA");
    }
    out << '\n';
  }
}

LabelImage label_image_from_pgm(const fs::path& path) {
  auto in = open_in(path);
  const auto g = read_pgm(in, path.string());
  LabelImage l{g.height, g.width, static_cast<std::size_t>(g.maxval) + 1, {}};
  l.classes.assign(g.values.begin(), g.values.end());
  return l;
}

int run_eval(const CLI::App& sub, const EvalArgs& a) {
  std::vector<std::pair<std::string, EvalResult>> rows;
  std::size_t n_class = 0;
  if (!a.pred.empty() || !a.truth.empty()) {
    if (a.pred.empty() || a.truth.empty()) throw ConfigError("--pred and --truth go together");
    const auto pred = label_image_from_pgm(a.pred);
    const auto truth = label_image_from_pgm(a.truth);
    const auto cm = confusion(pred, truth);
    n_class = cm.n_class;
    rows.emplace_back("all", summarize(cm));
  } else {
    if (a.model.empty() || a.data.empty()) throw ConfigError("eval needs --model and --data, or --pred and --truth");
    const auto params = load_checkpoint(a.model);
    const auto ds = load_dataset(a.data);
    const auto split = split_by_index(ds.size(), a.n_train);
    if (split.test.empty()) throw ConfigError("no test images after the first " + std::to_string(a.n_train));
    n_class = std::max(params.config.n_class, ds.config.n_horizons + 1);
    ConfusionMatrix pooled(n_class);
    for (std::size_t i : split.test) {
      const auto pred = predict(params, ds.images[i]);
      const auto truth = rasterize(ds.horizons[i]);
      ConfusionMatrix cm(n_class);
      accumulate(cm, pred, truth);
      accumulate(pooled, pred, truth);
      rows.emplace_back(std::to_string(i), summarize(cm));
    }
    rows.emplace_back("all", summarize(pooled));
  }
  fs::create_directories(a.out);
  auto out = open_out(a.out / "eval.csv");
  write_eval_csv(out, rows, n_class);
  write_resolved_config(sub, a.out / "eval.cfg");
  const auto& all = rows.back().second;
  std::printf("test accuracy %.6f mean IoU %.6f mean class accuracy %.6f\n", all.accuracy,
              all.mean_iou, all.mean_class_accuracy);
  return 0;
}

int run_sweep(const CLI::App& sub, SweepArgs& a) {
  const auto ds = load_dataset(a.data);
  const auto split = split_by_index(ds.size(), a.n_train);
  SweepSpec spec;
  for (auto s : io::split(a.strategies, ',')) spec.strategies.push_back(parse_strategy(io::trim(s)));
  try {
    spec.budgets = io::parse_uint_list(a.budgets, "--budgets");
    for (auto s : io::parse_uint_list(a.seeds, "--seeds")) spec.seeds.push_back(s);
  } catch (const FormatError& e) {
    throw ConfigError(e.what());
  }
  spec.jobs = a.jobs;
  spec.on_cell = [](const CellResult& r) {
    std::printf("cell %s budget %zu seed %llu: test accuracy %.6f mean IoU %.6f\n",
                std::string(to_string(r.cell.strategy)).c_str(), r.cell.budget,
                static_cast<unsigned long long>(r.cell.seed), r.eval.accuracy, r.eval.mean_iou);
    std::fflush(stdout);
  };
  a.cfg.reduction = parse_reduction(a.reduction);
  if (a.jobs == 1) log_epochs(a.cfg, "  ");
  const auto arch = make_arch(a.model, ds.config.n_horizons + 1, 0);
  fs::create_directories(a.out);
  write_resolved_config(sub, a.out / "sweep.cfg");

  const auto report = budget_sweep(ds, split, spec, a.cfg, arch);
  {
    auto out = open_out(a.out / "report.csv");
    write_report_csv(out, report);
  }
  auto out = open_out(a.out / "summary.csv");
  write_summary_csv(out, report);
  for (const auto& g : report.aggregates) {
    std::printf("%s budget %zu: accuracy %.4f +- %.4f over %zu seeds\n",
                std::string(to_string(g.strategy)).c_str(), g.budget, g.accuracy_mean,
                g.accuracy_std, g.n_seeds);
  }
  return 0;
}

int report_error(const std::string& category, const std::string& what) {
  std::cerr << "ERROR:" << category << ": " << what << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weakly supervised segmentation of seismic sections"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  GenArgs gen_a;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset");
  gen->add_option("--out", gen_a.out, "Dataset directory")->required();
  gen->add_option("--nex", gen_a.n_ex, "Number of images")->capture_default_str();
  gen->add_option("--nz", gen_a.geo.n_z, "Rows per image")->capture_default_str();
  gen->add_option("--nx", gen_a.geo.n_x, "Columns per image")->capture_default_str();
  gen->add_option("--horizons", gen_a.geo.n_horizons, "Horizons per image")->capture_default_str();
  gen->add_option("--seed", gen_a.geo.seed, "Master seed")->capture_default_str();
  gen->add_option("--base-depths", gen_a.base_depths, "Comma list of mean horizon depths");
  gen->add_option("--base-jitter", gen_a.geo.base_jitter)->capture_default_str();
  gen->add_option("--dip-max", gen_a.geo.dip_max)->capture_default_str();
  gen->add_option("--fold-amp-min", gen_a.geo.fold_amp_min)->capture_default_str();
  gen->add_option("--fold-amp-max", gen_a.geo.fold_amp_max)->capture_default_str();
  gen->add_option("--fold-wavelength-min", gen_a.geo.fold_wavelength_min)->capture_default_str();
  gen->add_option("--fold-wavelength-max", gen_a.geo.fold_wavelength_max)->capture_default_str();
  gen->add_option("--min-folds", gen_a.geo.min_folds)->capture_default_str();
  gen->add_option("--max-folds", gen_a.geo.max_folds)->capture_default_str();
  gen->add_option("--impedance-min", gen_a.geo.impedance_min)->capture_default_str();
  gen->add_option("--impedance-max", gen_a.geo.impedance_max)->capture_default_str();
  gen->add_option("--contrast-min", gen_a.geo.contrast_min)->capture_default_str();
  gen->add_option("--contrast-max", gen_a.geo.contrast_max)->capture_default_str();
  gen->add_option("--peak-frequency", gen_a.geo.peak_frequency, "Ricker peak, cycles/sample")
      ->capture_default_str();
  gen->add_option("--noise", gen_a.geo.noise, "Noise std relative to signal")->capture_default_str();
  gen->add_option("--min-thickness", gen_a.geo.min_thickness, "Minimum unit thickness in rows")
      ->capture_default_str();

  LabelArgs label_a;
  auto* label = app.add_subcommand("label", "Sample partial labels for the training images");
  label->add_option("--data", label_a.data, "Dataset directory")->required();
  label->add_option("--out", label_a.out, "Output directory for label CSVs")->required();
  label->add_option("--strategy", label_a.strategy, "columns or scattered")->capture_default_str();
  label->add_option("--budget", label_a.budget, "Annotation clicks per image")->capture_default_str();
  label->add_option("--n-train", label_a.n_train, "Leading images used for training")->capture_default_str();
  label->add_option("--seed", label_a.seed, "Master seed")->capture_default_str();

  TrainArgs train_a;
  auto* train_cmd = app.add_subcommand("train", "Train a network on partial labels");
  train_cmd->add_option("--data", train_a.data, "Dataset directory")->required();
  train_cmd->add_option("--labels", train_a.labels, "Directory written by label")->required();
  train_cmd->add_option("--out", train_a.out, "Output directory")->required();
  train_cmd->add_option("--n-train", train_a.n_train, "Leading images used for training")
      ->capture_default_str();
  train_cmd->add_option("--seed", train_a.seed, "Master seed")->capture_default_str();
  train_cmd->add_option("--checkpoint-every", train_a.cfg.checkpoint_every, "Epochs between checkpoints")
      ->capture_default_str();
  add_train_options(train_cmd, train_a.cfg, train_a.reduction, train_a.model);

  PredictArgs pred_a;
  auto* pred_cmd = app.add_subcommand("predict", "Segment one section");
  pred_cmd->add_option("--model", pred_a.model, "Checkpoint file")->required();
  pred_cmd->add_option("--image", pred_a.image, "Image file (.seis)");
  pred_cmd->add_option("--data", pred_a.data, "Dataset directory");
  auto* index_opt = pred_cmd->add_option("--index", pred_a.index, "Image index in --data");
  pred_cmd->add_option("--out", pred_a.out, "Output directory")->required();

  EvalArgs eval_a;
  auto* eval_cmd = app.add_subcommand("eval", "Score predictions against rasterized truth");
  eval_cmd->add_option("--model", eval_a.model, "Checkpoint file");
  eval_cmd->add_option("--data", eval_a.data, "Dataset directory");
  eval_cmd->add_option("--n-train", eval_a.n_train, "Leading images excluded from the test set")
      ->capture_default_str();
  eval_cmd->add_option("--pred", eval_a.pred, "Predicted class map (PGM)");
  eval_cmd->add_option("--truth", eval_a.truth, "True class map (PGM)");
  eval_cmd->add_option("--out", eval_a.out, "Output directory")->required();

  SweepArgs sweep_a;
  auto* sweep = app.add_subcommand("sweep", "Compare annotation strategies over budgets and seeds");
  sweep->add_option("--data", sweep_a.data, "Dataset directory")->required();
  sweep->add_option("--out", sweep_a.out, "Output directory")->required();
  sweep->add_option("--n-train", sweep_a.n_train, "Leading images used for training")->capture_default_str();
  sweep->add_option("--strategies", sweep_a.strategies)->capture_default_str();
  sweep->add_option("--budgets", sweep_a.budgets)->capture_default_str();
  sweep->add_option("--seeds", sweep_a.seeds)->capture_default_str();
  sweep->add_option("--jobs", sweep_a.jobs, "Cells trained in parallel")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_train_options(sweep, sweep_a.cfg, sweep_a.reduction, sweep_a.model);

  // expanded by expand_config before parsing; declared here for --help
  std::string config_path;
  for (auto* sub : {gen, label, train_cmd, pred_cmd, eval_cmd, sweep}) {
    sub->add_option("--config", config_path, "key=value file; command-line flags override it");
  }

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(app, std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what());
  } catch (const Error& e) {
    return report_error(e.category(), e.what());
  }
  pred_a.has_index = index_opt->count() > 0;

  try {
    if (*gen) return run_gen(*gen, gen_a);
    if (*label) return run_label(*label, label_a);
    if (*train_cmd) return run_train(*train_cmd, train_a);
    if (*pred_cmd) return run_predict(*pred_cmd, pred_a);
    if (*eval_cmd) return run_eval(*eval_cmd, eval_a);
    if (*sweep) return run_sweep(*sweep, sweep_a);
  } catch (const Error& e) {
    return report_error(e.category(), e.what());
  } catch (const fs::filesystem_error& e) {
    return report_error("io", e.what());
  } catch (const std::exception& e) {
    return report_error("internal", e.what());
  }
  return 0;
}
