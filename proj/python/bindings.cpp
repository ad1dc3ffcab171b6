#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <span>

#include "seisseg/error.hpp"
#include "seisseg/eval.hpp"
#include "seisseg/loss.hpp"

namespace py = pybind11;
using namespace seisseg;

namespace {

using F64 = py::array_t<double, py::array::c_style | py::array::forcecast>;
using I32 = py::array_t<std::int32_t, py::array::c_style | py::array::forcecast>;

template <typename T>
py::array_t<T> to_array(std::span<const T> v, std::vector<py::ssize_t> shape) {
  py::array_t<T> out(shape);
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

SeismicImage image_from(const F64& a) {
  if (a.ndim() != 2) throw ShapeError("image must be a 2-D array");
  SeismicImage img(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), img.values.begin());
  return img;
}

py::array_t<double> image_to(const SeismicImage& img) {
  return to_array<double>(img.values, {static_cast<py::ssize_t>(img.n_z), static_cast<py::ssize_t>(img.n_x)});
}

HorizonSet horizons_from(const F64& a, std::size_t n_z) {
  if (a.ndim() != 2) throw ShapeError("horizons must be a (n_horizons, n_x) array");
  const auto n_h = static_cast<std::size_t>(a.shape(0)), n_x = static_cast<std::size_t>(a.shape(1));
  HorizonSet h{n_z, n_x, std::vector<std::vector<double>>(n_h)};
  for (std::size_t k = 0; k < n_h; ++k) h.horizons[k].assign(a.data() + k * n_x, a.data() + (k + 1) * n_x);
  return h;
}

py::array_t<double> horizons_to(const HorizonSet& h) {
  std::vector<double> flat;
  for (const auto& row : h.horizons) flat.insert(flat.end(), row.begin(), row.end());
  return to_array<double>(flat, {static_cast<py::ssize_t>(h.n_horizons()), static_cast<py::ssize_t>(h.n_x)});
}

LabelImage labels_from(const I32& a, std::size_t n_class) {
  if (a.ndim() != 2) throw ShapeError("class map must be a 2-D array");
  return LabelImage{static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)), n_class,
                    std::vector<ClassId>(a.data(), a.data() + a.size())};
}

py::array_t<std::int32_t> labels_to(const LabelImage& l) {
  return to_array<std::int32_t>(l.classes, {static_cast<py::ssize_t>(l.n_z), static_cast<py::ssize_t>(l.n_x)});
}

// (k, 3) array of row, column, class
py::array_t<std::int64_t> entries_to(const PartialLabels& p) {
  std::vector<std::int64_t> flat;
  for (const auto& e : p.entries) {
    flat.push_back(static_cast<std::int64_t>(e.row));
    flat.push_back(static_cast<std::int64_t>(e.column));
    flat.push_back(e.class_id);
  }
  return to_array<std::int64_t>(flat, {static_cast<py::ssize_t>(p.entries.size()), 3});
}

PartialLabels entries_from(const py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>& a,
                           std::size_t n_z, std::size_t n_x, std::size_t n_class) {
  if (a.ndim() != 2 || a.shape(1) != 3) throw ShapeError("labels must be a (k, 3) array of row, column, class");
  PartialLabels p{n_z, n_x, n_class, {}};
  for (py::ssize_t i = 0; i < a.shape(0); ++i) {
    const auto* r = a.data(i, 0);
    if (r[0] < 0 || r[1] < 0) throw ContractError("negative label coordinate");
    p.entries.push_back({static_cast<std::size_t>(r[0]), static_cast<std::size_t>(r[1]), static_cast<ClassId>(r[2])});
  }
  return p;
}

Tensor tensor_from(const F64& a) {
  Shape shape(a.shape(), a.shape() + a.ndim());
  return Tensor(shape, std::vector<double>(a.data(), a.data() + a.size()));
}

py::array_t<double> tensor_to(const Tensor& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  return to_array<double>(t.values(), shape);
}

py::dict census_dict(const ParameterCensus& c) {
  py::dict d;
  d["weighted_layers"] = c.weighted_layers;
  d["conv3x3_layers"] = c.conv3x3_layers;
  d["conv1x1_layers"] = c.conv1x1_layers;
  d["fully_connected_layers"] = c.fully_connected_layers;
  d["min_hidden_width"] = c.min_hidden_width;
  d["max_hidden_width"] = c.max_hidden_width;
  d["parameter_count"] = c.parameter_count;
  return d;
}

py::dict eval_dict(const EvalResult& r) {
  py::dict d;
  d["accuracy"] = r.accuracy;
  d["mean_iou"] = r.mean_iou;
  d["mean_class_accuracy"] = r.mean_class_accuracy;
  d["iou"] = r.iou;
  d["confusion"] = to_array<std::uint64_t>(r.cm.counts, {static_cast<py::ssize_t>(r.cm.n_class), static_cast<py::ssize_t>(r.cm.n_class)});
  return d;
}

py::list history_list(const TrainHistory& h) {
  py::list out;
  for (const auto& it : h.iterations) out.append(py::make_tuple(it.epoch, it.iteration, it.image_id, it.lr, it.loss));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Weakly supervised seismic segmentation core";

  static py::exception<Error> base(m, "SeissegError", PyExc_RuntimeError);
  static py::exception<ShapeError> shape_error(m, "ShapeError", base.ptr());
  static py::exception<ContractError> contract_error(m, "ContractError", base.ptr());
  static py::exception<ConfigError> config_error(m, "ConfigError", base.ptr());
  static py::exception<FormatError> format_error(m, "FormatError", base.ptr());
  static py::exception<TrainingDiverged> diverged(m, "TrainingDiverged", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ShapeError& e) {
      shape_error(e.what());
    } catch (const ContractError& e) {
      contract_error(e.what());
    } catch (const ConfigError& e) {
      config_error(e.what());
    } catch (const FormatError& e) {
      format_error(e.what());
    } catch (const TrainingDiverged& e) {
      diverged(e.what());
    } catch (const Error& e) {
      base(e.what());
    }
  });

  py::enum_<Strategy>(m, "Strategy").value("scattered", Strategy::scattered).value("columns", Strategy::columns);
  py::enum_<Reduction>(m, "Reduction").value("mean", Reduction::mean).value("sum", Reduction::sum);

  py::class_<GeoModelConfig>(m, "GeoModelConfig")
      .def(py::init<>())
      .def_readwrite("n_z", &GeoModelConfig::n_z)
      .def_readwrite("n_x", &GeoModelConfig::n_x)
      .def_readwrite("n_horizons", &GeoModelConfig::n_horizons)
      .def_readwrite("base_depths", &GeoModelConfig::base_depths)
      .def_readwrite("base_jitter", &GeoModelConfig::base_jitter)
      .def_readwrite("dip_max", &GeoModelConfig::dip_max)
      .def_readwrite("fold_amp_min", &GeoModelConfig::fold_amp_min)
      .def_readwrite("fold_amp_max", &GeoModelConfig::fold_amp_max)
      .def_readwrite("fold_wavelength_min", &GeoModelConfig::fold_wavelength_min)
      .def_readwrite("fold_wavelength_max", &GeoModelConfig::fold_wavelength_max)
      .def_readwrite("min_folds", &GeoModelConfig::min_folds)
      .def_readwrite("max_folds", &GeoModelConfig::max_folds)
      .def_readwrite("impedance_min", &GeoModelConfig::impedance_min)
      .def_readwrite("impedance_max", &GeoModelConfig::impedance_max)
      .def_readwrite("contrast_min", &GeoModelConfig::contrast_min)
      .def_readwrite("contrast_max", &GeoModelConfig::contrast_max)
      .def_readwrite("peak_frequency", &GeoModelConfig::peak_frequency)
      .def_readwrite("noise", &GeoModelConfig::noise)
      .def_readwrite("min_thickness", &GeoModelConfig::min_thickness)
      .def_readwrite("seed", &GeoModelConfig::seed)
      .def("validate", &GeoModelConfig::validate)
      .def("to_dict", [](const GeoModelConfig& c) {
        auto kv = c.to_key_values();
        return std::map<std::string, std::string>(kv.begin(), kv.end());
      });

  py::class_<Dataset>(m, "Dataset")
      .def("__len__", &Dataset::size)
      .def_readonly("config", &Dataset::config)
      .def("image", [](const Dataset& d, std::size_t i) { return image_to(d.images.at(i)); }, py::arg("index"))
      .def("horizons", [](const Dataset& d, std::size_t i) { return horizons_to(d.horizons.at(i)); }, py::arg("index"))
      .def("truth", [](const Dataset& d, std::size_t i) { return labels_to(rasterize(d.horizons.at(i))); },
           py::arg("index"), "Rasterized class map of image `index`.");

  m.def("derive_seed", &derive_seed, py::arg("master_seed"), py::arg("index"));
  m.def("gen_dataset", &gen_dataset, py::arg("config"), py::arg("n_ex"), py::arg("seed"));
  m.def("save_dataset", &save_dataset, py::arg("dataset"), py::arg("dir"));
  m.def("load_dataset", &load_dataset, py::arg("dir"));
  m.def("ricker_wavelet", &ricker_wavelet, py::arg("peak_frequency"));

  m.def("rasterize", [](const F64& h, std::size_t n_z) { return labels_to(rasterize(horizons_from(h, n_z))); },
        py::arg("horizons"), py::arg("n_z"));
  m.def("sample_labels",
        [](Strategy s, const F64& h, std::size_t n_z, std::size_t budget, std::uint64_t seed) {
          return entries_to(sample_labels(s, horizons_from(h, n_z), AnnotationBudget(budget), seed));
        },
        py::arg("strategy"), py::arg("horizons"), py::arg("n_z"), py::arg("budget"), py::arg("seed"),
        "Labeled pixels as a (k, 3) array of row, column, class.");
  m.def("scattered_quotas", &scattered_quotas, py::arg("n_samp"), py::arg("n_class"));

  py::class_<ArchConfig>(m, "ArchConfig")
      .def(py::init<>())
      .def_readwrite("n_class", &ArchConfig::n_class)
      .def_readwrite("widths", &ArchConfig::widths)
      .def_readwrite("encoder_convs", &ArchConfig::encoder_convs)
      .def_readwrite("decoder_convs", &ArchConfig::decoder_convs)
      .def_readwrite("norm_epsilon", &ArchConfig::norm_epsilon)
      .def_readwrite("zero_classifier", &ArchConfig::zero_classifier)
      .def_readwrite("standardize_input", &ArchConfig::standardize_input)
      .def_readwrite("seed", &ArchConfig::seed)
      .def("validate", &ArchConfig::validate);

  py::class_<NetworkParams>(m, "Network")
      .def_readonly("config", &NetworkParams::config)
      .def("parameter_count", &NetworkParams::parameter_count)
      .def("census", [](const NetworkParams& p) { return census_dict(census(p)); })
      .def("logits", [](const NetworkParams& p, const F64& img) { return tensor_to(forward(p, image_from(img))); },
           py::arg("image"))
      .def("predict", [](const NetworkParams& p, const F64& img) { return labels_to(predict(p, image_from(img))); },
           py::arg("image"))
      .def("save", [](const NetworkParams& p, const std::filesystem::path& path) { save_checkpoint(p, path); },
           py::arg("path"))
      .def("__eq__", [](const NetworkParams& a, const NetworkParams& b) { return a == b; });

  m.def("build_network", py::overload_cast<ArchConfig, std::uint64_t>(&build_network), py::arg("config"),
        py::arg("seed"));
  m.def("load_checkpoint", &load_checkpoint, py::arg("path"));

  m.def("partial_cross_entropy",
        [](const F64& logits, const py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>& labels,
           Reduction reduction) {
          if (logits.ndim() != 3) throw ShapeError("logits must be (n_class, n_z, n_x)");
          auto t = tensor_from(logits);
          auto r = partial_cross_entropy(t, entries_from(labels, t.dim(1), t.dim(2), t.dim(0)), reduction);
          return py::make_tuple(r.value, tensor_to(r.gradient));
        },
        py::arg("logits"), py::arg("labels"), py::arg("reduction") = Reduction::mean,
        "Loss value and gradient with respect to the logits.");
  m.def("full_cross_entropy",
        [](const F64& logits, const I32& classes) {
          auto t = tensor_from(logits);
          return full_cross_entropy(t, labels_from(classes, t.dim(0))).value;
        },
        py::arg("logits"), py::arg("classes"));

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("base_lr", &TrainConfig::base_lr)
      .def_readwrite("decay_factor", &TrainConfig::decay_factor)
      .def_readwrite("decay_every", &TrainConfig::decay_every)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("shuffle", &TrainConfig::shuffle)
      .def_readwrite("with_replacement", &TrainConfig::with_replacement)
      .def_readwrite("reduction", &TrainConfig::reduction)
      .def("validate", &TrainConfig::validate);
  m.def("lr_schedule", &lr_schedule, py::arg("config"), py::arg("epoch"));

  m.def("train",
        [](const std::vector<F64>& images, const std::vector<py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>>& labels,
           const TrainConfig& cfg, const ArchConfig& arch) {
          if (images.size() != labels.size()) throw ContractError("one label array per image");
          std::vector<TrainingExample> data;
          for (std::size_t i = 0; i < images.size(); ++i) {
            auto img = image_from(images[i]);
            auto p = entries_from(labels[i], img.n_z, img.n_x, arch.n_class);
            data.push_back({std::move(img), std::move(p)});
          }
          TrainResult r;
          {
            py::gil_scoped_release release;
            r = train(data, cfg, arch);
          }
          return py::make_tuple(r.params, history_list(r.history));
        },
        py::arg("images"), py::arg("labels"), py::arg("config"), py::arg("arch"),
        "Trains from build_network(arch); returns (network, history) where history rows are "
        "(epoch, iteration, image_id, lr, loss).");

  m.def("evaluate_maps",
        [](const I32& pred, const I32& truth, std::size_t n_class) {
          return eval_dict(summarize(confusion(labels_from(pred, n_class), labels_from(truth, n_class))));
        },
        py::arg("pred"), py::arg("truth"), py::arg("n_class"));

  m.def("run_cell",
        [](const Dataset& ds, std::size_t n_train, Strategy s, std::size_t budget, std::uint64_t seed,
           const TrainConfig& cfg, const ArchConfig& arch) {
          const auto split = split_by_index(ds.size(), n_train);
          CellResult r;
          {
            py::gil_scoped_release release;
            r = run_cell(ds, split, {s, budget, seed}, cfg, arch);
          }
          auto d = eval_dict(r.eval);
          d["network"] = r.train.params;
          d["history"] = history_list(r.train.history);
          return d;
        },
        py::arg("dataset"), py::arg("n_train"), py::arg("strategy"), py::arg("budget"), py::arg("seed"),
        py::arg("config"), py::arg("arch"),
        "Labels the first n_train images, trains, and evaluates on the rest.");
}
