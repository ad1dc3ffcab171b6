#include "seisseg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include "seisseg/error.hpp"

namespace seisseg {
namespace {

// Independent generator streams per image: 0 horizons, 1 impedances, 2 noise.
std::mt19937_64 stream_rng(std::uint64_t image_seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(image_seed),
                    static_cast<std::uint32_t>(image_seed >> 32), stream};
  return std::mt19937_64(seq);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

void rectify(HorizonSet& h, std::size_t min_thickness) {
  const auto t = static_cast<long>(min_thickness);
  const auto n_z = static_cast<long>(h.n_z);
  const auto n_h = h.n_horizons();
  for (std::size_t x = 0; x < h.n_x; ++x) {
    for (std::size_t k = 0; k < n_h; ++k) {
      const long lo = k == 0 ? t : std::lround(h.horizons[k - 1][x]) + t;
      if (std::lround(h.horizons[k][x]) < lo) h.horizons[k][x] = static_cast<double>(lo);
    }
    for (std::size_t k = n_h; k-- > 0;) {
      const long hi = k + 1 == n_h ? n_z - t : std::lround(h.horizons[k + 1][x]) - t;
      if (std::lround(h.horizons[k][x]) > hi) h.horizons[k][x] = static_cast<double>(hi);
    }
  }
}

std::string image_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "img_%04zu.seis", i);
  return buf;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += io::format_double(v[i]);
  }
  return s;
}

std::vector<double> parse_doubles(std::string_view text, const std::string& where) {
  std::vector<double> out;
  if (io::trim(text).empty()) return out;
  for (auto part : io::split(text, ',')) out.push_back(io::parse_double(part, where));
  return out;
}

std::string take(io::KeyValues& kv, const std::string& key, const std::string& source) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw FormatError(source + ": missing key '" + key + "'");
  auto v = it->second;
  kv.erase(it);
  return v;
}

}  // namespace

void GeoModelConfig::validate() const {
  if (n_z == 0 || n_x == 0) throw ConfigError("image dimensions must be positive");
  if (n_horizons < 1) throw ConfigError("at least one horizon is required");
  if (min_thickness < 1) throw ConfigError("min_thickness must be at least 1");
  if (n_horizons * min_thickness >= n_z || (n_horizons + 1) * min_thickness > n_z) {
    throw ConfigError(std::to_string(n_horizons) + " horizons with minimum unit thickness " +
                      std::to_string(min_thickness) + " do not fit in " + std::to_string(n_z) +
                      " rows");
  }
  if (!base_depths.empty() && base_depths.size() != n_horizons) {
    throw ConfigError("base_depths lists " + std::to_string(base_depths.size()) +
                      " depths for " + std::to_string(n_horizons) + " horizons");
  }
  auto range = [](double lo, double hi, const char* what) {
    if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
      throw ConfigError(std::string(what) + " range is empty or not finite");
    }
  };
  range(0.0, dip_max, "dip");
  range(0.0, base_jitter, "base jitter");
  range(fold_amp_min, fold_amp_max, "fold amplitude");
  range(fold_wavelength_min, fold_wavelength_max, "fold wavelength");
  range(impedance_min, impedance_max, "impedance");
  range(contrast_min, contrast_max, "contrast");
  if (fold_amp_min < 0.0) throw ConfigError("fold amplitudes must be nonnegative");
  if (!(fold_wavelength_min > 0.0)) throw ConfigError("fold wavelengths must be positive");
  if (min_folds > max_folds) throw ConfigError("min_folds exceeds max_folds");
  if (!(impedance_min > 0.0)) throw ConfigError("impedances must be positive");
  if (contrast_min < 0.0 || contrast_max >= 1.0) throw ConfigError("contrasts must lie in [0, 1)");
  // above a quarter of the sampling rate the sampled wavelet aliases and loses its zero mean
  if (!(peak_frequency > 0.0 && peak_frequency <= 0.25)) {
    throw ConfigError("peak_frequency must lie in (0, 0.25] cycles per sample");
  }
  if (!(noise >= 0.0)) throw ConfigError("noise level must be nonnegative");
}

io::KeyValues GeoModelConfig::to_key_values() const {
  return {
      {"n_z", std::to_string(n_z)},
      {"n_x", std::to_string(n_x)},
      {"n_horizons", std::to_string(n_horizons)},
      {"base_depths", join_doubles(base_depths)},
      {"base_jitter", io::format_double(base_jitter)},
      {"dip_max", io::format_double(dip_max)},
      {"fold_amp_min", io::format_double(fold_amp_min)},
      {"fold_amp_max", io::format_double(fold_amp_max)},
      {"fold_wavelength_min", io::format_double(fold_wavelength_min)},
      {"fold_wavelength_max", io::format_double(fold_wavelength_max)},
      {"min_folds", std::to_string(min_folds)},
      {"max_folds", std::to_string(max_folds)},
      {"impedance_min", io::format_double(impedance_min)},
      {"impedance_max", io::format_double(impedance_max)},
      {"contrast_min", io::format_double(contrast_min)},
      {"contrast_max", io::format_double(contrast_max)},
      {"peak_frequency", io::format_double(peak_frequency)},
      {"noise", io::format_double(noise)},
      {"min_thickness", std::to_string(min_thickness)},
      {"seed", std::to_string(seed)},
  };
}

GeoModelConfig GeoModelConfig::from_key_values(const io::KeyValues& kv) {
  GeoModelConfig c;
  const std::map<std::string, std::function<void(const std::string&)>> setters = {
      {"n_z", [&](const std::string& v) { c.n_z = io::parse_uint(v, "n_z"); }},
      {"n_x", [&](const std::string& v) { c.n_x = io::parse_uint(v, "n_x"); }},
      {"n_horizons", [&](const std::string& v) { c.n_horizons = io::parse_uint(v, "n_horizons"); }},
      {"base_depths", [&](const std::string& v) { c.base_depths = parse_doubles(v, "base_depths"); }},
      {"base_jitter", [&](const std::string& v) { c.base_jitter = io::parse_double(v, "base_jitter"); }},
      {"dip_max", [&](const std::string& v) { c.dip_max = io::parse_double(v, "dip_max"); }},
      {"fold_amp_min", [&](const std::string& v) { c.fold_amp_min = io::parse_double(v, "fold_amp_min"); }},
      {"fold_amp_max", [&](const std::string& v) { c.fold_amp_max = io::parse_double(v, "fold_amp_max"); }},
      {"fold_wavelength_min",
       [&](const std::string& v) { c.fold_wavelength_min = io::parse_double(v, "fold_wavelength_min"); }},
      {"fold_wavelength_max",
       [&](const std::string& v) { c.fold_wavelength_max = io::parse_double(v, "fold_wavelength_max"); }},
      {"min_folds", [&](const std::string& v) { c.min_folds = io::parse_uint(v, "min_folds"); }},
      {"max_folds", [&](const std::string& v) { c.max_folds = io::parse_uint(v, "max_folds"); }},
      {"impedance_min", [&](const std::string& v) { c.impedance_min = io::parse_double(v, "impedance_min"); }},
      {"impedance_max", [&](const std::string& v) { c.impedance_max = io::parse_double(v, "impedance_max"); }},
      {"contrast_min", [&](const std::string& v) { c.contrast_min = io::parse_double(v, "contrast_min"); }},
      {"contrast_max", [&](const std::string& v) { c.contrast_max = io::parse_double(v, "contrast_max"); }},
      {"peak_frequency",
       [&](const std::string& v) { c.peak_frequency = io::parse_double(v, "peak_frequency"); }},
      {"noise", [&](const std::string& v) { c.noise = io::parse_double(v, "noise"); }},
      {"min_thickness", [&](const std::string& v) { c.min_thickness = io::parse_uint(v, "min_thickness"); }},
      {"seed", [&](const std::string& v) { c.seed = io::parse_uint(v, "seed"); }},
  };
  for (const auto& [key, value] : kv) {
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown geo-model key '" + key + "'");
    try {
      it->second(value);
    } catch (const FormatError& e) {
      throw ConfigError(e.what());
    }
  }
  return c;
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) {
  return master_seed ^ (index * 0x9E3779B97F4A7C15ULL);
}

HorizonSet gen_horizons(const GeoModelConfig& cfg, std::uint64_t image_seed) {
  cfg.validate();
  auto rng = stream_rng(image_seed, 0);
  const auto n_h = cfg.n_horizons;
  const double spacing = static_cast<double>(cfg.n_z) / static_cast<double>(n_h + 1);

  std::vector<double> bases(n_h);
  for (std::size_t k = 0; k < n_h; ++k) {
    const double jitter = uniform(rng, -cfg.base_jitter, cfg.base_jitter) * spacing;
    bases[k] = cfg.base_depths.empty() ? spacing * static_cast<double>(k + 1) + jitter
                                       : cfg.base_depths[k];
  }
  const double dip = uniform(rng, -cfg.dip_max, cfg.dip_max);
  const auto n_folds =
      std::uniform_int_distribution<std::size_t>(cfg.min_folds, cfg.max_folds)(rng);
  struct Fold {
    double amplitude, wavelength, phase;
  };
  std::vector<Fold> folds(n_folds);
  for (auto& f : folds) {
    f.amplitude = uniform(rng, cfg.fold_amp_min, cfg.fold_amp_max);
    f.wavelength = uniform(rng, cfg.fold_wavelength_min, cfg.fold_wavelength_max);
    f.phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  }

  HorizonSet h{cfg.n_z, cfg.n_x, std::vector<std::vector<double>>(n_h, std::vector<double>(cfg.n_x))};
  const double center = static_cast<double>(cfg.n_x) / 2.0;
  for (std::size_t k = 0; k < n_h; ++k) {
    const double dip_k = dip * uniform(rng, 0.75, 1.25);
    std::vector<double> weights(n_folds);
    for (auto& a : weights) a = uniform(rng, 0.5, 1.0);
    for (std::size_t x = 0; x < cfg.n_x; ++x) {
      const double xd = static_cast<double>(x);
      double d = bases[k] + dip_k * (xd - center);
      for (std::size_t f = 0; f < n_folds; ++f) {
        d += weights[f] * folds[f].amplitude *
             std::sin(2.0 * std::numbers::pi * xd / folds[f].wavelength + folds[f].phase);
      }
      h.horizons[k][x] = d;
    }
  }
  rectify(h, cfg.min_thickness);
  return h;
}

std::vector<double> ricker_wavelet(double peak_frequency) {
  if (!(peak_frequency > 0.0)) throw ConfigError("Ricker peak frequency must be positive");
  const double a = std::numbers::pi * peak_frequency;
  const auto half = static_cast<std::size_t>(std::ceil(6.0 / a));
  std::vector<double> w(2 * half + 1);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double t = static_cast<double>(i) - static_cast<double>(half);
    const double u = (a * t) * (a * t);
    w[i] = (1.0 - 2.0 * u) * std::exp(-u);
  }
  return w;
}

std::vector<double> unit_impedances(const GeoModelConfig& cfg, std::size_t n_units,
                                    std::uint64_t image_seed) {
  auto rng = stream_rng(image_seed, 1);
  std::vector<double> imp(n_units);
  if (n_units == 0) return imp;
  imp[0] = uniform(rng, cfg.impedance_min, cfg.impedance_max);
  for (std::size_t k = 1; k < n_units; ++k) {
    const double c = uniform(rng, cfg.contrast_min, cfg.contrast_max);
    const bool up = std::bernoulli_distribution(0.5)(rng);
    double next = imp[k - 1] * (up ? 1.0 + c : 1.0 - c);
    if (next < cfg.impedance_min || next > cfg.impedance_max) {
      next = imp[k - 1] * (up ? 1.0 - c : 1.0 + c);
    }
    imp[k] = std::clamp(next, cfg.impedance_min, cfg.impedance_max);
  }
  return imp;
}

SeismicImage reflectivity(const HorizonSet& h, const std::vector<double>& impedances) {
  if (impedances.size() != h.n_class()) {
    throw ContractError("reflectivity: " + std::to_string(impedances.size()) +
                        " impedances for " + std::to_string(h.n_class()) + " units");
  }
  if (const auto check = validate_horizons(h); !check.ok()) {
    throw ContractError("reflectivity: invalid horizon set: " + check.message());
  }
  SeismicImage r(h.n_z, h.n_x);
  for (std::size_t k = 0; k < h.n_horizons(); ++k) {
    const double above = impedances[k];
    const double below = impedances[k + 1];
    const double coeff = (below - above) / (below + above);
    for (std::size_t x = 0; x < h.n_x; ++x) {
      const auto row = static_cast<std::size_t>(std::lround(h.horizons[k][x]));
      if (row < h.n_z) r.at(row, x) += coeff;
    }
  }
  return r;
}

SeismicImage gen_seismic(const HorizonSet& h, const GeoModelConfig& cfg, std::uint64_t image_seed,
                         ImageStats* raw_stats) {
  const auto refl = reflectivity(h, unit_impedances(cfg, h.n_class(), image_seed));
  const auto wavelet = ricker_wavelet(cfg.peak_frequency);
  const auto half = static_cast<long>(wavelet.size() / 2);
  const auto n_z = static_cast<long>(h.n_z);

  SeismicImage trace(h.n_z, h.n_x);
  for (long z0 = 0; z0 < n_z; ++z0) {
    for (std::size_t x = 0; x < h.n_x; ++x) {
      const double r = refl.at(static_cast<std::size_t>(z0), x);
      if (r == 0.0) continue;
      for (long z = std::max(0L, z0 - half); z < std::min(n_z, z0 + half + 1); ++z) {
        trace.at(static_cast<std::size_t>(z), x) += r * wavelet[static_cast<std::size_t>(z - z0 + half)];
      }
    }
  }

  const double signal_std = image_stats(trace).std;
  if (cfg.noise > 0.0 && signal_std > 0.0) {
    auto rng = stream_rng(image_seed, 2);
    std::normal_distribution<double> noise(0.0, cfg.noise * signal_std);
    for (double& v : trace.values) v += noise(rng);
  }
  if (raw_stats) *raw_stats = image_stats(trace);
  return standardize(trace);
}

Dataset gen_dataset(const GeoModelConfig& cfg, std::size_t n_ex, std::uint64_t seed) {
  if (n_ex < 1) throw ConfigError("a dataset needs at least one image");
  Dataset ds;
  ds.config = cfg;
  ds.config.seed = seed;
  ds.config.validate();
  for (std::size_t i = 0; i < n_ex; ++i) {
    const auto s = derive_seed(seed, i);
    ds.horizons.push_back(gen_horizons(ds.config, s));
    ImageStats stats;
    ds.images.push_back(gen_seismic(ds.horizons.back(), ds.config, s, &stats));
    ds.raw_stats.push_back(stats);
  }
  return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "images");
  for (std::size_t i = 0; i < ds.size(); ++i) save_seis(ds.images[i], dir / "images" / image_name(i));

  {
    std::ofstream out(dir / "horizons.csv", std::ios::binary);
    if (!out) throw FormatError((dir / "horizons.csv").string() + ": cannot open for writing");
    write_horizon_picks(out, ds.horizons);
  }

  auto kv = ds.config.to_key_values();
  kv["n_ex"] = std::to_string(ds.size());
  std::vector<double> means, stds;
  for (const auto& s : ds.raw_stats) {
    means.push_back(s.mean);
    stds.push_back(s.std);
  }
  kv["raw_mean"] = join_doubles(means);
  kv["raw_std"] = join_doubles(stds);
  std::ofstream meta(dir / "meta.txt", std::ios::binary);
  if (!meta) throw FormatError((dir / "meta.txt").string() + ": cannot open for writing");
  io::write_key_values(meta, kv);
}

Dataset load_dataset(const std::filesystem::path& dir) {
  const auto meta_path = (dir / "meta.txt").string();
  std::ifstream meta(meta_path, std::ios::binary);
  if (!meta) throw FormatError(meta_path + ": cannot open file");
  auto kv = io::parse_key_values(meta, meta_path);

  Dataset ds;
  const auto n_ex = io::parse_uint(take(kv, "n_ex", meta_path), meta_path);
  const auto means = parse_doubles(take(kv, "raw_mean", meta_path), meta_path);
  const auto stds = parse_doubles(take(kv, "raw_std", meta_path), meta_path);
  if (means.size() != n_ex || stds.size() != n_ex) {
    throw FormatError(meta_path + ": normalization statistics do not cover " +
                      std::to_string(n_ex) + " images");
  }
  try {
    ds.config = GeoModelConfig::from_key_values(kv);
    ds.config.validate();
  } catch (const ConfigError& e) {
    throw FormatError(meta_path + ": " + e.what());
  }
  for (std::size_t i = 0; i < n_ex; ++i) {
    const auto path = dir / "images" / image_name(i);
    ds.images.push_back(load_seis(path));
    if (ds.images.back().n_z != ds.config.n_z || ds.images.back().n_x != ds.config.n_x) {
      throw FormatError(path.string() + ": image size differs from meta.txt");
    }
    ds.raw_stats.push_back({means[i], stds[i]});
  }
  const auto picks_path = (dir / "horizons.csv").string();
  std::ifstream picks(picks_path, std::ios::binary);
  if (!picks) throw FormatError(picks_path + ": cannot open file");
  ds.horizons = read_horizon_picks(picks, picks_path, n_ex, ds.config.n_z, ds.config.n_x,
                                   ds.config.n_horizons);
  return ds;
}

Split split_by_index(std::size_t n_ex, std::size_t n_train) {
  if (n_train > n_ex) {
    throw ConfigError("cannot train on " + std::to_string(n_train) + " of " +
                      std::to_string(n_ex) + " images");
  }
  Split s;
  for (std::size_t i = 0; i < n_ex; ++i) (i < n_train ? s.train : s.test).push_back(i);
  return s;
}

}  // namespace seisseg
