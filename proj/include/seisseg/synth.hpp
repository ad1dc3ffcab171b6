#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "seisseg/image.hpp"
#include "seisseg/io.hpp"
#include "seisseg/labels.hpp"

namespace seisseg {

/// Layered-earth model used to synthesize sedimentary sections.
///
/// Horizon k at column x is
///   base_k + dip_k * (x - n_x/2) + sum_f a_kf * A_f * sin(2 pi x / L_f + phi_f)
/// where the dip and the 2-4 folds (A_f, L_f, phi_f) are drawn once per image
/// and perturbed per horizon, then rectified so every unit is at least
/// min_thickness rows thick.
struct GeoModelConfig {
  std::size_t n_z = 128;
  std::size_t n_x = 256;
  std::size_t n_horizons = 5;
  /// Mean depth (rows) of each horizon; empty means evenly spaced, jittered.
  std::vector<double> base_depths;
  /// Random shift of generated base depths, as a fraction of the spacing.
  double base_jitter = 0.3;
  /// Dips are drawn from [-dip_max, dip_max] rows per column.
  double dip_max = 0.06;
  double fold_amp_min = 1.0;
  double fold_amp_max = 6.0;
  double fold_wavelength_min = 48.0;
  double fold_wavelength_max = 384.0;
  std::size_t min_folds = 2;
  std::size_t max_folds = 4;
  /// Acoustic impedance of the top unit is drawn from [impedance_min,
  /// impedance_max]; each deeper unit changes it by a relative contrast in
  /// [contrast_min, contrast_max] with random sign.
  double impedance_min = 4.0;
  double impedance_max = 8.0;
  double contrast_min = 0.25;
  double contrast_max = 0.5;
  /// Ricker peak frequency in cycles per sample, at most 0.25.
  double peak_frequency = 0.08;
  /// Gaussian noise std relative to the clean signal std.
  double noise = 0.1;
  std::size_t min_thickness = 2;
  std::uint64_t seed = 0;

  /// Throws ConfigError for invalid ranges or when n_horizons units of
  /// min_thickness rows cannot fit in n_z.
  void validate() const;

  io::KeyValues to_key_values() const;
  /// Unknown keys raise ConfigError.
  static GeoModelConfig from_key_values(const io::KeyValues& kv);
};

/// seed XOR (index * 0x9E3779B97F4A7C15), arithmetic mod 2^64.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index);

HorizonSet gen_horizons(const GeoModelConfig& cfg, std::uint64_t image_seed);

/// Zero-phase Ricker wavelet (1 - 2 (pi f t)^2) exp(-(pi f t)^2) sampled at
/// integer t in [-half, half] with half = ceil(6 / (pi f)). Peak 1 at the
/// center sample.
std::vector<double> ricker_wavelet(double peak_frequency);

/// Impedance of each of n_units units, top first.
std::vector<double> unit_impedances(const GeoModelConfig& cfg, std::size_t n_units,
                                    std::uint64_t image_seed);

/// Normal-incidence reflection coefficients (I_below - I_above) /
/// (I_below + I_above), placed on the first row of each lower unit.
SeismicImage reflectivity(const HorizonSet& h, const std::vector<double>& impedances);

/// Reflectivity convolved column by column with the Ricker wavelet, plus
/// noise, standardized to zero mean and unit variance. Also returns the
/// pre-standardization statistics when `raw_stats` is non-null.
SeismicImage gen_seismic(const HorizonSet& h, const GeoModelConfig& cfg, std::uint64_t image_seed,
                         ImageStats* raw_stats = nullptr);

struct Dataset {
  GeoModelConfig config;
  std::vector<SeismicImage> images;
  std::vector<HorizonSet> horizons;
  std::vector<ImageStats> raw_stats;

  std::size_t size() const noexcept { return images.size(); }
};

/// n_ex independent sections; image i uses derive_seed(seed, i).
Dataset gen_dataset(const GeoModelConfig& cfg, std::size_t n_ex, std::uint64_t seed);

/// Writes images/img_####.seis, horizons.csv and meta.txt into `dir`.
void save_dataset(const Dataset& ds, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

/// Index split: the first n_train images train, the rest test.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};
Split split_by_index(std::size_t n_ex, std::size_t n_train);

}  // namespace seisseg
