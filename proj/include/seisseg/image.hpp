#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "seisseg/tensor.hpp"

namespace seisseg {

/// A 2-D seismic section: n_z rows (depth) by n_x columns, row-major.
struct SeismicImage {
  std::size_t n_z = 0;
  std::size_t n_x = 0;
  std::vector<double> values;

  SeismicImage() = default;
  SeismicImage(std::size_t rows, std::size_t cols, double fill = 0.0)
      : n_z(rows), n_x(cols), values(rows * cols, fill) {}

  double& at(std::size_t z, std::size_t x) { return values[z * n_x + x]; }
  double at(std::size_t z, std::size_t x) const { return values[z * n_x + x]; }

  /// Single-channel (1, n_z, n_x) tensor copy.
  Tensor as_tensor() const;

  friend bool operator==(const SeismicImage&, const SeismicImage&) = default;
};

struct ImageStats {
  double mean = 0.0;
  double std = 0.0;
};

ImageStats image_stats(const SeismicImage& image);

/// Shifts to zero mean and scales to unit (population) standard deviation.
/// A constant image is only shifted.
SeismicImage standardize(const SeismicImage& image);

// Image file: "SEIS1\n", "n_z n_x\n", then n_z*n_x little-endian doubles.
void write_seis(std::ostream& out, const SeismicImage& image);
SeismicImage read_seis(std::istream& in, const std::string& source);
void save_seis(const SeismicImage& image, const std::filesystem::path& path);
SeismicImage load_seis(const std::filesystem::path& path);

}  // namespace seisseg
