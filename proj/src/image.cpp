#include "seisseg/image.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "seisseg/error.hpp"
#include "seisseg/io.hpp"

namespace seisseg {

Tensor SeismicImage::as_tensor() const { return Tensor({1, n_z, n_x}, values); }

ImageStats image_stats(const SeismicImage& image) {
  ImageStats s;
  if (image.values.empty()) return s;
  const auto n = static_cast<double>(image.values.size());
  for (double v : image.values) s.mean += v;
  s.mean /= n;
  double var = 0.0;
  for (double v : image.values) var += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(var / n);
  return s;
}

SeismicImage standardize(const SeismicImage& image) {
  const auto s = image_stats(image);
  SeismicImage out = image;
  const double inv = s.std > 0.0 ? 1.0 / s.std : 1.0;
  for (double& v : out.values) v = (v - s.mean) * inv;
  return out;
}

void write_seis(std::ostream& out, const SeismicImage& image) {
  out << "SEIS1\n" << image.n_z << ' ' << image.n_x << '\n';
  io::write_le_doubles(out, image.values);
}

SeismicImage read_seis(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line) || line != "SEIS1") {
    throw FormatError(source + ": bad magic at byte offset 0 (expected SEIS1)");
  }
  const auto header_offset = line.size() + 1;
  if (!std::getline(in, line)) {
    throw FormatError(source + ": missing dimensions at byte offset " +
                      std::to_string(header_offset));
  }
  const auto dims = io::split(io::trim(line), ' ');
  if (dims.size() != 2) {
    throw FormatError(source + ": malformed dimensions line at byte offset " +
                      std::to_string(header_offset));
  }
  const auto n_z = io::parse_uint(dims[0], source);
  const auto n_x = io::parse_uint(dims[1], source);
  SeismicImage image(n_z, n_x);
  io::read_le_doubles(in, image.values, source);
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError(source + ": trailing bytes after " + std::to_string(n_z * n_x) + " samples");
  }
  return image;
}

void save_seis(const SeismicImage& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(path.string() + ": cannot open for writing");
  write_seis(out, image);
  if (!out) throw FormatError(path.string() + ": write failed");
}

SeismicImage load_seis(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string() + ": cannot open file");
  return read_seis(in, path.string());
}

}  // namespace seisseg
