#include "seisseg/labels.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <tuple>
#include <utility>

#include "seisseg/error.hpp"
#include "seisseg/io.hpp"

namespace seisseg {
namespace {

// Rounded horizon rows for one column, in horizon order.
std::vector<long> rounded_rows(const HorizonSet& h, std::size_t column) {
  std::vector<long> rows(h.n_horizons());
  for (std::size_t k = 0; k < h.n_horizons(); ++k) rows[k] = std::lround(h.horizons[k][column]);
  return rows;
}

void fill_column(const HorizonSet& h, std::size_t column, std::span<ClassId> out) {
  const auto rows = rounded_rows(h, column);
  for (std::size_t z = 0; z < h.n_z; ++z) {
    ClassId c = 0;
    for (long r : rows) c += r <= static_cast<long>(z) ? 1 : 0;
    out[z] = c;
  }
}

// First `count` entries of a uniformly shuffled copy of `pool`.
template <typename T>
std::vector<T> draw_without_replacement(std::vector<T> pool, std::size_t count,
                                        std::mt19937_64& rng) {
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(count);
  return pool;
}

void sort_row_major(std::vector<LabelEntry>& entries) {
  std::sort(entries.begin(), entries.end(), [](const LabelEntry& a, const LabelEntry& b) {
    return std::tie(a.row, a.column) < std::tie(b.row, b.column);
  });
}

std::size_t column_cost(const HorizonSet& h) {
  if (h.n_horizons() == 0) {
    throw ContractError("column annotation needs at least one horizon to pick");
  }
  return h.n_horizons();
}

std::size_t columns_for_budget(const HorizonSet& h, AnnotationBudget budget) {
  const auto cost = column_cost(h);
  if (budget.n_samp() % cost != 0) {
    throw ContractError("budget " + std::to_string(budget.n_samp()) +
                        " is not a multiple of the per-column cost " + std::to_string(cost) +
                        " (one pick per horizon)");
  }
  const auto n_columns = budget.n_samp() / cost;
  if (n_columns > h.n_x) {
    throw ContractError("budget " + std::to_string(budget.n_samp()) + " requests " +
                        std::to_string(n_columns) + " columns but the image has only " +
                        std::to_string(h.n_x));
  }
  return n_columns;
}

std::string expect_header(std::istream& in, const std::string& source, std::string_view header) {
  std::string line;
  if (!std::getline(in, line) || io::trim(line) != header) {
    throw FormatError(source + ":1: expected header '" + std::string(header) + "'");
  }
  return line;
}

}  // namespace

std::string HorizonCheck::message() const {
  if (!violation) return "ok";
  return "horizon " + std::to_string(violation->horizon) + ", column " +
         std::to_string(violation->column) + ": " + violation->reason;
}

HorizonCheck validate_horizons(const HorizonSet& h) {
  for (std::size_t k = 0; k < h.n_horizons(); ++k) {
    if (h.horizons[k].size() != h.n_x) {
      return {HorizonViolation{k, 0,
                               "has " + std::to_string(h.horizons[k].size()) +
                                   " depths for " + std::to_string(h.n_x) + " columns"}};
    }
  }
  const auto n_z = static_cast<double>(h.n_z);
  for (std::size_t x = 0; x < h.n_x; ++x) {
    for (std::size_t k = 0; k < h.n_horizons(); ++k) {
      const double d = h.horizons[k][x];
      if (!(d >= 0.0 && d < n_z)) {
        return {HorizonViolation{k, x, "depth " + io::format_double(d) + " outside [0, " +
                                           std::to_string(h.n_z) + ")"}};
      }
      if (k + 1 < h.n_horizons() && h.horizons[k + 1][x] < d) {
        return {HorizonViolation{k, x, "crosses horizon " + std::to_string(k + 1)}};
      }
    }
  }
  return {};
}

LabelImage rasterize(const HorizonSet& h) {
  if (const auto check = validate_horizons(h); !check.ok()) {
    throw ContractError("rasterize: invalid horizon set: " + check.message());
  }
  LabelImage img{h.n_z, h.n_x, h.n_class(), std::vector<ClassId>(h.n_z * h.n_x)};
  std::vector<ClassId> column(h.n_z);
  for (std::size_t x = 0; x < h.n_x; ++x) {
    fill_column(h, x, column);
    for (std::size_t z = 0; z < h.n_z; ++z) img.classes[z * h.n_x + x] = column[z];
  }
  return img;
}

void validate_partial_labels(const PartialLabels& labels) {
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& e : labels.entries) {
    if (e.row >= labels.n_z || e.column >= labels.n_x) {
      throw ContractError("label entry (" + std::to_string(e.row) + ", " +
                          std::to_string(e.column) + ") outside " + std::to_string(labels.n_z) +
                          "x" + std::to_string(labels.n_x) + " image");
    }
    if (e.class_id < 0 || static_cast<std::size_t>(e.class_id) >= labels.n_class) {
      throw ContractError("label entry (" + std::to_string(e.row) + ", " +
                          std::to_string(e.column) + ") has class " +
                          std::to_string(e.class_id) + " outside [0, " +
                          std::to_string(labels.n_class) + ")");
    }
    if (!seen.emplace(e.row, e.column).second) {
      throw ContractError("duplicate label entry (" + std::to_string(e.row) + ", " +
                          std::to_string(e.column) + ")");
    }
  }
}

AnnotationBudget::AnnotationBudget(std::size_t n_samp) : n_samp_(n_samp) {
  if (n_samp == 0) throw ConfigError("annotation budget must be at least 1");
}

std::string_view to_string(Strategy s) {
  return s == Strategy::scattered ? "scattered" : "columns";
}

Strategy parse_strategy(std::string_view name) {
  if (name == "scattered") return Strategy::scattered;
  if (name == "columns") return Strategy::columns;
  throw ConfigError("unknown annotation strategy '" + std::string(name) +
                    "' (expected scattered or columns)");
}

std::vector<std::size_t> scattered_quotas(std::size_t n_samp, std::size_t n_class) {
  if (n_class == 0) throw ContractError("scattered sampling needs at least one class");
  std::vector<std::size_t> quotas(n_class, n_samp / n_class);
  for (std::size_t c = 0; c < n_samp % n_class; ++c) ++quotas[c];
  return quotas;
}

PartialLabels sample_scattered(const LabelImage& full, AnnotationBudget budget,
                               std::uint64_t seed) {
  const auto quotas = scattered_quotas(budget.n_samp(), full.n_class);
  std::vector<std::vector<std::size_t>> pools(full.n_class);
  for (std::size_t i = 0; i < full.classes.size(); ++i) {
    const auto c = full.classes[i];
    if (c < 0 || static_cast<std::size_t>(c) >= full.n_class) {
      throw ContractError("label image holds class " + std::to_string(c) + " outside [0, " +
                          std::to_string(full.n_class) + ")");
    }
    pools[static_cast<std::size_t>(c)].push_back(i);
  }
  for (std::size_t c = 0; c < full.n_class; ++c) {
    if (pools[c].size() < quotas[c]) {
      throw ContractError("class " + std::to_string(c) + " has " + std::to_string(pools[c].size()) +
                          " pixels available but its quota is " + std::to_string(quotas[c]));
    }
  }

  std::mt19937_64 rng(seed);
  PartialLabels out{full.n_z, full.n_x, full.n_class, {}};
  out.entries.reserve(budget.n_samp());
  for (std::size_t c = 0; c < full.n_class; ++c) {
    for (std::size_t idx : draw_without_replacement(std::move(pools[c]), quotas[c], rng)) {
      out.entries.push_back({idx / full.n_x, idx % full.n_x, static_cast<ClassId>(c)});
    }
  }
  sort_row_major(out.entries);
  return out;
}

PartialLabels sample_columns(const HorizonSet& h, AnnotationBudget budget, std::uint64_t seed) {
  const auto n_columns = columns_for_budget(h, budget);
  if (const auto check = validate_horizons(h); !check.ok()) {
    throw ContractError("sample_columns: invalid horizon set: " + check.message());
  }
  std::vector<std::size_t> all(h.n_x);
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  const auto chosen = draw_without_replacement(std::move(all), n_columns, rng);

  PartialLabels out{h.n_z, h.n_x, h.n_class(), {}};
  out.entries.reserve(n_columns * h.n_z);
  std::vector<ClassId> column(h.n_z);
  for (std::size_t x : chosen) {
    fill_column(h, x, column);
    for (std::size_t z = 0; z < h.n_z; ++z) out.entries.push_back({z, x, column[z]});
  }
  sort_row_major(out.entries);
  return out;
}

std::size_t annotation_yield(Strategy strategy, AnnotationBudget budget, const HorizonSet& h) {
  if (strategy == Strategy::scattered) return budget.n_samp();
  return columns_for_budget(h, budget) * h.n_z;
}

PartialLabels sample_labels(Strategy strategy, const HorizonSet& h, AnnotationBudget budget,
                            std::uint64_t seed) {
  if (strategy == Strategy::columns) return sample_columns(h, budget, seed);
  return sample_scattered(rasterize(h), budget, seed);
}

void write_horizon_picks(std::ostream& out, std::span<const HorizonSet> images) {
  out << "image_id,horizon_id,column,depth\n";
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto& h = images[i];
    for (std::size_t k = 0; k < h.n_horizons(); ++k) {
      for (std::size_t x = 0; x < h.horizons[k].size(); ++x) {
        out << i << ',' << k << ',' << x << ',' << io::format_double(h.horizons[k][x]) << '\n';
      }
    }
  }
}

std::vector<HorizonSet> read_horizon_picks(std::istream& in, const std::string& source,
                                           std::size_t n_images, std::size_t n_z,
                                           std::size_t n_x, std::size_t n_horizons) {
  expect_header(in, source, "image_id,horizon_id,column,depth");
  std::vector<HorizonSet> sets(n_images);
  std::vector<std::vector<std::vector<bool>>> seen(
      n_images, std::vector<std::vector<bool>>(n_horizons, std::vector<bool>(n_x, false)));
  for (auto& h : sets) {
    h.n_z = n_z;
    h.n_x = n_x;
    h.horizons.assign(n_horizons, std::vector<double>(n_x, 0.0));
  }
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (io::trim(line).empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    const auto f = io::split(line, ',');
    if (f.size() != 4) throw FormatError(where + ": expected 4 fields");
    const auto img = io::parse_uint(f[0], where);
    const auto k = io::parse_uint(f[1], where);
    const auto x = io::parse_uint(f[2], where);
    if (img >= n_images || k >= n_horizons || x >= n_x) {
      throw FormatError(where + ": pick (" + std::string(f[0]) + ", " + std::string(f[1]) + ", " +
                        std::string(f[2]) + ") outside the dataset geometry");
    }
    if (seen[img][k][x]) throw FormatError(where + ": duplicate pick");
    seen[img][k][x] = true;
    sets[img].horizons[k][x] = io::parse_double(f[3], where);
  }
  for (std::size_t i = 0; i < n_images; ++i) {
    for (std::size_t k = 0; k < n_horizons; ++k) {
      const auto& s = seen[i][k];
      if (const auto it = std::find(s.begin(), s.end(), false); it != s.end()) {
        throw FormatError(source + ": missing pick for image " + std::to_string(i) + ", horizon " +
                          std::to_string(k) + ", column " + std::to_string(it - s.begin()));
      }
    }
  }
  return sets;
}

void write_partial_labels(std::ostream& out, const PartialLabels& labels) {
  out << "row,column,class_id\n";
  for (const auto& e : labels.entries) out << e.row << ',' << e.column << ',' << e.class_id << '\n';
}

PartialLabels read_partial_labels(std::istream& in, const std::string& source, std::size_t n_z,
                                  std::size_t n_x, std::size_t n_class) {
  expect_header(in, source, "row,column,class_id");
  PartialLabels labels{n_z, n_x, n_class, {}};
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (io::trim(line).empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    const auto f = io::split(line, ',');
    if (f.size() != 3) throw FormatError(where + ": expected 3 fields");
    labels.entries.push_back({io::parse_uint(f[0], where), io::parse_uint(f[1], where),
                              static_cast<ClassId>(io::parse_int(f[2], where))});
  }
  try {
    validate_partial_labels(labels);
  } catch (const ContractError& e) {
    throw FormatError(source + ": " + e.what());
  }
  sort_row_major(labels.entries);
  return labels;
}

}  // namespace seisseg
