#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace seisseg {

using ClassId = std::int32_t;

/// Interpreted horizons of one 2-D section. Each horizon holds one real
/// depth (in rows) per column; horizons are ordered top to bottom.
struct HorizonSet {
  std::size_t n_z = 0;
  std::size_t n_x = 0;
  std::vector<std::vector<double>> horizons;

  std::size_t n_horizons() const noexcept { return horizons.size(); }
  std::size_t n_class() const noexcept { return horizons.size() + 1; }

  friend bool operator==(const HorizonSet&, const HorizonSet&) = default;
};

struct HorizonViolation {
  std::size_t horizon = 0;
  std::size_t column = 0;
  std::string reason;
};

/// Result of validate_horizons: empty when the set is valid.
struct HorizonCheck {
  std::optional<HorizonViolation> violation;

  bool ok() const noexcept { return !violation.has_value(); }
  std::string message() const;
};

/// Checks dimensions, bounds (every depth in [0, n_z)) and ordering
/// (depth_k(x) <= depth_{k+1}(x)). Reports the first violation in
/// column-major scan order instead of throwing.
HorizonCheck validate_horizons(const HorizonSet& h);

/// One class id per pixel, row-major (n_z rows by n_x columns).
struct LabelImage {
  std::size_t n_z = 0;
  std::size_t n_x = 0;
  std::size_t n_class = 0;
  std::vector<ClassId> classes;

  ClassId at(std::size_t row, std::size_t column) const { return classes[row * n_x + column]; }

  friend bool operator==(const LabelImage&, const LabelImage&) = default;
};

/// Class of pixel (z, x) is the number of horizons whose rounded depth at x
/// is <= z, so a horizon's own row belongs to the unit below it.
/// Throws ContractError carrying the violation report for invalid sets.
LabelImage rasterize(const HorizonSet& h);

struct LabelEntry {
  std::size_t row = 0;
  std::size_t column = 0;
  ClassId class_id = 0;

  friend bool operator==(const LabelEntry&, const LabelEntry&) = default;
};

/// The labeled subset of an image. Entries are kept in row-major order.
struct PartialLabels {
  std::size_t n_z = 0;
  std::size_t n_x = 0;
  std::size_t n_class = 0;
  std::vector<LabelEntry> entries;

  friend bool operator==(const PartialLabels&, const PartialLabels&) = default;
};

/// Throws ContractError on out-of-bounds, duplicate, or out-of-range entries.
void validate_partial_labels(const PartialLabels& labels);

/// Number of manual annotation clicks an interpreter may spend on one image.
class AnnotationBudget {
 public:
  explicit AnnotationBudget(std::size_t n_samp);
  std::size_t n_samp() const noexcept { return n_samp_; }

 private:
  std::size_t n_samp_;
};

enum class Strategy { scattered, columns };

std::string_view to_string(Strategy s);
/// Accepts "scattered" or "columns"; throws ConfigError otherwise.
Strategy parse_strategy(std::string_view name);

/// Per-class pixel quotas for scattered sampling: floor(n_samp / n_class)
/// each, with the remainder going one by one to the lowest class ids.
std::vector<std::size_t> scattered_quotas(std::size_t n_samp, std::size_t n_class);

/// Picks each class's quota of pixels uniformly without replacement.
PartialLabels sample_scattered(const LabelImage& full, AnnotationBudget budget,
                               std::uint64_t seed);

/// Picks n_samp / n_horizons distinct columns uniformly and labels every
/// pixel in them. Each column costs one pick per horizon.
PartialLabels sample_columns(const HorizonSet& h, AnnotationBudget budget, std::uint64_t seed);

/// Labeled pixel count the corresponding sampler produces for this budget.
std::size_t annotation_yield(Strategy strategy, AnnotationBudget budget, const HorizonSet& h);

/// Dispatches to the sampler for `strategy`.
PartialLabels sample_labels(Strategy strategy, const HorizonSet& h, AnnotationBudget budget,
                            std::uint64_t seed);

// CSV interchange. Horizon picks: image_id,horizon_id,column,depth.
// Partial labels: row,column,class_id. Header row required.

void write_horizon_picks(std::ostream& out, std::span<const HorizonSet> images);
/// Reads picks for `n_images` sections of the given geometry; every
/// (image, horizon, column) must appear exactly once.
std::vector<HorizonSet> read_horizon_picks(std::istream& in, const std::string& source,
                                           std::size_t n_images, std::size_t n_z,
                                           std::size_t n_x, std::size_t n_horizons);

void write_partial_labels(std::ostream& out, const PartialLabels& labels);
PartialLabels read_partial_labels(std::istream& in, const std::string& source, std::size_t n_z,
                                  std::size_t n_x, std::size_t n_class);

}  // namespace seisseg
