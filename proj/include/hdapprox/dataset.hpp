#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hdapprox/rng.hpp"

namespace hdapprox {

// Rectangular labelled samples. `values` is row-major (size() x features);
// labels index into label_names.
struct Dataset {
  std::size_t features = 0;
  std::vector<double> values;
  std::vector<std::size_t> labels;
  std::vector<std::string> label_names;

  [[nodiscard]] std::size_t size() const noexcept { return labels.size(); }
  [[nodiscard]] std::size_t class_count() const noexcept { return label_names.size(); }
  [[nodiscard]] std::span<const double> row(std::size_t i) const {
    return {values.data() + i * features, features};
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct CsvOptions {
  // Column name, or a signed index; negative indices count from the end
  // ("-1" is the last column).
  std::string label_column = "-1";
  bool header = true;
};

Dataset parse_csv(std::istream& in, const CsvOptions& options = {});
Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {});
// Writes a header row f0..f{n-1},label followed by the samples.
void write_csv(std::ostream& out, const Dataset& data);

// Remaps labels onto `names` (e.g. a model's classes). Unknown labels throw.
Dataset relabel(const Dataset& data, std::span<const std::string> names);

// Per-feature linear bins between the training minimum and maximum.
class Quantizer {
 public:
  Quantizer() = default;
  Quantizer(std::size_t levels, std::vector<std::vector<double>> edges);

  static Quantizer fit(const Dataset& train, std::size_t levels);

  [[nodiscard]] std::size_t levels() const noexcept { return levels_; }
  [[nodiscard]] std::size_t features() const noexcept { return edges_.size(); }
  // L-1 interior edges, or none for a constant training feature.
  [[nodiscard]] std::span<const double> edges(std::size_t feature) const { return edges_[feature]; }

  // Bin index in [0, L); values outside the training range clamp.
  [[nodiscard]] std::uint16_t quantize(std::size_t feature, double value) const;
  [[nodiscard]] std::vector<std::uint16_t> quantize(const Dataset& data) const;

  friend bool operator==(const Quantizer&, const Quantizer&) = default;

 private:
  std::size_t levels_ = 0;
  std::vector<std::vector<double>> edges_;
};

struct SyntheticSpec {
  std::size_t classes = 4;
  std::size_t per_class = 200;
  std::size_t features = 64;
  // Distance between class centroids in units of the per-feature noise sigma.
  double separation = 6.0;
  std::uint64_t seed = kDefaultSeed;
};

// Gaussian clusters with unit per-feature noise. Centroids are drawn so
// that every pair sits exactly `separation` apart.
Dataset gen_synthetic(const SyntheticSpec& spec);

// Stratified split; `holdout` is the fraction of each class moved to the
// second dataset. Row order within each part follows the source order.
std::pair<Dataset, Dataset> split_holdout(const Dataset& data, double holdout, std::uint64_t seed);

}  // namespace hdapprox
