#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hdapprox/hypervector.hpp"

namespace hdapprox {

// Codewords for L quantization bins. levels[m + 1] differs from levels[m] in
// exactly dim / (2L) coordinates, and no coordinate is flipped twice across
// the table, so hamming(levels[i], levels[j]) = |i - j| * flips_per_step.
class LevelTable {
 public:
  LevelTable() = default;

  static LevelTable generate(std::size_t dim, std::size_t levels, Rng& rng);
  // Rebuilds a table from stored rows (model loading). Validates shape only.
  static LevelTable from_rows(std::vector<Hypervector> rows);

  [[nodiscard]] std::size_t levels() const noexcept { return rows_.size(); }
  [[nodiscard]] std::size_t dim() const noexcept { return rows_.empty() ? 0 : rows_.front().dim(); }
  [[nodiscard]] std::size_t flips_per_step() const noexcept { return dim() / (2 * levels()); }

  [[nodiscard]] const Hypervector& operator[](std::size_t level) const { return rows_[level]; }
  [[nodiscard]] const std::vector<Hypervector>& rows() const noexcept { return rows_; }

  friend bool operator==(const LevelTable&, const LevelTable&) = default;

 private:
  std::vector<Hypervector> rows_;
};

// Position hypervectors derived from one stored seed: id(k) is the seed
// rotated left by k. Only the seed is materialized.
class IdTable {
 public:
  IdTable() = default;
  IdTable(Hypervector seed, std::size_t features);

  static IdTable generate(std::size_t dim, std::size_t features, Rng& rng);

  [[nodiscard]] std::size_t dim() const noexcept { return seed_.dim(); }
  [[nodiscard]] std::size_t features() const noexcept { return features_; }
  [[nodiscard]] const Hypervector& seed() const noexcept { return seed_; }

  [[nodiscard]] Hypervector id(std::size_t feature) const { return seed_.rotated_left(feature % dim()); }

  // Word `w` of id(feature) without materializing the rotation.
  [[nodiscard]] std::uint64_t word(std::size_t feature, std::size_t w) const noexcept {
    return seed_.window((w * kWordBits + feature) % seed_.dim());
  }

  friend bool operator==(const IdTable&, const IdTable&) = default;

 private:
  Hypervector seed_;
  std::size_t features_ = 0;
};

}  // namespace hdapprox
