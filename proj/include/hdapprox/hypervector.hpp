#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hdapprox/rng.hpp"

namespace hdapprox {

inline constexpr std::size_t kWordBits = 64;

// Dense binary hypervector packed LSB-first into 64-bit words: coordinate j
// lives in words()[j / 64], bit j % 64. The dimension is always a positive
// multiple of 64, so there are no padding bits to mask.
class Hypervector {
 public:
  Hypervector() = default;
  explicit Hypervector(std::size_t dim);

  static Hypervector random(std::size_t dim, Rng& rng);
  static Hypervector from_words(std::size_t dim, std::vector<std::uint64_t> words);

  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] std::size_t word_count() const noexcept { return words_.size(); }
  [[nodiscard]] bool empty() const noexcept { return dim_ == 0; }

  [[nodiscard]] bool bit(std::size_t j) const noexcept {
    return (words_[j / kWordBits] >> (j % kWordBits)) & 1U;
  }
  void set_bit(std::size_t j, bool value) noexcept;
  void flip(std::size_t j) noexcept { words_[j / kWordBits] ^= std::uint64_t{1} << (j % kWordBits); }

  [[nodiscard]] std::span<const std::uint64_t> words() const noexcept { return words_; }
  [[nodiscard]] std::uint64_t word(std::size_t w) const noexcept { return words_[w]; }

  // 64 consecutive coordinates starting at cyclic position `offset`:
  // bit b of the result is coordinate (offset + b) mod dim.
  [[nodiscard]] std::uint64_t window(std::size_t offset) const noexcept;

  [[nodiscard]] std::size_t popcount() const noexcept;

  // result[j] = (*this)[(j + k) mod dim]
  [[nodiscard]] Hypervector rotated_left(std::size_t k) const;

  friend bool operator==(const Hypervector&, const Hypervector&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<std::uint64_t> words_;
};

// Binding is elementwise XOR.
Hypervector bind(const Hypervector& a, const Hypervector& b);

std::size_t hamming(const Hypervector& a, const Hypervector& b);

// Throws invalid_argument unless dim is a positive multiple of 64.
void require_valid_dim(std::size_t dim);

}  // namespace hdapprox
