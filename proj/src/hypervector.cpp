#include "hdapprox/hypervector.hpp"

#include <bit>
#include <numeric>
#include <string>

#include "hdapprox/errors.hpp"

namespace hdapprox {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::dimension_mismatch: return "DimensionMismatch";
    case ErrorCode::non_integer_flip_count: return "NonIntegerFlipCount";
    case ErrorCode::zero_vector: return "ZeroVector";
    case ErrorCode::feature_index_out_of_range: return "FeatureIndexOutOfRange";
    case ErrorCode::missing_tie_bits: return "MissingTieBits";
    case ErrorCode::invalid_trunc_depth: return "InvalidTruncDepth";
    case ErrorCode::empty_class: return "EmptyClass";
    case ErrorCode::insufficient_brams: return "InsufficientBrams";
    case ErrorCode::empty_stream: return "EmptyStream";
    case ErrorCode::calibration_out_of_range: return "CalibrationOutOfRange";
    case ErrorCode::parse_error: return "ParseError";
    case ErrorCode::missing_label_column: return "MissingLabelColumn";
    case ErrorCode::version_mismatch: return "VersionMismatch";
    case ErrorCode::corrupt_file: return "CorruptFile";
    case ErrorCode::config_error: return "ConfigError";
    case ErrorCode::io_error: return "IoError";
  }
  return "Unknown";
}

Rng make_stream(std::uint64_t master_seed, Stream stream, std::uint32_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(stream), salt};
  return Rng(seq);
}

void require_valid_dim(std::size_t dim) {
  if (dim == 0 || dim % kWordBits != 0) {
    throw Error(ErrorCode::invalid_argument,
                "hypervector dimension must be a positive multiple of 64, got " + std::to_string(dim));
  }
}

Hypervector::Hypervector(std::size_t dim) : dim_(dim), words_(dim / kWordBits, 0) { require_valid_dim(dim); }

Hypervector Hypervector::random(std::size_t dim, Rng& rng) {
  Hypervector v(dim);
  for (auto& w : v.words_) w = rng();
  return v;
}

Hypervector Hypervector::from_words(std::size_t dim, std::vector<std::uint64_t> words) {
  require_valid_dim(dim);
  if (words.size() != dim / kWordBits) {
    throw Error(ErrorCode::dimension_mismatch, "word count does not match dimension");
  }
  Hypervector v;
  v.dim_ = dim;
  v.words_ = std::move(words);
  return v;
}

void Hypervector::set_bit(std::size_t j, bool value) noexcept {
  const std::uint64_t mask = std::uint64_t{1} << (j % kWordBits);
  if (value) {
    words_[j / kWordBits] |= mask;
  } else {
    words_[j / kWordBits] &= ~mask;
  }
}

std::uint64_t Hypervector::window(std::size_t offset) const noexcept {
  const std::size_t n = words_.size();
  const std::size_t q = (offset / kWordBits) % n;
  const unsigned r = offset % kWordBits;
  if (r == 0) return words_[q];
  return (words_[q] >> r) | (words_[(q + 1) % n] << (kWordBits - r));
}

std::size_t Hypervector::popcount() const noexcept {
  return std::accumulate(words_.begin(), words_.end(), std::size_t{0},
                         [](std::size_t acc, std::uint64_t w) { return acc + std::popcount(w); });
}

Hypervector Hypervector::rotated_left(std::size_t k) const {
  Hypervector out(dim_);
  const std::size_t shift = k % dim_;
  for (std::size_t w = 0; w < words_.size(); ++w) out.words_[w] = window(w * kWordBits + shift);
  return out;
}

Hypervector bind(const Hypervector& a, const Hypervector& b) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::dimension_mismatch, "bind: dimensions differ");
  std::vector<std::uint64_t> words(a.word_count());
  for (std::size_t w = 0; w < words.size(); ++w) words[w] = a.word(w) ^ b.word(w);
  return Hypervector::from_words(a.dim(), std::move(words));
}

std::size_t hamming(const Hypervector& a, const Hypervector& b) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::dimension_mismatch, "hamming: dimensions differ");
  std::size_t distance = 0;
  for (std::size_t w = 0; w < a.word_count(); ++w) distance += std::popcount(a.word(w) ^ b.word(w));
  return distance;
}

}  // namespace hdapprox
