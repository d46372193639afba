#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hdapprox/hypervector.hpp"
#include "hdapprox/tables.hpp"

namespace hdapprox {

// Result of bundling the bound bits of one sample, one integer per
// dimension. Truncated adder trees produce values scaled down by `scale`
// (= 2^(k-1)); the scale is recorded, never applied.
struct EncodedVector {
  std::vector<std::uint32_t> values;
  std::uint32_t scale = 1;

  [[nodiscard]] std::size_t dim() const noexcept { return values.size(); }
  friend bool operator==(const EncodedVector&, const EncodedVector&) = default;
};

enum class Scheme : std::uint8_t { exact = 0, maj = 1, maj2 = 2, overfeed = 3, trunc = 4 };

// What a user asks for on the command line: `exact`, `maj`, `maj2`,
// `overfeed` or `trunc:<k>`.
struct EncoderSpec {
  Scheme scheme = Scheme::exact;
  unsigned trunc_stages = 0;  // k; only meaningful for Scheme::trunc

  static EncoderSpec parse(std::string_view text);
  [[nodiscard]] std::string name() const;

  friend bool operator==(const EncoderSpec&, const EncoderSpec&) = default;
};

// The six variants compared throughout: exact, maj, maj2, overfeed, trunc:3, trunc:4.
std::vector<EncoderSpec> standard_encoders();

// A spec plus the per-dimension tie-break designations of the majority LUTs.
struct EncoderConfig {
  EncoderSpec spec;
  Hypervector tie_stage1;  // maj, maj2
  Hypervector tie_stage2;  // maj2

  [[nodiscard]] Scheme scheme() const noexcept { return spec.scheme; }
  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

// Draws tie bits from the master seed's tie sub-streams as the scheme needs.
EncoderConfig make_encoder_config(const EncoderSpec& spec, std::size_t dim, std::uint64_t master_seed);

// Number of stages S of the fixed adder tree over `inputs` leaves:
// 1 + ceil(log2(ceil(inputs / 3))).
unsigned adder_tree_stages(std::size_t inputs);

// Throws unless cfg is usable for `features` inputs of dimension `dim`.
void validate(const EncoderConfig& cfg, std::size_t features, std::size_t dim);

using Features = std::span<const std::uint16_t>;

EncodedVector encode_exact(Features features, const LevelTable& levels, const IdTable& ids);
EncodedVector encode_maj(Features features, const LevelTable& levels, const IdTable& ids, const EncoderConfig& cfg);
EncodedVector encode_maj2(Features features, const LevelTable& levels, const IdTable& ids, const EncoderConfig& cfg);
EncodedVector encode_overfeed(Features features, const LevelTable& levels, const IdTable& ids);
EncodedVector encode_trunc(Features features, const LevelTable& levels, const IdTable& ids, const EncoderConfig& cfg);

EncodedVector encode(Features features, const LevelTable& levels, const IdTable& ids, const EncoderConfig& cfg);

// Adder tree with stages 2..truncated_stages truncated; truncated_stages = 1
// is the exact tree. Exposed for equivalence checks.
EncodedVector encode_adder_tree(Features features, const LevelTable& levels, const IdTable& ids,
                                unsigned truncated_stages);

// Largest value any dimension can take for `features` inputs.
std::uint32_t max_encoded_value(const EncoderSpec& spec, std::size_t features);

enum class Execution { serial, parallel };

// Encodes `rows` samples stored row-major in `features` (row length =
// ids.features()). The parallel path distributes samples over OpenMP
// threads; both paths produce identical output.
std::vector<EncodedVector> encode_batch(std::span<const std::uint16_t> features, std::size_t rows,
                                        const LevelTable& levels, const IdTable& ids,
                                        const EncoderConfig& cfg, Execution exec = Execution::parallel);

}  // namespace hdapprox
