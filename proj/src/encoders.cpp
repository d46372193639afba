#include "hdapprox/encoders.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <exception>
#include <string>

#include "hdapprox/errors.hpp"

namespace hdapprox {

// The kernels below work on 64 dimensions at once. For one word index w the
// bound bits of all features form a column of 64-bit words; every adder in
// the emulated hardware becomes a bit-sliced adder over those words, with
// plane p of a value holding bit p of each of the 64 lanes.
namespace {

constexpr unsigned kMaxPlanes = 40;

class LaneCounter {
 public:
  void add(std::uint64_t word, unsigned shift = 0) noexcept {
    std::uint64_t carry = word;
    unsigned p = shift;
    while (carry != 0) {
      const std::uint64_t next = planes_[p] & carry;
      planes_[p] ^= carry;
      carry = next;
      ++p;
    }
    if (p > used_) used_ = p;
  }

  void unpack(std::uint32_t* lanes) const noexcept {
    for (unsigned lane = 0; lane < kWordBits; ++lane) {
      std::uint32_t v = 0;
      for (unsigned p = 0; p < used_; ++p) v |= static_cast<std::uint32_t>((planes_[p] >> lane) & 1U) << p;
      lanes[lane] = v;
    }
  }

 private:
  std::array<std::uint64_t, kMaxPlanes> planes_{};
  unsigned used_ = 0;
};

// Per-lane count of up to 7 input words, as three planes.
struct SmallCount {
  std::uint64_t p0 = 0, p1 = 0, p2 = 0;
};

SmallCount count_group(const std::uint64_t* bits, std::size_t n) noexcept {
  SmallCount c;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t c0 = c.p0 & bits[i];
    c.p0 ^= bits[i];
    const std::uint64_t c1 = c.p1 & c0;
    c.p1 ^= c0;
    c.p2 ^= c1;
  }
  return c;
}

std::uint64_t lanes_equal(const SmallCount& c, unsigned value) noexcept {
  return ((value & 1U) ? c.p0 : ~c.p0) & ((value & 2U) ? c.p1 : ~c.p1) & ((value & 4U) ? c.p2 : ~c.p2);
}

// 1 where count > n/2; at exactly n/2 (even n) the lane's tie bit decides.
std::uint64_t majority(const SmallCount& c, unsigned n, std::uint64_t tie) noexcept {
  std::uint64_t out = 0;
  for (unsigned v = n / 2 + 1; v <= n; ++v) out |= lanes_equal(c, v);
  if (n % 2 == 0) out |= lanes_equal(c, n / 2) & tie;
  return out;
}

struct SlicedValue {
  std::array<std::uint64_t, kMaxPlanes> planes{};
  unsigned width = 0;
};

void add_sliced(const SlicedValue& a, const SlicedValue& b, SlicedValue& out) noexcept {
  const unsigned width = std::max(a.width, b.width);
  std::uint64_t carry = 0;
  for (unsigned p = 0; p < width; ++p) {
    const std::uint64_t x = p < a.width ? a.planes[p] : 0;
    const std::uint64_t y = p < b.width ? b.planes[p] : 0;
    const std::uint64_t half = x ^ y;
    out.planes[p] = half ^ carry;
    carry = (x & y) | (carry & half);
  }
  out.planes[width] = carry;
  out.width = width + 1;
}

// Drops the least significant plane (floor division by two).
void truncate_lsb(SlicedValue& v) noexcept {
  for (unsigned p = 1; p < v.width; ++p) v.planes[p - 1] = v.planes[p];
  v.planes[v.width - 1] = 0;
  --v.width;
}

void check_inputs(Features features, const LevelTable& levels, const IdTable& ids) {
  if (levels.dim() == 0 || levels.dim() != ids.dim()) {
    throw Error(ErrorCode::dimension_mismatch, "level and id tables differ in dimension");
  }
  if (features.size() != ids.features()) {
    throw Error(ErrorCode::dimension_mismatch, "sample has " + std::to_string(features.size()) +
                                                   " features, id table expects " +
                                                   std::to_string(ids.features()));
  }
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i] >= levels.levels()) {
      throw Error(ErrorCode::feature_index_out_of_range,
                  "feature " + std::to_string(i) + " has level " + std::to_string(features[i]) +
                      " but the table has " + std::to_string(levels.levels()));
    }
  }
}

// Runs `kernel(bound, word_index, lanes_out)` for every 64-dimension word.
template <typename Kernel>
EncodedVector encode_words(Features features, const LevelTable& levels, const IdTable& ids, Kernel&& kernel) {
  check_inputs(features, levels, ids);
  const std::size_t words = levels.dim() / kWordBits;
  EncodedVector out;
  out.values.resize(levels.dim());
  std::vector<std::uint64_t> bound(features.size());
  for (std::size_t w = 0; w < words; ++w) {
    for (std::size_t i = 0; i < features.size(); ++i) {
      bound[i] = levels[features[i]].word(w) ^ ids.word(i, w);
    }
    kernel(bound, w, out.values.data() + w * kWordBits);
  }
  return out;
}

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

void require_tie(const Hypervector& tie, std::size_t dim, const char* which) {
  if (tie.empty()) throw Error(ErrorCode::missing_tie_bits, std::string("missing ") + which + " tie bits");
  if (tie.dim() != dim) throw Error(ErrorCode::dimension_mismatch, std::string(which) + " tie bits have wrong length");
}

}  // namespace

EncoderSpec EncoderSpec::parse(std::string_view text) {
  if (text == "exact") return {Scheme::exact, 0};
  if (text == "maj") return {Scheme::maj, 0};
  if (text == "maj2") return {Scheme::maj2, 0};
  if (text == "overfeed") return {Scheme::overfeed, 0};
  if (text.starts_with("trunc:")) {
    const std::string_view digits = text.substr(6);
    unsigned k = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || digits.empty() || k < 2) {
      throw Error(ErrorCode::config_error, "invalid truncation depth in encoder '" + std::string(text) +
                                               "' (expected trunc:<k> with k >= 2)");
    }
    return {Scheme::trunc, k};
  }
  throw Error(ErrorCode::config_error, "unknown encoder '" + std::string(text) +
                                           "' (expected exact, maj, maj2, overfeed or trunc:<k>)");
}

std::string EncoderSpec::name() const {
  switch (scheme) {
    case Scheme::exact: return "exact";
    case Scheme::maj: return "maj";
    case Scheme::maj2: return "maj2";
    case Scheme::overfeed: return "overfeed";
    case Scheme::trunc: return "trunc:" + std::to_string(trunc_stages);
  }
  return "unknown";
}

std::vector<EncoderSpec> standard_encoders() {
  return {{Scheme::exact, 0},    {Scheme::maj, 0},   {Scheme::maj2, 0},
          {Scheme::overfeed, 0}, {Scheme::trunc, 3}, {Scheme::trunc, 4}};
}

EncoderConfig make_encoder_config(const EncoderSpec& spec, std::size_t dim, std::uint64_t master_seed) {
  require_valid_dim(dim);
  EncoderConfig cfg;
  cfg.spec = spec;
  if (spec.scheme == Scheme::maj || spec.scheme == Scheme::maj2) {
    Rng rng = make_stream(master_seed, Stream::tie_stage1);
    cfg.tie_stage1 = Hypervector::random(dim, rng);
  }
  if (spec.scheme == Scheme::maj2) {
    Rng rng = make_stream(master_seed, Stream::tie_stage2);
    cfg.tie_stage2 = Hypervector::random(dim, rng);
  }
  return cfg;
}

unsigned adder_tree_stages(std::size_t inputs) {
  const std::size_t leaves = ceil_div(std::max<std::size_t>(inputs, 1), 3);
  return 1 + static_cast<unsigned>(std::bit_width(leaves - 1));
}

void validate(const EncoderConfig& cfg, std::size_t features, std::size_t dim) {
  switch (cfg.scheme()) {
    case Scheme::exact:
    case Scheme::overfeed:
      break;
    case Scheme::maj2:
      require_tie(cfg.tie_stage2, dim, "stage-2");
      [[fallthrough]];
    case Scheme::maj:
      require_tie(cfg.tie_stage1, dim, "stage-1");
      break;
    case Scheme::trunc: {
      const unsigned stages = adder_tree_stages(features);
      const unsigned k = cfg.spec.trunc_stages;
      if (k < 2 || k > stages) {
        throw Error(ErrorCode::invalid_trunc_depth,
                    "truncation depth " + std::to_string(k) + " outside [2, " + std::to_string(stages) +
                        "] for " + std::to_string(features) + " inputs");
      }
      break;
    }
  }
}

EncodedVector encode_exact(Features features, const LevelTable& levels, const IdTable& ids) {
  return encode_words(features, levels, ids, [](std::span<const std::uint64_t> bound, std::size_t, std::uint32_t* lanes) {
    LaneCounter acc;
    for (const std::uint64_t b : bound) acc.add(b);
    acc.unpack(lanes);
  });
}

EncodedVector encode_maj(Features features, const LevelTable& levels, const IdTable& ids, const EncoderConfig& cfg) {
  if (cfg.scheme() != Scheme::maj) throw Error(ErrorCode::config_error, "encode_maj needs a maj config");
  require_tie(cfg.tie_stage1, levels.dim(), "stage-1");
  return encode_words(features, levels, ids,
                      [&](std::span<const std::uint64_t> bound, std::size_t w, std::uint32_t* lanes) {
                        const std::uint64_t tie = cfg.tie_stage1.word(w);
                        LaneCounter acc;
                        for (std::size_t g = 0; g < bound.size(); g += 6) {
                          const std::size_t n = std::min<std::size_t>(6, bound.size() - g);
                          acc.add(majority(count_group(bound.data() + g, n), static_cast<unsigned>(n), tie));
                        }
                        acc.unpack(lanes);
                      });
}

EncodedVector encode_maj2(Features features, const LevelTable& levels, const IdTable& ids, const EncoderConfig& cfg) {
  if (cfg.scheme() != Scheme::maj2) throw Error(ErrorCode::config_error, "encode_maj2 needs a maj2 config");
  require_tie(cfg.tie_stage1, levels.dim(), "stage-1");
  require_tie(cfg.tie_stage2, levels.dim(), "stage-2");
  std::vector<std::uint64_t> stage1(ceil_div(features.size(), 6));
  return encode_words(features, levels, ids,
                      [&](std::span<const std::uint64_t> bound, std::size_t w, std::uint32_t* lanes) {
                        const std::uint64_t tie1 = cfg.tie_stage1.word(w);
                        const std::uint64_t tie2 = cfg.tie_stage2.word(w);
                        for (std::size_t g = 0, o = 0; g < bound.size(); g += 6, ++o) {
                          const std::size_t n = std::min<std::size_t>(6, bound.size() - g);
                          stage1[o] = majority(count_group(bound.data() + g, n), static_cast<unsigned>(n), tie1);
                        }
                        LaneCounter acc;
                        for (std::size_t g = 0; g < stage1.size(); g += 6) {
                          const std::size_t n = std::min<std::size_t>(6, stage1.size() - g);
                          acc.add(majority(count_group(stage1.data() + g, n), static_cast<unsigned>(n), tie2));
                        }
                        acc.unpack(lanes);
                      });
}

EncodedVector encode_overfeed(Features features, const LevelTable& levels, const IdTable& ids) {
  return encode_words(features, levels, ids, [](std::span<const std::uint64_t> bound, std::size_t, std::uint32_t* lanes) {
    LaneCounter acc;
    for (std::size_t g = 0; g < bound.size(); g += 5) {
      const std::size_t n = std::min<std::size_t>(5, bound.size() - g);
      // The quantized 2-bit output {0,1,2} of a 5-input sum is floor(s/2):
      // the upper two planes of the count.
      const SmallCount c = count_group(bound.data() + g, n);
      acc.add(c.p1, 0);
      acc.add(c.p2, 1);
    }
    acc.unpack(lanes);
  });
}

EncodedVector encode_adder_tree(Features features, const LevelTable& levels, const IdTable& ids,
                                unsigned truncated_stages) {
  const unsigned stages = adder_tree_stages(features.size());
  if (truncated_stages < 1 || truncated_stages > stages) {
    throw Error(ErrorCode::invalid_trunc_depth, "truncation depth " + std::to_string(truncated_stages) +
                                                    " outside [1, " + std::to_string(stages) + "]");
  }
  const std::size_t leaves = std::size_t{1} << (stages - 1);
  std::vector<SlicedValue> nodes(leaves);
  EncodedVector out = encode_words(
      features, levels, ids, [&](std::span<const std::uint64_t> bound, std::size_t, std::uint32_t* lanes) {
        // Stage 1: exact 3-input adders over zero-padded triples.
        for (std::size_t m = 0; m < leaves; ++m) {
          const std::size_t first = 3 * m;
          const std::size_t n = first < bound.size() ? std::min<std::size_t>(3, bound.size() - first) : 0;
          const SmallCount c = count_group(n != 0 ? bound.data() + first : nullptr, n);
          nodes[m].planes = {};
          nodes[m].planes[0] = c.p0;
          nodes[m].planes[1] = c.p1;
          nodes[m].width = 2;
        }
        std::size_t live = leaves;
        for (unsigned stage = 2; stage <= stages; ++stage) {
          for (std::size_t m = 0; m < live / 2; ++m) {
            SlicedValue sum;
            add_sliced(nodes[2 * m], nodes[2 * m + 1], sum);
            if (stage <= truncated_stages) truncate_lsb(sum);
            nodes[m] = sum;
          }
          live /= 2;
        }
        LaneCounter root;
        for (unsigned p = 0; p < nodes[0].width; ++p) root.add(nodes[0].planes[p], p);
        root.unpack(lanes);
      });
  out.scale = std::uint32_t{1} << (truncated_stages - 1);
  return out;
}

EncodedVector encode_trunc(Features features, const LevelTable& levels, const IdTable& ids, const EncoderConfig& cfg) {
  if (cfg.scheme() != Scheme::trunc) throw Error(ErrorCode::config_error, "encode_trunc needs a trunc config");
  validate(cfg, features.size(), levels.dim());
  return encode_adder_tree(features, levels, ids, cfg.spec.trunc_stages);
}

EncodedVector encode(Features features, const LevelTable& levels, const IdTable& ids, const EncoderConfig& cfg) {
  switch (cfg.scheme()) {
    case Scheme::exact: return encode_exact(features, levels, ids);
    case Scheme::maj: return encode_maj(features, levels, ids, cfg);
    case Scheme::maj2: return encode_maj2(features, levels, ids, cfg);
    case Scheme::overfeed: return encode_overfeed(features, levels, ids);
    case Scheme::trunc: return encode_trunc(features, levels, ids, cfg);
  }
  throw Error(ErrorCode::config_error, "unknown encoder scheme");
}

std::uint32_t max_encoded_value(const EncoderSpec& spec, std::size_t features) {
  switch (spec.scheme) {
    case Scheme::exact: return static_cast<std::uint32_t>(features);
    case Scheme::maj: return static_cast<std::uint32_t>(ceil_div(features, 6));
    case Scheme::maj2: return static_cast<std::uint32_t>(ceil_div(features, 36));
    case Scheme::overfeed: return static_cast<std::uint32_t>(2 * (features / 5) + (features % 5) / 2);
    case Scheme::trunc: {
      // All-ones input through the same tree, one lane, plain integers.
      const unsigned stages = adder_tree_stages(features);
      std::vector<std::uint32_t> v(std::size_t{1} << (stages - 1));
      for (std::size_t m = 0; m < v.size(); ++m) {
        const std::size_t first = 3 * m;
        v[m] = first < features ? static_cast<std::uint32_t>(std::min<std::size_t>(3, features - first)) : 0;
      }
      for (unsigned stage = 2; stage <= stages; ++stage) {
        for (std::size_t m = 0; m < v.size() / 2; ++m) {
          const std::uint32_t s = v[2 * m] + v[2 * m + 1];
          v[m] = stage <= spec.trunc_stages ? s / 2 : s;
        }
        v.resize(v.size() / 2);
      }
      return v.front();
    }
  }
  return 0;
}

std::vector<EncodedVector> encode_batch(std::span<const std::uint16_t> features, std::size_t rows,
                                        const LevelTable& levels, const IdTable& ids, const EncoderConfig& cfg,
                                        Execution exec) {
  const std::size_t width = ids.features();
  if (features.size() != rows * width) {
    throw Error(ErrorCode::dimension_mismatch, "batch size does not match rows x features");
  }
  validate(cfg, width, levels.dim());
  std::vector<EncodedVector> out(rows);
  if (exec == Execution::serial) {
    for (std::size_t r = 0; r < rows; ++r) out[r] = encode(features.subspan(r * width, width), levels, ids, cfg);
    return out;
  }

  std::exception_ptr failure;
  const auto n = static_cast<std::ptrdiff_t>(rows);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    try {
      const auto row = static_cast<std::size_t>(r);
      out[row] = encode(features.subspan(row * width, width), levels, ids, cfg);
    } catch (...) {
#pragma omp critical(hdapprox_encode_batch_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace hdapprox
