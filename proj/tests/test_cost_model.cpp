#include <doctest.h>

#include <cmath>
#include <sstream>

#include "hdapprox/cost_model.hpp"
#include "hdapprox/errors.hpp"

using namespace hdapprox;

namespace {

// Direct transcription of the finite sums with S = ceil(log2(d)).
double weights(int stages) {
  double s = 0;
  for (int i = 1; i <= stages; ++i) s += i / std::pow(2.0, i - 1);
  return s;
}
int clog2(double x) { return x <= 1 ? 0 : static_cast<int>(std::ceil(std::log2(x) - 1e-12)); }

long oracle_exact(double d) { return std::lround(d / 3 * weights(clog2(d))); }
long oracle_overfeed(double d) { return std::lround(d / 5 * weights(clog2(d))); }
long oracle_maj(double d) { return std::lround(d / 6 + d / 18 * weights(clog2(d / 6))); }
long oracle_trunc(double d, int k) {
  double s = 0;
  const int stages = clog2(d);
  for (int i = 1; i <= k; ++i) s += d / 3 / std::pow(2.0, i - 1);
  for (int i = k + 1; i <= stages; ++i) s += d / 3 * (i + 1 - k) / std::pow(2.0, i - 1);
  return std::lround(s);
}

HardwareConfig default_hw() { return HardwareConfig{}; }

}  // namespace

TEST_CASE("LUT counts at 512 inputs") {
  CHECK(lut_tree_exact(512) == 675);
  CHECK(lut_maj(512) == 195);
  CHECK(lut_overfeed(512) == 405);
  CHECK(lut_maj2(512) == 115);
  CHECK(lut_trunc(512, 7) == 343);
  CHECK(lut_trunc(512, 1) == 675);
}

TEST_CASE("LUT counts follow the finite sums") {
  for (std::size_t d = 8; d <= 4096; d += 37) {
    CAPTURE(d);
    CHECK(static_cast<long>(lut_tree_exact(d)) == oracle_exact(double(d)));
    CHECK(static_cast<long>(lut_overfeed(d)) == oracle_overfeed(double(d)));
    if (d > 6) CHECK(static_cast<long>(lut_maj(d)) == oracle_maj(double(d)));
    for (int k = 1; k <= clog2(double(d)); ++k) CHECK(static_cast<long>(lut_trunc(d, k)) == oracle_trunc(double(d), k));
  }
}

TEST_CASE("degenerate trees use one LUT") {
  CHECK(lut_tree_exact(3) == 1);
  CHECK(lut_maj(6) == 1);
  CHECK(lut_maj2(6) == 1);
  CHECK(lut_overfeed(5) == 1);
  CHECK(lut_maj2(36) == 7);
  CHECK_THROWS_AS(lut_tree_exact(0), Error);
}

TEST_CASE("truncation depth is bounded by the stage count") {
  CHECK_THROWS_AS(lut_trunc(512, 0), Error);
  CHECK_THROWS_AS(lut_trunc(512, 10), Error);
  CHECK_NOTHROW(lut_trunc(512, 9));
}

TEST_CASE("LUT counts are monotone and ordered") {
  for (std::size_t d = 64; d <= 4096; d += 64) {
    CAPTURE(d);
    CHECK(lut_tree_exact(d) <= lut_tree_exact(d + 1));
    CHECK(lut_maj(d) <= lut_maj(d + 1));
    CHECK(lut_maj2(d) <= lut_maj2(d + 1));
    CHECK(lut_overfeed(d) <= lut_overfeed(d + 1));
    CHECK(lut_maj2(d) <= lut_maj(d));
    CHECK(lut_maj(d) <= lut_trunc(d, 4));
    CHECK(lut_trunc(d, 4) <= lut_overfeed(d));
    CHECK(lut_trunc(d, 3) <= lut_tree_exact(d));
    CHECK(lut_overfeed(d) <= lut_tree_exact(d));
  }
}

TEST_CASE("asymptotic ratios agree with large finite trees") {
  const std::size_t d = std::size_t{1} << 16;
  const double exact = static_cast<double>(lut_tree_exact(d));
  CHECK(exact / d == doctest::Approx(4.0 / 3.0).epsilon(0.01));
  for (const EncoderSpec& spec : standard_encoders()) {
    CAPTURE(spec.name());
    CHECK(static_cast<double>(lut_count(spec, d)) / exact == doctest::Approx(asymptotic_lut_ratio(spec)).epsilon(0.01));
  }
  CHECK(asymptotic_lut_saving({Scheme::trunc, 2}) == doctest::Approx(0.25));
  CHECK(asymptotic_lut_saving({Scheme::trunc, 3}) == doctest::Approx(0.375));
  CHECK(asymptotic_lut_saving({Scheme::trunc, 4}) == doctest::Approx(0.4375));
}

TEST_CASE("id memory sizing") {
  CHECK(id_memory(1, 64).width_bits == 64);
  CHECK(id_memory(310, 64).width_bits == 373);
  CHECK(id_memory(310, 64).brams == 6);
  CHECK(id_memory(64, 64).width_bits == 127);
  CHECK(id_memory(64, 64).brams == 2);
}

TEST_CASE("architecture plan for the speech workload") {
  const CostReport r = plan_architecture(617, 2560, 16, default_hw());
  CHECK(r.bram_group_size == 2);
  CHECK(r.features_per_cycle == 310);
  CHECK(r.feature_groups == 2);
  CHECK(r.id_brams == 6);
  CHECK(r.cycles_per_sample == 80);
  CHECK(r.throughput_samples_per_sec == doctest::Approx(200e6 / 80));
  CHECK(r.level_brams + r.id_brams <= 445);
}

TEST_CASE("architecture plan for the face workload") {
  const CostReport r = plan_architecture(608, 6144, 16, default_hw());
  CHECK(r.bram_group_size == 3);
  CHECK(r.feature_groups == 3);
  CHECK(r.cycles_per_sample == 288);
}

TEST_CASE("plans respect the BRAM budget") {
  for (std::size_t d : {10U, 100U, 617U, 2000U}) {
    for (std::size_t dim : {1024U, 4096U, 8192U}) {
      const CostReport r = plan_architecture(d, dim, 16, default_hw());
      CHECK(r.level_brams + r.id_brams <= 445);
      CHECK(r.features_per_cycle * r.feature_groups >= d);
      CHECK(r.features_per_cycle <= r.max_features_per_cycle);
    }
  }
}

TEST_CASE("too few BRAMs is an error") {
  HardwareConfig hw;
  hw.total_brams = 3;
  try {
    (void)plan_architecture(617, 8192, 16, hw);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::insufficient_brams);
  }
}

TEST_CASE("hardware config JSON") {
  std::istringstream good(R"({"total_brams": 100, "port_width_bits": 32, "clock_hz": 1e8})");
  const HardwareConfig hw = HardwareConfig::parse_json(good);
  CHECK(hw.total_brams == 100);
  CHECK(hw.port_width_bits == 32);
  CHECK(hw.bram_capacity_bits == 32768);
  std::istringstream unknown(R"({"brams": 100})");
  CHECK_THROWS_AS(HardwareConfig::parse_json(unknown), Error);
  std::istringstream typed(R"({"total_brams": "many"})");
  CHECK_THROWS_AS(HardwareConfig::parse_json(typed), Error);
  std::istringstream broken("{");
  CHECK_THROWS_AS(HardwareConfig::parse_json(broken), Error);
}

TEST_CASE("cost reports render as text and JSON") {
  const CostReport r = estimate_cost(617, 2560, 16, default_hw(), {Scheme::maj, 0});
  CHECK(r.encoder == "maj");
  CHECK(r.lut_per_dimension_tree == lut_maj(310));
  CHECK(r.total_luts == r.lut_per_dimension_tree * 64);
  std::ostringstream text;
  write_text(text, r);
  CHECK(text.str().find("cycles_per_sample: 80\n") != std::string::npos);
  CHECK(to_json(r).find("\"cycles_per_sample\": 80") != std::string::npos);
}
