#include <doctest.h>

#include <random>
#include <sstream>

#include "hdapprox/errors.hpp"
#include "hdapprox/power.hpp"

using namespace hdapprox;

namespace {

PowerCalibration fixture() {
  std::istringstream in(R"(# two sizes, two activities
logic exact 100 0.5 0.010
logic exact 200 0.5 0.020
logic exact 100 1.0 0.020
logic exact 200 1.0 0.040
bram 0.5 1e-11
bram 1.0 2e-11
static 0.5
)");
  return PowerCalibration::parse(in);
}

CostReport small_report() {
  HardwareConfig hw;
  return estimate_cost(100, 1024, 8, hw, {Scheme::exact, 0});
}

}  // namespace

TEST_CASE("toggle rates of simple streams") {
  const std::vector<std::vector<std::uint64_t>> constant(5, {0x1234});
  CHECK(estimate_activity(constant, 64) == 0.0);
  std::vector<std::vector<std::uint64_t>> alternating;
  for (int i = 0; i < 6; ++i) alternating.push_back({i % 2 ? ~0ULL : 0ULL});
  CHECK(estimate_activity(alternating, 64) == 1.0);
  std::mt19937_64 rng(1);
  ToggleMeter meter(64);
  for (int i = 0; i < 10000; ++i) {
    const std::vector<std::uint64_t> w = {rng()};
    meter.push(w);
  }
  CHECK(meter.rate() == doctest::Approx(0.5).epsilon(0.04));
  const std::vector<std::vector<std::uint64_t>> single(1, {0});
  try {
    (void)estimate_activity(single, 64);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::empty_stream);
  }
}

TEST_CASE("toggle meter ignores bits beyond its width") {
  ToggleMeter m(4);
  const std::vector<std::uint64_t> a = {0}, b = {0xF0};
  m.push(a);
  m.push(b);
  CHECK(m.rate() == 0.0);
}

TEST_CASE("calibration interpolates linearly") {
  const PowerCalibration cal = fixture();
  CHECK(cal.logic_watts("exact", 150, 0.5) == doctest::Approx(0.015));
  CHECK(cal.logic_watts("exact", 100, 0.75) == doctest::Approx(0.015));
  CHECK(cal.logic_watts("exact", 50, 0.5) == doctest::Approx(0.005));
  CHECK(cal.logic_watts("exact", 100, 0.25) == doctest::Approx(0.005));
  CHECK(cal.logic_watts("exact", 100, 0.0) == 0.0);
  CHECK(cal.bram_joules_per_read(0.75) == doctest::Approx(1.5e-11));
  CHECK(cal.static_watts() == 0.5);
}

TEST_CASE("calibration refuses to extrapolate") {
  const PowerCalibration cal = fixture();
  for (auto query : {std::pair{300.0, 0.5}, std::pair{100.0, 1.5}}) {
    try {
      (void)cal.logic_watts("exact", query.first, query.second);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::calibration_out_of_range);
    }
  }
  CHECK_THROWS_AS((void)cal.logic_watts("maj", 100, 0.5), Error);
}

TEST_CASE("malformed calibration files") {
  std::istringstream bad_record("logic exact 100\n");
  CHECK_THROWS_AS(PowerCalibration::parse(bad_record), Error);
  std::istringstream decreasing("logic exact 100 0.5 0.02\nlogic exact 200 0.5 0.01\n");
  CHECK_THROWS_AS(PowerCalibration::parse(decreasing), Error);
  std::istringstream unknown("leakage 3\n");
  CHECK_THROWS_AS(PowerCalibration::parse(unknown), Error);
}

TEST_CASE("power estimate composition") {
  const PowerCalibration cal = fixture();
  const CostReport r = small_report();
  REQUIRE(r.features_per_cycle == 100);
  const PowerBreakdown zero = estimate_power(r, {0.0, 0.0}, cal);
  CHECK(zero.total() == doctest::Approx(0.5));
  const PowerBreakdown p = estimate_power(r, {0.5, 0.5}, cal);
  CHECK(p.logic_watts == doctest::Approx(64 * 0.010));
  CHECK(p.bram_watts == doctest::Approx((100 + r.id_brams) * 200e6 * 1e-11));
  CostReport bigger = estimate_cost(200, 1024, 8, HardwareConfig{}, {Scheme::exact, 0});
  REQUIRE(bigger.features_per_cycle == 200);
  CHECK(estimate_power(bigger, {0.5, 0.5}, cal).logic_watts == doctest::Approx(2 * p.logic_watts));
}

TEST_CASE("activity profile of the datapath") {
  const CostReport r = small_report();
  Rng lr = make_stream(1, Stream::levels);
  Rng ir = make_stream(1, Stream::ids);
  const LevelTable levels = LevelTable::generate(1024, 8, lr);
  const IdTable ids = IdTable::generate(1024, 100, ir);
  std::vector<std::uint16_t> same(3 * 100, 2);
  const ActivityRates flat = profile_activity(levels, ids, same, 3, r);
  CHECK(flat.adder_input > 0.3);
  CHECK(flat.adder_input < 0.7);
  CHECK(flat.bram_read > 0.3);
  CHECK(flat.bram_read < 0.7);
  CHECK_THROWS_AS(profile_activity(levels, ids, same, 2, r), Error);
}
