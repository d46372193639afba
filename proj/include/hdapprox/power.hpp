#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hdapprox/cost_model.hpp"
#include "hdapprox/tables.hpp"

namespace hdapprox {

// Accumulates bit toggles between consecutive cycles of a fixed-width bus.
class ToggleMeter {
 public:
  explicit ToggleMeter(std::size_t width_bits);

  void push(std::span<const std::uint64_t> cycle);

  [[nodiscard]] std::size_t width_bits() const noexcept { return width_bits_; }
  [[nodiscard]] std::uint64_t transitions() const noexcept { return transitions_; }
  [[nodiscard]] std::uint64_t toggled_bits() const noexcept { return toggled_; }
  // Mean fraction of bits that changed per transition; throws empty_stream
  // before the second cycle.
  [[nodiscard]] double rate() const;

 private:
  std::size_t width_bits_;
  std::vector<std::uint64_t> previous_;
  std::uint64_t cycles_ = 0;
  std::uint64_t transitions_ = 0;
  std::uint64_t toggled_ = 0;
};

double estimate_activity(std::span<const std::vector<std::uint64_t>> cycles, std::size_t width_bits);

struct ActivityRates {
  double adder_input = 0.0;
  double bram_read = 0.0;
};

// Replays the datapath schedule for quantized samples (row-major, row
// length = ids.features()): per d_mem-dimension block, ceil(d_iv / F)
// cycles, each feeding F bound words to the trees and reading F level words.
// Unused slots in the last cycle carry zeros.
ActivityRates profile_activity(const LevelTable& levels, const IdTable& ids,
                               std::span<const std::uint16_t> samples, std::size_t rows,
                               const CostReport& report);

// Text table, one record per line, '#' comments:
//   logic <scheme> <adder_inputs> <activity> <watts_per_tree>
//   bram <activity> <joules_per_read>
//   static <watts>
// Zero size and zero activity are implicit zero-power anchors.
class PowerCalibration {
 public:
  struct LogicPoint {
    std::string scheme;
    double size = 0.0;
    double activity = 0.0;
    double watts = 0.0;
  };
  struct BramPoint {
    double activity = 0.0;
    double joules_per_read = 0.0;
  };

  PowerCalibration() = default;
  PowerCalibration(std::vector<LogicPoint> logic, std::vector<BramPoint> bram, double static_watts);

  static PowerCalibration parse(std::istream& in);
  static PowerCalibration load(const std::string& path);

  [[nodiscard]] double static_watts() const noexcept { return static_watts_; }
  // Per-tree logic watts, bilinear over (size, activity). Queries outside
  // the calibrated range throw calibration_out_of_range.
  [[nodiscard]] double logic_watts(const std::string& scheme, double size, double activity) const;
  [[nodiscard]] double bram_joules_per_read(double activity) const;

 private:
  std::vector<LogicPoint> logic_;
  std::vector<BramPoint> bram_;
  double static_watts_ = 0.0;
};

struct PowerBreakdown {
  double logic_watts = 0.0;
  double bram_watts = 0.0;
  double static_watts = 0.0;
  [[nodiscard]] double total() const noexcept { return logic_watts + bram_watts + static_watts; }
};

// d_mem trees of F inputs at the adder activity, plus (F + id_brams) block
// reads per cycle at the BRAM toggle rate, plus static power.
PowerBreakdown estimate_power(const CostReport& report, const ActivityRates& activity,
                              const PowerCalibration& calibration);

}  // namespace hdapprox
