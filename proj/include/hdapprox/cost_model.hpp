#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "hdapprox/encoders.hpp"

namespace hdapprox {

// LUT-6 counts for one adder tree over `inputs` bound bits. Each is the
// finite stage sum with S = ceil(log2(inputs)) stages, rounded to nearest
// once at the end. A tree whose inputs fit in a single first-stage LUT
// costs exactly one LUT.
std::size_t lut_tree_exact(std::size_t inputs);
std::size_t lut_maj(std::size_t inputs);
std::size_t lut_maj2(std::size_t inputs);
std::size_t lut_overfeed(std::size_t inputs);
std::size_t lut_trunc(std::size_t inputs, unsigned k);

std::size_t lut_count(const EncoderSpec& spec, std::size_t inputs);

// Limit of lut_count(spec, d) / lut_tree_exact(d) as d grows:
// 7/24, 25/144, 3/5 and (2 + 4/2^k)/4.
double asymptotic_lut_ratio(const EncoderSpec& spec);
inline double asymptotic_lut_saving(const EncoderSpec& spec) { return 1.0 - asymptotic_lut_ratio(spec); }

struct HardwareConfig {
  std::size_t total_brams = 445;
  std::size_t bram_capacity_bits = 512 * 64;
  std::size_t port_width_bits = 64;  // d_mem
  std::size_t ports_per_bram = 2;
  std::size_t lut_budget = 203800;
  double clock_hz = 200e6;

  void validate() const;

  // JSON object with any subset of the field names above.
  static HardwareConfig parse_json(std::istream& in);
  static HardwareConfig load(const std::string& path);
};

struct IdMemory {
  std::size_t width_bits = 0;
  std::size_t brams = 0;
};

// Seed-ID memory for `features_per_cycle` rotated reads of d_mem bits:
// d_mem + F - 1 bits wide, 1 + ceil(F / d_mem) blocks.
IdMemory id_memory(std::size_t features_per_cycle, std::size_t port_width_bits);

struct CostReport {
  std::size_t features = 0;  // d_iv
  std::size_t dim = 0;       // d_hv
  std::size_t levels = 0;    // L
  std::size_t port_width_bits = 0;
  std::size_t bram_group_size = 0;
  std::size_t max_features_per_cycle = 0;
  std::size_t features_per_cycle = 0;  // F
  std::size_t feature_groups = 0;      // ceil(d_iv / F): cycles per d_mem dimensions
  std::size_t id_memory_width_bits = 0;
  std::size_t id_brams = 0;
  std::size_t level_brams = 0;
  std::size_t cycles_per_sample = 0;
  double clock_hz = 0.0;
  double throughput_samples_per_sec = 0.0;

  // Filled by attach_luts.
  std::string encoder;
  std::size_t lut_per_dimension_tree = 0;
  std::size_t total_luts = 0;
  std::size_t lut_budget = 0;
  bool fits_lut_budget = true;

  std::optional<double> estimated_power_watts;
};

// BRAM grouping, per-cycle feature capacity, cycles and throughput.
CostReport plan_architecture(std::size_t features, std::size_t dim, std::size_t levels, const HardwareConfig& hw);

// Adds LUT figures for `spec`: every one of the d_mem trees sums F inputs.
void attach_luts(CostReport& report, const EncoderSpec& spec);

CostReport estimate_cost(std::size_t features, std::size_t dim, std::size_t levels, const HardwareConfig& hw,
                         const EncoderSpec& spec);

void write_text(std::ostream& out, const CostReport& report);
std::string to_json(const CostReport& report);

}  // namespace hdapprox
