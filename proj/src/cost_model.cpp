#include "hdapprox/cost_model.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "hdapprox/errors.hpp"

namespace hdapprox {
namespace {

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

// Smallest n with width * 2^n >= inputs, i.e. ceil(log2(inputs / width)) clamped at 0.
unsigned stages_over(std::size_t inputs, std::size_t width) {
  return static_cast<unsigned>(std::bit_width(ceil_div(inputs, width) - 1));
}

// sum_{i=1}^{stages} i / 2^(i-1): relative LUT weight of an exact tree's stages.
double stage_weights(unsigned stages) {
  double sum = 0.0;
  for (unsigned i = 1; i <= stages; ++i) sum += i / std::ldexp(1.0, static_cast<int>(i) - 1);
  return sum;
}

std::size_t round_count(double luts) { return static_cast<std::size_t>(std::llround(luts)); }

void require_inputs(std::size_t inputs) {
  if (inputs == 0) throw Error(ErrorCode::invalid_argument, "adder tree needs at least one input");
}

}  // namespace

std::size_t lut_tree_exact(std::size_t inputs) {
  require_inputs(inputs);
  if (inputs <= 3) return 1;
  const double d = static_cast<double>(inputs);
  return round_count(d / 3.0 * stage_weights(stages_over(inputs, 1)));
}

std::size_t lut_maj(std::size_t inputs) {
  require_inputs(inputs);
  if (inputs <= 6) return 1;
  const double d = static_cast<double>(inputs);
  return round_count(d / 6.0 + d / 18.0 * stage_weights(stages_over(inputs, 6)));
}

std::size_t lut_maj2(std::size_t inputs) {
  require_inputs(inputs);
  if (inputs <= 6) return 1;
  const double d = static_cast<double>(inputs);
  return round_count(d / 6.0 + d / 36.0 + d / 108.0 * stage_weights(stages_over(inputs, 36)));
}

std::size_t lut_overfeed(std::size_t inputs) {
  require_inputs(inputs);
  if (inputs <= 5) return 1;
  const double d = static_cast<double>(inputs);
  return round_count(d / 5.0 * stage_weights(stages_over(inputs, 1)));
}

std::size_t lut_trunc(std::size_t inputs, unsigned k) {
  require_inputs(inputs);
  const unsigned stages = stages_over(inputs, 1);
  if (k < 1 || (inputs > 3 && k > stages)) {
    throw Error(ErrorCode::invalid_trunc_depth, "truncation depth " + std::to_string(k) + " outside [1, " +
                                                    std::to_string(stages) + "] for " + std::to_string(inputs) +
                                                    " inputs");
  }
  if (inputs <= 3) return 1;
  const double third = static_cast<double>(inputs) / 3.0;
  double luts = 0.0;
  // First k stages: 2-bit adders (one LUT-6 each); later stages grow one bit per stage.
  for (unsigned i = 1; i <= k; ++i) luts += third / std::ldexp(1.0, static_cast<int>(i) - 1);
  for (unsigned i = k + 1; i <= stages; ++i) luts += third * (i + 1 - k) / std::ldexp(1.0, static_cast<int>(i) - 1);
  return round_count(luts);
}

std::size_t lut_count(const EncoderSpec& spec, std::size_t inputs) {
  switch (spec.scheme) {
    case Scheme::exact: return lut_tree_exact(inputs);
    case Scheme::maj: return lut_maj(inputs);
    case Scheme::maj2: return lut_maj2(inputs);
    case Scheme::overfeed: return lut_overfeed(inputs);
    case Scheme::trunc: return lut_trunc(inputs, spec.trunc_stages);
  }
  return 0;
}

double asymptotic_lut_ratio(const EncoderSpec& spec) {
  switch (spec.scheme) {
    case Scheme::exact: return 1.0;
    case Scheme::maj: return (7.0 / 18.0) / (4.0 / 3.0);
    case Scheme::maj2: return (25.0 / 108.0) / (4.0 / 3.0);
    case Scheme::overfeed: return (4.0 / 5.0) / (4.0 / 3.0);
    case Scheme::trunc: return (2.0 + 4.0 / std::ldexp(1.0, static_cast<int>(spec.trunc_stages))) / 4.0;
  }
  return 1.0;
}

void HardwareConfig::validate() const {
  if (total_brams == 0 || bram_capacity_bits == 0 || port_width_bits == 0 || ports_per_bram == 0 ||
      lut_budget == 0 || !(clock_hz > 0.0)) {
    throw Error(ErrorCode::config_error, "hardware config values must all be positive");
  }
  if (bram_capacity_bits % port_width_bits != 0) {
    throw Error(ErrorCode::config_error, "port width must divide the BRAM capacity");
  }
}

HardwareConfig HardwareConfig::parse_json(std::istream& in) {
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::config_error, std::string("hardware config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::config_error, "hardware config must be a JSON object");
  HardwareConfig hw;
  for (const auto& [key, value] : doc.items()) {
    try {
      if (key == "total_brams") hw.total_brams = value.get<std::size_t>();
      else if (key == "bram_capacity_bits") hw.bram_capacity_bits = value.get<std::size_t>();
      else if (key == "port_width_bits") hw.port_width_bits = value.get<std::size_t>();
      else if (key == "ports_per_bram") hw.ports_per_bram = value.get<std::size_t>();
      else if (key == "lut_budget") hw.lut_budget = value.get<std::size_t>();
      else if (key == "clock_hz") hw.clock_hz = value.get<double>();
      else throw Error(ErrorCode::config_error, "unknown hardware config key '" + key + "'");
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorCode::config_error, "hardware config key '" + key + "' has the wrong type");
    }
  }
  hw.validate();
  return hw;
}

HardwareConfig HardwareConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open hardware config " + path);
  return parse_json(in);
}

IdMemory id_memory(std::size_t features_per_cycle, std::size_t port_width_bits) {
  if (features_per_cycle == 0 || port_width_bits == 0) {
    throw Error(ErrorCode::invalid_argument, "id memory needs positive F and port width");
  }
  return {port_width_bits + features_per_cycle - 1, 1 + ceil_div(features_per_cycle, port_width_bits)};
}

CostReport plan_architecture(std::size_t features, std::size_t dim, std::size_t levels, const HardwareConfig& hw) {
  hw.validate();
  if (features == 0 || dim == 0 || levels == 0) {
    throw Error(ErrorCode::invalid_argument, "features, dimension and levels must be positive");
  }
  CostReport r;
  r.features = features;
  r.dim = dim;
  r.levels = levels;
  r.port_width_bits = hw.port_width_bits;
  r.clock_hz = hw.clock_hz;
  r.bram_group_size = ceil_div(levels * dim, hw.bram_capacity_bits);

  const auto capacity = [&](std::size_t reserved) -> std::size_t {
    if (reserved >= hw.total_brams) return 0;
    return hw.ports_per_bram * ((hw.total_brams - reserved) / r.bram_group_size);
  };
  // F and the seed-ID reservation depend on each other; two refinements
  // starting from "no ID memory" settle it.
  std::size_t f_max = capacity(0);
  for (int pass = 0; pass < 2 && f_max > 0; ++pass) f_max = capacity(id_memory(f_max, hw.port_width_bits).brams);
  if (f_max == 0) {
    throw Error(ErrorCode::insufficient_brams,
                std::to_string(hw.total_brams) + " BRAMs cannot hold one level group of " +
                    std::to_string(r.bram_group_size) + " blocks plus the seed-ID memory");
  }
  r.max_features_per_cycle = f_max;

  // Spread features evenly over the minimum number of cycles, in whole
  // BRAM groups (ports_per_bram features share one group).
  const std::size_t chunks = ceil_div(features, f_max);
  const std::size_t per_chunk = ceil_div(features, chunks);
  r.features_per_cycle = std::min(features, hw.ports_per_bram * ceil_div(per_chunk, hw.ports_per_bram));
  r.feature_groups = ceil_div(features, r.features_per_cycle);

  const IdMemory id = id_memory(r.features_per_cycle, hw.port_width_bits);
  r.id_memory_width_bits = id.width_bits;
  r.id_brams = id.brams;
  r.level_brams = r.bram_group_size * ceil_div(r.features_per_cycle, hw.ports_per_bram);
  r.cycles_per_sample = ceil_div(dim, hw.port_width_bits) * r.feature_groups;
  r.throughput_samples_per_sec = hw.clock_hz / static_cast<double>(r.cycles_per_sample);
  r.lut_budget = hw.lut_budget;
  return r;
}

void attach_luts(CostReport& report, const EncoderSpec& spec) {
  report.encoder = spec.name();
  report.lut_per_dimension_tree = lut_count(spec, report.features_per_cycle);
  report.total_luts = report.lut_per_dimension_tree * report.port_width_bits;
  report.fits_lut_budget = report.total_luts <= report.lut_budget;
}

CostReport estimate_cost(std::size_t features, std::size_t dim, std::size_t levels, const HardwareConfig& hw,
                         const EncoderSpec& spec) {
  CostReport r = plan_architecture(features, dim, levels, hw);
  attach_luts(r, spec);
  return r;
}

namespace {

nlohmann::ordered_json report_json(const CostReport& r) {
  nlohmann::ordered_json j;
  j["encoder"] = r.encoder;
  j["features"] = r.features;
  j["dim"] = r.dim;
  j["levels"] = r.levels;
  j["port_width_bits"] = r.port_width_bits;
  j["bram_group_size"] = r.bram_group_size;
  j["max_features_per_cycle"] = r.max_features_per_cycle;
  j["features_per_cycle"] = r.features_per_cycle;
  j["feature_groups"] = r.feature_groups;
  j["id_memory_width_bits"] = r.id_memory_width_bits;
  j["id_brams"] = r.id_brams;
  j["level_brams"] = r.level_brams;
  j["cycles_per_sample"] = r.cycles_per_sample;
  j["clock_hz"] = r.clock_hz;
  j["throughput_samples_per_sec"] = r.throughput_samples_per_sec;
  j["lut_per_dimension_tree"] = r.lut_per_dimension_tree;
  j["total_luts"] = r.total_luts;
  j["lut_budget"] = r.lut_budget;
  j["fits_lut_budget"] = r.fits_lut_budget;
  if (r.estimated_power_watts) {
    j["estimated_power_watts"] = *r.estimated_power_watts;
  } else {
    j["estimated_power_watts"] = nullptr;
  }
  return j;
}

}  // namespace

void write_text(std::ostream& out, const CostReport& r) {
  const nlohmann::ordered_json doc = report_json(r);
  for (const auto& [key, value] : doc.items()) {
    out << key << ": ";
    if (value.is_string()) {
      out << value.get<std::string>();
    } else if (value.is_null()) {
      out << "n/a";
    } else {
      out << value.dump();
    }
    out << '\n';
  }
}

std::string to_json(const CostReport& report) { return report_json(report).dump(2); }

}  // namespace hdapprox
