#include "hdapprox/power.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

#include "hdapprox/errors.hpp"

namespace hdapprox {

ToggleMeter::ToggleMeter(std::size_t width_bits)
    : width_bits_(width_bits), previous_((width_bits + kWordBits - 1) / kWordBits, 0) {
  if (width_bits == 0) throw Error(ErrorCode::invalid_argument, "toggle meter needs a positive width");
}

void ToggleMeter::push(std::span<const std::uint64_t> cycle) {
  if (cycle.size() != previous_.size()) throw Error(ErrorCode::dimension_mismatch, "cycle word count mismatch");
  if (cycles_ > 0) {
    const unsigned tail = width_bits_ % kWordBits;
    for (std::size_t w = 0; w < cycle.size(); ++w) {
      std::uint64_t diff = previous_[w] ^ cycle[w];
      if (w + 1 == cycle.size() && tail != 0) diff &= (std::uint64_t{1} << tail) - 1;
      toggled_ += static_cast<std::uint64_t>(std::popcount(diff));
    }
    ++transitions_;
  }
  std::copy(cycle.begin(), cycle.end(), previous_.begin());
  ++cycles_;
}

double ToggleMeter::rate() const {
  if (transitions_ == 0) throw Error(ErrorCode::empty_stream, "activity needs at least two cycles");
  return static_cast<double>(toggled_) / (static_cast<double>(transitions_) * static_cast<double>(width_bits_));
}

double estimate_activity(std::span<const std::vector<std::uint64_t>> cycles, std::size_t width_bits) {
  ToggleMeter meter(width_bits);
  for (const auto& c : cycles) meter.push(c);
  return meter.rate();
}

ActivityRates profile_activity(const LevelTable& levels, const IdTable& ids, std::span<const std::uint16_t> samples,
                               std::size_t rows, const CostReport& report) {
  const std::size_t d_mem = report.port_width_bits;
  const std::size_t slots = report.features_per_cycle;
  const std::size_t d_iv = ids.features();
  if (d_mem == 0 || d_mem % kWordBits != 0) {
    throw Error(ErrorCode::invalid_argument, "activity profiling needs a port width that is a multiple of 64");
  }
  if (report.features != d_iv || report.dim != levels.dim() || levels.dim() != ids.dim() || slots == 0) {
    throw Error(ErrorCode::dimension_mismatch, "cost report does not describe these tables");
  }
  if (samples.size() != rows * d_iv) throw Error(ErrorCode::dimension_mismatch, "sample buffer size mismatch");

  const std::size_t block_words = d_mem / kWordBits;
  const std::size_t words = levels.dim() / kWordBits;
  const std::size_t blocks = (words + block_words - 1) / block_words;
  ToggleMeter adder(slots * d_mem);
  ToggleMeter bram(slots * d_mem);
  std::vector<std::uint64_t> bound_bus(slots * block_words);
  std::vector<std::uint64_t> read_bus(slots * block_words);

  for (std::size_t r = 0; r < rows; ++r) {
    const std::uint16_t* q = samples.data() + r * d_iv;
    for (std::size_t b = 0; b < blocks; ++b) {
      for (std::size_t c = 0; c < report.feature_groups; ++c) {
        for (std::size_t s = 0; s < slots; ++s) {
          const std::size_t i = c * slots + s;
          for (std::size_t t = 0; t < block_words; ++t) {
            const std::size_t w = b * block_words + t;
            std::uint64_t level = 0, bound = 0;
            if (w < words && i < d_iv) {
              if (q[i] >= levels.levels()) throw Error(ErrorCode::feature_index_out_of_range, "level index out of range");
              level = levels[q[i]].word(w);
              bound = level ^ ids.word(i, w);
            }
            read_bus[s * block_words + t] = level;
            bound_bus[s * block_words + t] = bound;
          }
        }
        adder.push(bound_bus);
        bram.push(read_bus);
      }
    }
  }
  return {adder.rate(), bram.rate()};
}

namespace {

double lerp(double x0, double y0, double x1, double y1, double x) {
  if (x1 == x0) return y0;
  return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
}

// Piecewise-linear y(x) through (0, 0) and `points` (sorted by x).
double interpolate(const std::vector<std::pair<double, double>>& points, double x, const char* what) {
  double px = 0.0, py = 0.0;
  for (const auto& [cx, cy] : points) {
    if (x <= cx) return lerp(px, py, cx, cy, x);
    px = cx;
    py = cy;
  }
  if (x == px) return py;
  std::ostringstream msg;
  msg << what << " " << x << " is beyond the calibrated maximum " << px;
  throw Error(ErrorCode::calibration_out_of_range, msg.str());
}

void require_monotone(const std::vector<std::pair<double, double>>& pts, const std::string& what) {
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].first == pts[i - 1].first) throw Error(ErrorCode::config_error, "duplicate calibration point for " + what);
    if (pts[i].second < pts[i - 1].second) {
      throw Error(ErrorCode::config_error, "calibration for " + what + " is not monotone non-decreasing");
    }
  }
}

}  // namespace

PowerCalibration::PowerCalibration(std::vector<LogicPoint> logic, std::vector<BramPoint> bram, double static_watts)
    : logic_(std::move(logic)), bram_(std::move(bram)), static_watts_(static_watts) {
  if (!(static_watts_ >= 0.0) || !std::isfinite(static_watts_)) {
    throw Error(ErrorCode::config_error, "static power must be finite and non-negative");
  }
  std::map<std::pair<std::string, double>, std::vector<std::pair<double, double>>> by_activity, by_size;
  for (const auto& p : logic_) {
    if (!(p.size > 0.0) || !(p.activity > 0.0 && p.activity <= 1.0) || !(p.watts >= 0.0) || !std::isfinite(p.watts) ||
        !std::isfinite(p.size)) {
      throw Error(ErrorCode::config_error, "logic calibration needs size > 0, activity in (0, 1], watts >= 0");
    }
    by_activity[{p.scheme, p.activity}].emplace_back(p.size, p.watts);
    by_size[{p.scheme, p.size}].emplace_back(p.activity, p.watts);
  }
  for (auto* group : {&by_activity, &by_size}) {
    for (auto& [key, pts] : *group) {
      std::sort(pts.begin(), pts.end());
      require_monotone(pts, "logic/" + key.first);
    }
  }
  std::vector<std::pair<double, double>> b;
  for (const auto& p : bram_) {
    if (!(p.activity > 0.0 && p.activity <= 1.0) || !(p.joules_per_read >= 0.0) || !std::isfinite(p.joules_per_read)) {
      throw Error(ErrorCode::config_error, "bram calibration needs activity in (0, 1] and energy >= 0");
    }
    b.emplace_back(p.activity, p.joules_per_read);
  }
  std::sort(b.begin(), b.end());
  require_monotone(b, "bram");
}

PowerCalibration PowerCalibration::parse(std::istream& in) {
  std::vector<LogicPoint> logic;
  std::vector<BramPoint> bram;
  double static_watts = 0.0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string kind;
    if (!(fields >> kind)) continue;
    bool ok = false;
    if (kind == "logic") {
      LogicPoint p;
      ok = static_cast<bool>(fields >> p.scheme >> p.size >> p.activity >> p.watts);
      if (ok) logic.push_back(p);
    } else if (kind == "bram") {
      BramPoint p;
      ok = static_cast<bool>(fields >> p.activity >> p.joules_per_read);
      if (ok) bram.push_back(p);
    } else if (kind == "static") {
      ok = static_cast<bool>(fields >> static_watts);
    }
    std::string extra;
    if (!ok || (fields >> extra)) {
      throw Error(ErrorCode::parse_error, "calibration line " + std::to_string(line_no) + ": malformed record");
    }
  }
  return PowerCalibration(std::move(logic), std::move(bram), static_watts);
}

PowerCalibration PowerCalibration::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open calibration file " + path);
  return parse(in);
}

double PowerCalibration::logic_watts(const std::string& scheme, double size, double activity) const {
  std::map<double, std::vector<std::pair<double, double>>> levels;
  for (const auto& p : logic_) {
    if (p.scheme == scheme) levels[p.activity].emplace_back(p.size, p.watts);
  }
  if (levels.empty()) throw Error(ErrorCode::calibration_out_of_range, "no logic calibration for encoder " + scheme);
  if (!(activity >= 0.0) || !(size >= 0.0)) throw Error(ErrorCode::calibration_out_of_range, "negative power query");
  if (activity == 0.0 || size == 0.0) return 0.0;
  for (auto& [a, pts] : levels) std::sort(pts.begin(), pts.end());

  auto at_level = [&](double a) { return interpolate(levels.at(a), size, "adder size"); };
  double lower_a = 0.0, lower_w = 0.0;
  for (const auto& [a, pts] : levels) {
    if (activity == a) return at_level(a);
    if (activity < a) return lerp(lower_a, lower_w, a, at_level(a), activity);
    lower_a = a;
    lower_w = at_level(a);
  }
  std::ostringstream msg;
  msg << "activity " << activity << " is beyond the calibrated maximum " << lower_a;
  throw Error(ErrorCode::calibration_out_of_range, msg.str());
}

double PowerCalibration::bram_joules_per_read(double activity) const {
  if (!(activity >= 0.0)) throw Error(ErrorCode::calibration_out_of_range, "negative activity");
  if (activity == 0.0) return 0.0;
  if (bram_.empty()) throw Error(ErrorCode::calibration_out_of_range, "no BRAM calibration records");
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : bram_) pts.emplace_back(p.activity, p.joules_per_read);
  std::sort(pts.begin(), pts.end());
  return interpolate(pts, activity, "BRAM activity");
}

PowerBreakdown estimate_power(const CostReport& report, const ActivityRates& activity,
                              const PowerCalibration& calibration) {
  if (report.encoder.empty()) throw Error(ErrorCode::config_error, "cost report has no encoder; attach LUTs first");
  PowerBreakdown p;
  p.logic_watts = static_cast<double>(report.port_width_bits) *
                  calibration.logic_watts(report.encoder, static_cast<double>(report.features_per_cycle),
                                          activity.adder_input);
  const double reads_per_cycle = static_cast<double>(report.features_per_cycle + report.id_brams);
  p.bram_watts = reads_per_cycle * report.clock_hz * calibration.bram_joules_per_read(activity.bram_read);
  p.static_watts = calibration.static_watts();
  return p;
}

}  // namespace hdapprox
