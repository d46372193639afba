#include "hdapprox/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "hdapprox/errors.hpp"

namespace hdapprox {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_double(std::string_view text, double& out) {
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size() && std::isfinite(out);
}

std::size_t resolve_label_column(const std::string& spec, const std::vector<std::string_view>* header,
                                 std::size_t columns) {
  long long index = 0;
  const auto [ptr, ec] = std::from_chars(spec.data(), spec.data() + spec.size(), index);
  if (ec == std::errc{} && ptr == spec.data() + spec.size()) {
    const long long resolved = index < 0 ? static_cast<long long>(columns) + index : index;
    if (resolved < 0 || resolved >= static_cast<long long>(columns)) {
      throw Error(ErrorCode::missing_label_column, "label column index " + spec + " out of range");
    }
    return static_cast<std::size_t>(resolved);
  }
  if (header != nullptr) {
    const auto it = std::find(header->begin(), header->end(), spec);
    if (it != header->end()) return static_cast<std::size_t>(it - header->begin());
  }
  throw Error(ErrorCode::missing_label_column, "label column '" + spec + "' not found");
}

}  // namespace

Dataset parse_csv(std::istream& in, const CsvOptions& options) {
  Dataset data;
  std::unordered_map<std::string, std::size_t> label_index;
  std::string line;
  std::size_t line_no = 0;
  std::size_t columns = 0;
  std::size_t label_col = 0;
  bool resolved = false;
  std::vector<std::string> header_storage;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string_view> fields = split_fields(line);
    if (!resolved) {
      columns = fields.size();
      if (columns < 2) throw Error(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": need a feature and a label column");
      if (options.header) {
        header_storage.assign(fields.begin(), fields.end());
        const std::vector<std::string_view> names(header_storage.begin(), header_storage.end());
        label_col = resolve_label_column(options.label_column, &names, columns);
        resolved = true;
        continue;
      }
      label_col = resolve_label_column(options.label_column, nullptr, columns);
      resolved = true;
    }
    if (fields.size() != columns) {
      throw Error(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": expected " + std::to_string(columns) +
                                              " columns, found " + std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < columns; ++c) {
      if (c == label_col) continue;
      double v = 0.0;
      if (!parse_double(fields[c], v)) {
        throw Error(ErrorCode::parse_error, "row " + std::to_string(line_no) + ", column " + std::to_string(c + 1) +
                                                ": not a number: '" + std::string(fields[c]) + "'");
      }
      data.values.push_back(v);
    }
    const std::string label(fields[label_col]);
    if (label.empty()) throw Error(ErrorCode::parse_error, "row " + std::to_string(line_no) + ": empty label");
    auto [it, inserted] = label_index.try_emplace(label, data.label_names.size());
    if (inserted) data.label_names.push_back(label);
    data.labels.push_back(it->second);
  }
  if (!resolved) throw Error(ErrorCode::parse_error, "empty CSV input");
  data.features = columns - 1;
  return data;
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  return parse_csv(in, options);
}

void write_csv(std::ostream& out, const Dataset& data) {
  for (std::size_t f = 0; f < data.features; ++f) out << 'f' << f << ',';
  out << "label\n";
  char buf[64];
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (const double v : data.row(i)) {
      const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
      out.write(buf, ptr - buf);
      out << ',';
    }
    out << data.label_names[data.labels[i]] << '\n';
  }
}

Dataset relabel(const Dataset& data, std::span<const std::string> names) {
  Dataset out = data;
  out.label_names.assign(names.begin(), names.end());
  for (auto& label : out.labels) {
    const std::string& name = data.label_names[label];
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw Error(ErrorCode::invalid_argument, "label '" + name + "' is not a model class");
    label = static_cast<std::size_t>(it - names.begin());
  }
  return out;
}

Quantizer::Quantizer(std::size_t levels, std::vector<std::vector<double>> edges)
    : levels_(levels), edges_(std::move(edges)) {
  if (levels_ < 2) throw Error(ErrorCode::invalid_argument, "quantizer needs at least 2 levels");
  for (const auto& e : edges_) {
    if (!e.empty() && e.size() != levels_ - 1) throw Error(ErrorCode::invalid_argument, "quantizer edge count mismatch");
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (!std::isfinite(e[i]) || (i > 0 && !(e[i] > e[i - 1]))) {
        throw Error(ErrorCode::invalid_argument, "quantizer edges must be finite and strictly increasing");
      }
    }
  }
}

Quantizer Quantizer::fit(const Dataset& train, std::size_t levels) {
  if (levels < 2) throw Error(ErrorCode::invalid_argument, "quantizer needs at least 2 levels");
  if (levels > std::numeric_limits<std::uint16_t>::max()) throw Error(ErrorCode::invalid_argument, "too many levels");
  if (train.size() == 0) throw Error(ErrorCode::invalid_argument, "cannot fit a quantizer on an empty dataset");
  std::vector<std::vector<double>> edges(train.features);
  for (std::size_t f = 0; f < train.features; ++f) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < train.size(); ++i) {
      lo = std::min(lo, train.values[i * train.features + f]);
      hi = std::max(hi, train.values[i * train.features + f]);
    }
    std::vector<double> e;
    for (std::size_t m = 1; m < levels && hi > lo; ++m) {
      e.push_back(lo + (hi - lo) * static_cast<double>(m) / static_cast<double>(levels));
    }
    // Ranges so narrow that neighbouring edges collapse behave as constant.
    if (std::adjacent_find(e.begin(), e.end(), [](double a, double b) { return !(b > a); }) != e.end()) e.clear();
    edges[f] = std::move(e);
  }
  return Quantizer(levels, std::move(edges));
}

std::uint16_t Quantizer::quantize(std::size_t feature, double value) const {
  const auto& e = edges_[feature];
  return static_cast<std::uint16_t>(std::upper_bound(e.begin(), e.end(), value) - e.begin());
}

std::vector<std::uint16_t> Quantizer::quantize(const Dataset& data) const {
  if (data.features != features()) throw Error(ErrorCode::dimension_mismatch, "quantizer feature count mismatch");
  std::vector<std::uint16_t> out(data.values.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t f = 0; f < data.features; ++f) {
      out[i * data.features + f] = quantize(f, data.values[i * data.features + f]);
    }
  }
  return out;
}

Dataset gen_synthetic(const SyntheticSpec& spec) {
  if (spec.classes < 2 || spec.per_class == 0 || spec.features == 0) {
    throw Error(ErrorCode::invalid_argument, "synthetic data needs >= 2 classes, >= 1 sample and >= 1 feature");
  }
  if (spec.features < spec.classes) {
    throw Error(ErrorCode::invalid_argument, "synthetic data needs at least as many features as classes");
  }
  Rng rng = make_stream(spec.seed, Stream::synthetic);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Orthonormal directions (Gram-Schmidt on Gaussian draws) scaled by
  // separation / sqrt(2) put every pair of centroids exactly `separation` apart.
  std::vector<std::vector<double>> centroids;
  while (centroids.size() < spec.classes) {
    std::vector<double> v(spec.features);
    for (auto& x : v) x = gauss(rng);
    for (const auto& c : centroids) {
      double proj = 0.0;
      for (std::size_t f = 0; f < v.size(); ++f) proj += v[f] * c[f];
      for (std::size_t f = 0; f < v.size(); ++f) v[f] -= proj * c[f];
    }
    double norm = 0.0;
    for (const double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm < 1e-9) continue;
    for (auto& x : v) x /= norm;
    centroids.push_back(std::move(v));
  }
  const double radius = spec.separation / std::sqrt(2.0);

  Dataset data;
  data.features = spec.features;
  for (std::size_t k = 0; k < spec.classes; ++k) data.label_names.push_back("c" + std::to_string(k));
  data.values.reserve(spec.classes * spec.per_class * spec.features);
  // Classes interleave so that any prefix of the data is balanced.
  for (std::size_t n = 0; n < spec.per_class; ++n) {
    for (std::size_t k = 0; k < spec.classes; ++k) {
      for (std::size_t f = 0; f < spec.features; ++f) data.values.push_back(radius * centroids[k][f] + gauss(rng));
      data.labels.push_back(k);
    }
  }
  return data;
}

std::pair<Dataset, Dataset> split_holdout(const Dataset& data, double holdout, std::uint64_t seed) {
  if (!(holdout >= 0.0 && holdout < 1.0)) throw Error(ErrorCode::invalid_argument, "holdout fraction must be in [0, 1)");
  std::vector<std::vector<std::size_t>> by_class(data.class_count());
  for (std::size_t i = 0; i < data.size(); ++i) by_class[data.labels[i]].push_back(i);
  Rng rng = make_stream(seed, Stream::split, 1);
  std::vector<bool> held(data.size(), false);
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    const auto take = static_cast<std::size_t>(std::llround(holdout * static_cast<double>(members.size())));
    for (std::size_t i = 0; i < std::min(take, members.size()); ++i) held[members[i]] = true;
  }
  Dataset keep, out;
  keep.features = out.features = data.features;
  keep.label_names = out.label_names = data.label_names;
  for (std::size_t i = 0; i < data.size(); ++i) {
    Dataset& dst = held[i] ? out : keep;
    const auto row = data.row(i);
    dst.values.insert(dst.values.end(), row.begin(), row.end());
    dst.labels.push_back(data.labels[i]);
  }
  return {std::move(keep), std::move(out)};
}

}  // namespace hdapprox
