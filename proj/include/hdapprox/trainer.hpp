#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hdapprox/dataset.hpp"
#include "hdapprox/encoders.hpp"
#include "hdapprox/tables.hpp"

namespace hdapprox {

// |C| real-valued class rows of equal length, stored row-major.
class ClassMatrix {
 public:
  ClassMatrix() = default;
  ClassMatrix(std::size_t classes, std::size_t dim) : classes_(classes), dim_(dim), data_(classes * dim, 0.0) {}

  [[nodiscard]] std::size_t classes() const noexcept { return classes_; }
  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] std::span<double> row(std::size_t k) { return {data_.data() + k * dim_, dim_}; }
  [[nodiscard]] std::span<const double> row(std::size_t k) const { return {data_.data() + k * dim_, dim_}; }
  [[nodiscard]] std::span<const double> data() const noexcept { return data_; }

  friend bool operator==(const ClassMatrix&, const ClassMatrix&) = default;

 private:
  std::size_t classes_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

double cosine_similarity(std::span<const double> a, std::span<const double> b);
double cosine_similarity(std::span<const std::uint32_t> a, std::span<const double> b);

// Sum of the encodings of each class. Throws empty_class if any class in
// [0, class_count) has no sample.
ClassMatrix bundle_initial(std::span<const EncodedVector> encoded, std::span<const std::size_t> labels,
                           std::size_t class_count);

// Most similar class by cosine; ties go to the lowest index.
std::size_t predict(const ClassMatrix& classes, const EncodedVector& encoded);

struct EpochResult {
  ClassMatrix classes;
  std::size_t errors = 0;
};

// One pass of the perceptron-style refinement in sample order: on a
// mispredict l -> l', C[l] += alpha*H and C[l'] -= alpha*H.
// `order` optionally permutes the visiting order.
EpochResult train_epoch(ClassMatrix classes, std::span<const EncodedVector> encoded,
                        std::span<const std::size_t> labels, double alpha,
                        std::span<const std::size_t> order = {});

struct Model {
  ClassMatrix classes;
  EncoderConfig encoder;
  LevelTable levels;
  IdTable ids;
  Quantizer quantizer;
  double alpha = 1.0;
  std::vector<std::string> label_names;
  std::uint64_t master_seed = kDefaultSeed;

  [[nodiscard]] std::size_t dim() const noexcept { return levels.dim(); }
  [[nodiscard]] std::size_t features() const noexcept { return ids.features(); }

  friend bool operator==(const Model&, const Model&) = default;
};

struct AlphaSearch {
  double lo = 0.1;
  double hi = 10.0;
  unsigned probes = 5;
  double validation_fraction = 0.2;
};

struct TrainOptions {
  std::size_t dim = 2048;
  std::size_t levels = 16;
  EncoderSpec encoder;
  std::size_t epochs = 50;
  std::optional<double> alpha;
  std::uint64_t seed = kDefaultSeed;
  bool shuffle = false;
  AlphaSearch search;
  Execution exec = Execution::parallel;
  // Called after every refinement epoch of the final model with (epoch, errors).
  std::function<void(std::size_t, std::size_t)> on_epoch;
};

struct AlphaProbe {
  double alpha = 0.0;
  double accuracy = 0.0;
};

struct TrainResult {
  Model model;
  std::vector<std::size_t> epoch_errors;
  double train_accuracy = 0.0;
  // Filled only when alpha was searched.
  std::optional<double> validation_accuracy;
  std::vector<AlphaProbe> probes;
};

TrainResult train(const Dataset& data, const TrainOptions& options);

// Encodes a dataset with the model's quantizer, tables and encoder.
std::vector<EncodedVector> encode_dataset(const Model& model, const Dataset& data,
                                          Execution exec = Execution::parallel);

std::size_t predict(const Model& model, const EncodedVector& encoded);

struct Evaluation {
  std::size_t correct = 0;
  std::size_t total = 0;
  // confusion[true * classes + predicted]
  std::vector<std::size_t> confusion;

  [[nodiscard]] double accuracy() const noexcept {
    return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
  }
};

// `data` labels must already index the model's classes (see relabel).
Evaluation evaluate(const Model& model, const Dataset& data, Execution exec = Execution::parallel);

}  // namespace hdapprox
