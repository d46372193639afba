#include "hdapprox/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hdapprox/errors.hpp"

namespace hdapprox {
namespace {

template <typename T>
double norm_of(std::span<const T> v) {
  double sum = 0.0;
  for (const T x : v) sum += static_cast<double>(x) * static_cast<double>(x);
  return std::sqrt(sum);
}

template <typename A>
double dot(std::span<const A> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) sum += static_cast<double>(a[j]) * b[j];
  return sum;
}

template <typename A>
double cosine(std::span<const A> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::dimension_mismatch, "cosine: lengths differ");
  const double na = norm_of(a);
  const double nb = norm_of(b);
  if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::zero_vector, "cosine similarity of a zero vector");
  return dot(a, b) / (na * nb);
}

// Shared by predict() and the training loop so both score identically.
class Scorer {
 public:
  explicit Scorer(const ClassMatrix& classes) : norms_(classes.classes()) {
    for (std::size_t k = 0; k < classes.classes(); ++k) refresh(classes, k);
  }

  void refresh(const ClassMatrix& classes, std::size_t k) { norms_[k] = norm_of(classes.row(k)); }

  std::size_t best(const ClassMatrix& classes, const EncodedVector& encoded, double encoded_norm) const {
    if (encoded.dim() != classes.dim()) throw Error(ErrorCode::dimension_mismatch, "predict: dimension mismatch");
    if (encoded_norm == 0.0) throw Error(ErrorCode::zero_vector, "cannot classify an all-zero encoding");
    std::size_t best = 0;
    double best_score = 0.0;
    const std::span<const std::uint32_t> values(encoded.values);
    for (std::size_t k = 0; k < classes.classes(); ++k) {
      if (norms_[k] == 0.0) throw Error(ErrorCode::zero_vector, "class " + std::to_string(k) + " is all-zero");
      const double score = dot(values, classes.row(k)) / (encoded_norm * norms_[k]);
      if (k == 0 || score > best_score) {
        best = k;
        best_score = score;
      }
    }
    return best;
  }

 private:
  std::vector<double> norms_;
};

double encoded_norm(const EncodedVector& e) { return norm_of(std::span<const std::uint32_t>(e.values)); }

std::size_t count_correct(const ClassMatrix& classes, std::span<const EncodedVector> encoded,
                          std::span<const std::size_t> labels, std::span<const std::size_t> subset) {
  const Scorer scorer(classes);
  std::size_t correct = 0;
  for (const std::size_t i : subset) {
    if (scorer.best(classes, encoded[i], encoded_norm(encoded[i])) == labels[i]) ++correct;
  }
  return correct;
}

template <typename T>
std::vector<T> gather(std::span<const T> v, std::span<const std::size_t> idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (const std::size_t i : idx) out.push_back(v[i]);
  return out;
}

struct Refined {
  ClassMatrix classes;
  std::vector<std::size_t> errors;
};

Refined refine(std::span<const EncodedVector> encoded, std::span<const std::size_t> labels, std::size_t class_count,
               double alpha, const TrainOptions& options, bool report) {
  Refined r{bundle_initial(encoded, labels, class_count), {}};
  std::vector<std::size_t> order(encoded.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    if (options.shuffle) {
      Rng rng = make_stream(options.seed, Stream::shuffle, static_cast<std::uint32_t>(epoch));
      std::shuffle(order.begin(), order.end(), rng);
    }
    EpochResult step = train_epoch(std::move(r.classes), encoded, labels, alpha, order);
    r.classes = std::move(step.classes);
    r.errors.push_back(step.errors);
    if (report && options.on_epoch) options.on_epoch(epoch + 1, step.errors);
  }
  return r;
}

// Stratified index split: per class, a seeded shuffle picks the validation
// members; both parts keep ascending (dataset) order.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::span<const std::size_t> labels,
                                                                             std::size_t class_count,
                                                                             double fraction, std::uint64_t seed) {
  std::vector<std::vector<std::size_t>> by_class(class_count);
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  Rng rng = make_stream(seed, Stream::split);
  std::vector<bool> held(labels.size(), false);
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    auto take = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(members.size())));
    take = std::min(take, members.size() > 0 ? members.size() - 1 : 0);
    for (std::size_t i = 0; i < take; ++i) held[members[i]] = true;
  }
  std::vector<std::size_t> fit, validation;
  for (std::size_t i = 0; i < labels.size(); ++i) (held[i] ? validation : fit).push_back(i);
  return {std::move(fit), std::move(validation)};
}

}  // namespace

double cosine_similarity(std::span<const double> a, std::span<const double> b) { return cosine(a, b); }

double cosine_similarity(std::span<const std::uint32_t> a, std::span<const double> b) { return cosine(a, b); }

ClassMatrix bundle_initial(std::span<const EncodedVector> encoded, std::span<const std::size_t> labels,
                           std::size_t class_count) {
  if (encoded.size() != labels.size()) throw Error(ErrorCode::dimension_mismatch, "encodings and labels differ in count");
  if (encoded.empty()) throw Error(ErrorCode::empty_class, "no training samples");
  const std::size_t dim = encoded.front().dim();
  ClassMatrix classes(class_count, dim);
  std::vector<std::size_t> counts(class_count, 0);
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    if (labels[i] >= class_count) throw Error(ErrorCode::invalid_argument, "label out of range");
    if (encoded[i].dim() != dim) throw Error(ErrorCode::dimension_mismatch, "encodings differ in dimension");
    auto row = classes.row(labels[i]);
    for (std::size_t j = 0; j < dim; ++j) row[j] += encoded[i].values[j];
    ++counts[labels[i]];
  }
  for (std::size_t k = 0; k < class_count; ++k) {
    if (counts[k] == 0) throw Error(ErrorCode::empty_class, "class " + std::to_string(k) + " has no samples");
  }
  return classes;
}

std::size_t predict(const ClassMatrix& classes, const EncodedVector& encoded) {
  return Scorer(classes).best(classes, encoded, encoded_norm(encoded));
}

EpochResult train_epoch(ClassMatrix classes, std::span<const EncodedVector> encoded,
                        std::span<const std::size_t> labels, double alpha, std::span<const std::size_t> order) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::invalid_argument, "learning rate must be positive");
  if (encoded.size() != labels.size()) throw Error(ErrorCode::dimension_mismatch, "encodings and labels differ in count");
  if (!order.empty() && order.size() != encoded.size()) {
    throw Error(ErrorCode::invalid_argument, "visiting order must cover every sample");
  }
  Scorer scorer(classes);
  std::size_t errors = 0;
  for (std::size_t n = 0; n < encoded.size(); ++n) {
    const std::size_t i = order.empty() ? n : order[n];
    const EncodedVector& h = encoded[i];
    const std::size_t truth = labels[i];
    const std::size_t guess = scorer.best(classes, h, encoded_norm(h));
    if (guess == truth) continue;
    ++errors;
    auto up = classes.row(truth);
    auto down = classes.row(guess);
    for (std::size_t j = 0; j < h.dim(); ++j) {
      const double step = alpha * static_cast<double>(h.values[j]);
      up[j] += step;
      down[j] -= step;
    }
    scorer.refresh(classes, truth);
    scorer.refresh(classes, guess);
  }
  return {std::move(classes), errors};
}

std::vector<EncodedVector> encode_dataset(const Model& model, const Dataset& data, Execution exec) {
  if (data.features != model.features()) {
    throw Error(ErrorCode::dimension_mismatch, "dataset has " + std::to_string(data.features) +
                                                   " features, model expects " + std::to_string(model.features()));
  }
  const std::vector<std::uint16_t> q = model.quantizer.quantize(data);
  return encode_batch(q, data.size(), model.levels, model.ids, model.encoder, exec);
}

std::size_t predict(const Model& model, const EncodedVector& encoded) { return predict(model.classes, encoded); }

Evaluation evaluate(const Model& model, const Dataset& data, Execution exec) {
  if (data.size() == 0) throw Error(ErrorCode::invalid_argument, "evaluation set is empty");
  const std::vector<EncodedVector> encoded = encode_dataset(model, data, exec);
  const std::size_t classes = model.classes.classes();
  Evaluation ev;
  ev.total = data.size();
  ev.confusion.assign(classes * classes, 0);
  const Scorer scorer(model.classes);
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    if (data.labels[i] >= classes) throw Error(ErrorCode::invalid_argument, "label outside the model's classes");
    const std::size_t guess = scorer.best(model.classes, encoded[i], encoded_norm(encoded[i]));
    ++ev.confusion[data.labels[i] * classes + guess];
    if (guess == data.labels[i]) ++ev.correct;
  }
  return ev;
}

TrainResult train(const Dataset& data, const TrainOptions& options) {
  if (options.epochs == 0) throw Error(ErrorCode::invalid_argument, "epochs must be at least 1");
  if (options.alpha && !(*options.alpha > 0.0)) throw Error(ErrorCode::invalid_argument, "learning rate must be positive");
  if (data.class_count() < 2) throw Error(ErrorCode::invalid_argument, "training needs at least two classes");
  if (data.features == 0 || data.size() == 0) throw Error(ErrorCode::invalid_argument, "training set is empty");

  TrainResult result;
  Model& model = result.model;
  model.master_seed = options.seed;
  model.label_names = data.label_names;
  model.quantizer = Quantizer::fit(data, options.levels);
  {
    Rng rng = make_stream(options.seed, Stream::levels);
    model.levels = LevelTable::generate(options.dim, options.levels, rng);
  }
  {
    Rng rng = make_stream(options.seed, Stream::ids);
    model.ids = IdTable::generate(options.dim, data.features, rng);
  }
  model.encoder = make_encoder_config(options.encoder, options.dim, options.seed);
  validate(model.encoder, data.features, options.dim);

  // Encodings depend only on the frozen tables, so one pass serves every
  // epoch and every alpha probe.
  const std::vector<EncodedVector> encoded = encode_dataset(model, data, options.exec);
  const std::span<const EncodedVector> all(encoded);
  const std::span<const std::size_t> labels(data.labels);
  const std::size_t class_count = data.class_count();

  if (options.alpha) {
    model.alpha = *options.alpha;
  } else {
    const AlphaSearch& s = options.search;
    if (!(s.lo > 0.0) || !(s.hi > s.lo) || s.probes < 2) {
      throw Error(ErrorCode::invalid_argument, "invalid learning-rate search interval");
    }
    const auto [fit, validation] = split_indices(labels, class_count, s.validation_fraction, options.seed);
    if (validation.empty()) throw Error(ErrorCode::invalid_argument, "training set too small for a validation split");
    const std::vector<EncodedVector> fit_enc = gather(all, fit);
    const std::vector<std::size_t> fit_labels = gather(labels, fit);

    auto score = [&](double alpha) {
      const Refined r = refine(fit_enc, fit_labels, class_count, alpha, options, false);
      const double acc = static_cast<double>(count_correct(r.classes, all, labels, validation)) /
                         static_cast<double>(validation.size());
      result.probes.push_back({alpha, acc});
      return acc;
    };

    // Interval halving in log space: keep the half on the side of the
    // better-scoring endpoint, ties toward the smaller rate.
    double lo = s.lo, hi = s.hi;
    double lo_acc = score(lo), hi_acc = score(hi);
    for (unsigned probe = 2; probe < s.probes; ++probe) {
      const double mid = std::sqrt(lo * hi);
      const double mid_acc = score(mid);
      if (lo_acc >= hi_acc) {
        hi = mid;
        hi_acc = mid_acc;
      } else {
        lo = mid;
        lo_acc = mid_acc;
      }
    }
    const AlphaProbe* best = &result.probes.front();
    for (const AlphaProbe& p : result.probes) {
      if (p.accuracy > best->accuracy || (p.accuracy == best->accuracy && p.alpha < best->alpha)) best = &p;
    }
    model.alpha = best->alpha;
    result.validation_accuracy = best->accuracy;
  }

  Refined final_fit = refine(all, labels, class_count, model.alpha, options, true);
  model.classes = std::move(final_fit.classes);
  result.epoch_errors = std::move(final_fit.errors);

  std::vector<std::size_t> every(data.size());
  std::iota(every.begin(), every.end(), std::size_t{0});
  result.train_accuracy =
      static_cast<double>(count_correct(model.classes, all, labels, every)) / static_cast<double>(data.size());
  return result;
}

}  // namespace hdapprox
