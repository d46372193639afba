#include <doctest.h>

#include <cmath>
#include <random>

#include "hdapprox/errors.hpp"
#include "hdapprox/trainer.hpp"

using namespace hdapprox;

namespace {

EncodedVector ev(std::vector<std::uint32_t> v) { return {std::move(v), 1}; }

std::vector<EncodedVector> random_encodings(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<EncodedVector> out(n);
  for (auto& e : out) {
    e.values.resize(dim);
    for (auto& x : e.values) x = static_cast<std::uint32_t>(1 + rng() % 20);
  }
  return out;
}

// Brute-force argmax of cosine, written out directly.
std::size_t oracle_predict(const ClassMatrix& c, const EncodedVector& h) {
  std::size_t best = 0;
  double best_score = -2.0;
  for (std::size_t k = 0; k < c.classes(); ++k) {
    double d = 0, nh = 0, nc = 0;
    for (std::size_t j = 0; j < h.dim(); ++j) {
      d += h.values[j] * c.row(k)[j];
      nh += double(h.values[j]) * h.values[j];
      nc += c.row(k)[j] * c.row(k)[j];
    }
    const double s = d / std::sqrt(nh * nc);
    if (s > best_score) {
      best = k;
      best_score = s;
    }
  }
  return best;
}

Dataset small_synthetic(std::uint64_t seed) {
  SyntheticSpec spec;
  spec.classes = 3;
  spec.per_class = 40;
  spec.features = 16;
  spec.seed = seed;
  return gen_synthetic(spec);
}

}  // namespace

TEST_CASE("cosine similarity") {
  const std::vector<double> a = {1, 0, 0}, b = {0, 2, 0}, c = {3, 0, 0};
  CHECK(cosine_similarity(a, b) == doctest::Approx(0.0));
  CHECK(cosine_similarity(a, c) == doctest::Approx(1.0));
  const std::vector<double> scaled = {2, 4, 6}, base = {1, 2, 3}, other = {3, 1, 2};
  CHECK(cosine_similarity(scaled, other) == doctest::Approx(cosine_similarity(base, other)));
  const std::vector<double> zero = {0, 0, 0};
  CHECK_THROWS_AS(cosine_similarity(zero, a), Error);
  const std::vector<double> shorter = {1, 2};
  CHECK_THROWS_AS(cosine_similarity(shorter, a), Error);
}

TEST_CASE("initial bundling sums each class") {
  const std::vector<EncodedVector> e = {ev({1, 2}), ev({3, 4}), ev({5, 6})};
  const std::vector<std::size_t> labels = {0, 1, 0};
  const ClassMatrix c = bundle_initial(e, labels, 2);
  CHECK(c.row(0)[0] == 6);
  CHECK(c.row(0)[1] == 8);
  CHECK(c.row(1)[1] == 4);
  CHECK_THROWS_AS(bundle_initial(e, labels, 3), Error);
}

TEST_CASE("prediction ties go to the lowest class") {
  ClassMatrix c(2, 2);
  c.row(0)[0] = 1;
  c.row(1)[1] = 1;
  CHECK(predict(c, ev({1, 1})) == 0);
  CHECK(predict(c, ev({1, 2})) == 1);
}

TEST_CASE("prediction matches a brute-force argmax") {
  const auto enc = random_encodings(60, 96, 3);
  ClassMatrix c(5, 96);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  for (std::size_t k = 0; k < 5; ++k) {
    for (double& x : c.row(k)) x = g(rng);
  }
  for (const auto& h : enc) CHECK(predict(c, h) == oracle_predict(c, h));
}

TEST_CASE("one epoch applies the signed update on each mispredict") {
  const auto enc = random_encodings(40, 64, 5);
  std::vector<std::size_t> labels(40);
  for (std::size_t i = 0; i < 40; ++i) labels[i] = i % 4;
  const ClassMatrix start = bundle_initial(enc, labels, 4);

  // Replay the rule by hand with the oracle.
  ClassMatrix expect = start;
  std::size_t errors = 0;
  for (std::size_t i = 0; i < 40; ++i) {
    const std::size_t guess = oracle_predict(expect, enc[i]);
    if (guess == labels[i]) continue;
    ++errors;
    for (std::size_t j = 0; j < 64; ++j) {
      expect.row(labels[i])[j] += 0.5 * enc[i].values[j];
      expect.row(guess)[j] -= 0.5 * enc[i].values[j];
    }
  }
  const EpochResult got = train_epoch(start, enc, labels, 0.5);
  CHECK(got.errors == errors);
  for (std::size_t k = 0; k < 4; ++k) {
    for (std::size_t j = 0; j < 64; ++j) CHECK(got.classes.row(k)[j] == doctest::Approx(expect.row(k)[j]));
  }
}

TEST_CASE("an epoch conserves the column sums of the class matrix") {
  const auto enc = random_encodings(80, 128, 6);
  std::vector<std::size_t> labels(80);
  std::mt19937_64 rng(6);
  for (auto& l : labels) l = rng() % 5;
  for (std::size_t k = 0; k < 5; ++k) labels[k] = k;
  const ClassMatrix start = bundle_initial(enc, labels, 5);
  const EpochResult r = train_epoch(start, enc, labels, 2.75);
  CHECK(r.errors > 0);
  for (std::size_t j = 0; j < 128; ++j) {
    double before = 0, after = 0;
    for (std::size_t k = 0; k < 5; ++k) {
      before += start.row(k)[j];
      after += r.classes.row(k)[j];
    }
    CHECK(std::abs(before - after) <= 1e-9 * std::max(1.0, std::abs(before)));
  }
}

TEST_CASE("train_epoch rejects bad arguments") {
  const auto enc = random_encodings(4, 64, 7);
  const std::vector<std::size_t> labels = {0, 1, 0, 1};
  const ClassMatrix c = bundle_initial(enc, labels, 2);
  CHECK_THROWS_AS(train_epoch(c, enc, labels, 0.0), Error);
  const std::vector<std::size_t> short_order = {0, 1};
  CHECK_THROWS_AS(train_epoch(c, enc, labels, 1.0, short_order), Error);
}

TEST_CASE("training is deterministic and learns separable data") {
  const Dataset data = small_synthetic(21);
  TrainOptions o;
  o.dim = 1024;
  o.levels = 8;
  o.epochs = 10;
  o.seed = 77;
  std::vector<std::size_t> seen;
  o.on_epoch = [&](std::size_t, std::size_t errors) { seen.push_back(errors); };
  const TrainResult a = train(data, o);
  o.on_epoch = nullptr;
  const TrainResult b = train(data, o);
  CHECK(a.model == b.model);
  CHECK(a.epoch_errors == b.epoch_errors);
  CHECK(seen == a.epoch_errors);
  CHECK(a.epoch_errors.size() == 10);
  CHECK(a.train_accuracy >= 0.95);
  CHECK(a.probes.size() == 5);
  REQUIRE(a.validation_accuracy.has_value());
  CHECK(a.model.alpha >= 0.1);
  CHECK(a.model.alpha <= 10.0);
  CHECK(evaluate(a.model, data).accuracy() == doctest::Approx(a.train_accuracy));
}

TEST_CASE("an explicit alpha skips the search") {
  const Dataset data = small_synthetic(22);
  TrainOptions o;
  o.dim = 512;
  o.levels = 8;
  o.epochs = 3;
  o.alpha = 1.5;
  const TrainResult r = train(data, o);
  CHECK(r.model.alpha == 1.5);
  CHECK(r.probes.empty());
  CHECK_FALSE(r.validation_accuracy.has_value());
  o.epochs = 0;
  CHECK_THROWS_AS(train(data, o), Error);
}

TEST_CASE("shuffled epochs are seeded") {
  const Dataset data = small_synthetic(23);
  TrainOptions o;
  o.dim = 512;
  o.levels = 8;
  o.epochs = 4;
  o.alpha = 1.0;
  o.shuffle = true;
  CHECK(train(data, o).model == train(data, o).model);
}

TEST_CASE("evaluation counts a confusion matrix") {
  const Dataset data = small_synthetic(24);
  TrainOptions o;
  o.dim = 512;
  o.levels = 8;
  o.epochs = 5;
  o.alpha = 1.0;
  const TrainResult r = train(data, o);
  const Evaluation e = evaluate(r.model, data);
  CHECK(e.total == data.size());
  std::size_t sum = 0, diag = 0;
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t p = 0; p < 3; ++p) {
      sum += e.confusion[t * 3 + p];
      if (t == p) diag += e.confusion[t * 3 + p];
    }
  }
  CHECK(sum == e.total);
  CHECK(diag == e.correct);
  Dataset empty;
  empty.features = data.features;
  CHECK_THROWS_AS(evaluate(r.model, empty), Error);
  Dataset wrong = data;
  wrong.features = 15;
  CHECK_THROWS_AS(evaluate(r.model, wrong), Error);
}
