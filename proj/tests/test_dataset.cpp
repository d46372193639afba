#include <doctest.h>

#include <sstream>

#include "hdapprox/dataset.hpp"
#include "hdapprox/errors.hpp"

using namespace hdapprox;

TEST_CASE("CSV with header and named label column") {
  std::istringstream in("a,label,b\n1.5,cat,2\n-3,dog,4e1\n0,cat,0\n");
  const Dataset d = parse_csv(in, {"label", true});
  CHECK(d.features == 2);
  CHECK(d.size() == 3);
  CHECK(d.label_names == std::vector<std::string>{"cat", "dog"});
  CHECK(d.labels == std::vector<std::size_t>{0, 1, 0});
  CHECK(d.values == std::vector<double>{1.5, 2, -3, 40, 0, 0});
}

TEST_CASE("CSV without header, label by index") {
  std::istringstream in("7,1,2\n8,3,4\n");
  const Dataset d = parse_csv(in, {"0", false});
  CHECK(d.features == 2);
  CHECK(d.label_names == std::vector<std::string>{"7", "8"});
  CHECK(d.values == std::vector<double>{1, 2, 3, 4});
}

TEST_CASE("CSV errors name the row and column") {
  std::istringstream in("x,y,label\n1,2,a\n3,abc,b\n");
  try {
    (void)parse_csv(in);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::parse_error);
    CHECK(std::string(e.what()).find("row 3, column 2") != std::string::npos);
  }
  std::istringstream ragged("x,y,label\n1,2\n");
  CHECK_THROWS_AS(parse_csv(ragged), Error);
  std::istringstream missing("x,y,label\n1,2,a\n");
  try {
    (void)parse_csv(missing, {"class", true});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::missing_label_column);
  }
}

TEST_CASE("CSV round trip keeps values exactly") {
  SyntheticSpec spec;
  spec.per_class = 5;
  spec.features = 8;
  const Dataset d = gen_synthetic(spec);
  std::stringstream io;
  write_csv(io, d);
  const Dataset back = parse_csv(io);
  CHECK(back.values == d.values);
  CHECK(back.labels == d.labels);
  CHECK(back.label_names == d.label_names);
}

TEST_CASE("quantizer bins linearly and clamps") {
  Dataset d;
  d.features = 2;
  d.values = {0, 5, 10, 5, 5, 5};
  d.labels = {0, 0, 0};
  d.label_names = {"x"};
  const Quantizer q = Quantizer::fit(d, 4);
  CHECK(q.quantize(0, 0.0) == 0);
  CHECK(q.quantize(0, 2.4) == 0);
  CHECK(q.quantize(0, 2.5) == 1);
  CHECK(q.quantize(0, 9.99) == 3);
  CHECK(q.quantize(0, 10.0) == 3);
  CHECK(q.quantize(0, -100.0) == 0);
  CHECK(q.quantize(0, 1e9) == 3);
  CHECK(q.quantize(1, 5.0) == 0);
  CHECK(q.quantize(1, 6.0) == 0);
}

TEST_CASE("quantized training values stay in range") {
  SyntheticSpec spec;
  spec.per_class = 30;
  spec.features = 12;
  const Dataset d = gen_synthetic(spec);
  for (std::size_t levels : {2U, 5U, 16U}) {
    const Quantizer q = Quantizer::fit(d, levels);
    for (const std::uint16_t v : q.quantize(d)) CHECK(v < levels);
  }
}

TEST_CASE("synthetic data is seeded and balanced") {
  SyntheticSpec spec;
  spec.per_class = 10;
  spec.features = 16;
  const Dataset a = gen_synthetic(spec);
  const Dataset b = gen_synthetic(spec);
  CHECK(a.values == b.values);
  CHECK(a.size() == 40);
  CHECK(a.class_count() == 4);
  spec.seed += 1;
  CHECK(gen_synthetic(spec).values != a.values);
}

TEST_CASE("stratified holdout") {
  SyntheticSpec spec;
  spec.per_class = 20;
  spec.features = 8;
  const Dataset d = gen_synthetic(spec);
  const auto [train, test] = split_holdout(d, 0.25, 3);
  CHECK(train.size() == 60);
  CHECK(test.size() == 20);
  std::vector<int> per_class(4, 0);
  for (const std::size_t l : test.labels) ++per_class[l];
  CHECK(per_class == std::vector<int>{5, 5, 5, 5});
}

TEST_CASE("relabel onto a model's classes") {
  std::istringstream in("x,label\n1,b\n2,a\n");
  const Dataset d = parse_csv(in);
  const std::vector<std::string> names = {"a", "b"};
  const Dataset r = relabel(d, names);
  CHECK(r.labels == std::vector<std::size_t>{1, 0});
  const std::vector<std::string> other = {"a"};
  CHECK_THROWS_AS(relabel(d, other), Error);
}
