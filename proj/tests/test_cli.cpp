#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hdapprox/cli.hpp"
#include "hdapprox/model_io.hpp"

using namespace hdapprox;

namespace {

namespace fs = std::filesystem;

const std::string kData = HDAPPROX_TEST_DATA_DIR;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Per-test scratch directory with a small synthetic train/test pair.
struct Scratch {
  fs::path dir;
  std::string train, test;

  explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / ("hdapprox_cli_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    train = (dir / "train.csv").string();
    test = (dir / "test.csv").string();
    const Run r = run_cli({"gen-data", "--classes", "3", "--per-class", "40", "--features", "24", "--seed", "5",
                       "--out", train, "--test", test});
    REQUIRE(r.code == 0);
  }
  ~Scratch() { fs::remove_all(dir); }
  [[nodiscard]] std::string path(const std::string& f) const { return (dir / f).string(); }
};

const std::vector<std::string> kFast = {"--dhv", "512", "--levels", "8", "--epochs", "5", "--alpha", "1"};

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST_CASE("cli: train writes a model and reports accuracy") {
  Scratch s("train");
  const Run r = run_cli(with({"train", "--data", s.train, "--test", s.test, "--encoder", "trunc:3", "--out",
                          s.path("m.bin")},
                         kFast));
  REQUIRE(r.code == 0);
  CHECK(r.out.find("epoch 1 errors ") != std::string::npos);
  CHECK(r.out.find("train_accuracy: ") != std::string::npos);
  CHECK(r.out.find("test_accuracy: ") != std::string::npos);
  const Model m = load_model(s.path("m.bin"));
  CHECK(m.encoder.spec == EncoderSpec{Scheme::trunc, 3});
}

TEST_CASE("cli: eval prints accuracy and confusion counts") {
  Scratch s("eval");
  REQUIRE(run_cli(with({"train", "--data", s.train, "--out", s.path("m.bin")}, kFast)).code == 0);
  const Run r = run_cli({"eval", "--model", s.path("m.bin"), "--test", s.train});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("accuracy: ") != std::string::npos);
  CHECK(r.out.find("label,c0,c1,c2\n") != std::string::npos);
  const Run j = run_cli({"eval", "--model", s.path("m.bin"), "--test", s.test, "--format", "json"});
  REQUIRE(j.code == 0);
  CHECK(j.out.find("\"confusion\"") != std::string::npos);
}

TEST_CASE("cli: eval refuses mismatched or empty test sets") {
  Scratch s("evalbad");
  REQUIRE(run_cli(with({"train", "--data", s.train, "--out", s.path("m.bin")}, kFast)).code == 0);
  REQUIRE(run_cli({"gen-data", "--classes", "3", "--per-class", "5", "--features", "10", "--out", s.path("narrow.csv")})
              .code == 0);
  CHECK(run_cli({"eval", "--model", s.path("m.bin"), "--test", s.path("narrow.csv")}).code == 1);
  std::ofstream(s.path("empty.csv")) << "f0,label\n";
  CHECK(run_cli({"eval", "--model", s.path("m.bin"), "--test", s.path("empty.csv")}).code == 1);
}

TEST_CASE("cli: usage errors exit with 2") {
  CHECK(run_cli({}).code == 2);
  CHECK(run_cli({"train", "--out", "x.bin"}).code == 2);
  CHECK(run_cli({"frobnicate"}).code == 2);
  Scratch s("usage");
  CHECK(run_cli({"train", "--data", s.train, "--out", s.path("m.bin"), "--encoder", "trunc:1"}).code == 2);
  CHECK(run_cli({"train", "--data", s.train, "--out", s.path("m.bin"), "--encoder", "median"}).code == 2);
  CHECK(run_cli({"train", "--data", s.train, "--out", s.path("m.bin"), "--epochs", "0"}).code == 2);
  CHECK(run_cli({"train", "--data", s.train, "--out", s.path("m.bin"), "--format", "xml"}).code == 2);
  CHECK_FALSE(fs::exists(s.path("m.bin")));
  CHECK(run_cli({"--help"}).code == 0);
}

TEST_CASE("cli: runtime failures exit with 1 and leave no model") {
  Scratch s("runtime");
  const Run r = run_cli({"train", "--data", s.path("missing.csv"), "--out", s.path("m.bin")});
  CHECK(r.code == 1);
  CHECK(r.err.find("IoError") != std::string::npos);
  CHECK_FALSE(fs::exists(s.path("m.bin")));
  std::ofstream(s.path("junk.bin")) << "not a model";
  CHECK(run_cli({"eval", "--model", s.path("junk.bin"), "--test", s.test}).code == 1);
}

TEST_CASE("cli: estimate needs a hardware description") {
  const Run r = run_cli({"estimate", "--features", "617", "--dhv", "2560"});
  CHECK(r.code == 2);
  CHECK(r.err.find("--hw") != std::string::npos);
}

TEST_CASE("cli: estimate reproduces the speech cycle count") {
  const Run r = run_cli({"estimate", "--hw", kData + "/hw_default.json", "--features", "617", "--dhv", "2560", "--levels",
                     "16", "--encoder", "maj"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("cycles_per_sample: 80\n") != std::string::npos);
  CHECK(r.out.find("encoder: maj\n") != std::string::npos);
  const Run p = run_cli({"estimate", "--hw", kData + "/hw_default.json", "--calibration", kData + "/calibration.txt",
                     "--features", "617", "--dhv", "2560", "--activity", "0.5,0.5", "--format", "json"});
  REQUIRE(p.code == 0);
  CHECK(p.out.find("\"total_watts\"") != std::string::npos);
  CHECK(run_cli({"estimate", "--hw", kData + "/hw_default.json", "--calibration", kData + "/calibration.txt",
             "--features", "617"})
            .code == 2);
}

TEST_CASE("cli: sweep emits one row per standard encoder") {
  Scratch s("sweep");
  const Run r = run_cli(with({"sweep", "--data", s.train, "--test", s.test, "--hw", kData + "/hw_default.json",
                          "--calibration", kData + "/calibration.txt"},
                         kFast));
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(lines, line)) rows.push_back(line);
  REQUIRE(rows.size() == 7);
  CHECK(rows[0] == "encoder,accuracy,delta_vs_exact,alpha,lut_per_tree,lut_saving,cycles,power_watts");
  CHECK(rows[1].starts_with("exact,"));
  CHECK(rows[2].find(",0.7083,") != std::string::npos);
  CHECK(rows[6].starts_with("trunc:4,"));
  const Run again = run_cli(with({"sweep", "--data", s.train, "--test", s.test, "--hw", kData + "/hw_default.json",
                              "--calibration", kData + "/calibration.txt"},
                             kFast));
  CHECK(again.out == r.out);
}

TEST_CASE("cli: identical runs give identical bytes") {
  Scratch s("determinism");
  const auto args = [&](const std::string& out) {
    return with({"train", "--data", s.train, "--out", out, "--hw", kData + "/hw_default.json", "--format", "json"},
                {"--dhv", "512", "--levels", "8", "--epochs", "3"});
  };
  const Run a = run_cli(args(s.path("a.bin")));
  const Run b = run_cli(args(s.path("b.bin")));
  REQUIRE(a.code == 0);
  CHECK(slurp(s.path("a.bin")) == slurp(s.path("b.bin")));
  std::string ja = a.out, jb = b.out;
  ja.replace(ja.find("a.bin"), 5, "x.bin");
  jb.replace(jb.find("b.bin"), 5, "x.bin");
  CHECK(ja == jb);
}
