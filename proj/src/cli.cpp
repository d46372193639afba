#include "hdapprox/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hdapprox/cost_model.hpp"
#include "hdapprox/dataset.hpp"
#include "hdapprox/errors.hpp"
#include "hdapprox/model_io.hpp"
#include "hdapprox/power.hpp"
#include "hdapprox/trainer.hpp"

namespace hdapprox::cli {
namespace {

using Json = nlohmann::ordered_json;

// Rows of training data replayed to estimate switching activity.
constexpr std::size_t kActivitySampleRows = 32;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fixed(double v, int digits = 6) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

EncoderSpec parse_encoder(const std::string& text) {
  try {
    return EncoderSpec::parse(text);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

std::vector<EncoderSpec> parse_encoder_list(const std::string& text) {
  std::vector<EncoderSpec> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(parse_encoder(item));
  }
  if (out.empty()) throw UsageError("--encoders needs at least one encoder");
  return out;
}

struct DataFlags {
  std::string label_col = "-1";
  bool no_header = false;

  [[nodiscard]] CsvOptions csv() const { return {label_col, !no_header}; }
};

void add_data_flags(CLI::App& cmd, DataFlags& flags) {
  cmd.add_option("--label-col", flags.label_col, "Label column name or index (negative counts from the end)");
  cmd.add_flag("--no-header", flags.no_header, "CSV files have no header row");
}

struct ModelFlags {
  std::string encoder = "exact";
  std::size_t dhv = 2048;
  std::size_t levels = 16;
  std::size_t epochs = 50;
  std::optional<double> alpha;
  std::uint64_t seed = kDefaultSeed;
  bool shuffle = false;
};

void add_model_flags(CLI::App& cmd, ModelFlags& flags, bool with_encoder) {
  if (with_encoder) cmd.add_option("--encoder", flags.encoder, "exact | maj | maj2 | overfeed | trunc:<k>");
  cmd.add_option("--dhv", flags.dhv, "Hypervector dimension (multiple of 64)");
  cmd.add_option("--levels", flags.levels, "Quantization levels L");
  cmd.add_option("--epochs", flags.epochs, "Refinement epochs");
  cmd.add_option("--alpha", flags.alpha, "Learning rate; searched by bisection when absent");
  cmd.add_option("--seed", flags.seed, "Master seed");
  cmd.add_flag("--shuffle", flags.shuffle, "Seeded shuffle of the sample order every epoch");
}

TrainOptions train_options(const ModelFlags& f, const EncoderSpec& spec) {
  if (f.epochs == 0) throw UsageError("--epochs must be at least 1");
  if (f.alpha && !(*f.alpha > 0.0)) throw UsageError("--alpha must be positive");
  if (f.dhv == 0 || f.dhv % 64 != 0) throw UsageError("--dhv must be a positive multiple of 64");
  if (f.levels < 2) throw UsageError("--levels must be at least 2");
  TrainOptions o;
  o.dim = f.dhv;
  o.levels = f.levels;
  o.encoder = spec;
  o.epochs = f.epochs;
  o.alpha = f.alpha;
  o.seed = f.seed;
  o.shuffle = f.shuffle;
  return o;
}

struct Hardware {
  std::optional<HardwareConfig> hw;
  std::optional<PowerCalibration> calibration;
};

Hardware load_hardware(const std::string& hw_path, const std::string& cal_path) {
  Hardware h;
  if (!cal_path.empty() && hw_path.empty()) throw UsageError("--calibration requires --hw");
  if (!hw_path.empty()) h.hw = HardwareConfig::load(hw_path);
  if (!cal_path.empty()) h.calibration = PowerCalibration::load(cal_path);
  return h;
}

void check_format(const std::string& format) {
  if (format != "text" && format != "json") throw UsageError("--format must be text or json");
}

ActivityRates activity_from(const Model& model, const Dataset& data, const CostReport& report) {
  Dataset head;
  head.features = data.features;
  head.label_names = data.label_names;
  const std::size_t rows = std::min(data.size(), kActivitySampleRows);
  head.values.assign(data.values.begin(), data.values.begin() + static_cast<std::ptrdiff_t>(rows * data.features));
  head.labels.assign(data.labels.begin(), data.labels.begin() + static_cast<std::ptrdiff_t>(rows));
  const std::vector<std::uint16_t> q = model.quantizer.quantize(head);
  return profile_activity(model.levels, model.ids, q, rows, report);
}

Json power_json(const PowerBreakdown& p, const ActivityRates& a) {
  Json j;
  j["adder_activity"] = a.adder_input;
  j["bram_activity"] = a.bram_read;
  j["logic_watts"] = p.logic_watts;
  j["bram_watts"] = p.bram_watts;
  j["static_watts"] = p.static_watts;
  j["total_watts"] = p.total();
  return j;
}

void write_power_text(std::ostream& out, const PowerBreakdown& p, const ActivityRates& a) {
  out << "adder_activity: " << fixed(a.adder_input) << '\n'
      << "bram_activity: " << fixed(a.bram_read) << '\n'
      << "logic_watts: " << fixed(p.logic_watts) << '\n'
      << "bram_watts: " << fixed(p.bram_watts) << '\n'
      << "static_watts: " << fixed(p.static_watts) << '\n';
}

// --- gen-data ---------------------------------------------------------------

struct GenFlags {
  SyntheticSpec spec;
  std::string out;
  std::string test;
  double holdout = 0.25;
};

void write_dataset(const Dataset& d, const std::string& path) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::trunc);
    if (!f) throw Error(ErrorCode::io_error, "cannot write " + tmp.string());
    write_csv(f, d);
    if (!f.flush()) throw Error(ErrorCode::io_error, "failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

int cmd_gen_data(const GenFlags& g, std::ostream& out) {
  const Dataset all = gen_synthetic(g.spec);
  if (g.test.empty()) {
    write_dataset(all, g.out);
    out << "wrote " << all.size() << " samples to " << g.out << '\n';
    return kExitOk;
  }
  if (!(g.holdout > 0.0 && g.holdout < 1.0)) throw UsageError("--holdout must be in (0, 1)");
  const auto [train, test] = split_holdout(all, g.holdout, g.spec.seed);
  write_dataset(train, g.out);
  write_dataset(test, g.test);
  out << "wrote " << train.size() << " samples to " << g.out << " and " << test.size() << " to " << g.test << '\n';
  return kExitOk;
}

// --- train ------------------------------------------------------------------

struct TrainFlags {
  std::string data, test, out, hw, calibration, format = "text";
  DataFlags data_flags;
  ModelFlags model;
};

int cmd_train(const TrainFlags& t, std::ostream& out) {
  check_format(t.format);
  const EncoderSpec spec = parse_encoder(t.model.encoder);
  TrainOptions options = train_options(t.model, spec);
  const Hardware hw = load_hardware(t.hw, t.calibration);
  const Dataset data = load_csv(t.data, t.data_flags.csv());
  std::optional<Dataset> test;
  if (!t.test.empty()) test = load_csv(t.test, t.data_flags.csv());

  const bool text = t.format == "text";
  if (text) {
    options.on_epoch = [&out](std::size_t epoch, std::size_t errors) {
      out << "epoch " << epoch << " errors " << errors << '\n';
    };
  }
  const TrainResult result = train(data, options);
  save_model(result.model, t.out);

  std::optional<double> test_accuracy;
  if (test) test_accuracy = evaluate(result.model, relabel(*test, result.model.label_names)).accuracy();

  std::optional<CostReport> cost;
  std::optional<std::pair<PowerBreakdown, ActivityRates>> power;
  if (hw.hw) {
    cost = estimate_cost(data.features, options.dim, options.levels, *hw.hw, spec);
    if (hw.calibration) {
      const ActivityRates a = activity_from(result.model, data, *cost);
      const PowerBreakdown p = estimate_power(*cost, a, *hw.calibration);
      cost->estimated_power_watts = p.total();
      power.emplace(p, a);
    }
  }

  if (text) {
    out << "encoder: " << spec.name() << '\n'
        << "alpha: " << fixed(result.model.alpha) << (options.alpha ? " (given)" : " (searched)") << '\n'
        << "train_accuracy: " << fixed(result.train_accuracy) << '\n'
        << "validation_accuracy: "
        << (result.validation_accuracy ? fixed(*result.validation_accuracy) : std::string("n/a")) << '\n';
    if (test_accuracy) out << "test_accuracy: " << fixed(*test_accuracy) << '\n';
    out << "model: " << t.out << '\n';
    if (cost) write_text(out, *cost);
    if (power) write_power_text(out, power->first, power->second);
    return kExitOk;
  }
  Json j;
  j["encoder"] = spec.name();
  j["alpha"] = result.model.alpha;
  j["alpha_searched"] = !options.alpha.has_value();
  j["epoch_errors"] = result.epoch_errors;
  j["train_accuracy"] = result.train_accuracy;
  j["validation_accuracy"] = result.validation_accuracy ? Json(*result.validation_accuracy) : Json(nullptr);
  j["test_accuracy"] = test_accuracy ? Json(*test_accuracy) : Json(nullptr);
  j["model"] = t.out;
  j["cost"] = cost ? Json::parse(to_json(*cost)) : Json(nullptr);
  j["power"] = power ? power_json(power->first, power->second) : Json(nullptr);
  out << j.dump(2) << '\n';
  return kExitOk;
}

// --- eval -------------------------------------------------------------------

struct EvalFlags {
  std::string model, test, format = "text";
  DataFlags data_flags;
};

int cmd_eval(const EvalFlags& e, std::ostream& out) {
  check_format(e.format);
  const Model model = load_model(e.model);
  const Dataset test = relabel(load_csv(e.test, e.data_flags.csv()), model.label_names);
  if (test.size() == 0) throw Error(ErrorCode::invalid_argument, "test set " + e.test + " has no samples");
  const Evaluation ev = evaluate(model, test);
  const std::size_t k = model.label_names.size();

  if (e.format == "text") {
    out << "encoder: " << model.encoder.spec.name() << '\n'
        << "samples: " << ev.total << '\n'
        << "correct: " << ev.correct << '\n'
        << "accuracy: " << fixed(ev.accuracy()) << '\n'
        << "confusion (rows = true, columns = predicted):\n";
    out << "label";
    for (const auto& name : model.label_names) out << ',' << name;
    out << '\n';
    for (std::size_t t = 0; t < k; ++t) {
      out << model.label_names[t];
      for (std::size_t p = 0; p < k; ++p) out << ',' << ev.confusion[t * k + p];
      out << '\n';
    }
    return kExitOk;
  }
  Json j;
  j["encoder"] = model.encoder.spec.name();
  j["samples"] = ev.total;
  j["correct"] = ev.correct;
  j["accuracy"] = ev.accuracy();
  j["labels"] = model.label_names;
  Json rows = Json::array();
  for (std::size_t t = 0; t < k; ++t) {
    rows.push_back(std::vector<std::size_t>(ev.confusion.begin() + static_cast<std::ptrdiff_t>(t * k),
                                            ev.confusion.begin() + static_cast<std::ptrdiff_t>((t + 1) * k)));
  }
  j["confusion"] = rows;
  out << j.dump(2) << '\n';
  return kExitOk;
}

// --- estimate ---------------------------------------------------------------

struct EstimateFlags {
  std::string hw, calibration, model, data, activity, format = "text";
  DataFlags data_flags;
  ModelFlags params;
  std::size_t features = 0;
};

ActivityRates parse_activity(const std::string& text) {
  std::istringstream in(text);
  ActivityRates a;
  char comma = 0;
  if (!(in >> a.adder_input >> comma >> a.bram_read) || comma != ',' || !(in >> std::ws).eof()) {
    throw UsageError("--activity expects <adder>,<bram>");
  }
  return a;
}

int cmd_estimate(const EstimateFlags& e, std::ostream& out) {
  check_format(e.format);
  if (e.hw.empty()) {
    throw UsageError(
        "estimate needs a hardware description: pass --hw <file.json> with total_brams, bram_capacity_bits, "
        "port_width_bits, ports_per_bram, lut_budget and clock_hz");
  }
  const Hardware hw = load_hardware(e.hw, e.calibration);

  std::optional<Model> model;
  EncoderSpec spec;
  std::size_t features = 0, dim = 0, levels = 0;
  if (!e.model.empty()) {
    model = load_model(e.model);
    spec = model->encoder.spec;
    features = model->features();
    dim = model->dim();
    levels = model->levels.levels();
  } else {
    if (e.features == 0) throw UsageError("estimate needs --model or --features");
    spec = parse_encoder(e.params.encoder);
    features = e.features;
    dim = e.params.dhv;
    levels = e.params.levels;
  }

  CostReport report = estimate_cost(features, dim, levels, *hw.hw, spec);
  std::optional<std::pair<PowerBreakdown, ActivityRates>> power;
  if (hw.calibration) {
    ActivityRates a;
    if (!e.activity.empty()) {
      a = parse_activity(e.activity);
    } else if (!e.data.empty()) {
      const Dataset data = load_csv(e.data, e.data_flags.csv());
      if (!model) {
        // Tables and quantizer exactly as training with these flags would build them.
        Model tables;
        tables.quantizer = Quantizer::fit(data, levels);
        Rng lr = make_stream(e.params.seed, Stream::levels);
        tables.levels = LevelTable::generate(dim, levels, lr);
        Rng ir = make_stream(e.params.seed, Stream::ids);
        tables.ids = IdTable::generate(dim, data.features, ir);
        model = std::move(tables);
      }
      if (data.features != features) throw Error(ErrorCode::dimension_mismatch, "--data feature count does not match");
      a = activity_from(*model, data, report);
    } else {
      throw UsageError("power estimation needs switching activity: pass --data <csv> or --activity <adder>,<bram>");
    }
    const PowerBreakdown p = estimate_power(report, a, *hw.calibration);
    report.estimated_power_watts = p.total();
    power.emplace(p, a);
  }

  if (e.format == "text") {
    write_text(out, report);
    if (power) write_power_text(out, power->first, power->second);
    return kExitOk;
  }
  Json j = Json::parse(to_json(report));
  j["power"] = power ? power_json(power->first, power->second) : Json(nullptr);
  out << j.dump(2) << '\n';
  return kExitOk;
}

// --- sweep ------------------------------------------------------------------

struct SweepFlags {
  std::string data, test, hw, calibration, encoders, format = "text";
  DataFlags data_flags;
  ModelFlags model;
  double holdout = 0.2;
};

struct SweepRow {
  EncoderSpec spec;
  double accuracy = 0.0;
  double alpha = 0.0;
  std::size_t luts = 0;
  double saving = 0.0;
  std::optional<std::size_t> cycles;
  std::optional<double> watts;
};

int cmd_sweep(const SweepFlags& s, std::ostream& out) {
  check_format(s.format);
  const std::vector<EncoderSpec> specs =
      s.encoders.empty() ? standard_encoders() : parse_encoder_list(s.encoders);
  const TrainOptions base = train_options(s.model, specs.front());
  const Hardware hw = load_hardware(s.hw, s.calibration);
  const Dataset data = load_csv(s.data, s.data_flags.csv());

  Dataset train_set, test_set;
  if (!s.test.empty()) {
    train_set = data;
    test_set = relabel(load_csv(s.test, s.data_flags.csv()), data.label_names);
  } else {
    if (!(s.holdout > 0.0 && s.holdout < 1.0)) throw UsageError("--holdout must be in (0, 1)");
    std::tie(train_set, test_set) = split_holdout(data, s.holdout, s.model.seed);
  }
  if (test_set.size() == 0) throw Error(ErrorCode::invalid_argument, "sweep test set is empty");

  std::vector<SweepRow> rows;
  for (const EncoderSpec& spec : specs) {
    TrainOptions options = base;
    options.encoder = spec;
    const TrainResult result = train(train_set, options);
    SweepRow row;
    row.spec = spec;
    row.alpha = result.model.alpha;
    row.accuracy = evaluate(result.model, test_set).accuracy();
    row.saving = asymptotic_lut_saving(spec);
    if (hw.hw) {
      CostReport report = estimate_cost(train_set.features, options.dim, options.levels, *hw.hw, spec);
      row.luts = report.lut_per_dimension_tree;
      row.cycles = report.cycles_per_sample;
      if (hw.calibration) {
        row.watts = estimate_power(report, activity_from(result.model, train_set, report), *hw.calibration).total();
      }
    } else {
      row.luts = lut_count(spec, train_set.features);
    }
    rows.push_back(row);
  }

  const auto exact = std::find_if(rows.begin(), rows.end(), [](const SweepRow& r) { return r.spec.scheme == Scheme::exact; });
  auto delta = [&](const SweepRow& r) -> std::optional<double> {
    if (exact == rows.end()) return std::nullopt;
    return r.accuracy - exact->accuracy;
  };

  if (s.format == "text") {
    out << "encoder,accuracy,delta_vs_exact,alpha,lut_per_tree,lut_saving,cycles,power_watts\n";
    for (const SweepRow& r : rows) {
      const auto d = delta(r);
      out << r.spec.name() << ',' << fixed(r.accuracy, 4) << ',' << (d ? fixed(*d, 4) : std::string()) << ','
          << fixed(r.alpha, 4) << ',' << r.luts << ',' << fixed(r.saving, 4) << ','
          << (r.cycles ? std::to_string(*r.cycles) : std::string()) << ','
          << (r.watts ? fixed(*r.watts, 4) : std::string()) << '\n';
    }
    return kExitOk;
  }
  Json j = Json::array();
  for (const SweepRow& r : rows) {
    const auto d = delta(r);
    Json row;
    row["encoder"] = r.spec.name();
    row["accuracy"] = r.accuracy;
    row["delta_vs_exact"] = d ? Json(*d) : Json(nullptr);
    row["alpha"] = r.alpha;
    row["lut_per_tree"] = r.luts;
    row["lut_saving"] = r.saving;
    row["cycles"] = r.cycles ? Json(*r.cycles) : Json(nullptr);
    row["power_watts"] = r.watts ? Json(*r.watts) : Json(nullptr);
    j.push_back(row);
  }
  out << j.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hyperdimensional classification with emulated approximate encoders and an FPGA cost model",
               "hdapprox"};
  app.require_subcommand(1);

  GenFlags gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Write a seeded synthetic Gaussian-cluster dataset");
  gen_cmd->add_option("--classes", gen.spec.classes, "Number of classes");
  gen_cmd->add_option("--per-class", gen.spec.per_class, "Samples per class");
  gen_cmd->add_option("--features", gen.spec.features, "Features per sample");
  gen_cmd->add_option("--separation", gen.spec.separation, "Centroid distance in noise sigmas");
  gen_cmd->add_option("--seed", gen.spec.seed, "Seed");
  gen_cmd->add_option("--out", gen.out, "Output CSV")->required();
  gen_cmd->add_option("--test", gen.test, "Optional held-out CSV");
  gen_cmd->add_option("--holdout", gen.holdout, "Fraction per class written to --test");

  TrainFlags tr;
  auto* train_cmd = app.add_subcommand("train", "Train a model and write it to --out");
  train_cmd->add_option("--data", tr.data, "Training CSV")->required();
  train_cmd->add_option("--test", tr.test, "Optional test CSV for a test accuracy line");
  add_data_flags(*train_cmd, tr.data_flags);
  add_model_flags(*train_cmd, tr.model, true);
  train_cmd->add_option("--hw", tr.hw, "Hardware config (JSON) for a cost report");
  train_cmd->add_option("--calibration", tr.calibration, "Power calibration table");
  train_cmd->add_option("--out", tr.out, "Model file")->required();
  train_cmd->add_option("--format", tr.format, "text | json");

  EvalFlags ev;
  auto* eval_cmd = app.add_subcommand("eval", "Accuracy and confusion counts of a model on a test set");
  eval_cmd->add_option("--model", ev.model, "Model file")->required();
  eval_cmd->add_option("--test", ev.test, "Test CSV")->required();
  add_data_flags(*eval_cmd, ev.data_flags);
  eval_cmd->add_option("--format", ev.format, "text | json");

  EstimateFlags est;
  auto* est_cmd = app.add_subcommand("estimate", "LUT, BRAM, cycle and power estimates for one encoder");
  est_cmd->add_option("--hw", est.hw, "Hardware config (JSON)");
  est_cmd->add_option("--calibration", est.calibration, "Power calibration table");
  est_cmd->add_option("--model", est.model, "Take d_iv, d_hv, L, encoder and tables from a model");
  est_cmd->add_option("--features", est.features, "Input features d_iv (without --model)");
  add_model_flags(*est_cmd, est.params, true);
  est_cmd->add_option("--data", est.data, "CSV sample used to measure switching activity");
  add_data_flags(*est_cmd, est.data_flags);
  est_cmd->add_option("--activity", est.activity, "Switching activity <adder>,<bram> instead of --data");
  est_cmd->add_option("--format", est.format, "text | json");

  SweepFlags sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "Train and evaluate a list of encoders side by side");
  sweep_cmd->add_option("--data", sw.data, "Training CSV")->required();
  sweep_cmd->add_option("--test", sw.test, "Test CSV (default: stratified holdout of --data)");
  sweep_cmd->add_option("--holdout", sw.holdout, "Holdout fraction when --test is absent");
  sweep_cmd->add_option("--encoders", sw.encoders, "Comma-separated encoders (default: the six standard ones)");
  add_data_flags(*sweep_cmd, sw.data_flags);
  add_model_flags(*sweep_cmd, sw.model, false);
  sweep_cmd->add_option("--hw", sw.hw, "Hardware config (JSON)");
  sweep_cmd->add_option("--calibration", sw.calibration, "Power calibration table");
  sweep_cmd->add_option("--format", sw.format, "text | json");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << "run 'hdapprox --help' for usage\n";
    return kExitUsage;
  }

  try {
    if (*gen_cmd) return cmd_gen_data(gen, out);
    if (*train_cmd) return cmd_train(tr, out);
    if (*eval_cmd) return cmd_eval(ev, out);
    if (*est_cmd) return cmd_estimate(est, out);
    if (*sweep_cmd) return cmd_sweep(sw, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n' << "run 'hdapprox --help' for usage\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace hdapprox::cli
