// Command line front end: synth, train, explain, theory, eval.
// Success output is machine-readable JSON on stdout; logs go to stderr.
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "bayesnam/analytic.hpp"
#include "bayesnam/data_io.hpp"
#include "bayesnam/explain.hpp"
#include "bayesnam/format.hpp"
#include "bayesnam/metrics.hpp"
#include "bayesnam/nam.hpp"
#include "bayesnam/synthetic.hpp"

namespace {

using nlohmann::json;
using namespace bayesnam;

// ---------------------------------------------------------------------------
// Config file handling. One JSON file with optional sections; unknown keys
// are rejected so typos fail loudly instead of silently using defaults.

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("config: '" + path + "' is not valid JSON: " + e.what());
  }
  return j;
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& ctx) {
  if (!obj.is_object()) throw std::runtime_error("config: " + ctx + " must be an object");
  for (const auto& item : obj.items())
    if (!allowed.count(item.key()))
      throw std::runtime_error("config: unknown key '" + item.key() + "' in " + ctx);
}

json load_config(const std::string& path) {
  json cfg = load_json_file(path);
  check_keys(cfg, {"version", "toy", "data", "nam", "sgd"}, "top level");
  if (!cfg.contains("version") || !cfg["version"].is_number_integer() ||
      cfg["version"].get<int>() != 1)
    throw std::runtime_error("config: 'version' must be present and equal to 1");
  return cfg;
}

ToySpec toy_from_config(const json& cfg) {
  if (!cfg.contains("toy")) throw std::runtime_error("config: missing 'toy' section");
  const json& t = cfg["toy"];
  check_keys(t, {"n", "d", "p", "lambda", "sigma2", "seed"}, "'toy'");
  ToySpec spec;
  spec.n = t.value("n", static_cast<std::int64_t>(spec.n));
  spec.d = t.value("d", static_cast<std::int64_t>(spec.d));
  spec.p = t.value("p", spec.p);
  spec.lambda = t.value("lambda", spec.lambda);
  spec.sigma2 = t.value("sigma2", spec.sigma2);
  spec.seed = t.value("seed", spec.seed);
  return spec;
}

struct DataConfig {
  CsvSchema schema;
  bool normalize = false;
};

DataConfig data_from_config(const json& cfg) {
  DataConfig out;
  if (!cfg.contains("data")) return out;
  const json& d = cfg["data"];
  check_keys(d, {"target_column", "task", "feature_columns", "delimiter", "normalize"}, "'data'");
  out.schema.target_column = d.value("target_column", out.schema.target_column);
  if (d.contains("task")) {
    const std::string task = d["task"].get<std::string>();
    if (task == "classification")
      out.schema.task = Task::Classification;
    else if (task == "regression")
      out.schema.task = Task::Regression;
    else
      throw std::runtime_error("config: task must be 'classification' or 'regression'");
  }
  if (d.contains("feature_columns"))
    out.schema.feature_columns = d["feature_columns"].get<std::vector<std::string>>();
  if (d.contains("delimiter")) {
    const std::string delim = d["delimiter"].get<std::string>();
    if (delim.size() != 1) throw std::runtime_error("config: delimiter must be one character");
    out.schema.delimiter = delim[0];
  }
  out.normalize = d.value("normalize", false);
  return out;
}

// Defaults follow the usual classification protocol: lr 0.01, batch 1024,
// feature dropout 0.2, input dropout 0.1, momentum 0.9, decay 5e-4, 100
// epochs of cosine schedule. A config file overrides any of them.
NamConfig nam_defaults() {
  NamConfig c;
  c.tau = 0.2;
  c.input_dropout = 0.1;
  return c;
}

SgdConfig sgd_defaults() {
  SgdConfig c;
  c.lr = 0.01;
  c.momentum = 0.9;
  c.weight_decay = 5e-4;
  c.epochs = 100;
  c.batch_size = 1024;
  c.schedule = LrSchedule::Cosine;
  return c;
}

NamConfig nam_from_config(const json& cfg) {
  NamConfig out = nam_defaults();
  if (!cfg.contains("nam")) return out;
  const json& n = cfg["nam"];
  check_keys(n,
             {"hidden_sizes", "bayesian", "s0", "s0_init", "tau", "input_dropout", "interactions",
              "kl_weight_mode", "seed"},
             "'nam'");
  if (n.contains("hidden_sizes")) out.hidden_sizes = n["hidden_sizes"].get<std::vector<int>>();
  out.bayesian = n.value("bayesian", out.bayesian);
  out.s0 = n.value("s0", out.s0);
  out.s0_init = n.value("s0_init", out.s0_init);
  out.tau = n.value("tau", out.tau);
  out.input_dropout = n.value("input_dropout", out.input_dropout);
  if (n.contains("interactions")) {
    out.interactions.clear();
    for (const json& pair : n["interactions"]) {
      if (!pair.is_array() || pair.size() != 2)
        throw std::runtime_error("config: each interaction must be a pair of feature indices");
      out.interactions.emplace_back(pair[0].get<int>(), pair[1].get<int>());
    }
  }
  if (n.contains("kl_weight_mode") && n["kl_weight_mode"].get<std::string>() != "per_batch")
    throw std::runtime_error("config: kl_weight_mode must be 'per_batch'");
  out.seed = n.value("seed", out.seed);
  return out;
}

SgdConfig sgd_from_config(const json& cfg) {
  SgdConfig out = sgd_defaults();
  if (!cfg.contains("sgd")) return out;
  const json& s = cfg["sgd"];
  check_keys(s, {"lr", "momentum", "weight_decay", "epochs", "batch_size", "schedule"}, "'sgd'");
  out.lr = s.value("lr", out.lr);
  out.momentum = s.value("momentum", out.momentum);
  out.weight_decay = s.value("weight_decay", out.weight_decay);
  out.epochs = s.value("epochs", out.epochs);
  out.batch_size = s.value("batch_size", out.batch_size);
  if (s.contains("schedule")) {
    const std::string sched = s["schedule"].get<std::string>();
    if (sched == "constant")
      out.schedule = LrSchedule::Constant;
    else if (sched == "cosine")
      out.schedule = LrSchedule::Cosine;
    else
      throw std::runtime_error("config: schedule must be 'constant' or 'cosine'");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Small parsers for flag values.

std::vector<double> parse_value_list(const std::string& text, const char* what) {
  std::vector<double> values;
  if (text.find(':') != std::string::npos) {
    // start:stop:step, endpoints inclusive within half a step.
    double start = 0, stop = 0, step = 0;
    char c1 = 0, c2 = 0;
    std::istringstream in(text);
    if (!(in >> start >> c1 >> stop >> c2 >> step) || c1 != ':' || c2 != ':' || !(step > 0.0))
      throw std::runtime_error(std::string(what) + ": bad range '" + text + "'");
    for (double v = start; v <= stop + 0.5 * step; v += step) values.push_back(v);
    if (values.empty()) throw std::runtime_error(std::string(what) + ": empty range '" + text + "'");
    return values;
  }
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t pos = 0;
    double v = 0;
    try {
      v = std::stod(item, &pos);
    } catch (const std::exception&) {
      throw std::runtime_error(std::string(what) + ": bad value '" + item + "'");
    }
    if (pos != item.size())
      throw std::runtime_error(std::string(what) + ": bad value '" + item + "'");
    values.push_back(v);
  }
  if (values.empty()) throw std::runtime_error(std::string(what) + ": no values in '" + text + "'");
  return values;
}

std::vector<int> parse_int_list(const std::string& text, const char* what) {
  std::vector<int> out;
  for (double v : parse_value_list(text, what)) {
    const int i = static_cast<int>(std::llround(v));
    if (std::abs(v - static_cast<double>(i)) > 1e-9)
      throw std::runtime_error(std::string(what) + ": expected integers in '" + text + "'");
    out.push_back(i);
  }
  return out;
}

Vec parse_point(const std::string& text) {
  const std::vector<double> values = parse_value_list(text, "--point");
  Vec x(static_cast<Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) x(static_cast<Index>(i)) = values[i];
  return x;
}

std::string sanitize(const std::string& name) {
  std::string out;
  for (char c : name) out += (std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  return out.empty() ? "feature" : out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::string with_member_suffix(const std::string& path, int index) {
  const std::size_t dot = path.find_last_of('.');
  if (dot == std::string::npos || path.find('/', dot) != std::string::npos)
    return path + "." + std::to_string(index);
  return path.substr(0, dot) + "." + std::to_string(index) + path.substr(dot);
}

// ---------------------------------------------------------------------------
// Normalization statistics ride along in the model file (optional key) so
// eval/explain can reproduce the training-time transform.

void attach_norm_stats(const std::string& model_path, const NormStats& stats) {
  json j = load_json_file(model_path);
  json mean = json::array(), std_ = json::array();
  for (Index f = 0; f < stats.mean.size(); ++f) {
    mean.push_back(stats.mean(f));
    std_.push_back(stats.std(f));
  }
  j["norm_stats"] = {{"mean", std::move(mean)}, {"std", std::move(std_)}};
  write_text(model_path, j.dump(2) + "\n");
}

std::optional<NormStats> read_norm_stats(const std::string& model_path) {
  const json j = load_json_file(model_path);
  if (!j.contains("norm_stats")) return std::nullopt;
  const json& ns = j["norm_stats"];
  NormStats stats;
  const auto mean = ns.at("mean").get<std::vector<double>>();
  const auto std_ = ns.at("std").get<std::vector<double>>();
  stats.mean.resize(static_cast<Index>(mean.size()));
  stats.std.resize(static_cast<Index>(std_.size()));
  for (std::size_t i = 0; i < mean.size(); ++i) {
    stats.mean(static_cast<Index>(i)) = mean[i];
    stats.std(static_cast<Index>(i)) = std_[i];
  }
  return stats;
}

void apply_norm_stats(Dataset& data, const NormStats& stats) {
  if (stats.mean.size() != data.d())
    throw std::runtime_error("normalization stats do not match data width");
  for (Index f = 0; f < data.d(); ++f)
    data.X.col(f) = (data.X.col(f).array() - stats.mean(f)) / stats.std(f);
}

// ---------------------------------------------------------------------------
// Flag containers per subcommand.

struct SynthArgs {
  std::string spec_path, out_path;
  std::optional<std::uint64_t> seed;
};

struct TrainArgs {
  std::string data_path, config_path, out_path;
  std::string test_path;
  int ensemble = 1;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
  std::optional<double> lr;
  std::optional<int> batch_size;
  std::optional<double> tau;
  std::optional<bool> bayesian;
  int metric_samples = 30;
};

struct ExplainArgs {
  std::vector<std::string> model_paths;
  std::string data_path, out_dir;
  std::string point_text;
  std::string target = "y";
  int samples = 30;
  int grid_points = 101;
  std::uint64_t seed = 0;
};

struct TheoryArgs {
  std::string k_text = "2,3,5,10,100";
  std::string tau_text = "0:0.95:0.01";
  double lambda = 3.0;
  double sigma = 1.4142135623730951;
  std::string out_path;
  std::string json_path;
  std::int64_t mc = 0;
  std::uint64_t seed = 0;
};

struct EvalArgs {
  std::vector<std::string> model_paths;
  std::string data_path;
  std::string target = "y";
  int samples = 30;
  std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------

int cmd_synth(const SynthArgs& args) {
  const json cfg = load_config(args.spec_path);
  ToySpec spec = toy_from_config(cfg);
  if (args.seed) spec.seed = *args.seed;
  const Dataset data = gen_toy(spec);
  save_csv(data, args.out_path);
  json out = {{"path", args.out_path}, {"rows", data.n()}, {"cols", data.d()}, {"seed", spec.seed}};
  std::cout << out.dump() << "\n";
  return 0;
}

json metric_json(const Vec& scores, const Vec& targets, Task task) {
  if (task == Task::Classification)
    return {{"task", "classification"},
            {"accuracy", accuracy(scores, targets)},
            {"auc", auc(scores, targets)}};
  return {{"task", "regression"}, {"rmse", rmse(scores, targets)}};
}

int cmd_train(const TrainArgs& args) {
  const json cfg = load_config(args.config_path);
  const DataConfig data_cfg = data_from_config(cfg);
  NamConfig nam_cfg = nam_from_config(cfg);
  SgdConfig sgd_cfg = sgd_from_config(cfg);
  if (args.seed) nam_cfg.seed = *args.seed;
  if (args.epochs) sgd_cfg.epochs = *args.epochs;
  if (args.lr) sgd_cfg.lr = *args.lr;
  if (args.batch_size) sgd_cfg.batch_size = *args.batch_size;
  if (args.tau) nam_cfg.tau = *args.tau;
  if (args.bayesian) nam_cfg.bayesian = *args.bayesian;

  Dataset train_data = load_csv(args.data_path, data_cfg.schema);
  std::optional<Dataset> test_data;
  if (!args.test_path.empty()) test_data = load_csv(args.test_path, data_cfg.schema);

  std::optional<NormStats> stats;
  if (data_cfg.normalize) {
    Dataset probe = test_data ? *test_data : train_data;
    Normalized norm = normalize_fit_apply(train_data, probe);
    stats = norm.stats;
    train_data = std::move(norm.train);
    if (test_data) test_data = std::move(norm.test);
  }

  std::cerr << "training " << args.ensemble << " model(s) on " << train_data.n() << " rows, "
            << train_data.d() << " features\n";
  const std::vector<NamModel> models =
      train_ensemble(train_data.d(), nam_cfg, args.ensemble, train_data, sgd_cfg, nam_cfg.seed);

  // Re-run the recorded history per member for the history files.
  json model_paths = json::array();
  for (int i = 0; i < args.ensemble; ++i) {
    const std::string path =
        args.ensemble == 1 ? args.out_path : with_member_suffix(args.out_path, i);
    save_model(models[static_cast<std::size_t>(i)], train_data.task, path);
    if (stats) attach_norm_stats(path, *stats);
    model_paths.push_back(path);
  }

  Rng rng(Rng::derive(nam_cfg.seed, 0x6d657472));
  const Vec train_scores = predict(std::span<const NamModel>(models), train_data.X,
                                   train_data.task, args.metric_samples, rng);
  json out = metric_json(train_scores, train_data.y, train_data.task);
  out["models"] = std::move(model_paths);
  if (test_data) {
    const Vec test_scores = predict(std::span<const NamModel>(models), test_data->X,
                                    test_data->task, args.metric_samples, rng);
    out["test"] = metric_json(test_scores, test_data->y, test_data->task);
  }
  std::cout << out.dump() << "\n";
  return 0;
}

struct LoadedEnsemble {
  std::vector<NamModel> models;
  Task task = Task::Classification;
  std::optional<NormStats> stats;
};

LoadedEnsemble load_ensemble(const std::vector<std::string>& paths) {
  if (paths.empty()) throw std::runtime_error("no model files given");
  LoadedEnsemble out;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    LoadedModel loaded = load_model(paths[i]);
    if (i == 0) {
      out.task = loaded.task;
      out.stats = read_norm_stats(paths[i]);
    } else if (loaded.task != out.task) {
      throw std::runtime_error("model files disagree on the task");
    }
    out.models.push_back(std::move(loaded.model));
  }
  return out;
}

int cmd_eval(const EvalArgs& args) {
  LoadedEnsemble ensemble = load_ensemble(args.model_paths);
  CsvSchema schema;
  schema.target_column = args.target;
  schema.task = ensemble.task;
  Dataset data = load_csv(args.data_path, schema);
  if (ensemble.stats) apply_norm_stats(data, *ensemble.stats);
  Rng rng(args.seed);
  const Vec scores =
      predict(std::span<const NamModel>(ensemble.models), data.X, data.task, args.samples, rng);
  json out = metric_json(scores, data.y, data.task);
  out["n"] = data.n();
  std::cout << out.dump() << "\n";
  return 0;
}

int cmd_explain(const ExplainArgs& args) {
  LoadedEnsemble ensemble = load_ensemble(args.model_paths);
  CsvSchema schema;
  schema.target_column = args.target;
  schema.task = ensemble.task;
  Dataset data = load_csv(args.data_path, schema);
  if (ensemble.stats) apply_norm_stats(data, *ensemble.stats);

  std::optional<Vec> point;
  if (!args.point_text.empty()) {
    point = parse_point(args.point_text);
    if (point->size() != data.d())
      throw std::runtime_error("--point has " + std::to_string(point->size()) +
                               " values, data has " + std::to_string(data.d()) + " features");
  }

  const ExplanationReport report =
      ensemble.models.size() == 1
          ? build_report(ensemble.models.front(), data, point ? &*point : nullptr,
                         args.grid_points, args.samples, args.seed)
          : build_report(std::span<const NamModel>(ensemble.models), data,
                         point ? &*point : nullptr, args.grid_points, args.samples, args.seed);

  std::filesystem::create_directories(args.out_dir);
  json grid_files = json::array();
  for (std::size_t f = 0; f < report.grids.size(); ++f) {
    const std::string name = "feature_" + std::to_string(f + 1) + "_" +
                             sanitize(report.term_names[f]) + ".csv";
    std::ostringstream body;
    write_grid_csv(report.grids[f], body);
    write_text(args.out_dir + "/" + name, body.str());
    grid_files.push_back(name);
  }

  json centers = json::array();
  for (Index s = 0; s < report.centers.rows(); ++s) {
    json row = json::array();
    for (Index t = 0; t < report.centers.cols(); ++t) row.push_back(report.centers(s, t));
    centers.push_back(std::move(row));
  }
  json report_json = {{"term_names", report.term_names},
                      {"n_samples", report.n_samples},
                      {"grid_files", grid_files},
                      {"inconsistency", report.inconsistency},
                      {"centers", std::move(centers)}};
  if (report.point) {
    json pt = json::array(), contrib = json::array();
    for (Index i = 0; i < report.point->size(); ++i) pt.push_back((*report.point)(i));
    for (const Contribution& c : report.contributions)
      contrib.push_back({{"mean", c.mean}, {"sd", c.sd}});
    report_json["point"] = std::move(pt);
    report_json["contributions"] = contrib;
    write_text(args.out_dir + "/contributions.json",
               json({{"term_names", report.term_names},
                     {"point", report_json["point"]},
                     {"contributions", std::move(contrib)}})
                       .dump(2) +
                   "\n");
  }
  write_text(args.out_dir + "/report.json", report_json.dump(2) + "\n");

  json out = {{"out", args.out_dir},
              {"features", report.grids.size()},
              {"samples", report.n_samples},
              {"inconsistency", report.inconsistency}};
  std::cout << out.dump() << "\n";
  return 0;
}

int cmd_theory(const TheoryArgs& args) {
  const std::vector<int> k_list = parse_int_list(args.k_text, "--k");
  const std::vector<double> tau_grid = parse_value_list(args.tau_text, "--tau");
  const TheoremReport report = theorem1_report(k_list, tau_grid, args.lambda, args.sigma);

  if (!args.out_path.empty()) {
    std::ostringstream body;
    write_csv(report, body);
    write_text(args.out_path, body.str());
  }

  json tau_star = json::object();
  for (std::size_t i = 0; i < report.k_list.size(); ++i)
    tau_star[std::to_string(report.k_list[i])] = report.tau_star[i];
  json out = {{"rows", report.rows.size()}, {"tau_star", std::move(tau_star)}};
  if (!args.out_path.empty()) out["csv"] = args.out_path;

  if (args.mc > 0) {
    double max_abs = 0.0, max_sigma = 0.0;
    std::size_t idx = 0;
    for (const TheoremRow& row : report.rows) {
      const double p = p_acc(row.k, row.tau, args.lambda, args.sigma);
      const McEstimate est = mc_oracle(row.k, row.tau, args.lambda, args.sigma, args.mc,
                                       Rng::derive(args.seed, idx++));
      const double dev = std::abs(p - est.estimate);
      // Standard error at the analytic p: the empirical one collapses to zero
      // when every draw succeeds, which happens routinely near tau = 0.
      const double se = std::sqrt(std::max(p * (1.0 - p), 1e-30) / static_cast<double>(args.mc));
      max_abs = std::max(max_abs, dev);
      max_sigma = std::max(max_sigma, dev / std::max(se, 1e-12));
    }
    out["mc"] = {{"draws", args.mc}, {"max_abs_deviation", max_abs},
                 {"max_sigma_deviation", max_sigma}};
    std::cerr << "mc cross-check: max |analytic - estimate| = " << max_abs << " (" << max_sigma
              << " sigma)\n";
  }

  if (!args.json_path.empty()) {
    json rows = json::array();
    for (const TheoremRow& row : report.rows)
      rows.push_back({{"k", row.k},
                      {"tau", row.tau},
                      {"delta", row.delta},
                      {"ddelta_dtau", row.ddelta_dtau},
                      {"positive", row.positive}});
    json full = {{"lambda", report.lambda},
                 {"sigma", report.sigma},
                 {"tau_star", out["tau_star"]},
                 {"rows", std::move(rows)}};
    write_text(args.json_path, full.dump(2) + "\n");
    out["json"] = args.json_path;
  }

  std::cout << out.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Additive model toolkit: synthetic data, training, explanations, vote theory"};
  app.require_subcommand(1);

  SynthArgs synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate the synthetic toy dataset");
  synth_cmd->add_option("--spec", synth.spec_path, "Config JSON with a 'toy' section")->required();
  synth_cmd->add_option("--out", synth.out_path, "Output CSV path")->required();
  std::uint64_t synth_seed = 0;
  CLI::Option* synth_seed_opt = synth_cmd->add_option("--seed", synth_seed, "Override the seed");

  TrainArgs train_args;
  CLI::App* train_cmd = app.add_subcommand("train", "Train one model or an ensemble");
  train_cmd->add_option("--data", train_args.data_path, "Training CSV")->required();
  train_cmd->add_option("--config", train_args.config_path, "Config JSON")->required();
  train_cmd->add_option("--out", train_args.out_path, "Model output path")->required();
  train_cmd->add_option("--ensemble", train_args.ensemble, "Number of members")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--test", train_args.test_path, "Optional held-out CSV");
  std::uint64_t train_seed = 0;
  CLI::Option* train_seed_opt = train_cmd->add_option("--seed", train_seed, "Override nam.seed");
  int train_epochs = 0;
  CLI::Option* train_epochs_opt =
      train_cmd->add_option("--epochs", train_epochs, "Override sgd.epochs");
  double train_lr = 0.0;
  CLI::Option* train_lr_opt = train_cmd->add_option("--lr", train_lr, "Override sgd.lr");
  int train_bs = 0;
  CLI::Option* train_bs_opt =
      train_cmd->add_option("--batch-size", train_bs, "Override sgd.batch_size");
  double train_tau = 0.0;
  CLI::Option* train_tau_opt = train_cmd->add_option("--tau", train_tau, "Override nam.tau");
  bool train_bayes = false;
  CLI::Option* train_bayes_opt =
      train_cmd->add_flag("--bayesian", train_bayes, "Override nam.bayesian");

  ExplainArgs explain_args;
  CLI::App* explain_cmd = app.add_subcommand("explain", "Shape functions and contributions");
  explain_cmd->add_option("--model", explain_args.model_paths, "Model JSON (repeat for ensemble)")
      ->required();
  explain_cmd->add_option("--data", explain_args.data_path, "Reference CSV (centering, ranges)")
      ->required();
  explain_cmd->add_option("--out", explain_args.out_dir, "Output directory")->required();
  explain_cmd->add_option("--point", explain_args.point_text, "Query point v1,v2,...");
  explain_cmd->add_option("--samples", explain_args.samples, "Posterior samples")
      ->check(CLI::PositiveNumber);
  explain_cmd->add_option("--grid-points", explain_args.grid_points, "Grid resolution")
      ->check(CLI::PositiveNumber);
  explain_cmd->add_option("--seed", explain_args.seed, "Sampling seed");
  explain_cmd->add_option("--target", explain_args.target, "Target column name");

  TheoryArgs theory_args;
  CLI::App* theory_cmd = app.add_subcommand("theory", "Vote accuracy gap and its derivative");
  theory_cmd->add_option("--k", theory_args.k_text, "Feature counts, list or start:stop:step");
  theory_cmd->add_option("--tau", theory_args.tau_text, "Dropout grid, list or start:stop:step");
  theory_cmd->add_option("--lambda", theory_args.lambda, "Feature mean scale");
  theory_cmd->add_option("--sigma", theory_args.sigma, "Feature noise std");
  theory_cmd->add_option("--out", theory_args.out_path, "CSV output path");
  theory_cmd->add_option("--json", theory_args.json_path, "JSON output path");
  theory_cmd->add_option("--mc", theory_args.mc, "Cross-check with this many draws per point");
  theory_cmd->add_option("--seed", theory_args.seed, "Monte Carlo seed");

  EvalArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Metric of a saved model on a CSV");
  eval_cmd->add_option("--model", eval_args.model_paths, "Model JSON (repeat for ensemble)")
      ->required();
  eval_cmd->add_option("--data", eval_args.data_path, "Evaluation CSV")->required();
  eval_cmd->add_option("--samples", eval_args.samples, "Posterior samples")
      ->check(CLI::PositiveNumber);
  eval_cmd->add_option("--seed", eval_args.seed, "Sampling seed");
  eval_cmd->add_option("--target", eval_args.target, "Target column name");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(synth_cmd)) {
      if (*synth_seed_opt) synth.seed = synth_seed;
      return cmd_synth(synth);
    }
    if (app.got_subcommand(train_cmd)) {
      if (*train_seed_opt) train_args.seed = train_seed;
      if (*train_epochs_opt) train_args.epochs = train_epochs;
      if (*train_lr_opt) train_args.lr = train_lr;
      if (*train_bs_opt) train_args.batch_size = train_bs;
      if (*train_tau_opt) train_args.tau = train_tau;
      if (*train_bayes_opt) train_args.bayesian = train_bayes;
      return cmd_train(train_args);
    }
    if (app.got_subcommand(explain_cmd)) return cmd_explain(explain_args);
    if (app.got_subcommand(theory_cmd)) return cmd_theory(theory_args);
    if (app.got_subcommand(eval_cmd)) return cmd_eval(eval_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cerr << "error: no subcommand\n";
  return 2;
}
