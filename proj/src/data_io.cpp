#include "bayesnam/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "bayesnam/format.hpp"
#include "bayesnam/rng.hpp"

namespace bayesnam {

namespace {

using nlohmann::json;

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delim) {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

bool needs_quoting(const std::string& s, char delim) {
  return s.find(delim) != std::string::npos || s.find('"') != std::string::npos ||
         s.find('\n') != std::string::npos;
}

std::string quote_field(const std::string& s, char delim) {
  if (!needs_quoting(s, delim)) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& column) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  while (end && *end == ' ') ++end;
  if (end == begin || (end && *end != '\0'))
    throw std::runtime_error("csv: cannot parse value '" + cell + "' at row " +
                             std::to_string(row) + " column '" + column + "'");
  if (!std::isfinite(v))
    throw std::runtime_error("csv: non-finite value at row " + std::to_string(row) +
                             " column '" + column + "'");
  return v;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("csv: cannot open '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

json mat_to_json(const Mat& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vec_to_json(const Vec& v) {
  json arr = json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Mat mat_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw std::runtime_error(std::string("model: malformed matrix for ") + what);
  const Index rows = static_cast<Index>(j.size());
  const Index cols = static_cast<Index>(j[0].size());
  Mat m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols)
      throw std::runtime_error(std::string("model: ragged matrix for ") + what);
    for (Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

Vec vec_from_json(const json& j, const char* what) {
  if (!j.is_array()) throw std::runtime_error(std::string("model: malformed vector for ") + what);
  Vec v(static_cast<Index>(j.size()));
  for (Index i = 0; i < v.size(); ++i) v(i) = j[static_cast<std::size_t>(i)].get<double>();
  return v;
}

json term_to_json(const SubnetParams& term) {
  json out;
  if (const auto* det = std::get_if<MlpParams>(&term)) {
    out["kind"] = "deterministic";
    json layers = json::array();
    for (const DenseLayer& l : det->layers)
      layers.push_back({{"w", mat_to_json(l.W)}, {"b", vec_to_json(l.b)}});
    out["layers"] = std::move(layers);
  } else {
    const auto& bayes = std::get<BayesMlpParams>(term);
    out["kind"] = "bayesian";
    json layers = json::array();
    for (const BayesLinearParams& l : bayes.layers)
      layers.push_back({{"mu_w", mat_to_json(l.mu_w)},
                        {"mu_b", vec_to_json(l.mu_b)},
                        {"rho_w", mat_to_json(l.rho_w)},
                        {"rho_b", vec_to_json(l.rho_b)},
                        {"s0", l.s0}});
    out["layers"] = std::move(layers);
  }
  return out;
}

SubnetParams term_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "deterministic") {
    MlpParams p;
    for (const json& l : j.at("layers"))
      p.layers.push_back({mat_from_json(l.at("w"), "w"), vec_from_json(l.at("b"), "b")});
    return p;
  }
  if (kind == "bayesian") {
    BayesMlpParams p;
    for (const json& l : j.at("layers")) {
      BayesLinearParams bl;
      bl.mu_w = mat_from_json(l.at("mu_w"), "mu_w");
      bl.mu_b = vec_from_json(l.at("mu_b"), "mu_b");
      bl.rho_w = mat_from_json(l.at("rho_w"), "rho_w");
      bl.rho_b = vec_from_json(l.at("rho_b"), "rho_b");
      bl.s0 = l.at("s0").get<double>();
      p.layers.push_back(std::move(bl));
    }
    return p;
  }
  throw std::runtime_error("model: unknown subnet kind '" + kind + "'");
}

}  // namespace

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) throw std::runtime_error("csv: '" + path + "' is empty");

  const std::vector<std::string> header = split_line(lines[0], schema.delimiter);
  auto column_of = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw std::runtime_error("csv: missing column '" + name + "' in '" + path + "'");
    return static_cast<std::size_t>(it - header.begin());
  };

  const std::size_t target_col = column_of(schema.target_column);
  std::vector<std::size_t> feature_cols;
  std::vector<std::string> feature_names;
  if (schema.feature_columns.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c == target_col) continue;
      feature_cols.push_back(c);
      feature_names.push_back(header[c]);
    }
  } else {
    for (const std::string& name : schema.feature_columns) {
      feature_cols.push_back(column_of(name));
      feature_names.push_back(name);
    }
  }
  if (feature_cols.empty()) throw std::runtime_error("csv: no feature columns in '" + path + "'");
  if (lines.size() < 2) throw std::runtime_error("csv: no data rows in '" + path + "'");

  Dataset data;
  data.task = schema.task;
  data.feature_names = feature_names;
  const Index n = static_cast<Index>(lines.size() - 1);
  data.X.resize(n, static_cast<Index>(feature_cols.size()));
  data.y.resize(n);
  for (Index m = 0; m < n; ++m) {
    const std::size_t row = static_cast<std::size_t>(m) + 1;
    const std::vector<std::string> fields = split_line(lines[row], schema.delimiter);
    if (fields.size() != header.size())
      throw std::runtime_error("csv: row " + std::to_string(row) + " has " +
                               std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(header.size()));
    for (std::size_t f = 0; f < feature_cols.size(); ++f)
      data.X(m, static_cast<Index>(f)) = parse_cell(fields[feature_cols[f]], row, feature_names[f]);
    data.y(m) = parse_cell(fields[target_col], row, schema.target_column);
  }
  validate(data);
  return data;
}

void save_csv(const Dataset& data, const std::string& path, const std::string& target_column,
              char delimiter) {
  validate(data);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("csv: cannot write '" + path + "'");
  const std::vector<std::string> names =
      data.feature_names.empty() ? default_feature_names(data.d()) : data.feature_names;
  for (Index f = 0; f < data.d(); ++f) {
    out << quote_field(names[static_cast<std::size_t>(f)], delimiter) << delimiter;
  }
  out << quote_field(target_column, delimiter) << '\n';
  for (Index m = 0; m < data.n(); ++m) {
    for (Index f = 0; f < data.d(); ++f) out << g17(data.X(m, f)) << delimiter;
    out << g17(data.y(m)) << '\n';
  }
  if (!out) throw std::runtime_error("csv: write failed for '" + path + "'");
}

Normalized normalize_fit_apply(const Dataset& train, const Dataset& test) {
  validate(train);
  validate(test);
  if (train.d() != test.d())
    throw std::invalid_argument("normalize: train/test feature count mismatch");

  NormStats stats;
  stats.mean = train.X.colwise().mean().transpose();
  stats.std.resize(train.d());
  for (Index f = 0; f < train.d(); ++f) {
    const double m = stats.mean(f);
    double var = 0.0;
    for (Index r = 0; r < train.n(); ++r) {
      const double diff = train.X(r, f) - m;
      var += diff * diff;
    }
    stats.std(f) = std::max(std::sqrt(var / static_cast<double>(train.n())), 1e-12);
  }

  Normalized out;
  out.stats = stats;
  out.train = train;
  out.test = test;
  for (Index f = 0; f < train.d(); ++f) {
    out.train.X.col(f) = (train.X.col(f).array() - stats.mean(f)) / stats.std(f);
    out.test.X.col(f) = (test.X.col(f).array() - stats.mean(f)) / stats.std(f);
  }
  return out;
}

Holdout split_holdout(const Dataset& data, double ratio, std::uint64_t seed) {
  validate(data);
  if (!(ratio > 0.0 && ratio < 1.0))
    throw std::invalid_argument("split_holdout: ratio must be in (0, 1)");
  const Index n = data.n();
  const Index n_train = static_cast<Index>(std::llround(ratio * static_cast<double>(n)));
  if (n_train < 1 || n_train >= n)
    throw std::invalid_argument("split_holdout: split leaves an empty side");

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(seed);
  for (Index i = n - 1; i > 0; --i) {
    const Index j = static_cast<Index>(rng.uniform() * static_cast<double>(i + 1));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  Holdout split;
  split.train = take_rows(data, {order.begin(), order.begin() + n_train});
  split.test = take_rows(data, {order.begin() + n_train, order.end()});
  return split;
}

std::vector<Dataset> split_kfold(const Dataset& data, int k, std::uint64_t seed) {
  validate(data);
  if (k < 2) throw std::invalid_argument("split_kfold: k must be >= 2");
  if (static_cast<Index>(k) > data.n())
    throw std::invalid_argument("split_kfold: k exceeds dataset size");

  const Index n = data.n();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(seed);
  for (Index i = n - 1; i > 0; --i) {
    const Index j = static_cast<Index>(rng.uniform() * static_cast<double>(i + 1));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  std::vector<Dataset> folds;
  folds.reserve(static_cast<std::size_t>(k));
  const Index base = n / k;
  const Index extra = n % k;
  Index start = 0;
  for (int f = 0; f < k; ++f) {
    const Index size = base + (static_cast<Index>(f) < extra ? 1 : 0);
    folds.push_back(take_rows(data, {order.begin() + start, order.begin() + start + size}));
    start += size;
  }
  return folds;
}

void save_model(const NamModel& model, Task task, const std::string& path) {
  json j;
  j["format_version"] = 1;
  j["task"] = task == Task::Classification ? "classification" : "regression";
  j["beta"] = model.beta;
  const NamConfig& cfg = model.config;
  json interactions = json::array();
  for (const auto& pair : cfg.interactions) interactions.push_back({pair.first, pair.second});
  j["config"] = {{"hidden_sizes", cfg.hidden_sizes},
                 {"bayesian", cfg.bayesian},
                 {"s0", cfg.s0},
                 {"s0_init", cfg.s0_init},
                 {"tau", cfg.tau},
                 {"input_dropout", cfg.input_dropout},
                 {"interactions", std::move(interactions)},
                 {"kl_weight_mode", "per_batch"},
                 {"seed", cfg.seed}};
  json subnets = json::array();
  for (const SubnetParams& term : model.subnets) subnets.push_back(term_to_json(term));
  j["subnets"] = std::move(subnets);
  json inter = json::array();
  for (const SubnetParams& term : model.interaction_nets) inter.push_back(term_to_json(term));
  j["interaction_nets"] = std::move(inter);

  std::ofstream out(path);
  if (!out) throw std::runtime_error("model: cannot write '" + path + "'");
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("model: write failed for '" + path + "'");
}

LoadedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("model: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("model: '" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.contains("format_version") || !j["format_version"].is_number_integer() ||
      j["format_version"].get<int>() != 1)
    throw std::runtime_error("model: unsupported format_version in '" + path +
                             "' (expected 1)");

  LoadedModel loaded;
  const std::string task = j.value("task", "classification");
  if (task == "classification")
    loaded.task = Task::Classification;
  else if (task == "regression")
    loaded.task = Task::Regression;
  else
    throw std::runtime_error("model: unknown task '" + task + "'");

  try {
    NamModel& model = loaded.model;
    model.beta = j.at("beta").get<double>();
    const json& cfg = j.at("config");
    model.config.hidden_sizes = cfg.at("hidden_sizes").get<std::vector<int>>();
    model.config.bayesian = cfg.at("bayesian").get<bool>();
    model.config.s0 = cfg.at("s0").get<double>();
    model.config.s0_init = cfg.at("s0_init").get<double>();
    model.config.tau = cfg.at("tau").get<double>();
    model.config.input_dropout = cfg.at("input_dropout").get<double>();
    for (const json& pair : cfg.at("interactions"))
      model.config.interactions.emplace_back(pair.at(0).get<int>(), pair.at(1).get<int>());
    model.config.seed = cfg.at("seed").get<std::uint64_t>();
    for (const json& term : j.at("subnets")) model.subnets.push_back(term_from_json(term));
    for (const json& term : j.at("interaction_nets"))
      model.interaction_nets.push_back(term_from_json(term));
  } catch (const json::exception& e) {
    throw std::runtime_error("model: malformed '" + path + "': " + e.what());
  }
  if (loaded.model.subnets.empty()) throw std::runtime_error("model: no subnets in '" + path + "'");
  return loaded;
}

}  // namespace bayesnam
