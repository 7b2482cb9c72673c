#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "bayesnam/data_io.hpp"
#include "bayesnam/rng.hpp"
#include "bayesnam/synthetic.hpp"

using namespace bayesnam;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("bayesnam_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

Dataset awkward_data() {
  Dataset data;
  data.X.resize(4, 2);
  data.X << 1.0, -2.5e-17, 3.14159265358979312, 1e154, -0.1, 7.0, 0.0, -123456.75;
  data.y.resize(4);
  data.y << 1, 0, 0, 1;
  data.task = Task::Classification;
  data.feature_names = {"alpha", "beta"};
  return data;
}

// Sorts rows lexicographically so shuffled splits can be compared as sets.
std::vector<std::vector<double>> row_set(const Dataset& d) {
  std::vector<std::vector<double>> rows;
  for (Index i = 0; i < d.n(); ++i) {
    std::vector<double> row;
    for (Index f = 0; f < d.d(); ++f) row.push_back(d.X(i, f));
    row.push_back(d.y(i));
    rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

}  // namespace

TEST_CASE("data_io: csv round trip is bitwise") {
  TempDir tmp;
  const Dataset data = awkward_data();
  const std::string path = tmp.file("round.csv");
  save_csv(data, path);
  CsvSchema schema;
  const Dataset back = load_csv(path, schema);
  CHECK(back.X == data.X);
  CHECK(back.y == data.y);
  CHECK(back.feature_names == data.feature_names);
  CHECK(back.task == Task::Classification);
}

TEST_CASE("data_io: csv parsing handles quotes, crlf, and custom delimiters") {
  TempDir tmp;
  const std::string path = tmp.file("quoted.csv");
  write_file(path,
             "\"name, weird\";\"say \"\"hi\"\"\";y\r\n"
             "1.5;2.5;1\r\n"
             "-0.5;0.25;0\r\n");
  CsvSchema schema;
  schema.delimiter = ';';
  const Dataset data = load_csv(path, schema);
  REQUIRE(data.n() == 2);
  CHECK(data.feature_names == std::vector<std::string>{"name, weird", "say \"hi\""});
  CHECK(data.X(0, 0) == 1.5);
  CHECK(data.X(1, 1) == 0.25);
}

TEST_CASE("data_io: csv schema selects and reorders feature columns") {
  TempDir tmp;
  const std::string path = tmp.file("cols.csv");
  write_file(path, "a,b,c,y\n1,2,3,0\n4,5,6,1\n");
  CsvSchema schema;
  schema.feature_columns = {"c", "a"};
  const Dataset data = load_csv(path, schema);
  REQUIRE(data.d() == 2);
  CHECK(data.feature_names == std::vector<std::string>{"c", "a"});
  CHECK(data.X(0, 0) == 3.0);
  CHECK(data.X(0, 1) == 1.0);
  CHECK(data.X(1, 0) == 6.0);
}

TEST_CASE("data_io: csv errors carry their location") {
  TempDir tmp;
  const std::string missing = tmp.file("missing.csv");
  write_file(missing, "a,b\n1,2\n");
  CsvSchema schema;
  try {
    load_csv(missing, schema);
    FAIL("expected a missing-column error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("missing column 'y'") != std::string::npos);
  }

  const std::string bad_cell = tmp.file("bad_cell.csv");
  write_file(bad_cell, "a,y\n1,0\noops,1\n");
  try {
    load_csv(bad_cell, schema);
    FAIL("expected a parse error");
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("'oops'") != std::string::npos);
    CHECK(msg.find("row 2") != std::string::npos);
  }

  const std::string ragged = tmp.file("ragged.csv");
  write_file(ragged, "a,y\n1,0\n1\n");
  CHECK_THROWS_AS(load_csv(ragged, schema), std::runtime_error);

  const std::string bad_label = tmp.file("bad_label.csv");
  write_file(bad_label, "a,y\n1,2\n2,0\n");
  CHECK_THROWS_AS(load_csv(bad_label, schema), std::invalid_argument);

  CHECK_THROWS_AS(load_csv(tmp.file("nope.csv"), schema), std::runtime_error);

  // Regression targets are free of the {0,1} restriction.
  const std::string reg = tmp.file("reg.csv");
  write_file(reg, "a,y\n1,2.5\n2,-3\n");
  CsvSchema reg_schema;
  reg_schema.task = Task::Regression;
  CHECK(load_csv(reg, reg_schema).y(0) == 2.5);
}

TEST_CASE("data_io: normalization fits on train only") {
  Dataset train;
  train.X.resize(4, 2);
  train.X << 1, 10, 3, 10, 5, 10, 7, 10;  // second column constant
  train.y.resize(4);
  train.y << 0, 1, 0, 1;
  train.feature_names = {"a", "b"};
  Dataset test = train;
  test.X.row(0) << 9, 10;

  const Normalized norm = normalize_fit_apply(train, test);
  for (Index f = 0; f < 2; ++f)
    CHECK(std::abs(norm.train.X.col(f).mean()) < 1e-12);
  // Column a: mean 4, population sd sqrt(5).
  CHECK(norm.stats.mean(0) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(norm.stats.std(0) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-14));
  CHECK(norm.test.X(0, 0) == doctest::Approx((9.0 - 4.0) / std::sqrt(5.0)).epsilon(1e-14));
  // Constant column: floored spread, finite output, zero after centering.
  CHECK(norm.stats.std(1) == 1e-12);
  CHECK(norm.train.X.col(1).isZero(0.0));
  CHECK(std::isfinite(norm.test.X(0, 1)));
}

TEST_CASE("data_io: holdout split covers the data exactly once") {
  ToySpec spec;
  spec.n = 101;
  spec.seed = 3;
  const Dataset data = gen_toy(spec);
  const Holdout split = split_holdout(data, 0.8, 17);
  CHECK(split.train.n() == 81);  // round(0.8 * 101)
  CHECK(split.test.n() == 20);

  Dataset merged;
  merged.X.resize(101, data.d());
  merged.X << split.train.X, split.test.X;
  merged.y.resize(101);
  merged.y << split.train.y, split.test.y;
  merged.feature_names = data.feature_names;
  CHECK(row_set(merged) == row_set(data));

  const Holdout again = split_holdout(data, 0.8, 17);
  CHECK(again.train.X == split.train.X);
  const Holdout other = split_holdout(data, 0.8, 18);
  CHECK(other.train.X != split.train.X);

  CHECK_THROWS_AS(split_holdout(data, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(split_holdout(data, 1.0, 1), std::invalid_argument);
}

TEST_CASE("data_io: k-fold split balances fold sizes") {
  ToySpec spec;
  spec.n = 10;
  spec.seed = 4;
  const Dataset data = gen_toy(spec);
  const std::vector<Dataset> folds = split_kfold(data, 4, 9);
  REQUIRE(folds.size() == 4);
  CHECK(folds[0].n() == 3);
  CHECK(folds[1].n() == 3);
  CHECK(folds[2].n() == 2);
  CHECK(folds[3].n() == 2);

  Dataset merged;
  merged.X.resize(10, data.d());
  merged.y.resize(10);
  Index at = 0;
  for (const Dataset& fold : folds) {
    merged.X.middleRows(at, fold.n()) = fold.X;
    merged.y.segment(at, fold.n()) = fold.y;
    at += fold.n();
  }
  merged.feature_names = data.feature_names;
  CHECK(row_set(merged) == row_set(data));

  CHECK_THROWS_AS(split_kfold(data, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(split_kfold(data, 11, 0), std::invalid_argument);
}

TEST_CASE("data_io: model round trip preserves every parameter bitwise") {
  TempDir tmp;
  NamConfig cfg;
  cfg.hidden_sizes = {7, 3};
  cfg.tau = 0.15;
  cfg.input_dropout = 0.05;
  cfg.interactions = {{0, 2}, {1, 2}};
  cfg.seed = 77;

  for (const bool bayesian : {false, true}) {
    NamConfig local = cfg;
    local.bayesian = bayesian;
    local.s0 = 0.02;
    local.s0_init = 0.01;
    NamModel model = build_model(3, local);
    model.beta = -0.625;
    const std::string path = tmp.file(bayesian ? "bayes.json" : "det.json");
    save_model(model, Task::Regression, path);
    const LoadedModel back = load_model(path);
    CHECK(back.task == Task::Regression);
    CHECK(back.model.beta == model.beta);
    CHECK(back.model.config.hidden_sizes == local.hidden_sizes);
    CHECK(back.model.config.tau == local.tau);
    CHECK(back.model.config.input_dropout == local.input_dropout);
    CHECK(back.model.config.interactions == local.interactions);
    CHECK(back.model.config.bayesian == bayesian);
    CHECK(back.model.config.seed == local.seed);
    REQUIRE(back.model.subnets.size() == 3);
    REQUIRE(back.model.interaction_nets.size() == 2);
    for (Index t = 0; t < 3; ++t) {
      if (!bayesian) {
        const MlpParams& a = std::get<MlpParams>(model.subnets[static_cast<std::size_t>(t)]);
        const MlpParams& b = std::get<MlpParams>(back.model.subnets[static_cast<std::size_t>(t)]);
        for (std::size_t l = 0; l < a.layers.size(); ++l) {
          CHECK(a.layers[l].W == b.layers[l].W);
          CHECK(a.layers[l].b == b.layers[l].b);
        }
      } else {
        const BayesMlpParams& a =
            std::get<BayesMlpParams>(model.subnets[static_cast<std::size_t>(t)]);
        const BayesMlpParams& b =
            std::get<BayesMlpParams>(back.model.subnets[static_cast<std::size_t>(t)]);
        for (std::size_t l = 0; l < a.layers.size(); ++l) {
          CHECK(a.layers[l].mu_w == b.layers[l].mu_w);
          CHECK(a.layers[l].mu_b == b.layers[l].mu_b);
          CHECK(a.layers[l].rho_w == b.layers[l].rho_w);
          CHECK(a.layers[l].rho_b == b.layers[l].rho_b);
          CHECK(a.layers[l].s0 == b.layers[l].s0);
        }
      }
    }
    // Same predictions, same behavior.
    Vec x(3);
    x << 0.4, -1.0, 0.9;
    Rng r1(5), r2(5);
    CHECK(nam_forward(back.model, x, Mode::Eval, r1).output ==
          nam_forward(model, x, Mode::Eval, r2).output);
  }
}

TEST_CASE("data_io: model loader rejects foreign files") {
  TempDir tmp;
  const std::string not_json = tmp.file("nope.json");
  write_file(not_json, "{ this is not json");
  CHECK_THROWS_AS(load_model(not_json), std::runtime_error);

  const std::string wrong_version = tmp.file("v2.json");
  write_file(wrong_version, "{\"format_version\": 2}");
  try {
    load_model(wrong_version);
    FAIL("expected a version error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("format_version") != std::string::npos);
  }

  const std::string truncated = tmp.file("trunc.json");
  write_file(truncated, "{\"format_version\": 1, \"task\": \"classification\"}");
  CHECK_THROWS_AS(load_model(truncated), std::runtime_error);

  CHECK_THROWS_AS(load_model(tmp.file("missing.json")), std::runtime_error);
}
