#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bayesnam/dataset.hpp"
#include "bayesnam/nam.hpp"

namespace bayesnam {

struct CsvSchema {
  std::string target_column = "y";
  std::vector<std::string> feature_columns;  // empty: every non-target column, file order
  Task task = Task::Classification;
  char delimiter = ',';
};

// Reads a delimited file with a header row; quoted fields with doubled
// quotes are understood. Errors carry the offending row/column.
Dataset load_csv(const std::string& path, const CsvSchema& schema);

// Features then the target column. Values are written with 17 significant
// digits, so load_csv(save_csv(d)) reproduces d bit for bit.
void save_csv(const Dataset& data, const std::string& path,
              const std::string& target_column = "y", char delimiter = ',');

struct NormStats {
  Vec mean;
  Vec std;  // population std, floored at 1e-12
};

struct Normalized {
  Dataset train;
  Dataset test;
  NormStats stats;
};

// Z-scores both sets using statistics of the training set only.
Normalized normalize_fit_apply(const Dataset& train, const Dataset& test);

struct Holdout {
  Dataset train;
  Dataset test;
};

// Shuffled split with round(ratio * n) training rows.
Holdout split_holdout(const Dataset& data, double ratio, std::uint64_t seed);

// k shuffled folds with sizes differing by at most one, covering every row.
std::vector<Dataset> split_kfold(const Dataset& data, int k, std::uint64_t seed);

// JSON model file, format_version 1. Parameters survive a round trip
// bitwise. The training task is stored alongside the model so downstream
// commands know which metric applies.
void save_model(const NamModel& model, Task task, const std::string& path);

struct LoadedModel {
  NamModel model;
  Task task = Task::Classification;
};

LoadedModel load_model(const std::string& path);

}  // namespace bayesnam
