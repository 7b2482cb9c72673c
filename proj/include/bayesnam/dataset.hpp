#pragma once

#include <string>
#include <vector>

#include "bayesnam/types.hpp"

namespace bayesnam {

enum class Task { Classification, Regression };

struct Dataset {
  Mat X;  // n x d
  Vec y;  // n targets: {0,1} for classification, reals for regression
  Task task = Task::Classification;
  std::vector<std::string> feature_names;  // d names

  Index n() const { return X.rows(); }
  Index d() const { return X.cols(); }
};

// "x1".."xd".
std::vector<std::string> default_feature_names(Index d);

// Throws std::invalid_argument on shape mismatch, non-finite values, or
// classification targets outside {0, 1}.
void validate(const Dataset& data);

Dataset take_rows(const Dataset& data, const std::vector<Index>& rows);

}  // namespace bayesnam
