#pragma once

#include "bayesnam/types.hpp"

namespace bayesnam {

// Area under the ROC curve via the Mann-Whitney rank statistic. Ties between
// a positive and a negative score count 1/2. Throws std::invalid_argument
// when labels are not {0,1}, sizes differ, or only one class is present.
double auc(const Vec& scores, const Vec& labels);

double rmse(const Vec& preds, const Vec& targets);

// Fraction of rows with (score > 0.5) == label.
double accuracy(const Vec& scores, const Vec& labels);

}  // namespace bayesnam
