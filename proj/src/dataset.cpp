#include "bayesnam/dataset.hpp"

#include <cmath>
#include <stdexcept>

namespace bayesnam {

std::vector<std::string> default_feature_names(Index d) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(d));
  for (Index i = 0; i < d; ++i) names.push_back("x" + std::to_string(i + 1));
  return names;
}

void validate(const Dataset& data) {
  if (data.X.rows() < 1) throw std::invalid_argument("dataset: empty");
  if (data.X.cols() < 1) throw std::invalid_argument("dataset: no features");
  if (data.y.size() != data.X.rows())
    throw std::invalid_argument("dataset: target length does not match row count");
  if (!data.feature_names.empty() &&
      data.feature_names.size() != static_cast<std::size_t>(data.X.cols()))
    throw std::invalid_argument("dataset: feature name count does not match column count");
  if (!data.X.allFinite() || !data.y.allFinite())
    throw std::invalid_argument("dataset: non-finite value");
  if (data.task == Task::Classification) {
    for (Index i = 0; i < data.y.size(); ++i)
      if (data.y(i) != 0.0 && data.y(i) != 1.0)
        throw std::invalid_argument("dataset: classification targets must be in {0, 1}");
  }
}

Dataset take_rows(const Dataset& data, const std::vector<Index>& rows) {
  Dataset out;
  out.task = data.task;
  out.feature_names = data.feature_names;
  out.X.resize(static_cast<Index>(rows.size()), data.X.cols());
  out.y.resize(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Index r = rows[i];
    if (r < 0 || r >= data.X.rows()) throw std::invalid_argument("take_rows: index out of range");
    out.X.row(static_cast<Index>(i)) = data.X.row(r);
    out.y(static_cast<Index>(i)) = data.y(r);
  }
  return out;
}

}  // namespace bayesnam
