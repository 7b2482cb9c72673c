#include "bayesnam/explain.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "bayesnam/format.hpp"

namespace bayesnam {

namespace {

Index sample_terms(const NamSample& s) {
  return static_cast<Index>(s.subnets.size() + s.interaction_nets.size());
}

// Raw output of term t (feature subnet or interaction net) at full input x.
double term_output(const NamSample& s, Index t, const Vec& x) {
  const Index d = static_cast<Index>(s.subnets.size());
  if (t < d) {
    Vec in(1);
    in(0) = x(t);
    return mlp_forward(s.subnets[static_cast<std::size_t>(t)], in)(0);
  }
  const auto& pair = s.pairs[static_cast<std::size_t>(t - d)];
  Vec in(2);
  in(0) = x(pair.first);
  in(1) = x(pair.second);
  return mlp_forward(s.interaction_nets[static_cast<std::size_t>(t - d)], in)(0);
}

void check_samples(std::span<const NamSample> samples, const char* where) {
  if (samples.empty()) throw std::invalid_argument(std::string(where) + ": no samples");
  for (const NamSample& s : samples)
    if (sample_terms(s) != sample_terms(samples.front()))
      throw std::invalid_argument(std::string(where) + ": inconsistent sample shapes");
}

}  // namespace

std::vector<NamSample> draw_samples(const NamModel& model, int n_samples, Rng& rng) {
  if (n_samples < 1) throw std::invalid_argument("draw_samples: n_samples must be >= 1");
  std::vector<NamSample> samples;
  samples.reserve(static_cast<std::size_t>(n_samples));
  for (int s = 0; s < n_samples; ++s) samples.push_back(draw_sample(model, rng));
  return samples;
}

std::vector<NamSample> draw_samples(std::span<const NamModel> models, Rng& rng) {
  if (models.empty()) throw std::invalid_argument("draw_samples: empty ensemble");
  std::vector<NamSample> samples;
  samples.reserve(models.size());
  for (const NamModel& m : models) samples.push_back(draw_sample(m, rng));
  return samples;
}

Mat train_means(std::span<const NamSample> samples, const Dataset& train) {
  check_samples(samples, "train_means");
  validate(train);
  const Index S = static_cast<Index>(samples.size());
  const Index T = sample_terms(samples.front());
  if (static_cast<Index>(samples.front().subnets.size()) != train.d())
    throw std::invalid_argument("train_means: feature count mismatch");
  Mat centers = Mat::Zero(S, T);
  const double inv_n = 1.0 / static_cast<double>(train.n());
  for (Index s = 0; s < S; ++s) {
    const NamSample& sample = samples[static_cast<std::size_t>(s)];
    for (Index m = 0; m < train.n(); ++m) {
      const Vec x = train.X.row(m).transpose();
      for (Index t = 0; t < T; ++t) centers(s, t) += term_output(sample, t, x);
    }
    centers.row(s) *= inv_n;
  }
  return centers;
}

Mat train_means(const NamModel& model, const Dataset& train, int n_samples, Rng& rng) {
  const std::vector<NamSample> samples = draw_samples(model, n_samples, rng);
  return train_means(samples, train);
}

MappingGrid mapping_grid(std::span<const NamSample> samples, Index feature, double lo, double hi,
                         int n_points, const Vec* centers) {
  check_samples(samples, "mapping_grid");
  const Index d = static_cast<Index>(samples.front().subnets.size());
  if (feature < 0 || feature >= d) throw std::invalid_argument("mapping_grid: feature out of range");
  if (n_points < 2) throw std::invalid_argument("mapping_grid: need at least two grid points");
  if (!(hi > lo)) throw std::invalid_argument("mapping_grid: need hi > lo");
  const Index S = static_cast<Index>(samples.size());
  if (centers && centers->size() != S)
    throw std::invalid_argument("mapping_grid: centers size mismatch");

  MappingGrid grid;
  grid.xs.resize(n_points);
  const double step = (hi - lo) / static_cast<double>(n_points - 1);
  for (Index g = 0; g < n_points; ++g) grid.xs(g) = lo + step * static_cast<double>(g);
  grid.xs(n_points - 1) = hi;

  grid.samples.resize(S, n_points);
  Vec in(1);
  for (Index s = 0; s < S; ++s) {
    const MlpParams& net = samples[static_cast<std::size_t>(s)].subnets[static_cast<std::size_t>(feature)];
    const double center = centers ? (*centers)(s) : 0.0;
    for (Index g = 0; g < n_points; ++g) {
      in(0) = grid.xs(g);
      grid.samples(s, g) = mlp_forward(net, in)(0) - center;
    }
  }
  grid.mean = grid.samples.colwise().mean().transpose();
  grid.sd.resize(n_points);
  for (Index g = 0; g < n_points; ++g) {
    const double m = grid.mean(g);
    double var = 0.0;
    for (Index s = 0; s < S; ++s) {
      const double r = grid.samples(s, g) - m;
      var += r * r;
    }
    grid.sd(g) = std::sqrt(var / static_cast<double>(S));
  }
  grid.lo = grid.mean - 2.0 * grid.sd;
  grid.hi = grid.mean + 2.0 * grid.sd;
  return grid;
}

MappingGrid mapping_grid(const NamModel& model, Index feature, double lo, double hi,
                         int n_points, int n_samples, Rng& rng, const Vec* centers) {
  const std::vector<NamSample> samples = draw_samples(model, n_samples, rng);
  return mapping_grid(samples, feature, lo, hi, n_points, centers);
}

std::vector<Contribution> feature_contribution(std::span<const NamSample> samples, const Vec& x,
                                               const Mat& centers) {
  check_samples(samples, "feature_contribution");
  const Index S = static_cast<Index>(samples.size());
  const Index T = sample_terms(samples.front());
  if (x.size() != static_cast<Index>(samples.front().subnets.size()))
    throw std::invalid_argument("feature_contribution: point size mismatch");
  if (centers.rows() != S || centers.cols() != T)
    throw std::invalid_argument("feature_contribution: centers shape mismatch");

  std::vector<Contribution> out(static_cast<std::size_t>(T));
  Mat values(S, T);
  for (Index s = 0; s < S; ++s)
    for (Index t = 0; t < T; ++t)
      values(s, t) = term_output(samples[static_cast<std::size_t>(s)], t, x) - centers(s, t);
  for (Index t = 0; t < T; ++t) {
    const double mean = values.col(t).mean();
    double var = 0.0;
    for (Index s = 0; s < S; ++s) {
      const double r = values(s, t) - mean;
      var += r * r;
    }
    out[static_cast<std::size_t>(t)] = {mean, std::sqrt(var / static_cast<double>(S))};
  }
  return out;
}

std::vector<Contribution> feature_contribution(const NamModel& model, const Vec& x,
                                               const Mat& centers, int n_samples, Rng& rng) {
  const std::vector<NamSample> samples = draw_samples(model, n_samples, rng);
  return feature_contribution(samples, x, centers);
}

double inconsistency_score(const Mat& grid_samples) {
  if (grid_samples.rows() < 2)
    throw std::invalid_argument("inconsistency_score: need at least two samples");
  if (grid_samples.cols() < 1)
    throw std::invalid_argument("inconsistency_score: empty grid");
  const Index S = grid_samples.rows();
  double total = 0.0;
  for (Index g = 0; g < grid_samples.cols(); ++g) {
    const double m = grid_samples.col(g).mean();
    double var = 0.0;
    for (Index s = 0; s < S; ++s) {
      const double r = grid_samples(s, g) - m;
      var += r * r;
    }
    total += std::sqrt(var / static_cast<double>(S));
  }
  return total / static_cast<double>(grid_samples.cols());
}

namespace {

ExplanationReport report_from_samples(std::vector<NamSample> samples, const Dataset& train,
                                      const Vec* point, int grid_points) {
  ExplanationReport report;
  report.n_samples = static_cast<int>(samples.size());
  const std::span<const NamSample> view(samples);
  report.centers = train_means(view, train);

  const Index d = train.d();
  report.term_names = train.feature_names.empty() ? default_feature_names(d) : train.feature_names;
  for (const auto& pair : samples.front().pairs)
    report.term_names.push_back(report.term_names[static_cast<std::size_t>(pair.first)] + "*" +
                                report.term_names[static_cast<std::size_t>(pair.second)]);

  report.grids.reserve(static_cast<std::size_t>(d));
  report.inconsistency.reserve(static_cast<std::size_t>(d));
  for (Index f = 0; f < d; ++f) {
    const double lo = train.X.col(f).minCoeff();
    const double hi = train.X.col(f).maxCoeff();
    const Vec centers_f = report.centers.col(f);
    report.grids.push_back(mapping_grid(view, f, lo, hi, grid_points, &centers_f));
    report.inconsistency.push_back(samples.size() > 1
                                       ? inconsistency_score(report.grids.back().samples)
                                       : 0.0);
  }
  if (point) {
    report.point = *point;
    report.contributions = feature_contribution(view, *point, report.centers);
  }
  return report;
}

}  // namespace

ExplanationReport build_report(const NamModel& model, const Dataset& train, const Vec* point,
                               int grid_points, int n_samples, std::uint64_t seed) {
  Rng rng(seed);
  return report_from_samples(draw_samples(model, n_samples, rng), train, point, grid_points);
}

ExplanationReport build_report(std::span<const NamModel> models, const Dataset& train,
                               const Vec* point, int grid_points, int n_samples,
                               std::uint64_t seed) {
  Rng rng(seed);
  (void)n_samples;  // ensemble members are the samples
  return report_from_samples(draw_samples(models, rng), train, point, grid_points);
}

void write_grid_csv(const MappingGrid& grid, std::ostream& os) {
  os << "x,mean,lo,hi";
  for (Index s = 0; s < grid.samples.rows(); ++s) os << ",sample_" << s;
  os << '\n';
  for (Index g = 0; g < grid.xs.size(); ++g) {
    os << g17(grid.xs(g)) << ',' << g17(grid.mean(g)) << ',' << g17(grid.lo(g)) << ','
       << g17(grid.hi(g));
    for (Index s = 0; s < grid.samples.rows(); ++s) os << ',' << g17(grid.samples(s, g));
    os << '\n';
  }
}

}  // namespace bayesnam
