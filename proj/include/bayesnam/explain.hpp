#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bayesnam/dataset.hpp"
#include "bayesnam/nam.hpp"

namespace bayesnam {

// S frozen realizations of a model. A deterministic model yields S identical
// entries, so every downstream spread is exactly zero.
std::vector<NamSample> draw_samples(const NamModel& model, int n_samples, Rng& rng);

// For an ensemble the samples are the members themselves (Bayesian members
// contribute one realization each).
std::vector<NamSample> draw_samples(std::span<const NamModel> models, Rng& rng);

// Per-sample, per-term mean of the raw term output over the training rows;
// row s holds the centers of sample s (features first, then interactions).
Mat train_means(std::span<const NamSample> samples, const Dataset& train);

// Spec-shaped convenience: draws n_samples realizations from rng first.
// Reusing a seed across this and the calls below pairs the same samples.
Mat train_means(const NamModel& model, const Dataset& train, int n_samples, Rng& rng);

struct MappingGrid {
  Vec xs;       // grid points (inclusive endpoints)
  Mat samples;  // S x G centered term outputs
  Vec mean;     // across-sample mean per grid point
  Vec sd;       // across-sample population std per grid point
  Vec lo, hi;   // mean -/+ 2 sd
};

// Centered shape f_i on [lo, hi]. centers, when given, holds one centering
// constant per sample; otherwise the rows are uncentered.
MappingGrid mapping_grid(std::span<const NamSample> samples, Index feature, double lo, double hi,
                         int n_points, const Vec* centers = nullptr);

MappingGrid mapping_grid(const NamModel& model, Index feature, double lo, double hi,
                         int n_points, int n_samples, Rng& rng, const Vec* centers = nullptr);

struct Contribution {
  double mean;
  double sd;
};

// Centered term outputs at one query point, mean and spread across samples.
// centers must have one row per sample (as produced by train_means).
std::vector<Contribution> feature_contribution(std::span<const NamSample> samples, const Vec& x,
                                               const Mat& centers);

std::vector<Contribution> feature_contribution(const NamModel& model, const Vec& x,
                                               const Mat& centers, int n_samples, Rng& rng);

// Mean over grid points of the across-sample population std. Needs at least
// two sample rows.
double inconsistency_score(const Mat& grid_samples);

struct ExplanationReport {
  std::vector<std::string> term_names;  // features, then "xi*xj" interaction labels
  int n_samples = 0;
  Mat centers;                           // S x terms
  std::vector<MappingGrid> grids;        // one per feature
  std::vector<double> inconsistency;     // one per feature
  std::optional<Vec> point;              // query point, when given
  std::vector<Contribution> contributions;  // empty unless a point was given
};

ExplanationReport build_report(const NamModel& model, const Dataset& train, const Vec* point,
                               int grid_points, int n_samples, std::uint64_t seed);

ExplanationReport build_report(std::span<const NamModel> models, const Dataset& train,
                               const Vec* point, int grid_points, int n_samples,
                               std::uint64_t seed);

// Columns: x, mean, lo, hi, sample_0..sample_{S-1}.
void write_grid_csv(const MappingGrid& grid, std::ostream& os);

}  // namespace bayesnam
