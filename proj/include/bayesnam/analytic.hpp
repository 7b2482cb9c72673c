#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace bayesnam {

double std_normal_pdf(double z);

// Phi(z) through erfc; absolute error well below 1e-12 on |z| <= 8.
double std_normal_cdf(double z);

// q_j = Phi(lambda * sqrt(j) / sigma): probability that the mean of j kept
// noisy features carries the correct sign.
double q_value(int j, double lambda, double sigma);

// Accuracy of the equal-weight classifier sign(mean of features 2..d) when
// each is N(lambda * y, sigma2): Phi(lambda * sqrt(d - 1) / sigma).
double lemma1_accuracy(double lambda, double sigma2, int d);

// P(k, tau) = sum_{j=1..k} q_j C(k,j) (1-tau)^j tau^(k-j): probability that
// an equal-weight vote over k features, each kept independently with
// probability 1-tau, is correct. The all-dropped event (j = 0) counts as an
// error. Binomial terms are accumulated in log space (stable to k ~ 200).
double p_acc(int k, double tau, double lambda, double sigma);

struct DeltaP {
  double delta;        // P(k, tau) - P(1, tau)
  double ddelta_dtau;  // analytic derivative of delta in tau
};
DeltaP delta_p(int k, double tau, double lambda, double sigma);

struct McEstimate {
  double estimate;
  double std_error;  // sqrt(p(1-p)/n) of the estimate
  std::int64_t n;
};

// Brute-force counterpart of p_acc: draws y uniform on {-1,+1} and k features
// N(lambda*y, sigma^2), keeps each with probability 1-tau, and counts draws
// with y * sum(kept) strictly positive.
McEstimate mc_oracle(int k, double tau, double lambda, double sigma, std::int64_t n_draws,
                     std::uint64_t seed);

// Upper bound on (j+1) * (q_{j+1} - q_j), uniform over lambda and sigma:
// (j+1) * [Phi(sqrt((j+1) r)) - Phi(sqrt(j r))] with r = ln((j+1)/j).
double lemma2_bound(int j);

struct TheoremRow {
  int k;
  double tau;
  double delta;
  double ddelta_dtau;
  bool positive;  // both delta > 0 and ddelta_dtau > 0
};

struct TheoremReport {
  double lambda = 0.0;
  double sigma = 1.0;
  std::vector<int> k_list;
  std::vector<double> tau_grid;
  std::vector<TheoremRow> rows;  // k-major, tau-minor
  // Per k: the largest grid tau such that ddelta_dtau > 0 at every grid point
  // up to and including it; -1 when already non-positive at the first point.
  std::vector<double> tau_star;
};

TheoremReport theorem1_report(const std::vector<int>& k_list, const std::vector<double>& tau_grid,
                              double lambda, double sigma);

// Columns: k,tau,delta,ddelta_dtau.
void write_csv(const TheoremReport& report, std::ostream& os);

}  // namespace bayesnam
