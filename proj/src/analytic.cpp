#include "bayesnam/analytic.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "bayesnam/format.hpp"
#include "bayesnam/rng.hpp"

namespace bayesnam {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440084436210485;
constexpr double kInvSqrt2Pi = 0.39894228040143267793994605993438;

void check_vote_args(int k, double tau, double lambda, double sigma, const char* where) {
  if (k < 1) throw std::invalid_argument(std::string(where) + ": k must be >= 1");
  if (!(tau >= 0.0 && tau <= 1.0))
    throw std::invalid_argument(std::string(where) + ": tau must be in [0, 1]");
  if (!(lambda >= 0.0)) throw std::invalid_argument(std::string(where) + ": lambda must be >= 0");
  if (!(sigma > 0.0)) throw std::invalid_argument(std::string(where) + ": sigma must be positive");
}

// sum_{j=1..k} q_j * d/dtau [C(k,j) (1-tau)^j tau^(k-j)]
double vote_prob_dtau(int k, double tau, double lambda, double sigma) {
  if (tau == 0.0) {
    // Only the tau-exponent-0 and -1 terms have a nonzero derivative at 0.
    double v = -static_cast<double>(k) * q_value(k, lambda, sigma);
    if (k >= 2) v += static_cast<double>(k) * q_value(k - 1, lambda, sigma);
    return v;
  }
  if (tau == 1.0) {
    // Only j = 1 survives: -C(k,1).
    return -static_cast<double>(k) * q_value(1, lambda, sigma);
  }
  const double log_tau = std::log(tau);
  const double log_keep = std::log1p(-tau);
  const double lgk = std::lgamma(static_cast<double>(k) + 1.0);
  double total = 0.0;
  for (int j = 1; j <= k; ++j) {
    const double log_binom = lgk - std::lgamma(static_cast<double>(j) + 1.0) -
                             std::lgamma(static_cast<double>(k - j) + 1.0) +
                             static_cast<double>(j) * log_keep +
                             static_cast<double>(k - j) * log_tau;
    const double b = std::exp(log_binom);
    const double db = b * (static_cast<double>(k - j) / tau - static_cast<double>(j) / (1.0 - tau));
    total += q_value(j, lambda, sigma) * db;
  }
  return total;
}

}  // namespace

double std_normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

double q_value(int j, double lambda, double sigma) {
  if (j < 1) throw std::invalid_argument("q_value: j must be >= 1");
  if (!(lambda >= 0.0)) throw std::invalid_argument("q_value: lambda must be >= 0");
  if (!(sigma > 0.0)) throw std::invalid_argument("q_value: sigma must be positive");
  return std_normal_cdf(lambda * std::sqrt(static_cast<double>(j)) / sigma);
}

double lemma1_accuracy(double lambda, double sigma2, int d) {
  if (d < 2) throw std::invalid_argument("lemma1_accuracy: d must be >= 2");
  if (!(sigma2 > 0.0)) throw std::invalid_argument("lemma1_accuracy: sigma2 must be positive");
  return q_value(d - 1, lambda, std::sqrt(sigma2));
}

double p_acc(int k, double tau, double lambda, double sigma) {
  check_vote_args(k, tau, lambda, sigma, "p_acc");
  if (tau == 1.0) return 0.0;
  if (tau == 0.0) return q_value(k, lambda, sigma);
  const double log_tau = std::log(tau);
  const double log_keep = std::log1p(-tau);
  const double lgk = std::lgamma(static_cast<double>(k) + 1.0);
  double total = 0.0;
  for (int j = 1; j <= k; ++j) {
    const double log_term = lgk - std::lgamma(static_cast<double>(j) + 1.0) -
                            std::lgamma(static_cast<double>(k - j) + 1.0) +
                            static_cast<double>(j) * log_keep +
                            static_cast<double>(k - j) * log_tau;
    total += q_value(j, lambda, sigma) * std::exp(log_term);
  }
  // Summation noise can land a hair above 1 for large k; this is a probability.
  return std::min(total, 1.0);
}

DeltaP delta_p(int k, double tau, double lambda, double sigma) {
  check_vote_args(k, tau, lambda, sigma, "delta_p");
  DeltaP out;
  out.delta = p_acc(k, tau, lambda, sigma) - p_acc(1, tau, lambda, sigma);
  // d/dtau P(1, tau) = -q_1 for every tau.
  out.ddelta_dtau = vote_prob_dtau(k, tau, lambda, sigma) + q_value(1, lambda, sigma);
  return out;
}

McEstimate mc_oracle(int k, double tau, double lambda, double sigma, std::int64_t n_draws,
                     std::uint64_t seed) {
  check_vote_args(k, tau, lambda, sigma, "mc_oracle");
  if (n_draws < 1) throw std::invalid_argument("mc_oracle: n_draws must be >= 1");
  Rng rng(seed);
  std::int64_t correct = 0;
  for (std::int64_t m = 0; m < n_draws; ++m) {
    const double y = rng.bernoulli(0.5) ? 1.0 : -1.0;
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
      const bool keep = rng.bernoulli(1.0 - tau);
      const double x = lambda * y + sigma * rng.normal();
      if (keep) sum += x;
    }
    if (y * sum > 0.0) ++correct;
  }
  McEstimate est;
  est.n = n_draws;
  est.estimate = static_cast<double>(correct) / static_cast<double>(n_draws);
  est.std_error = std::sqrt(est.estimate * (1.0 - est.estimate) / static_cast<double>(n_draws));
  return est;
}

double lemma2_bound(int j) {
  if (j < 1) throw std::invalid_argument("lemma2_bound: j must be >= 1");
  const double r = std::log((static_cast<double>(j) + 1.0) / static_cast<double>(j));
  const double hi = std::sqrt((static_cast<double>(j) + 1.0) * r);
  const double lo = std::sqrt(static_cast<double>(j) * r);
  return (static_cast<double>(j) + 1.0) * (std_normal_cdf(hi) - std_normal_cdf(lo));
}

TheoremReport theorem1_report(const std::vector<int>& k_list, const std::vector<double>& tau_grid,
                              double lambda, double sigma) {
  if (k_list.empty()) throw std::invalid_argument("theorem1_report: empty k list");
  if (tau_grid.empty()) throw std::invalid_argument("theorem1_report: empty tau grid");
  for (std::size_t i = 1; i < tau_grid.size(); ++i)
    if (!(tau_grid[i] > tau_grid[i - 1]))
      throw std::invalid_argument("theorem1_report: tau grid must be strictly increasing");

  TheoremReport report;
  report.lambda = lambda;
  report.sigma = sigma;
  report.k_list = k_list;
  report.tau_grid = tau_grid;
  report.rows.reserve(k_list.size() * tau_grid.size());
  report.tau_star.reserve(k_list.size());
  for (int k : k_list) {
    double star = -1.0;
    bool prefix_alive = true;
    for (double tau : tau_grid) {
      const DeltaP dp = delta_p(k, tau, lambda, sigma);
      const bool positive = dp.delta > 0.0 && dp.ddelta_dtau > 0.0;
      report.rows.push_back({k, tau, dp.delta, dp.ddelta_dtau, positive});
      if (prefix_alive) {
        if (dp.ddelta_dtau > 0.0)
          star = tau;
        else
          prefix_alive = false;
      }
    }
    report.tau_star.push_back(star);
  }
  return report;
}

void write_csv(const TheoremReport& report, std::ostream& os) {
  os << "k,tau,delta,ddelta_dtau\n";
  for (const TheoremRow& row : report.rows)
    os << row.k << ',' << g17(row.tau) << ',' << g17(row.delta) << ',' << g17(row.ddelta_dtau)
       << '\n';
}

}  // namespace bayesnam
