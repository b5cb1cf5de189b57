#include "randex/sampling.hpp"

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace randex::sampling {

namespace {

constexpr long long kSubsetGuard = 1000000;

struct Kahan {
  double sum = 0.0, carry = 0.0;
  void add(double x) {
    double y = x - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

double mean_of(const Eigen::VectorXd& v) { return v.sum() / v.size(); }

// C(N,n), capped at the enumeration guard
long long binomial_capped(int n_total, int k) {
  long long out = 1;
  if (k > n_total - k) k = n_total - k;
  for (int i = 1; i <= k; ++i) {
    out = out * (n_total - k + i) / i;
    if (out > kSubsetGuard) return kSubsetGuard + 1;
  }
  return out;
}

}  // namespace

FinitePopulation1D::FinitePopulation1D(Eigen::VectorXd y_in,
                                       Eigen::VectorXd z_in)
    : y(std::move(y_in)), z(std::move(z_in)) {
  if (y.size() != z.size())
    fail(ErrorKind::out_of_domain, "y and z lengths differ");
  if (y.size() < 2)
    fail(ErrorKind::out_of_domain, "population needs at least 2 units");
  if (!y.allFinite() || !z.allFinite())
    fail(ErrorKind::non_finite, "population contains NaN/Inf");
}

double q_pls(const FinitePopulation1D& pop) {
  const Eigen::ArrayXd zc = pop.z.array() - mean_of(pop.z);
  const Eigen::ArrayXd yc = pop.y.array() - mean_of(pop.y);
  const double denom = (zc * zc).sum();
  if (denom <= 0.0)
    fail(ErrorKind::degenerate_auxiliary, "auxiliary variable is constant");
  return (zc * yc).sum() / denom;
}

double regression_estimate(const Eigen::VectorXd& sample_y,
                           const Eigen::VectorXd& sample_z, double pop_mean_z,
                           double q) {
  if (sample_y.size() == 0) fail(ErrorKind::empty_sample, "empty sample");
  if (sample_y.size() != sample_z.size())
    fail(ErrorKind::out_of_domain, "sample y and z lengths differ");
  return mean_of(sample_y) + q * (pop_mean_z - mean_of(sample_z));
}

double fixed_slope_variance(const FinitePopulation1D& pop, double q0, int n) {
  const auto cap_n = static_cast<int>(pop.size());
  if (n < 1 || n > cap_n)
    fail(ErrorKind::invalid_sample_size,
         "sample size " + std::to_string(n) + " outside [1, N]");
  const Eigen::ArrayXd dev = (pop.y.array() - mean_of(pop.y)) -
                             q0 * (pop.z.array() - mean_of(pop.z));
  const double msq = dev.square().sum() / cap_n;
  return (static_cast<double>(cap_n - n) / (cap_n - 1)) * msq / n;
}

double ols_sampling_bias_leading(const FinitePopulation1D& pop, int n) {
  const auto cap_n = static_cast<int>(pop.size());
  if (n < 1 || n > cap_n)
    fail(ErrorKind::invalid_sample_size,
         "sample size " + std::to_string(n) + " outside [1, N]");
  const double q = q_pls(pop);  // throws degenerate_auxiliary when needed
  const Eigen::ArrayXd zc = pop.z.array() - mean_of(pop.z);
  const double var_z = zc.square().sum() / cap_n;
  const Eigen::ArrayXd e = (pop.y.array() - mean_of(pop.y)) - q * zc;
  const double weighted = (e * zc.square()).sum() / cap_n;
  return -(1.0 / var_z) * (1.0 / n - 1.0 / cap_n) * weighted;
}

SrsSummary enumerate_srs(const FinitePopulation1D& pop, int n,
                         SrsEstimator estimator, double q0) {
  const auto cap_n = static_cast<int>(pop.size());
  if (n < 1 || n > cap_n)
    fail(ErrorKind::invalid_sample_size,
         "sample size " + std::to_string(n) + " outside [1, N]");
  if (binomial_capped(cap_n, n) > kSubsetGuard)
    fail(ErrorKind::too_many_subsets,
         "C(N,n) exceeds the enumeration guard of 10^6");

  const double zbar = mean_of(pop.z);
  std::vector<double> values;
  values.reserve(static_cast<size_t>(binomial_capped(cap_n, n)));

  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Eigen::VectorXd sy(n), sz(n);
  while (true) {
    for (int i = 0; i < n; ++i) {
      sy[i] = pop.y[idx[i]];
      sz[i] = pop.z[idx[i]];
    }
    double est = 0.0;
    switch (estimator) {
      case SrsEstimator::sample_mean:
        est = mean_of(sy);
        break;
      case SrsEstimator::fixed_slope:
        est = regression_estimate(sy, sz, zbar, q0);
        break;
      case SrsEstimator::ols_reg: {
        const Eigen::ArrayXd zc = sz.array() - mean_of(sz);
        const double denom = zc.square().sum();
        if (denom <= 0.0)
          fail(ErrorKind::degenerate_auxiliary,
               "a sample has constant z; in-sample slope undefined");
        const double q = (zc * (sy.array() - mean_of(sy))).sum() / denom;
        est = regression_estimate(sy, sz, zbar, q);
        break;
      }
    }
    values.push_back(est);

    // advance to the next combination in lexicographic order
    int pos = n - 1;
    while (pos >= 0 && idx[pos] == cap_n - n + pos) --pos;
    if (pos < 0) break;
    ++idx[pos];
    for (int j = pos + 1; j < n; ++j) idx[j] = idx[j - 1] + 1;
  }

  SrsSummary out;
  out.samples = static_cast<long long>(values.size());
  Kahan sum;
  for (double v : values) sum.add(v);
  out.mean = sum.sum / out.samples;
  Kahan ss;
  for (double v : values) ss.add((v - out.mean) * (v - out.mean));
  out.variance = ss.sum / out.samples;
  out.min = *std::min_element(values.begin(), values.end());
  out.max = *std::max_element(values.begin(), values.end());
  return out;
}

}  // namespace randex::sampling
