#pragma once

#include <Eigen/Dense>

#include "randex/error.hpp"

namespace randex::sampling {

// A finite population of N units carrying a study variable y and an
// auxiliary variable z whose population mean is known to the estimator.
struct FinitePopulation1D {
  Eigen::VectorXd y;
  Eigen::VectorXd z;

  FinitePopulation1D(Eigen::VectorXd y_in, Eigen::VectorXd z_in);
  Eigen::Index size() const { return y.size(); }
};

// Population least-squares slope of y on z:
// sum (z_i - zbar)(y_i - ybar) / sum (z_i - zbar)^2.
// Throws degenerate_auxiliary when z is constant.
double q_pls(const FinitePopulation1D& pop);

// Linear regression estimator of the population mean of y from a simple
// random sample: ybar_S + q (zbar - zbar_S). Throws empty_sample.
double regression_estimate(const Eigen::VectorXd& sample_y,
                           const Eigen::VectorXd& sample_z, double pop_mean_z,
                           double q);

// Exact sampling variance of the fixed-slope estimator under SRS of size n,
// with the finite-population correction:
// [(N-n)/(N-1)] * (1/n) * (1/N) * sum [(y_i - ybar) - q0 (z_i - zbar)]^2.
// Throws invalid_sample_size.
double fixed_slope_variance(const FinitePopulation1D& pop, double q0, int n);

// Leading term of the bias of the estimated-slope (OLS) regression
// estimator under SRS:
// -(1/var_z) * (1/n - 1/N) * (1/N) * sum e_i (z_i - zbar)^2,
// where e_i is the population least-squares residual of y on z.
// Throws degenerate_auxiliary, invalid_sample_size.
double ols_sampling_bias_leading(const FinitePopulation1D& pop, int n);

enum class SrsEstimator { sample_mean, fixed_slope, ols_reg };

struct SrsSummary {
  double mean = 0.0;
  double variance = 0.0;  // over all C(N,n) samples, divisor = count
  double min = 0.0;
  double max = 0.0;
  long long samples = 0;
};

// Exact distribution of an estimator over all C(N,n) simple random samples,
// enumerated in lexicographic index order. q0 is used by fixed_slope only.
// Throws too_many_subsets beyond 10^6 samples; ols_reg throws
// degenerate_auxiliary if any sample has constant z.
SrsSummary enumerate_srs(const FinitePopulation1D& pop, int n,
                         SrsEstimator estimator, double q0 = 0.0);

}  // namespace randex::sampling
