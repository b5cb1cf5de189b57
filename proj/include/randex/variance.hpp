#pragma once

#include <Eigen/Dense>
#include <optional>

#include "randex/error.hpp"
#include "randex/estimators.hpp"
#include "randex/linalg.hpp"

namespace randex::variance {

enum class Flavor { classic, hc0, hc1, hc2, hc3, neyman };

constexpr const char* to_string(Flavor f) {
  switch (f) {
    case Flavor::classic: return "classic";
    case Flavor::hc0: return "hc0";
    case Flavor::hc1: return "hc1";
    case Flavor::hc2: return "hc2";
    case Flavor::hc3: return "hc3";
    case Flavor::neyman: return "neyman";
  }
  return "unknown";
}

enum class CiMethod { normal, welch_t };

constexpr const char* to_string(CiMethod m) {
  return m == CiMethod::normal ? "normal" : "welch_t";
}

struct ConfidenceInterval {
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;
  CiMethod method = CiMethod::normal;
  Flavor se_flavor = Flavor::hc2;
};

// Covariance matrix of the coefficient vector.
//
//   classic  (rss/(n-p)) (X'WX)^{-1}
//   hc0      B X'W diag(e^2) WX B with B = (X'WX)^{-1}, e = residuals
//   hc1      hc0 scaled by n/(n-p)
//   hc2,hc3  squared (weighted) residuals inflated by (1-h_ii)^{-1} or ^{-2}
//
// Everything is computed on the sqrt(w)-scaled design, so the unweighted
// case reduces to the textbook formulas and h_ii keeps its sum-to-p meaning
// under WLS. `neyman` is not a coefficient covariance; ask
// neyman_variance/ate_standard_error for it instead.
//
// Throws: leverage_one (h_ii = 1 under hc2/hc3), rank_deficient,
// out_of_domain.
Eigen::MatrixXd coefficient_covariance(const linalg::FitResult& fit,
                                       const Eigen::MatrixXd& x, Flavor flavor);

// s^2_A/n_A + s^2_B/n_B with divisor-(n_g - 1) sample variances; the
// two-sample variance estimate for a difference in means. Equals the hc2
// variance of the dummy coefficient in the dummy-only regression.
// Throws: group_too_small.
double neyman_variance(const estimators::ObservedData& data,
                       estimators::Contrast contrast);

// Welch-Satterthwaite approximate degrees of freedom.
// Throws: out_of_domain (group sizes < 2), degenerate_variance.
double welch_df(double s2a, int na, double s2b, int nb);

// point +- q * se, with q a standard normal quantile or a Student-t quantile
// at `df` (required iff method is welch_t). Throws: missing_df,
// out_of_domain.
ConfidenceInterval confidence_interval(double point, double se,
                                       CiMethod method, double level,
                                       std::optional<double> df = {},
                                       Flavor se_flavor = Flavor::hc2);

// Standard normal quantile, accurate to well under 1e-9 absolute.
// Throws: out_of_domain.
double normal_quantile(double p);

// Student-t quantile, solved from the incomplete-beta CDF to
// |CDF(q) - p| <= 1e-10. Throws: out_of_domain.
double student_t_quantile(double p, double df);

// Regularized incomplete beta function I_x(a, b), by continued fraction.
double regularized_incomplete_beta(double x, double a, double b);

// Student-t CDF (used by the quantile inversion and handy for tests).
double student_t_cdf(double t, double df);

// SE of an ATE estimate: sqrt(c' Cov c) on the estimate's own fit for the
// sandwich/classic flavors, or the Neyman two-sample formula (unadjusted
// estimator only; throws out_of_domain otherwise).
double ate_standard_error(const estimators::AteEstimate& est,
                          const estimators::ObservedData& data, Flavor flavor);

}  // namespace randex::variance
