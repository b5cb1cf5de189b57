#pragma once

#include <Eigen/Dense>
#include <optional>

#include "randex/error.hpp"
#include "randex/estimators.hpp"

namespace randex::asymptotics {

// A fully known finite population: both potential outcomes for every
// subject, plus covariates. This is the ground truth that simulations
// sample assignments from and that the large-sample formulas evaluate
// plug-in moments on.
struct Population {
  Eigen::VectorXd a;  // outcomes if assigned to group A
  Eigen::VectorXd b;  // outcomes if assigned to group B
  Eigen::MatrixXd z;  // n x K covariates (K may be 0)

  Population(Eigen::VectorXd a_in, Eigen::VectorXd b_in, Eigen::MatrixXd z_in);

  Eigen::Index n() const { return a.size(); }
  Eigen::Index k() const { return z.cols(); }
  double ate() const { return a.mean() - b.mean(); }
};

// Slopes of the population least-squares regressions of each potential
// outcome on the covariates, and the standard mixtures of the two.
struct PlsSummary {
  Eigen::VectorXd qa;      // slopes for a
  Eigen::VectorXd qb;      // slopes for b
  Eigen::VectorXd q;       // p_a qa + (1-p_a) qb
  Eigen::VectorXd q_e;     // (1-p_a) qa + p_a qb
  Eigen::VectorXd q_diff;  // qa - qb
  double p_a = 0.0;
};

// Prediction errors of the population regressions. The starred vectors
// use each arm's own slopes; the double-starred vectors use the pooled
// mixture q. All four are centered, and a_star/b_star are orthogonal to
// every centered covariate column.
struct PredictionErrors {
  Eigen::VectorXd a_star;
  Eigen::VectorXd b_star;
  Eigen::VectorXd a_dstar;
  Eigen::VectorXd b_dstar;
};

struct SandwichLimits {
  double adjusted = 0.0;  // limit of n * v_adj
  double interact = 0.0;  // limit of n * v_interact
};

struct PrecisionGaps {
  double unadjusted_minus_interact = 0.0;
  double adjusted_minus_interact = 0.0;
};

struct BiasEstimates {
  double adjusted = 0.0;
  double interact = 0.0;
};

// One estimator's entry in a report: the variance of sqrt(n) * (estimate
// - ATE) in the limit, and the implied standard deviation sqrt(v/n) of
// the estimate itself at this population's n.
struct AsymptoticEntry {
  estimators::EstimatorKind kind = estimators::EstimatorKind::unadjusted;
  double normalized_variance = 0.0;
  double sd = 0.0;
};

struct AsymptoticReport {
  double p_a = 0.0;
  Eigen::Index n = 0;
  std::vector<AsymptoticEntry> entries;  // unadjusted, adjusted, interact, tyranny
  SandwichLimits sandwich;
  PrecisionGaps gaps;
  // leading bias terms, only defined for a single covariate
  std::optional<double> bias_adjusted;
  std::optional<double> bias_interact;
};

// Population least-squares slopes of a and b on (1, Z), divisor-n moments
// (equivalently plain OLS over the whole population), plus the mixtures.
// Throws: out_of_domain (p_a outside (0,1)), rank_deficient.
PlsSummary pls_summary(const Population& pop, double p_a);

// Prediction errors from a previously computed summary.
PredictionErrors prediction_errors(const Population& pop,
                                   const PlsSummary& pls);

// Normalized asymptotic variance of the three regression estimators.
// Each is ((1-p)/p) s2_u + (p/(1-p)) s2_v + 2 cov(u, v) with divisor-n
// population moments, where (u, v) are:
//   unadjusted  centered (a, b)
//   adjusted    (a**, b**)   [pooled-slope errors]
//   interact    (a*, b*)     [own-slope errors]
// The tyranny estimator shares the interact limit.
double asym_var_unadjusted(const Population& pop, double p_a);
double asym_var_adjusted(const Population& pop, double p_a);
double asym_var_interact(const Population& pop, double p_a);

// Probability limits of n times the sandwich variance estimators:
//   adjusted   (1/p) s2_{a**} + (1/(1-p)) s2_{b**}
//   interact   (1/p) s2_{a*}  + (1/(1-p)) s2_{b*}
// Each exceeds the matching true asymptotic variance by the population
// variance of (a - b) resp. (a* - b*).
SandwichLimits sandwich_limits(const Population& pop, double p_a);

// Normalized precision gaps:
//   unadjusted - interact = s2_E / (p (1-p)),    E_i = (z_i - zbar)' q_e
//   adjusted  - interact = (2p-1)^2 s2_D / (p (1-p)),  D_i = (z_i - zbar)' q_diff
// These equal the direct differences of the asym_var_* values exactly.
PrecisionGaps precision_gaps(const Population& pop, double p_a);

// Leading O(1/n) bias terms, single covariate only.
//   adjusted:  -(1/n) (1/s2_z) (1/n) sum [(a_i - b_i) - ATE] (z_i - zbar)^2
//   interact:  -(1/s2_z) [ (1/n_A - 1/n) (1/n) sum a*_i (z_i - zbar)^2
//                        - (1/(n - n_A) - 1/n) (1/n) sum b*_i (z_i - zbar)^2 ]
// with n_A = p_a * n. Throws: multi_covariate_unsupported, out_of_domain,
// degenerate_auxiliary (constant covariate).
double bias_leading_adjusted(const Population& pop);
double bias_leading_interact(const Population& pop, double p_a);

// Plug-in estimates of both leading bias terms from one observed
// two-group sample with a single covariate: sample variance of z
// (divisor n-1) for s2_z, and within-group sample covariances (divisor
// n_g - 1) of the outcome (adjusted term) or of within-group regression
// residuals (interact term) with the squared full-sample-centered
// covariate. Throws: invalid_design (not exactly 2 groups),
// multi_covariate_unsupported, group_too_small (< 3 per group),
// degenerate_auxiliary.
BiasEstimates bias_estimate_from_sample(const estimators::ObservedData& data);

// Everything above bundled for reporting: entries for unadjusted,
// adjusted, interact, tyranny (tyranny shares the interact limit).
AsymptoticReport asymptotic_report(const Population& pop, double p_a);

}  // namespace randex::asymptotics
