#pragma once

#include <Eigen/Dense>
#include <vector>

#include "randex/error.hpp"
#include "randex/linalg.hpp"

namespace randex::estimators {

enum class EstimatorKind { unadjusted, adjusted, interact, tyranny,
                           targeted_ancova };

constexpr const char* to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::unadjusted: return "unadjusted";
    case EstimatorKind::adjusted: return "adjusted";
    case EstimatorKind::interact: return "interact";
    case EstimatorKind::tyranny: return "tyranny";
    case EstimatorKind::targeted_ancova: return "targeted_ancova";
  }
  return "unknown";
}

// One completely randomized experiment as an analyst sees it: outcome,
// integer group ids in [0, n_groups), and K >= 0 covariate columns.
// Group-size requirements are enforced by each estimator, not here, so that
// undersized requests surface as the estimator's own error.
struct ObservedData {
  Eigen::VectorXd y;
  std::vector<int> group;
  Eigen::MatrixXd z;
  int n_groups = 0;

  ObservedData(Eigen::VectorXd y_in, std::vector<int> group_in,
               Eigen::MatrixXd z_in, int n_groups_in);

  Eigen::Index n() const { return y.size(); }
  Eigen::Index k() const { return z.cols(); }
  std::vector<Eigen::Index> members_of(int g) const;
};

// Ordered pair of group ids; every estimate reads "A minus B".
struct Contrast {
  int a = 0;
  int b = 1;
};

// A point estimate plus the regression it came from. `design` and
// `coef_contrast` describe how the point maps onto the fit's coefficients
// (point = coef_contrast' * beta), which is what SE computation needs.
struct AteEstimate {
  EstimatorKind kind;
  Contrast contrast;
  double point = 0.0;
  linalg::FitResult fit;
  Eigen::MatrixXd design;
  Eigen::VectorXd coef_contrast;
};

// Difference in group means. SE provenance: pooled regression of y on
// intercept + group dummies.
AteEstimate ate_unadjusted(const ObservedData& data, Contrast contrast);

// Coefficient contrast from the pooled regression of y on intercept,
// G-1 group dummies, and covariates.
AteEstimate ate_adjusted(const ObservedData& data, Contrast contrast);

// Difference of per-group regression predictions at the full-sample
// covariate mean. SE provenance: the equivalent interacted regression on
// the contrast groups' rows (dummy, centered covariates, interactions).
AteEstimate ate_interact(const ObservedData& data, Contrast contrast);

// WLS of y on intercept, dummy, covariates with each group weighted by the
// other group's share: (1-p)/p on A rows, p/(1-p) on B rows, p = n_A/n.
// Two groups only.
AteEstimate ate_tyranny(const ObservedData& data, Contrast contrast);

// Difference in group means of residuals from a covariate-only WLS fit with
// the tyranny weights. Two groups only.
AteEstimate ate_targeted_ancova(const ObservedData& data, Contrast contrast);

AteEstimate estimate(const ObservedData& data, EstimatorKind kind,
                     Contrast contrast);

}  // namespace randex::estimators
