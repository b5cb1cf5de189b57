#include "randex/estimators.hpp"

#include <algorithm>
#include <string>

namespace randex::estimators {

namespace {

void check_contrast(const ObservedData& data, Contrast c) {
  if (c.a < 0 || c.a >= data.n_groups || c.b < 0 || c.b >= data.n_groups)
    fail(ErrorKind::out_of_domain, "contrast group id outside [0, G)");
  if (c.a == c.b)
    fail(ErrorKind::invalid_design, "contrast groups must be distinct");
}

std::vector<Eigen::Index> require_members(const ObservedData& data, int g) {
  auto idx = data.members_of(g);
  if (idx.empty())
    fail(ErrorKind::empty_group, "group " + std::to_string(g) + " is empty");
  return idx;
}

double mean_at(const Eigen::VectorXd& v,
               const std::vector<Eigen::Index>& idx) {
  double s = 0.0;
  for (auto i : idx) s += v[i];
  return s / idx.size();
}

// intercept + one dummy per non-reference group (reference = group 0),
// optionally followed by the covariate block
Eigen::MatrixXd pooled_design(const ObservedData& data, bool covariates) {
  const Eigen::Index n = data.n();
  const Eigen::Index g = data.n_groups;
  const Eigen::Index k = covariates ? data.k() : 0;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, g + k);
  x.col(0).setOnes();
  for (Eigen::Index i = 0; i < n; ++i)
    if (data.group[i] > 0) x(i, data.group[i]) = 1.0;
  if (k > 0) x.rightCols(k) = data.z;
  return x;
}

// contrast vector picking coef(A) - coef(B) in the pooled parametrization,
// where the reference group's coefficient is identically zero
Eigen::VectorXd dummy_contrast(Eigen::Index p, Contrast c) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(p);
  if (c.a > 0) v[c.a] = 1.0;
  if (c.b > 0) v[c.b] = -1.0;
  return v;
}

double apply_contrast(const Eigen::VectorXd& beta, Contrast c) {
  const double ca = c.a > 0 ? beta[c.a] : 0.0;
  const double cb = c.b > 0 ? beta[c.b] : 0.0;
  return ca - cb;
}

// tyranny weights: each group carries the other group's share, so the fit is
// the same whichever way the contrast is ordered
Eigen::VectorXd minority_weights(const ObservedData& data, Contrast c) {
  const double na = static_cast<double>(data.members_of(c.a).size());
  const double nb = static_cast<double>(data.members_of(c.b).size());
  Eigen::VectorXd w(data.n());
  for (Eigen::Index i = 0; i < data.n(); ++i)
    w[i] = (data.group[i] == c.a) ? nb / na : na / nb;
  return w;
}

void require_two_groups(const ObservedData& data, const char* op) {
  if (data.n_groups != 2)
    fail(ErrorKind::invalid_design,
         std::string(op) + " is defined for exactly two groups");
}

}  // namespace

ObservedData::ObservedData(Eigen::VectorXd y_in, std::vector<int> group_in,
                           Eigen::MatrixXd z_in, int n_groups_in)
    : y(std::move(y_in)),
      group(std::move(group_in)),
      z(std::move(z_in)),
      n_groups(n_groups_in) {
  const auto n = y.size();
  if (n < 1) fail(ErrorKind::out_of_domain, "no observations");
  if (static_cast<Eigen::Index>(group.size()) != n)
    fail(ErrorKind::out_of_domain, "group length does not match y");
  if (z.rows() != 0 && z.rows() != n)
    fail(ErrorKind::out_of_domain, "covariate rows do not match y");
  if (z.rows() == 0) z.resize(n, 0);
  if (n_groups < 2) fail(ErrorKind::out_of_domain, "need at least two groups");
  if (!y.allFinite() || !z.allFinite())
    fail(ErrorKind::non_finite, "data contain NaN/Inf");
  for (int g : group)
    if (g < 0 || g >= n_groups)
      fail(ErrorKind::out_of_domain, "group id outside [0, G)");
}

std::vector<Eigen::Index> ObservedData::members_of(int g) const {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < n(); ++i)
    if (group[i] == g) idx.push_back(i);
  return idx;
}

AteEstimate ate_unadjusted(const ObservedData& data, Contrast contrast) {
  check_contrast(data, contrast);
  const auto idx_a = require_members(data, contrast.a);
  const auto idx_b = require_members(data, contrast.b);

  AteEstimate out;
  out.kind = EstimatorKind::unadjusted;
  out.contrast = contrast;
  out.point = mean_at(data.y, idx_a) - mean_at(data.y, idx_b);
  out.design = pooled_design(data, /*covariates=*/false);
  out.fit = linalg::least_squares(out.design, data.y);
  out.coef_contrast = dummy_contrast(out.design.cols(), contrast);
  return out;
}

AteEstimate ate_adjusted(const ObservedData& data, Contrast contrast) {
  check_contrast(data, contrast);
  require_members(data, contrast.a);
  require_members(data, contrast.b);

  AteEstimate out;
  out.kind = EstimatorKind::adjusted;
  out.contrast = contrast;
  out.design = pooled_design(data, /*covariates=*/true);
  out.fit = linalg::least_squares(out.design, data.y);
  out.point = apply_contrast(out.fit.coefficients, contrast);
  out.coef_contrast = dummy_contrast(out.design.cols(), contrast);
  return out;
}

AteEstimate ate_interact(const ObservedData& data, Contrast contrast) {
  check_contrast(data, contrast);
  const auto idx_a = require_members(data, contrast.a);
  const auto idx_b = require_members(data, contrast.b);
  const Eigen::Index k = data.k();
  for (const auto* idx : {&idx_a, &idx_b})
    if (static_cast<Eigen::Index>(idx->size()) <= k + 1)
      fail(ErrorKind::group_too_small,
           "interact needs more than K+1 members per group");

  const Eigen::RowVectorXd z_bar = data.z.colwise().mean();

  // per-group prediction at the full-sample covariate mean:
  // ybar_g + (zbar - zbar_g) * slopes_g
  auto prediction = [&](const std::vector<Eigen::Index>& idx) {
    const auto m = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd xg(m, k + 1);
    Eigen::VectorXd yg(m);
    xg.col(0).setOnes();
    for (Eigen::Index r = 0; r < m; ++r) {
      xg.row(r).tail(k) = data.z.row(idx[r]);
      yg[r] = data.y[idx[r]];
    }
    const auto fit = linalg::least_squares(xg, yg);
    const Eigen::RowVectorXd zg_bar = xg.rightCols(k).colwise().mean();
    return mean_at(data.y, idx) +
           (z_bar - zg_bar).dot(fit.coefficients.tail(k));
  };

  AteEstimate out;
  out.kind = EstimatorKind::interact;
  out.contrast = contrast;
  out.point = prediction(idx_a) - prediction(idx_b);

  // SE provenance: the equivalent interacted regression on the contrast
  // groups' rows, with covariates centered at the full-sample mean
  const auto m = static_cast<Eigen::Index>(idx_a.size() + idx_b.size());
  Eigen::MatrixXd x(m, 2 + 2 * k);
  Eigen::VectorXd yr(m);
  Eigen::Index r = 0;
  for (const auto* idx : {&idx_a, &idx_b}) {
    const double t = (idx == &idx_a) ? 1.0 : 0.0;
    for (auto i : *idx) {
      x(r, 0) = 1.0;
      x(r, 1) = t;
      x.row(r).segment(2, k) = data.z.row(i) - z_bar;
      x.row(r).tail(k) = t * (data.z.row(i) - z_bar);
      yr[r] = data.y[i];
      ++r;
    }
  }
  out.design = x;
  out.fit = linalg::least_squares(x, yr);
  out.coef_contrast = Eigen::VectorXd::Zero(x.cols());
  out.coef_contrast[1] = 1.0;
  return out;
}

AteEstimate ate_tyranny(const ObservedData& data, Contrast contrast) {
  check_contrast(data, contrast);
  require_two_groups(data, "tyranny");
  require_members(data, contrast.a);
  require_members(data, contrast.b);
  const Eigen::VectorXd w = minority_weights(data, contrast);

  // fixed dummy orientation: swapping the contrast only flips the sign
  const int first = std::min(contrast.a, contrast.b);
  const double sign = (contrast.a == first) ? 1.0 : -1.0;

  const Eigen::Index n = data.n(), k = data.k();
  Eigen::MatrixXd x(n, 2 + k);
  x.col(0).setOnes();
  for (Eigen::Index i = 0; i < n; ++i)
    x(i, 1) = (data.group[i] == first) ? 1.0 : 0.0;
  if (k > 0) x.rightCols(k) = data.z;

  AteEstimate out;
  out.kind = EstimatorKind::tyranny;
  out.contrast = contrast;
  out.design = x;
  out.fit = linalg::least_squares(x, data.y, w);
  out.point = sign * out.fit.coefficients[1];
  out.coef_contrast = Eigen::VectorXd::Zero(x.cols());
  out.coef_contrast[1] = sign;
  return out;
}

AteEstimate ate_targeted_ancova(const ObservedData& data, Contrast contrast) {
  check_contrast(data, contrast);
  require_two_groups(data, "targeted_ancova");
  const auto idx_a = require_members(data, contrast.a);
  const auto idx_b = require_members(data, contrast.b);
  const Eigen::VectorXd w = minority_weights(data, contrast);

  // stage one: covariate-only WLS; the estimate is the difference in group
  // means of its residuals
  const Eigen::Index n = data.n(), k = data.k();
  Eigen::MatrixXd x1(n, 1 + k);
  x1.col(0).setOnes();
  if (k > 0) x1.rightCols(k) = data.z;
  const auto stage1 = linalg::least_squares(x1, data.y, w);

  AteEstimate out;
  out.kind = EstimatorKind::targeted_ancova;
  out.contrast = contrast;
  out.point =
      mean_at(stage1.residuals, idx_a) - mean_at(stage1.residuals, idx_b);

  // SE provenance: the estimate is the dummy coefficient in the OLS
  // regression of the stage-one residuals on (intercept, dummy)
  const int first = std::min(contrast.a, contrast.b);
  const double sign = (contrast.a == first) ? 1.0 : -1.0;
  Eigen::MatrixXd x2(n, 2);
  x2.col(0).setOnes();
  for (Eigen::Index i = 0; i < n; ++i)
    x2(i, 1) = (data.group[i] == first) ? 1.0 : 0.0;
  out.design = x2;
  out.fit = linalg::least_squares(x2, stage1.residuals);
  out.coef_contrast = Eigen::VectorXd::Zero(2);
  out.coef_contrast[1] = sign;
  return out;
}

AteEstimate estimate(const ObservedData& data, EstimatorKind kind,
                     Contrast contrast) {
  switch (kind) {
    case EstimatorKind::unadjusted: return ate_unadjusted(data, contrast);
    case EstimatorKind::adjusted: return ate_adjusted(data, contrast);
    case EstimatorKind::interact: return ate_interact(data, contrast);
    case EstimatorKind::tyranny: return ate_tyranny(data, contrast);
    case EstimatorKind::targeted_ancova:
      return ate_targeted_ancova(data, contrast);
  }
  fail(ErrorKind::out_of_domain, "unknown estimator kind");
}

}  // namespace randex::estimators
