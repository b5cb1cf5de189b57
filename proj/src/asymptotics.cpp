#include "randex/asymptotics.hpp"

#include <cmath>

#include "randex/linalg.hpp"

namespace randex::asymptotics {

namespace {

void check_p(double p_a) {
  if (!(p_a > 0.0 && p_a < 1.0))
    fail(ErrorKind::out_of_domain, "p_a must be in (0,1)");
}

// OLS slopes of y on (1, Z) over the whole population
Eigen::VectorXd pls_slopes(const Eigen::MatrixXd& z, const Eigen::VectorXd& y) {
  const Eigen::Index n = z.rows(), k = z.cols();
  if (k == 0) return Eigen::VectorXd(0);
  Eigen::MatrixXd x(n, k + 1);
  x.col(0).setOnes();
  x.rightCols(k) = z;
  return linalg::least_squares(x, y).coefficients.tail(k);
}

Eigen::VectorXd centered(const Eigen::VectorXd& v) {
  return v.array() - v.mean();
}

// divisor-n population variance and covariance of already-centered vectors
double var_n(const Eigen::VectorXd& c) {
  return c.squaredNorm() / static_cast<double>(c.size());
}

double cov_n(const Eigen::VectorXd& c1, const Eigen::VectorXd& c2) {
  return c1.dot(c2) / static_cast<double>(c1.size());
}

// ((1-p)/p) s2_u + (p/(1-p)) s2_v + 2 cov(u,v), inputs centered
double limit_variance(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                      double p) {
  return (1.0 - p) / p * var_n(u) + p / (1.0 - p) * var_n(v) +
         2.0 * cov_n(u, v);
}

double require_z_variance(const Population& pop) {
  if (pop.k() != 1)
    fail(ErrorKind::multi_covariate_unsupported,
         "bias leading terms are defined for a single covariate");
  const Eigen::VectorXd zc = centered(pop.z.col(0));
  const double s2 = var_n(zc);
  if (s2 <= 0.0)
    fail(ErrorKind::degenerate_auxiliary, "covariate is constant");
  return s2;
}

}  // namespace

Population::Population(Eigen::VectorXd a_in, Eigen::VectorXd b_in,
                       Eigen::MatrixXd z_in)
    : a(std::move(a_in)), b(std::move(b_in)), z(std::move(z_in)) {
  const Eigen::Index count = a.size();
  if (count < 2)
    fail(ErrorKind::empty_sample, "population needs at least 2 subjects");
  if (b.size() != count)
    fail(ErrorKind::invalid_design, "a and b lengths differ");
  if (z.size() == 0) z.resize(count, 0);
  if (z.rows() != count)
    fail(ErrorKind::invalid_design, "covariate rows do not match outcomes");
  if (!a.allFinite() || !b.allFinite() || !z.allFinite())
    fail(ErrorKind::non_finite, "population values must be finite");
}

PlsSummary pls_summary(const Population& pop, double p_a) {
  check_p(p_a);
  PlsSummary s;
  s.qa = pls_slopes(pop.z, pop.a);
  s.qb = pls_slopes(pop.z, pop.b);
  s.q = p_a * s.qa + (1.0 - p_a) * s.qb;
  s.q_e = (1.0 - p_a) * s.qa + p_a * s.qb;
  s.q_diff = s.qa - s.qb;
  s.p_a = p_a;
  return s;
}

PredictionErrors prediction_errors(const Population& pop,
                                   const PlsSummary& pls) {
  const Eigen::MatrixXd zc = pop.z.rowwise() - pop.z.colwise().mean();
  const Eigen::VectorXd ac = centered(pop.a);
  const Eigen::VectorXd bc = centered(pop.b);
  PredictionErrors e;
  e.a_star = ac - zc * pls.qa;
  e.b_star = bc - zc * pls.qb;
  e.a_dstar = ac - zc * pls.q;
  e.b_dstar = bc - zc * pls.q;
  return e;
}

double asym_var_unadjusted(const Population& pop, double p_a) {
  check_p(p_a);
  return limit_variance(centered(pop.a), centered(pop.b), p_a);
}

double asym_var_adjusted(const Population& pop, double p_a) {
  const auto e = prediction_errors(pop, pls_summary(pop, p_a));
  return limit_variance(e.a_dstar, e.b_dstar, p_a);
}

double asym_var_interact(const Population& pop, double p_a) {
  const auto e = prediction_errors(pop, pls_summary(pop, p_a));
  return limit_variance(e.a_star, e.b_star, p_a);
}

SandwichLimits sandwich_limits(const Population& pop, double p_a) {
  const auto e = prediction_errors(pop, pls_summary(pop, p_a));
  SandwichLimits lim;
  lim.adjusted = var_n(e.a_dstar) / p_a + var_n(e.b_dstar) / (1.0 - p_a);
  lim.interact = var_n(e.a_star) / p_a + var_n(e.b_star) / (1.0 - p_a);
  return lim;
}

PrecisionGaps precision_gaps(const Population& pop, double p_a) {
  const auto pls = pls_summary(pop, p_a);
  const Eigen::MatrixXd zc = pop.z.rowwise() - pop.z.colwise().mean();
  PrecisionGaps g;
  const double denom = p_a * (1.0 - p_a);
  g.unadjusted_minus_interact = var_n(zc * pls.q_e) / denom;
  g.adjusted_minus_interact =
      (2.0 * p_a - 1.0) * (2.0 * p_a - 1.0) * var_n(zc * pls.q_diff) / denom;
  return g;
}

double bias_leading_adjusted(const Population& pop) {
  const double s2z = require_z_variance(pop);
  const auto n = static_cast<double>(pop.n());
  const Eigen::ArrayXd zc2 =
      centered(pop.z.col(0)).array().square();
  const Eigen::ArrayXd effect = (pop.a - pop.b).array() - pop.ate();
  const double lim = (effect * zc2).sum() / n;
  return -(1.0 / n) * lim / s2z;
}

double bias_leading_interact(const Population& pop, double p_a) {
  check_p(p_a);
  const double s2z = require_z_variance(pop);
  const auto n = static_cast<double>(pop.n());
  const double n_a = p_a * n;
  const auto e = prediction_errors(pop, pls_summary(pop, p_a));
  const Eigen::ArrayXd zc2 = centered(pop.z.col(0)).array().square();
  const double lim_a = (e.a_star.array() * zc2).sum() / n;
  const double lim_b = (e.b_star.array() * zc2).sum() / n;
  return -((1.0 / n_a - 1.0 / n) * lim_a -
           (1.0 / (n - n_a) - 1.0 / n) * lim_b) /
         s2z;
}

BiasEstimates bias_estimate_from_sample(const estimators::ObservedData& data) {
  if (data.n_groups != 2)
    fail(ErrorKind::invalid_design,
         "bias estimation needs exactly two groups");
  if (data.k() != 1)
    fail(ErrorKind::multi_covariate_unsupported,
         "bias estimation is defined for a single covariate");
  const auto idx_a = data.members_of(0);
  const auto idx_b = data.members_of(1);
  if (idx_a.size() < 3 || idx_b.size() < 3)
    fail(ErrorKind::group_too_small,
         "bias estimation needs at least 3 members per group");

  const auto n = static_cast<double>(data.n());
  const Eigen::VectorXd z = data.z.col(0);
  const double zbar = z.mean();
  const Eigen::ArrayXd zc2 = (z.array() - zbar).square();
  const double s2z = (z.array() - zbar).square().sum() / (n - 1.0);
  if (s2z <= 0.0)
    fail(ErrorKind::degenerate_auxiliary, "covariate is constant");

  // sample covariance (divisor m-1) of u with v over the given rows
  auto group_cov = [](const Eigen::VectorXd& u, const Eigen::ArrayXd& v,
                      const std::vector<Eigen::Index>& idx) {
    const auto m = static_cast<double>(idx.size());
    double mu = 0.0, mv = 0.0;
    for (auto i : idx) {
      mu += u[i];
      mv += v[i];
    }
    mu /= m;
    mv /= m;
    double s = 0.0;
    for (auto i : idx) s += (u[i] - mu) * (v[i] - mv);
    return s / (m - 1.0);
  };

  // within-group OLS residuals of y on (1, z), standing in for the
  // population prediction errors
  auto group_residuals = [&](const std::vector<Eigen::Index>& idx) {
    const auto m = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd x(m, 2);
    Eigen::VectorXd y(m);
    for (Eigen::Index r = 0; r < m; ++r) {
      x(r, 0) = 1.0;
      x(r, 1) = z[idx[r]];
      y[r] = data.y[idx[r]];
    }
    Eigen::VectorXd res = linalg::least_squares(x, y).residuals;
    Eigen::VectorXd full = Eigen::VectorXd::Zero(data.n());
    for (Eigen::Index r = 0; r < m; ++r) full[idx[r]] = res[r];
    return full;
  };

  BiasEstimates out;
  const double cov_ya = group_cov(data.y, zc2, idx_a);
  const double cov_yb = group_cov(data.y, zc2, idx_b);
  out.adjusted = -(1.0 / n) * (cov_ya - cov_yb) / s2z;

  const double na = static_cast<double>(idx_a.size());
  const double nb = static_cast<double>(idx_b.size());
  const Eigen::VectorXd res_a = group_residuals(idx_a);
  const Eigen::VectorXd res_b = group_residuals(idx_b);
  const double cov_ra = group_cov(res_a, zc2, idx_a);
  const double cov_rb = group_cov(res_b, zc2, idx_b);
  out.interact =
      -((1.0 / na - 1.0 / n) * cov_ra - (1.0 / nb - 1.0 / n) * cov_rb) / s2z;
  return out;
}

AsymptoticReport asymptotic_report(const Population& pop, double p_a) {
  check_p(p_a);
  AsymptoticReport rep;
  rep.p_a = p_a;
  rep.n = pop.n();
  const double n = static_cast<double>(pop.n());
  const double v_unadj = asym_var_unadjusted(pop, p_a);
  const double v_adj = asym_var_adjusted(pop, p_a);
  const double v_int = asym_var_interact(pop, p_a);
  using estimators::EstimatorKind;
  auto entry = [n](EstimatorKind kind, double v) {
    return AsymptoticEntry{kind, v, std::sqrt(std::max(v, 0.0) / n)};
  };
  rep.entries = {entry(EstimatorKind::unadjusted, v_unadj),
                 entry(EstimatorKind::adjusted, v_adj),
                 entry(EstimatorKind::interact, v_int),
                 entry(EstimatorKind::tyranny, v_int)};
  rep.sandwich = sandwich_limits(pop, p_a);
  rep.gaps = precision_gaps(pop, p_a);
  if (pop.k() == 1) {
    rep.bias_adjusted = bias_leading_adjusted(pop);
    rep.bias_interact = bias_leading_interact(pop, p_a);
  }
  return rep;
}

}  // namespace randex::asymptotics
