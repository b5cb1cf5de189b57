#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "oracle_helpers.hpp"
#include "randex/error.hpp"
#include "randex/estimators.hpp"
#include "randex/linalg.hpp"
#include "randex/variance.hpp"

using randex::Error;
using randex::ErrorKind;
using namespace randex::estimators;
using namespace randex::variance;

namespace {

template <typename Fn>
void check_throws_kind(Fn&& fn, ErrorKind want) {
  try {
    fn();
    FAIL_CHECK("expected error " << randex::to_string(want)
                                 << " but nothing was thrown");
  } catch (const Error& e) {
    CHECK_MESSAGE(e.kind() == want, "threw " << randex::to_string(e.kind())
                                             << " instead of "
                                             << randex::to_string(want));
  }
}

// groups {0,4} and {1,1}: the classic two-group toy
ObservedData toy_22() {
  Eigen::VectorXd y(4);
  y << 0, 4, 1, 1;
  return ObservedData(y, {0, 0, 1, 1}, Eigen::MatrixXd(), 2);
}

// groups {0,4} and {1,1,1,5}: unbalanced, heteroskedastic
ObservedData toy_24() {
  Eigen::VectorXd y(6);
  y << 0, 4, 1, 1, 1, 5;
  return ObservedData(y, {0, 0, 1, 1, 1, 1}, Eigen::MatrixXd(), 2);
}

constexpr Contrast kAB{0, 1};

// variance of the group-contrast coefficient under the given flavor
double contrast_variance(const AteEstimate& est, Flavor flavor) {
  const Eigen::MatrixXd cov =
      coefficient_covariance(est.fit, est.design, flavor);
  return est.coef_contrast.dot(cov * est.coef_contrast);
}

ObservedData make_data(oracle::TestRng& rng, int n, int k) {
  Eigen::MatrixXd z = oracle::random_covariates(rng, n, k);
  Eigen::VectorXd y = oracle::random_outcome(rng, z, 0.8);
  std::vector<int> group(n);
  for (int i = 0; i < n; ++i) group[i] = i % 2;
  for (int i = 0; i < n; ++i) y[i] += 1.5 * group[i];
  return ObservedData(y, group, z, 2);
}

}  // namespace

TEST_CASE("sandwich variants of the dummy coefficient on hand data") {
  // balanced toy: residuals (-2, 2, 0, 0), leverages all 1/2
  const AteEstimate bal = ate_unadjusted(toy_22(), kAB);
  CHECK(contrast_variance(bal, Flavor::hc0) ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(contrast_variance(bal, Flavor::hc2) ==
        doctest::Approx(4.0).epsilon(1e-12));

  // unbalanced toy: residuals (-2, 2, -1, -1, -1, 3), leverages 1/2, 1/4
  const AteEstimate unb = ate_unadjusted(toy_24(), kAB);
  CHECK(contrast_variance(unb, Flavor::classic) ==
        doctest::Approx(3.75).epsilon(1e-12));
  CHECK(contrast_variance(unb, Flavor::hc0) ==
        doctest::Approx(2.75).epsilon(1e-12));
  CHECK(contrast_variance(unb, Flavor::hc1) ==
        doctest::Approx(4.125).epsilon(1e-12));
  CHECK(contrast_variance(unb, Flavor::hc2) ==
        doctest::Approx(5.0).epsilon(1e-12));
  CHECK(contrast_variance(unb, Flavor::hc3) ==
        doctest::Approx(28.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("an exact fit has zero variance under every flavor") {
  Eigen::MatrixXd x(5, 2);
  x << 1, 0, 1, 1, 1, 2, 1, 3, 1, 4;
  Eigen::VectorXd y = 2.0 * x.col(1).array() - 1.0;
  const auto fit = randex::linalg::least_squares(x, y);
  for (Flavor f : {Flavor::classic, Flavor::hc0, Flavor::hc1, Flavor::hc2,
                   Flavor::hc3}) {
    const Eigen::MatrixXd cov = coefficient_covariance(fit, x, f);
    CHECK(cov.cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("two-sample variance on hand data") {
  CHECK(neyman_variance(toy_22(), kAB) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(neyman_variance(toy_24(), kAB) == doctest::Approx(5.0).epsilon(1e-14));

  Eigen::VectorXd flat(4);
  flat << 3, 3, 7, 7;
  const ObservedData constant(flat, {0, 0, 1, 1}, Eigen::MatrixXd(), 2);
  CHECK(neyman_variance(constant, kAB) == 0.0);

  Eigen::VectorXd tiny(3);
  tiny << 1, 2, 3;
  const ObservedData short_arm(tiny, {0, 0, 1}, Eigen::MatrixXd(), 2);
  check_throws_kind([&] { neyman_variance(short_arm, kAB); },
                    ErrorKind::group_too_small);
}

TEST_CASE("two-sample formula is the hc2 dummy variance, identically") {
  oracle::TestRng rng(160914);
  for (int trial = 0; trial < 50; ++trial) {
    const int na = int(rng.integer(2, 9)), nb = int(rng.integer(2, 9));
    Eigen::VectorXd y(na + nb);
    std::vector<int> group(na + nb);
    for (int i = 0; i < na + nb; ++i) {
      group[i] = i < na ? 0 : 1;
      y[i] = rng.normal(group[i] * 2.0, 1.0 + group[i]);
    }
    const ObservedData data(y, group, Eigen::MatrixXd(), 2);
    const AteEstimate est = ate_unadjusted(data, kAB);
    const double hc2 = contrast_variance(est, Flavor::hc2);
    const double ney = neyman_variance(data, kAB);
    CHECK(hc2 == doctest::Approx(ney).epsilon(1e-12));
  }
}

TEST_CASE("flavor ordering under positive leverages") {
  oracle::TestRng rng(5551212);
  for (int trial = 0; trial < 25; ++trial) {
    const ObservedData data = make_data(rng, 14 + 2 * trial % 8, 2);
    const AteEstimate est = ate_adjusted(data, kAB);
    const Eigen::VectorXd d0 =
        coefficient_covariance(est.fit, est.design, Flavor::hc0).diagonal();
    const Eigen::VectorXd d1 =
        coefficient_covariance(est.fit, est.design, Flavor::hc1).diagonal();
    const Eigen::VectorXd d2 =
        coefficient_covariance(est.fit, est.design, Flavor::hc2).diagonal();
    const Eigen::VectorXd d3 =
        coefficient_covariance(est.fit, est.design, Flavor::hc3).diagonal();
    for (int j = 0; j < d0.size(); ++j) {
      CHECK(d0[j] <= d1[j] + 1e-12);
      CHECK(d0[j] <= d2[j] + 1e-12);
      CHECK(d2[j] <= d3[j] + 1e-12);
    }
  }
}

TEST_CASE("covariance matrices are symmetric and nonnegative definite") {
  oracle::TestRng rng(24601);
  const ObservedData data = make_data(rng, 18, 2);
  const AteEstimate est = ate_adjusted(data, kAB);
  for (Flavor f : {Flavor::classic, Flavor::hc0, Flavor::hc1, Flavor::hc2,
                   Flavor::hc3}) {
    const Eigen::MatrixXd cov = coefficient_covariance(est.fit, est.design, f);
    CHECK((cov - cov.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10 * (1.0 + cov.norm()));
  }
}

TEST_CASE("rescaling the outcome rescales variances quadratically") {
  oracle::TestRng rng(7207);
  const ObservedData data = make_data(rng, 16, 2);
  const double c = -3.0;
  const ObservedData scaled(c * data.y.array(), data.group, data.z, 2);
  const AteEstimate base = ate_adjusted(data, kAB);
  const AteEstimate big = ate_adjusted(scaled, kAB);
  for (Flavor f : {Flavor::classic, Flavor::hc0, Flavor::hc1, Flavor::hc2,
                   Flavor::hc3}) {
    CHECK(contrast_variance(big, f) ==
          doctest::Approx(c * c * contrast_variance(base, f)).epsilon(1e-10));
  }
  CHECK(neyman_variance(scaled, kAB) ==
        doctest::Approx(c * c * neyman_variance(data, kAB)).epsilon(1e-12));
}

TEST_CASE("weighted fits keep the sandwich identities") {
  // a WLS fit with unit weights must reproduce the OLS covariance exactly
  oracle::TestRng rng(101);
  const ObservedData data = make_data(rng, 12, 1);
  const AteEstimate est = ate_adjusted(data, kAB);
  const auto weighted = randex::linalg::least_squares(
      est.design, data.y, Eigen::VectorXd::Ones(12));
  for (Flavor f : {Flavor::classic, Flavor::hc0, Flavor::hc2, Flavor::hc3}) {
    const Eigen::MatrixXd a = coefficient_covariance(est.fit, est.design, f);
    const Eigen::MatrixXd b = coefficient_covariance(weighted, est.design, f);
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + a.norm()));
  }
}

TEST_CASE("covariance rejects mismatched or unsupported requests") {
  const AteEstimate est = ate_unadjusted(toy_22(), kAB);
  check_throws_kind(
      [&] { coefficient_covariance(est.fit, est.design, Flavor::neyman); },
      ErrorKind::out_of_domain);

  Eigen::MatrixXd wrong(3, 2);
  wrong << 1, 0, 1, 1, 1, 2;
  check_throws_kind(
      [&] { coefficient_covariance(est.fit, wrong, Flavor::hc0); },
      ErrorKind::out_of_domain);

  // a saturated fit has unit leverages: hc2/hc3 cannot inflate, and the
  // classic estimate has no residual degrees of freedom
  Eigen::MatrixXd square(2, 2);
  square << 1, 0, 1, 1;
  Eigen::VectorXd y2(2);
  y2 << 3, 5;
  const auto sat = randex::linalg::least_squares(square, y2);
  check_throws_kind([&] { coefficient_covariance(sat, square, Flavor::hc2); },
                    ErrorKind::leverage_one);
  check_throws_kind([&] { coefficient_covariance(sat, square, Flavor::hc3); },
                    ErrorKind::leverage_one);
  check_throws_kind(
      [&] { coefficient_covariance(sat, square, Flavor::classic); },
      ErrorKind::out_of_domain);
}

TEST_CASE("approximate degrees of freedom for unequal variances") {
  // symmetric case: df = 2(m-1)
  CHECK(welch_df(3.0, 7, 3.0, 7) == doctest::Approx(12.0).epsilon(1e-12));
  // hand evaluation: (8/2)^2 / ((8/2)^2 / 1) = 1
  CHECK(welch_df(8.0, 2, 0.0, 2) == doctest::Approx(1.0).epsilon(1e-12));
  // one-sample limit
  CHECK(welch_df(8.0, 5, 0.0, 7) == doctest::Approx(4.0).epsilon(1e-12));

  check_throws_kind([&] { welch_df(1.0, 1, 1.0, 5); },
                    ErrorKind::out_of_domain);
  check_throws_kind([&] { welch_df(-1.0, 3, 1.0, 5); },
                    ErrorKind::out_of_domain);
  check_throws_kind([&] { welch_df(0.0, 3, 0.0, 5); },
                    ErrorKind::degenerate_variance);
}

TEST_CASE("normal quantile against a bisection oracle") {
  for (double p : {1e-12, 1e-9, 1e-6, 1e-3, 0.025, 0.2, 0.5, 0.8, 0.975,
                   0.999, 1.0 - 1e-6, 1.0 - 1e-9}) {
    const double got = normal_quantile(p);
    const double want = oracle::normal_quantile_bisect(p);
    CHECK_MESSAGE(std::abs(got - want) <= 1e-9,
                  "p=" << p << " got " << got << " want " << want);
  }
  CHECK(normal_quantile(0.5) == 0.0);
  CHECK(normal_quantile(0.975) == doctest::Approx(1.95996).epsilon(1e-4));
  // symmetry at exactly representable tail pairs
  CHECK(normal_quantile(0.25) == -normal_quantile(0.75));
  CHECK(normal_quantile(0.0625) == -normal_quantile(0.9375));

  double prev = -1e300;
  for (double p = 0.02; p < 1.0 - 1e-9; p += 0.02) {
    const double q = normal_quantile(p);
    CHECK(q > prev);
    prev = q;
  }

  check_throws_kind([&] { normal_quantile(0.0); }, ErrorKind::out_of_domain);
  check_throws_kind([&] { normal_quantile(1.0); }, ErrorKind::out_of_domain);
  check_throws_kind([&] { normal_quantile(-0.2); }, ErrorKind::out_of_domain);
}

TEST_CASE("incomplete beta obeys its closed forms") {
  for (double x : {0.0, 0.1, 0.37, 0.5, 0.82, 1.0}) {
    // I_x(1,1) is the identity
    CHECK(regularized_incomplete_beta(x, 1.0, 1.0) ==
          doctest::Approx(x).epsilon(1e-13));
    // I_x(1/2,1/2) = (2/pi) asin(sqrt(x))
    const double asin_form =
        (2.0 / 3.14159265358979323846) * std::asin(std::sqrt(x));
    CHECK(regularized_incomplete_beta(x, 0.5, 0.5) ==
          doctest::Approx(asin_form).epsilon(1e-12));
  }
  // reflection identity on an asymmetric case
  oracle::TestRng rng(8088);
  for (int i = 0; i < 20; ++i) {
    const double x = rng.uniform(0.01, 0.99);
    const double a = rng.uniform(0.3, 5.0), b = rng.uniform(0.3, 5.0);
    CHECK(regularized_incomplete_beta(x, a, b) ==
          doctest::Approx(1.0 - regularized_incomplete_beta(1.0 - x, b, a))
              .epsilon(1e-12));
  }
  // against direct quadrature of the density for a=2.5, b=3.5
  const double log_beta =
      std::lgamma(2.5) + std::lgamma(3.5) - std::lgamma(6.0);
  auto density = [&](double t) {
    return std::exp(1.5 * std::log(t) + 2.5 * std::log1p(-t) - log_beta);
  };
  for (double x : {0.05, 0.2, 0.5, 0.85}) {
    const double want = oracle::integrate(density, 0.0, x, 1e-13);
    CHECK(regularized_incomplete_beta(x, 2.5, 3.5) ==
          doctest::Approx(want).epsilon(1e-10));
  }

  check_throws_kind([&] { regularized_incomplete_beta(0.5, 0.0, 1.0); },
                    ErrorKind::out_of_domain);
  check_throws_kind([&] { regularized_incomplete_beta(1.5, 1.0, 1.0); },
                    ErrorKind::out_of_domain);
}

TEST_CASE("t quantile inverts the CDF to high accuracy") {
  CHECK(std::abs(student_t_quantile(0.5, 3.0)) < 1e-12);
  CHECK(student_t_quantile(0.975, 1.0) ==
        doctest::Approx(12.7062).epsilon(1e-3 / 12.7062));
  CHECK(student_t_quantile(0.975, 1e6) ==
        doctest::Approx(1.95996).epsilon(1e-4));

  for (double df : {1.0, 2.0, 3.5, 10.0, 30.0, 120.0, 1e5}) {
    for (double p : {0.001, 0.025, 0.1, 0.6, 0.9, 0.975, 0.999}) {
      const double q = student_t_quantile(p, df);
      // production-path consistency
      CHECK(std::abs(student_t_cdf(q, df) - p) <= 1e-10);
      // independent quadrature of the density
      CHECK_MESSAGE(std::abs(oracle::t_cdf_quadrature(q, df) - p) <= 1e-9,
                    "df=" << df << " p=" << p << " q=" << q);
    }
  }

  // symmetry at exactly representable tail pairs
  CHECK(student_t_quantile(0.25, 7.0) == -student_t_quantile(0.75, 7.0));
  CHECK(student_t_quantile(0.125, 2.0) == -student_t_quantile(0.875, 2.0));

  check_throws_kind([&] { student_t_quantile(0.0, 3.0); },
                    ErrorKind::out_of_domain);
  check_throws_kind([&] { student_t_quantile(0.4, 0.0); },
                    ErrorKind::out_of_domain);
  check_throws_kind([&] { student_t_cdf(1.0, -1.0); },
                    ErrorKind::out_of_domain);
}

TEST_CASE("interval construction around a point") {
  const ConfidenceInterval ci =
      confidence_interval(0.0, 1.0, CiMethod::normal, 0.95);
  CHECK(ci.lower == doctest::Approx(-1.95996).epsilon(1e-4));
  CHECK(ci.upper == doctest::Approx(1.95996).epsilon(1e-4));
  CHECK(ci.level == 0.95);
  CHECK(ci.method == CiMethod::normal);

  const ConfidenceInterval point =
      confidence_interval(3.25, 0.0, CiMethod::normal, 0.9);
  CHECK(point.lower == 3.25);
  CHECK(point.upper == 3.25);

  const ConfidenceInterval welch =
      confidence_interval(0.0, 1.0, CiMethod::welch_t, 0.95, 1.0);
  CHECK(welch.upper == doctest::Approx(12.7062).epsilon(1e-3 / 12.7062));
  CHECK(welch.lower == doctest::Approx(-12.7062).epsilon(1e-3 / 12.7062));

  // width is 2 q se and the interval brackets the point
  const double q = normal_quantile(0.975);
  const ConfidenceInterval off =
      confidence_interval(-7.5, 2.0, CiMethod::normal, 0.95);
  CHECK(off.upper - off.lower == doctest::Approx(2.0 * q * 2.0).epsilon(1e-12));
  CHECK(off.lower <= -7.5);
  CHECK(off.upper >= -7.5);

  check_throws_kind([&] { confidence_interval(0.0, 1.0, CiMethod::welch_t,
                                              0.95); },
                    ErrorKind::missing_df);
  check_throws_kind([&] { confidence_interval(0.0, 1.0, CiMethod::normal,
                                              1.0); },
                    ErrorKind::out_of_domain);
  check_throws_kind([&] { confidence_interval(0.0, -1.0, CiMethod::normal,
                                              0.95); },
                    ErrorKind::out_of_domain);
}

TEST_CASE("standard errors route through each estimator's own fit") {
  const ObservedData data = toy_22();
  const AteEstimate est = ate_unadjusted(data, kAB);
  CHECK(ate_standard_error(est, data, Flavor::hc2) ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(ate_standard_error(est, data, Flavor::neyman) ==
        doctest::Approx(2.0).epsilon(1e-12));

  oracle::TestRng rng(90125);
  const ObservedData rnd = make_data(rng, 16, 2);
  for (EstimatorKind kind :
       {EstimatorKind::unadjusted, EstimatorKind::adjusted,
        EstimatorKind::interact, EstimatorKind::tyranny,
        EstimatorKind::targeted_ancova}) {
    const AteEstimate e = estimate(rnd, kind, kAB);
    for (Flavor f : {Flavor::classic, Flavor::hc0, Flavor::hc1, Flavor::hc2,
                     Flavor::hc3}) {
      CHECK(ate_standard_error(e, rnd, f) ==
            doctest::Approx(std::sqrt(contrast_variance(e, f)))
                .epsilon(1e-12));
    }
  }

  // the two-sample flavor is defined only for the plain mean difference
  const AteEstimate adj = ate_adjusted(rnd, kAB);
  check_throws_kind([&] { ate_standard_error(adj, rnd, Flavor::neyman); },
                    ErrorKind::out_of_domain);
}
