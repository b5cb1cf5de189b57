#include "randex/variance.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace randex::variance {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;
constexpr double kSqrt2 = 1.4142135623730951;

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

// lower-tail normal CDF, accurate in the tail because erfc stays small there
double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

// Wichura's PPND16 rational approximation to the standard normal quantile;
// relative error around 1e-16 on each of its three branches.
double ppnd16(double p) {
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        q * (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                   6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                 1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
               1.3314166789178437745e2) * r + 3.3871328727963666080e0);
    const double den =
        (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
              3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
            5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
          4.2313330701600911252e1) * r + 1.0);
    return num / den;
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
            3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
          4.63033784615654529590e0) * r + 1.42343711074968357734e0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
          2.05319162663775882187e0) * r + 1.0);
    value = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
          5.46378491116411436990e0) * r + 6.65790464350110377720e0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-11) * r +
              1.84631831751005468180e-6) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
    value = num / den;
  }
  return (q < 0.0) ? -value : value;
}

double student_t_pdf(double t, double df) {
  const double ln = std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) -
                    0.5 * std::log(df * M_PI) -
                    0.5 * (df + 1.0) * std::log1p(t * t / df);
  return std::exp(ln);
}

// (X'X)^{-1} of the scaled design via its column-pivoted QR
Eigen::MatrixXd gram_inverse(const Eigen::MatrixXd& xs) {
  const Eigen::Index n = xs.rows(), p = xs.cols();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
  qr.setThreshold(std::numeric_limits<double>::epsilon() *
                  static_cast<double>(std::max(n, p)));
  qr.compute(xs);
  if (qr.rank() < p)
    fail(ErrorKind::rank_deficient, "design lost rank in covariance step");
  Eigen::MatrixXd rinv = qr.matrixR()
                             .topLeftCorner(p, p)
                             .triangularView<Eigen::Upper>()
                             .solve(Eigen::MatrixXd::Identity(p, p));
  const auto perm = qr.colsPermutation();
  return perm * (rinv * rinv.transpose()) * perm.transpose();
}

double group_sample_variance(const Eigen::VectorXd& y,
                             const std::vector<Eigen::Index>& idx) {
  const auto m = static_cast<double>(idx.size());
  double mean = 0.0;
  for (auto i : idx) mean += y[i];
  mean /= m;
  double ss = 0.0;
  for (auto i : idx) ss += (y[i] - mean) * (y[i] - mean);
  return ss / (m - 1.0);
}

}  // namespace

Eigen::MatrixXd coefficient_covariance(const linalg::FitResult& fit,
                                       const Eigen::MatrixXd& x,
                                       Flavor flavor) {
  if (flavor == Flavor::neyman)
    fail(ErrorKind::out_of_domain,
         "neyman is a two-sample formula, not a coefficient covariance");
  const Eigen::Index n = x.rows(), p = x.cols();
  if (fit.residuals.size() != n || fit.coefficients.size() != p)
    fail(ErrorKind::out_of_domain, "fit does not match the design matrix");
  if (fit.rank < p) fail(ErrorKind::rank_deficient, "fit is rank deficient");

  Eigen::MatrixXd xs = x;
  Eigen::VectorXd es = fit.residuals;
  if (fit.weights) {
    const Eigen::ArrayXd root = fit.weights->array().sqrt();
    xs.array().colwise() *= root;
    es.array() *= root;
  }
  const Eigen::MatrixXd bread = gram_inverse(xs);

  if (flavor == Flavor::classic) {
    if (n <= p)
      fail(ErrorKind::out_of_domain, "classic variance needs n > p");
    return (fit.rss / static_cast<double>(n - p)) * bread;
  }

  Eigen::ArrayXd d = es.array().square();
  if (flavor == Flavor::hc2 || flavor == Flavor::hc3) {
    const Eigen::ArrayXd& h = fit.hat_diagonals.array();
    if ((h > 1.0 - 1e-10).any())
      fail(ErrorKind::leverage_one,
           "a leverage of 1 makes hc2/hc3 inflation undefined");
    if (flavor == Flavor::hc2)
      d /= 1.0 - h;
    else
      d /= (1.0 - h).square();
  }
  Eigen::MatrixXd meat = xs.transpose() * d.matrix().asDiagonal() * xs;
  Eigen::MatrixXd cov = bread * meat * bread;
  if (flavor == Flavor::hc1) {
    if (n <= p) fail(ErrorKind::out_of_domain, "hc1 needs n > p");
    cov *= static_cast<double>(n) / static_cast<double>(n - p);
  }
  return 0.5 * (cov + cov.transpose());
}

double neyman_variance(const estimators::ObservedData& data,
                       estimators::Contrast contrast) {
  const auto idx_a = data.members_of(contrast.a);
  const auto idx_b = data.members_of(contrast.b);
  if (idx_a.size() < 2 || idx_b.size() < 2)
    fail(ErrorKind::group_too_small,
         "neyman variance needs at least 2 members per group");
  return group_sample_variance(data.y, idx_a) / idx_a.size() +
         group_sample_variance(data.y, idx_b) / idx_b.size();
}

double welch_df(double s2a, int na, double s2b, int nb) {
  if (na < 2 || nb < 2)
    fail(ErrorKind::out_of_domain, "welch df needs group sizes >= 2");
  if (s2a < 0.0 || s2b < 0.0)
    fail(ErrorKind::out_of_domain, "negative variance");
  if (s2a + s2b <= 0.0)
    fail(ErrorKind::degenerate_variance, "both group variances are zero");
  const double va = s2a / na, vb = s2b / nb;
  return (va + vb) * (va + vb) /
         (va * va / (na - 1) + vb * vb / (nb - 1));
}

ConfidenceInterval confidence_interval(double point, double se,
                                       CiMethod method, double level,
                                       std::optional<double> df,
                                       Flavor se_flavor) {
  if (!(se >= 0.0)) fail(ErrorKind::out_of_domain, "se must be >= 0");
  if (!(level > 0.0 && level < 1.0))
    fail(ErrorKind::out_of_domain, "level must be in (0,1)");
  double q;
  if (method == CiMethod::welch_t) {
    if (!df) fail(ErrorKind::missing_df, "welch_t interval needs df");
    q = student_t_quantile(0.5 * (1.0 + level), *df);
  } else {
    q = normal_quantile(0.5 * (1.0 + level));
  }
  return {point - q * se, point + q * se, level, method, se_flavor};
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    fail(ErrorKind::out_of_domain, "p must be in (0,1)");
  const bool upper = p > 0.5;
  const double pm = upper ? 1.0 - p : p;
  double x = ppnd16(pm);  // <= 0
  // one Newton step against the erfc-based CDF, taken in the lower tail
  // where both sides are well conditioned
  const double pdf = normal_pdf(x);
  if (pdf > 1e-290) x -= (normal_cdf(x) - pm) / pdf;
  return upper ? -x : x;
}

double regularized_incomplete_beta(double x, double a, double b) {
  if (!(a > 0.0 && b > 0.0))
    fail(ErrorKind::out_of_domain, "beta parameters must be positive");
  if (!(x >= 0.0 && x <= 1.0))
    fail(ErrorKind::out_of_domain, "x must be in [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  if (x > (a + 1.0) / (a + b + 2.0))
    return 1.0 - regularized_incomplete_beta(1.0 - x, b, a);

  const double ln_front = a * std::log(x) + b * std::log1p(-x) -
                          (std::lgamma(a) + std::lgamma(b) -
                           std::lgamma(a + b));
  // modified Lentz evaluation of the standard continued fraction
  constexpr double tiny = 1e-300;
  double c = 1.0;
  double d = 1.0 - (a + b) * x / (a + 1.0);
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double f = d;
  for (int m = 1; m <= 400; ++m) {
    const double m2 = 2.0 * m;
    double num = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
    d = 1.0 + num * d;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    c = 1.0 + num / c;
    if (std::abs(c) < tiny) c = tiny;
    f *= c * d;
    num = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
    d = 1.0 + num * d;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    c = 1.0 + num / c;
    if (std::abs(c) < tiny) c = tiny;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 3e-16) break;
  }
  return std::exp(ln_front) * f / a;
}

double student_t_cdf(double t, double df) {
  if (!(df > 0.0)) fail(ErrorKind::out_of_domain, "df must be positive");
  if (t == 0.0) return 0.5;
  const double x = df / (df + t * t);
  const double tail = 0.5 * regularized_incomplete_beta(x, 0.5 * df, 0.5);
  return t > 0.0 ? 1.0 - tail : tail;
}

double student_t_quantile(double p, double df) {
  if (!(p > 0.0 && p < 1.0))
    fail(ErrorKind::out_of_domain, "p must be in (0,1)");
  if (!(df > 0.0) || !std::isfinite(df))
    fail(ErrorKind::out_of_domain, "df must be positive and finite");
  if (p == 0.5) return 0.0;
  if (p < 0.5) return -student_t_quantile(1.0 - p, df);

  // solve on the upper-tail scale, where the CDF stays well conditioned:
  // find q >= 0 with 0.5 * I_{df/(df+q^2)}(df/2, 1/2) = 1 - p
  const double tail = 1.0 - p;
  auto upper_tail = [df](double t) {
    return 0.5 * regularized_incomplete_beta(df / (df + t * t), 0.5 * df, 0.5);
  };

  double lo = 0.0, hi = 1.0;
  while (upper_tail(hi) > tail && hi < 1e300) {
    lo = hi;
    hi *= 2.0;
  }
  double q = std::min(std::max(normal_quantile(p), lo), hi);
  for (int it = 0; it < 200; ++it) {
    const double err = upper_tail(q) - tail;  // decreasing in q
    if (std::abs(err) <= 1e-13) break;
    if (err > 0.0)
      lo = q;
    else
      hi = q;
    const double pdf = student_t_pdf(q, df);
    double next = (pdf > 1e-290) ? q + err / pdf : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == q) break;
    q = next;
  }
  return q;
}

double ate_standard_error(const estimators::AteEstimate& est,
                          const estimators::ObservedData& data,
                          Flavor flavor) {
  if (flavor == Flavor::neyman) {
    if (est.kind != estimators::EstimatorKind::unadjusted)
      fail(ErrorKind::out_of_domain,
           "the neyman flavor pairs only with the unadjusted estimator");
    return std::sqrt(neyman_variance(data, est.contrast));
  }
  const Eigen::MatrixXd cov =
      coefficient_covariance(est.fit, est.design, flavor);
  const double v = est.coef_contrast.dot(cov * est.coef_contrast);
  return std::sqrt(std::max(v, 0.0));
}

}  // namespace randex::variance
