#pragma once

// Independent reference implementations for tests: a normal-equations
// least-squares solver (vs the QR production path), quadrature- and
// bisection-based distribution functions (vs the closed-form/continued-
// fraction production path), and simple random data generators.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

namespace oracle {

// ---- linear algebra ------------------------------------------------------

// weighted least squares via explicit normal equations and Gauss-Jordan
// elimination with partial pivoting
inline Eigen::VectorXd normal_equations(const Eigen::MatrixXd& x,
                                        const Eigen::VectorXd& y,
                                        const Eigen::VectorXd* w = nullptr) {
  const Eigen::Index n = x.rows(), p = x.cols();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double wi = w ? (*w)[i] : 1.0;
    for (Eigen::Index r = 0; r < p; ++r) {
      for (Eigen::Index c = 0; c < p; ++c) a(r, c) += wi * x(i, r) * x(i, c);
      a(r, p) += wi * x(i, r) * y[i];
    }
  }
  for (Eigen::Index col = 0; col < p; ++col) {
    Eigen::Index pivot = col;
    for (Eigen::Index r = col + 1; r < p; ++r)
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    if (std::abs(a(pivot, col)) < 1e-12)
      throw std::runtime_error("oracle: singular normal equations");
    a.row(col).swap(a.row(pivot));
    a.row(col) /= a(col, col);
    for (Eigen::Index r = 0; r < p; ++r)
      if (r != col) a.row(r) -= a(r, col) * a.row(col);
  }
  return a.col(p);
}

// ---- distributions -------------------------------------------------------

inline double phi_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

inline double normal_quantile_bisect(double p) {
  // work in the lower tail, where phi_cdf keeps full relative accuracy
  // (1 - p is exact for p in [0.5, 1])
  if (p > 0.5) return -normal_quantile_bisect(1.0 - p);
  double lo = -42.0, hi = 42.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (phi_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline double t_pdf(double x, double df) {
  const double ln = std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) -
                    0.5 * std::log(df * 3.14159265358979323846) -
                    0.5 * (df + 1.0) * std::log1p(x * x / df);
  return std::exp(ln);
}

inline double adaptive_simpson(const std::function<double(double)>& f,
                               double a, double b, double fa, double fm,
                               double fb, double whole, double eps,
                               int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * eps)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double eps = 1e-13) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, eps, 48);
}

// Student-t CDF by piecewise quadrature of the density
inline double t_cdf_quadrature(double t, double df) {
  const double at = std::abs(t);
  auto f = [df](double x) { return t_pdf(x, df); };
  double integral = 0.0;
  double lo = 0.0;
  // split into doubling panels so long tails converge
  for (double hi = 1.0; lo < at; hi *= 4.0) {
    const double cap = std::min(hi, at);
    integral += integrate(f, lo, cap);
    lo = cap;
  }
  return t >= 0.0 ? 0.5 + integral : 0.5 - integral;
}

// ---- random data ---------------------------------------------------------

struct TestRng {
  std::mt19937_64 gen;

  explicit TestRng(std::uint64_t seed) : gen(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen);
  }
  double normal(double mean = 0.0, double sd = 1.0) {
    return std::normal_distribution<double>(mean, sd)(gen);
  }
  long integer(long lo, long hi) {  // inclusive
    return std::uniform_int_distribution<long>(lo, hi)(gen);
  }
};

inline Eigen::MatrixXd random_covariates(TestRng& rng, Eigen::Index n,
                                         Eigen::Index k) {
  Eigen::MatrixXd z(n, k);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < k; ++j) z(i, j) = rng.uniform(-2.0, 2.0);
  return z;
}

// outcomes that are nonlinear in z with heterogeneous effects, so no
// estimator is exact and every variance term is nonzero
inline Eigen::VectorXd random_outcome(TestRng& rng, const Eigen::MatrixXd& z,
                                      double curvature) {
  const Eigen::Index n = z.rows();
  Eigen::VectorXd y(n);
  Eigen::VectorXd slope(z.cols());
  for (Eigen::Index j = 0; j < z.cols(); ++j) slope[j] = rng.uniform(-2.0, 2.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    double v = rng.normal();
    v += z.row(i).dot(slope);
    if (z.cols() > 0) v += curvature * z(i, 0) * z(i, 0);
    y[i] = v;
  }
  return y;
}

}  // namespace oracle
