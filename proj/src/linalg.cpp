#include "randex/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace randex::linalg {

namespace {

void check_inputs(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                  const std::optional<Eigen::VectorXd>& w) {
  if (x.cols() < 1 || x.rows() < 1)
    fail(ErrorKind::out_of_domain, "design matrix must be at least 1x1");
  if (y.size() != x.rows())
    fail(ErrorKind::out_of_domain, "y length does not match design rows");
  if (!x.allFinite() || !y.allFinite())
    fail(ErrorKind::non_finite, "design or response contains NaN/Inf");
  if (w) {
    if (w->size() != x.rows())
      fail(ErrorKind::out_of_domain, "weight length does not match design rows");
    if (!w->allFinite())
      fail(ErrorKind::non_finite, "weights contain NaN/Inf");
    if ((w->array() < 0.0).any())
      fail(ErrorKind::out_of_domain, "weights must be nonnegative");
  }
}

// Column-pivoted QR of the sqrt(w)-scaled design, with the rank tolerance
// eps * max(n, p) relative to the largest R diagonal (|R_11| under pivoting).
Eigen::ColPivHouseholderQR<Eigen::MatrixXd> scaled_qr(
    const Eigen::MatrixXd& xs, Eigen::Index n, Eigen::Index p) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
  qr.setThreshold(std::numeric_limits<double>::epsilon() *
                  static_cast<double>(std::max(n, p)));
  qr.compute(xs);
  return qr;
}

// h_ii = || R^{-T} (P^T xs_i) ||^2, the leverage of row i of the scaled
// design. Zero rows (zero weight) come out exactly 0.
Eigen::VectorXd leverages(const Eigen::ColPivHouseholderQR<Eigen::MatrixXd>& qr,
                          const Eigen::MatrixXd& xs) {
  const Eigen::Index p = xs.cols();
  Eigen::MatrixXd permuted = (xs * qr.colsPermutation()).transpose();  // p x n
  Eigen::MatrixXd solved = qr.matrixR()
                               .topLeftCorner(p, p)
                               .triangularView<Eigen::Upper>()
                               .transpose()
                               .solve(permuted);
  Eigen::VectorXd h = solved.colwise().squaredNorm().transpose();
  // clamp FP dust so callers can rely on h in [0, 1]
  return h.array().min(1.0).max(0.0);
}

}  // namespace

FitResult least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const std::optional<Eigen::VectorXd>& w) {
  check_inputs(x, y, w);
  const Eigen::Index n = x.rows(), p = x.cols();

  Eigen::MatrixXd xs = x;
  Eigen::VectorXd ys = y;
  if (w) {
    const Eigen::VectorXd root = w->array().sqrt();
    xs.array().colwise() *= root.array();
    ys.array() *= root.array();
  }

  auto qr = scaled_qr(xs, n, p);
  if (qr.rank() < p)
    fail(ErrorKind::rank_deficient, "design has column rank " +
                                        std::to_string(qr.rank()) + " < " +
                                        std::to_string(p));

  FitResult fit;
  fit.coefficients = qr.solve(ys);
  fit.residuals = y - x * fit.coefficients;
  fit.hat_diagonals = leverages(qr, xs);
  fit.rank = static_cast<int>(qr.rank());
  if (w) {
    fit.weights = *w;
    fit.rss = (w->array() * fit.residuals.array().square()).sum();
  } else {
    fit.rss = fit.residuals.squaredNorm();
  }
  return fit;
}

Eigen::VectorXd hat_diagonals(const Eigen::MatrixXd& x,
                              const std::optional<Eigen::VectorXd>& w) {
  check_inputs(x, Eigen::VectorXd::Zero(x.rows()), w);
  const Eigen::Index n = x.rows(), p = x.cols();

  Eigen::MatrixXd xs = x;
  if (w) xs.array().colwise() *= w->array().sqrt();

  auto qr = scaled_qr(xs, n, p);
  if (qr.rank() < p)
    fail(ErrorKind::rank_deficient, "design has column rank " +
                                        std::to_string(qr.rank()) + " < " +
                                        std::to_string(p));
  return leverages(qr, xs);
}

}  // namespace randex::linalg
