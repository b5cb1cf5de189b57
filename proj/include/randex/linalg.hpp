#pragma once

#include <Eigen/Dense>
#include <optional>

#include "randex/error.hpp"

namespace randex::linalg {

// Output of a (weighted) least-squares fit.
//
// residuals are raw, y_i - x_i beta, for every row including zero-weight
// rows. hat_diagonals are reported in the weighted metric (leverages of the
// sqrt(w)-scaled design), so sum(h_ii) = rank and zero-weight rows get 0.
struct FitResult {
  Eigen::VectorXd coefficients;
  Eigen::VectorXd residuals;
  Eigen::VectorXd hat_diagonals;
  std::optional<Eigen::VectorXd> weights;
  int rank = 0;
  double rss = 0.0;  // sum of w_i * residual_i^2 (w_i = 1 when unweighted)
};

// Minimize sum_i w_i (y_i - x_i beta)^2 by column-pivoted Householder QR of
// the sqrt(w)-scaled design. Rank is detected with tolerance
// eps * max(n, p) * |R_11|; anything short of full column rank throws
// rank_deficient rather than picking a solution.
//
// Throws: rank_deficient, non_finite, out_of_domain (negative weight or
// empty design).
FitResult least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const std::optional<Eigen::VectorXd>& w = {});

// Leverages h_ii of the (weighted) projection, each in [0, 1], summing to p.
// Throws: rank_deficient, non_finite, out_of_domain.
Eigen::VectorXd hat_diagonals(const Eigen::MatrixXd& x,
                              const std::optional<Eigen::VectorXd>& w = {});

}  // namespace randex::linalg
