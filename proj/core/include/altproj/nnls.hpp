#pragma once

#include <Eigen/Dense>

namespace altproj {

struct NnlsOptions {
  /// An inactive column enters when <a_j, r> > tolerance * |a_j| * |b|.
  double tolerance = 1e-12;
  /// Cap on solver iterations; non-positive means 100 * columns.
  int max_iterations = 0;
};

struct NnlsResult {
  Eigen::VectorXd coefficients;
  Eigen::VectorXd fitted;  // columns * coefficients
  int iterations = 0;
};

/// Lawson-Hanson active-set solve of min |A c - b| subject to c >= 0.
///
/// Ties in the entering rule go to the lowest column index, so duplicate or
/// positively dependent columns resolve to the lexicographically first
/// active set. Throws Error(NumericalFailure) when the iteration cap is hit.
NnlsResult solve_nnls(const Eigen::MatrixXd& columns, const Eigen::VectorXd& target,
                      const NnlsOptions& options = {});

}  // namespace altproj
