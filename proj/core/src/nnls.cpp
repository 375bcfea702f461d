#include "altproj/nnls.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "altproj/error.hpp"

namespace altproj {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd solve_passive(const MatrixXd& columns, const std::vector<Index>& passive,
                       const VectorXd& target) {
  MatrixXd sub(columns.rows(), static_cast<Index>(passive.size()));
  for (std::size_t k = 0; k < passive.size(); ++k) {
    sub.col(static_cast<Index>(k)) = columns.col(passive[k]);
  }
  return sub.colPivHouseholderQr().solve(target);
}

}  // namespace

NnlsResult solve_nnls(const MatrixXd& columns, const VectorXd& target,
                      const NnlsOptions& options) {
  if (columns.rows() != target.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "nnls: matrix has " + std::to_string(columns.rows()) + " rows, target has " +
                    std::to_string(target.size()));
  }
  const Index m = columns.cols();
  NnlsResult result{VectorXd::Zero(m), VectorXd::Zero(columns.rows()), 0};
  const double scale = target.norm();
  if (m == 0 || scale == 0.0) return result;

  const int cap = options.max_iterations > 0 ? options.max_iterations
                                             : static_cast<int>(100 * m);
  const VectorXd col_norms = columns.colwise().norm().transpose();

  VectorXd& c = result.coefficients;
  std::vector<char> is_passive(static_cast<std::size_t>(m), 0);
  // Columns whose entry produced a non-positive coefficient; they are skipped
  // until the iterate changes, which breaks rounding-induced cycles.
  std::vector<char> blocked(static_cast<std::size_t>(m), 0);

  VectorXd gradient = columns.transpose() * (target - columns * c);

  auto fail = [&] {
    throw Error(ErrorCode::NumericalFailure,
                "nnls did not converge within " + std::to_string(cap) + " iterations");
  };

  while (true) {
    Index entering = -1;
    double best = 0.0;
    for (Index j = 0; j < m; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      if (is_passive[uj] || blocked[uj]) continue;
      const double threshold = options.tolerance * col_norms[j] * scale;
      if (gradient[j] > threshold && gradient[j] > best) {
        best = gradient[j];
        entering = j;
      }
    }
    if (entering < 0) break;
    if (++result.iterations > cap) fail();

    is_passive[static_cast<std::size_t>(entering)] = 1;
    bool first_pass = true;
    bool moved = false;
    while (true) {
      std::vector<Index> passive;
      for (Index j = 0; j < m; ++j) {
        if (is_passive[static_cast<std::size_t>(j)]) passive.push_back(j);
      }
      const VectorXd z = solve_passive(columns, passive, target);

      bool feasible = true;
      Index entering_pos = -1;
      for (std::size_t k = 0; k < passive.size(); ++k) {
        if (passive[k] == entering) entering_pos = static_cast<Index>(k);
        if (!(z[static_cast<Index>(k)] > 0.0)) feasible = false;
      }
      if (feasible) {
        for (std::size_t k = 0; k < passive.size(); ++k) c[passive[k]] = z[static_cast<Index>(k)];
        moved = true;
        break;
      }
      if (first_pass && entering_pos >= 0 && !(z[entering_pos] > 0.0)) {
        is_passive[static_cast<std::size_t>(entering)] = 0;
        blocked[static_cast<std::size_t>(entering)] = 1;
        break;
      }
      first_pass = false;

      double alpha = 1.0;
      for (std::size_t k = 0; k < passive.size(); ++k) {
        const double zk = z[static_cast<Index>(k)];
        const double ck = c[passive[k]];
        if (!(zk > 0.0)) {
          const double denom = ck - zk;
          const double ratio = denom > 0.0 ? ck / denom : 0.0;
          if (ratio < alpha) alpha = ratio;
        }
      }
      for (std::size_t k = 0; k < passive.size(); ++k) {
        const Index j = passive[k];
        c[j] += alpha * (z[static_cast<Index>(k)] - c[j]);
        if (!(c[j] > 0.0) || (!(z[static_cast<Index>(k)] > 0.0) &&
                              c[j] <= 1e-15 * (1.0 + std::abs(z[static_cast<Index>(k)])))) {
          c[j] = 0.0;
          is_passive[static_cast<std::size_t>(j)] = 0;
        }
      }
      moved = true;
      if (++result.iterations > cap) fail();
    }

    if (moved) std::fill(blocked.begin(), blocked.end(), 0);
    gradient = columns.transpose() * (target - columns * c);
  }

  result.fitted = columns * c;
  return result;
}

}  // namespace altproj
