#pragma once

#include <Eigen/Dense>

namespace conepush {

struct NnlsResult {
  Eigen::VectorXd x;
  /// ||A x - b||
  double residual = 0.0;
};

/// Lawson-Hanson active-set solver for min ||A x - b|| subject to x >= 0.
/// Intended for the small dense systems that arise from cone membership.
NnlsResult nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b);

}  // namespace conepush
