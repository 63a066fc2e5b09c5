#pragma once

#include <Eigen/Dense>

namespace gcedmd {

struct LsqOptions {
  double rcond = 1e-10;  // singular values below rcond * sigma_max are dropped
  double ridge = 0.0;    // Tikhonov weight on ||X||_F^2
};

// Minimum-norm solution of min_X ||X A - B||_F (+ ridge ||X||_F^2) via SVD:
// X = B V f(S) U^H with f(s) = s / (s^2 + ridge), truncated at rcond.
// B.cols() must equal A.cols(); the result is B.rows() x A.rows().
Eigen::MatrixXcd solve_left_lsq(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B,
                                const LsqOptions& opts = {}, int* rank = nullptr);
Eigen::MatrixXd solve_left_lsq(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                               const LsqOptions& opts = {}, int* rank = nullptr);

}  // namespace gcedmd
