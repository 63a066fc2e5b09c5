#include "gcedmd/lsq.hpp"

#include "gcedmd/errors.hpp"

namespace gcedmd {

namespace {

template <typename Mat>
Mat solve_impl(const Mat& A, const Mat& B, const LsqOptions& opts, int* rank) {
  require_input(A.cols() == B.cols(), "bad_lsq", "A and B must have the same column count");
  require_input(opts.rcond >= 0.0 && opts.ridge >= 0.0, "bad_lsq",
                "rcond and ridge must be nonnegative");
  Eigen::BDCSVD<Mat> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  const double thresh = opts.rcond * smax;
  Mat BV = B * svd.matrixV();
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    const double s = sv(i);
    if (s > thresh && s > 0.0) {
      BV.col(i) *= s / (s * s + opts.ridge);
      ++r;
    } else {
      BV.col(i).setZero();
    }
  }
  if (rank) *rank = r;
  return BV * svd.matrixU().adjoint();
}

}  // namespace

Eigen::MatrixXcd solve_left_lsq(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B,
                                const LsqOptions& opts, int* rank) {
  return solve_impl(A, B, opts, rank);
}

Eigen::MatrixXd solve_left_lsq(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                               const LsqOptions& opts, int* rank) {
  return solve_impl(A, B, opts, rank);
}

}  // namespace gcedmd
