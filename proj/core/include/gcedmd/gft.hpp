#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "gcedmd/group.hpp"
#include "gcedmd/rng.hpp"

namespace gcedmd {

// Function u: G -> C^(rows x cols). Values are stored as a (|G|, rows*cols)
// matrix; channel (r, c) lives in column r*cols + c, so one channel's values
// over all of G are contiguous in memory.
class GroupFunction {
 public:
  GroupFunction(GroupPtr group, int rows, int cols);
  static GroupFunction random(GroupPtr group, int rows, int cols, Rng& rng);

  const GroupPtr& group() const { return group_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int channels() const { return rows_ * cols_; }
  int order() const { return static_cast<int>(vals_.rows()); }

  std::complex<double>& at(int g, int r, int c = 0) { return vals_(g, r * cols_ + c); }
  std::complex<double> at(int g, int r, int c = 0) const { return vals_(g, r * cols_ + c); }
  Eigen::MatrixXcd matrix_at(int g) const;
  void set_matrix_at(int g, const Eigen::MatrixXcd& m);

  Eigen::MatrixXcd& values() { return vals_; }
  const Eigen::MatrixXcd& values() const { return vals_; }

  double norm_sq() const { return vals_.squaredNorm(); }

 private:
  GroupPtr group_;
  int rows_, cols_;
  Eigen::MatrixXcd vals_;
};

// Block-diagonal Fourier-side representation: one block per irrep. For a
// function with channel shape (rows, cols), block r has shape
// (rows*d_r, cols*d_r); sub-block (i, j) of channel (a, b) sits at
// (a*d_r + i, b*d_r + j). Vectors (cols == 1) give (|S| d x d) blocks,
// kernels (rows == cols == |S|) give (|S| d x |S| d) blocks.
struct FourierBlocks {
  GroupPtr group;
  std::vector<int> degrees;
  std::vector<Eigen::MatrixXcd> blocks;
  int rows = 0, cols = 0;
};
using FourierVector = FourierBlocks;
using FourierKernel = FourierBlocks;

// Forward transform u^(rho) = sum_g u(g) (x) rho(g), per channel. Uses the
// multi-dimensional FFT when the table is in canonical abelian form.
FourierBlocks gft(const GroupFunction& u, const IrrepTable& table);

// Inverse: u(g) = (1/|G|) sum_rho d_rho Tr(rho(g^-1) u^(rho)) per channel.
GroupFunction igft(const FourierBlocks& f, const IrrepTable& table);

// Reversed-argument transform u~(rho) = sum_g u(g) (x) rho(g^-1). Pairs with
// gft under the Parseval bilinear form: sum_g a(g) b(g) =
// (1/|G|) sum_rho d_rho Tr(a~(rho) b^(rho)) for scalar channels.
FourierBlocks gft_reversed(const GroupFunction& u, const IrrepTable& table);

// Per-irrep block product; shapes must be composable (A.cols == u.rows).
FourierBlocks fourier_matmul(const FourierKernel& A, const FourierVector& u);

// (1/|G|) sum_rho d_rho ||block_rho||_F^2; equals sum_g |u(g)|^2 for unitary
// irrep tables (Plancherel).
double fourier_norm_sq(const FourierBlocks& f);

struct PlancherelCheck {
  double time_norm_sq;
  double fourier_norm_sq;
};
PlancherelCheck plancherel_norms(const GroupFunction& u, const IrrepTable& table);

}  // namespace gcedmd
