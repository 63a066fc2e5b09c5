#include "gcedmd/gft.hpp"

#include "gcedmd/errors.hpp"
#include "gcedmd/fft.hpp"

namespace gcedmd {

GroupFunction::GroupFunction(GroupPtr group, int rows, int cols)
    : group_(std::move(group)), rows_(rows), cols_(cols) {
  require_input(static_cast<bool>(group_) && rows_ >= 1 && cols_ >= 1, "bad_group_function",
                "group function needs a group and a positive channel shape");
  vals_ = Eigen::MatrixXcd::Zero(group_->order(), rows_ * cols_);
}

GroupFunction GroupFunction::random(GroupPtr group, int rows, int cols, Rng& rng) {
  GroupFunction u(std::move(group), rows, cols);
  for (Eigen::Index c = 0; c < u.vals_.cols(); ++c)
    for (Eigen::Index g = 0; g < u.vals_.rows(); ++g) u.vals_(g, c) = rng.cnormal();
  return u;
}

Eigen::MatrixXcd GroupFunction::matrix_at(int g) const {
  Eigen::MatrixXcd m(rows_, cols_);
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c) m(r, c) = vals_(g, r * cols_ + c);
  return m;
}

void GroupFunction::set_matrix_at(int g, const Eigen::MatrixXcd& m) {
  require_input(m.rows() == rows_ && m.cols() == cols_, "bad_group_function",
                "matrix shape does not match channel shape");
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c) vals_(g, r * cols_ + c) = m(r, c);
}

namespace {

FourierBlocks make_blocks(const GroupPtr& group, const IrrepTable& table, int rows, int cols) {
  FourierBlocks f;
  f.group = group;
  f.degrees = table.degrees();
  f.rows = rows;
  f.cols = cols;
  f.blocks.reserve(f.degrees.size());
  for (int d : f.degrees)
    f.blocks.emplace_back(Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(rows) * d,
                                                 static_cast<Eigen::Index>(cols) * d));
  return f;
}

void check_match(const GroupFunction& u, const IrrepTable& table) {
  require_input(u.group()->order() == table.group()->order(), "bad_group_function",
                "group function and irrep table refer to different groups");
}

// Shared abelian path: sign -1 gives gft, +1 gives gft_reversed.
FourierBlocks abelian_transform(const GroupFunction& u, const IrrepTable& table, int sign) {
  const int n = u.order();
  const int ch = u.channels();
  Eigen::MatrixXcd work(n, ch);
  dft(u.group()->cyclic_structure(), ch, u.values().data(), work.data(), sign);
  FourierBlocks f = make_blocks(u.group(), table, u.rows(), u.cols());
  for (int k = 0; k < n; ++k) {
    Eigen::MatrixXcd& b = f.blocks[k];
    for (int a = 0; a < u.rows(); ++a)
      for (int c = 0; c < u.cols(); ++c) b(a, c) = work(k, a * u.cols() + c);
  }
  return f;
}

FourierBlocks naive_transform(const GroupFunction& u, const IrrepTable& table, bool reversed) {
  const int n = u.order();
  FourierBlocks f = make_blocks(u.group(), table, u.rows(), u.cols());
  for (int r = 0; r < table.count(); ++r) {
    const int d = table.degree(r);
    Eigen::MatrixXcd& b = f.blocks[r];
    for (int g = 0; g < n; ++g) {
      const Eigen::MatrixXcd m =
          table.matrix(r, reversed ? u.group()->inverse(g) : g);
      for (int a = 0; a < u.rows(); ++a)
        for (int c = 0; c < u.cols(); ++c)
          b.block(a * d, c * d, d, d) += u.at(g, a, c) * m;
    }
  }
  return f;
}

}  // namespace

FourierBlocks gft(const GroupFunction& u, const IrrepTable& table) {
  check_match(u, table);
  if (table.canonical_abelian_form()) return abelian_transform(u, table, kDftForward);
  return naive_transform(u, table, false);
}

FourierBlocks gft_reversed(const GroupFunction& u, const IrrepTable& table) {
  check_match(u, table);
  if (table.canonical_abelian_form()) return abelian_transform(u, table, kDftBackward);
  return naive_transform(u, table, true);
}

GroupFunction igft(const FourierBlocks& f, const IrrepTable& table) {
  require_input(f.group && f.group->order() == table.group()->order() &&
                    f.degrees == table.degrees(),
                "bad_fourier_blocks", "blocks do not match the irrep table");
  const int n = f.group->order();
  GroupFunction u(f.group, f.rows, f.cols);
  if (table.canonical_abelian_form()) {
    const int ch = f.rows * f.cols;
    Eigen::MatrixXcd work(n, ch);
    for (int k = 0; k < n; ++k)
      for (int a = 0; a < f.rows; ++a)
        for (int c = 0; c < f.cols; ++c) work(k, a * f.cols + c) = f.blocks[k](a, c);
    dft(f.group->cyclic_structure(), ch, work.data(), u.values().data(), kDftBackward);
    u.values() *= 1.0 / n;
    return u;
  }
  for (int r = 0; r < table.count(); ++r) {
    const int d = table.degree(r);
    const double w = static_cast<double>(d) / n;
    const Eigen::MatrixXcd& b = f.blocks[r];
    for (int g = 0; g < n; ++g) {
      // Tr(rho(g^-1) B) accumulated per channel sub-block.
      const Eigen::MatrixXcd mt = table.matrix(r, f.group->inverse(g)).transpose();
      for (int a = 0; a < f.rows; ++a)
        for (int c = 0; c < f.cols; ++c)
          u.at(g, a, c) += w * mt.cwiseProduct(b.block(a * d, c * d, d, d)).sum();
    }
  }
  return u;
}

FourierBlocks fourier_matmul(const FourierKernel& A, const FourierVector& u) {
  require_input(A.degrees == u.degrees && A.cols == u.rows, "bad_fourier_blocks",
                "block shapes are not composable");
  FourierBlocks out;
  out.group = A.group;
  out.degrees = A.degrees;
  out.rows = A.rows;
  out.cols = u.cols;
  out.blocks.reserve(A.blocks.size());
  for (std::size_t r = 0; r < A.blocks.size(); ++r)
    out.blocks.emplace_back(A.blocks[r] * u.blocks[r]);
  return out;
}

double fourier_norm_sq(const FourierBlocks& f) {
  double acc = 0.0;
  for (std::size_t r = 0; r < f.blocks.size(); ++r)
    acc += f.degrees[r] * f.blocks[r].squaredNorm();
  return acc / f.group->order();
}

PlancherelCheck plancherel_norms(const GroupFunction& u, const IrrepTable& table) {
  return {u.norm_sq(), fourier_norm_sq(gft(u, table))};
}

}  // namespace gcedmd
