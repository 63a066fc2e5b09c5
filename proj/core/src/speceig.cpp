#include "gcedmd/speceig.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gcedmd/errors.hpp"
#include "gcedmd/parallel.hpp"

namespace gcedmd {

namespace {

void check_square(const FourierKernel& A) {
  require_input(A.rows == A.cols && A.rows >= 1, "bad_fourier_blocks",
                "spectral decomposition needs square kernel blocks");
  require_input(A.degrees.size() == A.blocks.size(), "bad_fourier_blocks",
                "degree list does not match block list");
}

std::vector<int> sorted_order(const Eigen::VectorXcd& values) {
  std::vector<int> idx(static_cast<std::size_t>(values.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (values[a] == values[b]) return false;
    return spectral_order_less(values[a], values[b]);
  });
  return idx;
}

}  // namespace

bool spectral_order_less(const std::complex<double>& a, const std::complex<double>& b) {
  const double ma = std::abs(a), mb = std::abs(b);
  if (ma != mb) return ma > mb;
  return std::arg(a) < std::arg(b);
}

void normalize_phase(Eigen::VectorXcd& v) {
  Eigen::Index best = 0;
  double mod = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double m = std::abs(v[i]);
    if (m > mod + 1e-15 * mod) {
      mod = m;
      best = i;
    }
  }
  if (mod > 0.0) v *= std::polar(1.0, -std::arg(v[best]));
}

SpectralDecomposition spectral_decomposition(const FourierKernel& A) {
  check_square(A);
  SpectralDecomposition out;
  out.blocks.resize(A.blocks.size());
  parallel_for(static_cast<int>(A.blocks.size()), [&](int r) {
    const Eigen::MatrixXcd& M = A.blocks[r];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(M, true);
    require_numeric(es.info() == Eigen::Success, "eigensolver_failed",
                    "dense eigensolver did not converge on a Fourier block");
    const auto order = sorted_order(es.eigenvalues());
    IrrepSpectrum spec;
    spec.irrep = r;
    spec.degree = A.degrees[r];
    spec.values.resize(M.rows());
    spec.vectors.resize(M.rows(), M.rows());
    for (std::size_t i = 0; i < order.size(); ++i) {
      spec.values[static_cast<Eigen::Index>(i)] = es.eigenvalues()[order[i]];
      spec.vectors.col(static_cast<Eigen::Index>(i)) = es.eigenvectors().col(order[i]);
    }
    for (Eigen::Index i = 0; i < spec.values.size(); ++i) {
      const double res = (M * spec.vectors.col(i) - spec.values[i] * spec.vectors.col(i)).norm() /
                         spec.vectors.col(i).norm();
      spec.max_residual = std::max(spec.max_residual, res);
    }
    out.blocks[r] = std::move(spec);
  });
  for (const auto& b : out.blocks) {
    const int dim = static_cast<int>(b.values.size());
    out.max_block_dim = std::max(out.max_block_dim, dim);
    out.dense_cells += static_cast<long long>(dim) * dim;
  }
  return out;
}

SpectralDecomposition spectral_decomposition(const ConvKernel& A, const IrrepTable& table) {
  return spectral_decomposition(gft(A.coeffs, table));
}

std::vector<std::complex<double>> eigenvalues(const FourierKernel& A) {
  const SpectralDecomposition dec = spectral_decomposition(A);
  struct Entry {
    std::complex<double> v;
    int irrep, index, copy;
  };
  std::vector<Entry> all;
  for (const auto& b : dec.blocks)
    for (Eigen::Index i = 0; i < b.values.size(); ++i)
      for (int j = 0; j < b.degree; ++j)
        all.push_back({b.values[i], b.irrep, static_cast<int>(i), j});
  std::stable_sort(all.begin(), all.end(), [](const Entry& a, const Entry& b) {
    if (a.v != b.v) return spectral_order_less(a.v, b.v);
    return std::tie(a.irrep, a.index, a.copy) < std::tie(b.irrep, b.index, b.copy);
  });
  std::vector<std::complex<double>> out;
  out.reserve(all.size());
  for (const auto& e : all) out.push_back(e.v);
  return out;
}

std::vector<std::complex<double>> eigenvalues(const ConvKernel& A, const IrrepTable& table) {
  return eigenvalues(gft(A.coeffs, table));
}

namespace {

// Time-domain coefficients of one pair. Right pairs embed the Fourier vector
// as column `copy` of block `irrep`: v_s(g) = (d/|G|) e_copy^T rho(g^-1) x_s.
// Left pairs: v_s(g) = e_copy^T rho(g)^T eta_s.
GroupFunction materialize_pair(const Eigen::VectorXcd& x, int irrep, int copy, bool left,
                               const IrrepTable& table, int nreps) {
  const GroupPtr& G = table.group();
  const int n = G->order();
  const int d = table.degree(irrep);
  GroupFunction v(G, nreps, 1);
  for (int g = 0; g < n; ++g) {
    if (d == 1) {
      const std::complex<double> w =
          left ? table.scalar(irrep, g) : table.scalar(irrep, G->inverse(g)) / double(n);
      for (int s = 0; s < nreps; ++s) v.at(g, s) = w * x[s];
    } else {
      Eigen::RowVectorXcd row(d);
      if (left) {
        const Eigen::MatrixXcd m = table.matrix(irrep, g);
        row = m.col(copy).transpose();  // e_copy^T rho(g)^T = (rho(g) col copy)^T
      } else {
        const Eigen::MatrixXcd m = table.matrix(irrep, G->inverse(g));
        row = (static_cast<double>(d) / n) * m.row(copy);
      }
      for (int s = 0; s < nreps; ++s)
        v.at(g, s) = (row * x.segment(static_cast<Eigen::Index>(s) * d, d))(0, 0);
    }
  }
  return v;
}

std::vector<EigenPair> make_pairs(const FourierKernel& A, const IrrepTable& table, bool left,
                                  bool materialize) {
  check_square(A);
  require_input(A.degrees == table.degrees(), "bad_fourier_blocks",
                "kernel blocks do not match the irrep table");
  const int nreps = A.rows;
  const int n = A.group->order();
  std::vector<std::vector<EigenPair>> per_block(A.blocks.size());
  parallel_for(static_cast<int>(A.blocks.size()), [&](int r) {
    const int d = A.degrees[r];
    Eigen::MatrixXcd M = A.blocks[r];
    if (left) M.transposeInPlace();
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(M, true);
    require_numeric(es.info() == Eigen::Success, "eigensolver_failed",
                    "dense eigensolver did not converge on a Fourier block");
    const auto order = sorted_order(es.eigenvalues());
    const double scale =
        left ? std::sqrt(static_cast<double>(d) / n) : std::sqrt(static_cast<double>(n) / d);
    std::vector<EigenPair>& out = per_block[r];
    for (std::size_t i = 0; i < order.size(); ++i) {
      const std::complex<double> lambda = es.eigenvalues()[order[i]];
      Eigen::VectorXcd x = es.eigenvectors().col(order[i]);
      const double residual = (M * x - lambda * x).norm() / x.norm();
      x *= scale / x.norm();
      normalize_phase(x);
      for (int j = 0; j < d; ++j) {
        EigenPair p;
        p.value = lambda;
        p.tag = {r, static_cast<int>(i), j};
        p.degree = d;
        p.left = left;
        p.residual = residual;
        p.ok = residual <= kEigenResidualTol;
        p.fourier = x;
        if (materialize) p.vector = materialize_pair(x, r, j, left, table, nreps);
        out.push_back(std::move(p));
      }
    }
  });
  std::vector<EigenPair> merged;
  for (auto& blk : per_block)
    for (auto& p : blk) merged.push_back(std::move(p));
  return merged;
}

}  // namespace

std::vector<EigenPair> right_eigenpairs(const FourierKernel& A, const IrrepTable& table,
                                        bool materialize) {
  return make_pairs(A, table, false, materialize);
}

std::vector<EigenPair> left_eigenpairs(const FourierKernel& A, const IrrepTable& table,
                                       bool materialize) {
  return make_pairs(A, table, true, materialize);
}

std::vector<EigenPair> right_eigenpairs(const ConvKernel& A, const IrrepTable& table,
                                        bool materialize) {
  return make_pairs(gft(A.coeffs, table), table, false, materialize);
}

std::vector<EigenPair> left_eigenpairs(const ConvKernel& A, const IrrepTable& table,
                                       bool materialize) {
  return make_pairs(gft(A.coeffs, table), table, true, materialize);
}

}  // namespace gcedmd
