#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "gcedmd/equivariant.hpp"

namespace gcedmd {

// Residual bound that marks an eigenpair as trustworthy.
inline constexpr double kEigenResidualTol = 1e-8;

// Canonical spectrum order: decreasing modulus, then increasing argument.
bool spectral_order_less(const std::complex<double>& a, const std::complex<double>& b);

// Rotates v so its largest-modulus entry is real positive (ties: lowest
// index). Zero vectors are left unchanged.
void normalize_phase(Eigen::VectorXcd& v);

// Identifies one eigenpair: irrep, eigenvalue index within the block after
// the (-|value|, arg value) sort, and copy 0..degree-1 of the degree-fold
// degeneracy the block contributes.
struct EigenTag {
  int irrep = 0;
  int index = 0;
  int copy = 0;
};

struct EigenPair {
  std::complex<double> value;
  EigenTag tag;
  int degree = 1;
  bool left = false;
  double residual = 0.0;  // Fourier-side ||A^ x - value x|| / ||x||
  bool ok = true;         // residual <= kEigenResidualTol
  // Fourier coefficients, length |S|*degree. Right pairs: eigenvector of the
  // block; left pairs: eta with eta^T A^ = value eta^T. Scaled so the
  // time-domain vector has unit Plancherel norm; phase fixed so the
  // largest-modulus coefficient is real positive (ties: lowest index).
  Eigen::VectorXcd fourier;
  // Time-domain coefficients over S x G; nullopt when not materialized.
  std::optional<GroupFunction> vector;
};

struct IrrepSpectrum {
  int irrep = 0;
  int degree = 1;
  Eigen::VectorXcd values;   // sorted by (-|value|, arg value)
  Eigen::MatrixXcd vectors;  // right eigenvectors of the block, columns match values
  double max_residual = 0.0;
};

// Eigenstructure computed block-by-block; the |O| x |O| matrix is never
// formed. max_block_dim / dense_cells record the largest dense eigenproblem
// dimension and the total cells eigensolved (cost probes).
struct SpectralDecomposition {
  std::vector<IrrepSpectrum> blocks;
  int max_block_dim = 0;
  long long dense_cells = 0;
};

SpectralDecomposition spectral_decomposition(const FourierKernel& A);
SpectralDecomposition spectral_decomposition(const ConvKernel& A, const IrrepTable& table);

// All |O| eigenvalues: each block's values repeated degree times, sorted by
// (-|value|, arg value) with (irrep, index, copy) as tie-break.
std::vector<std::complex<double>> eigenvalues(const FourierKernel& A);
std::vector<std::complex<double>> eigenvalues(const ConvKernel& A, const IrrepTable& table);

// Eigenpairs ordered by (irrep, index, copy). materialize controls whether
// time-domain coefficient functions are built (|O| scalars per pair).
std::vector<EigenPair> right_eigenpairs(const FourierKernel& A, const IrrepTable& table,
                                        bool materialize = true);
std::vector<EigenPair> left_eigenpairs(const FourierKernel& A, const IrrepTable& table,
                                       bool materialize = true);
std::vector<EigenPair> right_eigenpairs(const ConvKernel& A, const IrrepTable& table,
                                        bool materialize = true);
std::vector<EigenPair> left_eigenpairs(const ConvKernel& A, const IrrepTable& table,
                                       bool materialize = true);

}  // namespace gcedmd
