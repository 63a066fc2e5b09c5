#pragma once

#include "gcedmd/gft.hpp"
#include "gcedmd/group.hpp"

namespace gcedmd {

// Convolution kernel A: G -> C^(|S| x |S|) attached to an orbit chart.
// Storage is |G| |S|^2 scalars; the dense matrix it represents is |O|^2.
struct ConvKernel {
  ChartPtr chart;
  GroupFunction coeffs;
};

ConvKernel zero_kernel(ChartPtr chart);
ConvKernel random_kernel(ChartPtr chart, Rng& rng);

// Dense |O| x |O| matrix commuting with the chart's right action.
struct EquivariantMatrix {
  ChartPtr chart;
  Eigen::MatrixXcd matrix;
};

enum class ConvPath { automatic, direct, fourier };

// (A u)_s(g) = sum_{s', h} A_{s,s'}(h) u_{s'}(h^-1 g). The fourier path
// multiplies per-irrep blocks (FFT-backed for canonical abelian tables);
// automatic picks fourier for canonical abelian tables of order >= 16.
GroupFunction convolve(const ConvKernel& A, const GroupFunction& u, const IrrepTable& table,
                       ConvPath path = ConvPath::automatic);

// Kernel of the composed operator: (A . B)(g) = sum_h A(h) B(h^-1 g), so that
// kernel_to_matrix(A . B) = kernel_to_matrix(A) * kernel_to_matrix(B).
ConvKernel compose_kernels(const ConvKernel& A, const ConvKernel& B);

// Kernel of the transposed matrix: (A^T)_{s,s'}(g) = A_{s',s}(g^-1).
ConvKernel transpose_kernel(const ConvKernel& A);

// K[(s,g), (s',h)] = A_{s,s'}(g h^-1) through the chart's indexing.
EquivariantMatrix kernel_to_matrix(const ConvKernel& A);

// max over (o, o', g) of |K[o*g, o'*g] - K[o, o']|.
double equivariance_defect(const Eigen::MatrixXcd& K, const OrbitChart& chart);

// Inverse of kernel_to_matrix. Throws numeric_error("not_equivariant") when
// the equivariance defect exceeds tol.
ConvKernel matrix_to_kernel(const EquivariantMatrix& K, double tol = 1e-9);

// Group average (1/|G|) sum_g K[o*g, o'*g]. Always equivariant; on
// group-closed data its empirical loss never exceeds the original's.
EquivariantMatrix symmetrize(const Eigen::MatrixXcd& K, const RightAction& action);
EquivariantMatrix symmetrize(const Eigen::MatrixXcd& K, ChartPtr chart);

// Flat C^O vector <-> group function through the chart: u_s(g) = y[chart(s,g)].
GroupFunction unflatten(const Eigen::VectorXcd& y, const ChartPtr& chart);
Eigen::VectorXcd flatten(const GroupFunction& u, const OrbitChart& chart);

}  // namespace gcedmd
