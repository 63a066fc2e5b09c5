#include <algorithm>
#include <complex>
#include <map>

#include "doctest.h"
#include "gcedmd/equivariant.hpp"
#include "gcedmd/evalio.hpp"
#include "gcedmd/speceig.hpp"
#include "support.hpp"

using namespace gcedmd;
using testsupport::make_chart;

namespace {

// Block of the kernel's transform for one irrep, built independently.
Eigen::MatrixXcd fourier_block(const ConvKernel& A, const IrrepTable& table, int r) {
  return testsupport::naive_gft(A.coeffs, table)[static_cast<std::size_t>(r)];
}

}  // namespace

TEST_SUITE("speceig") {

TEST_CASE("block eigenvalues match a dense eigensolve of the kernel matrix") {
  Rng rng(301);
  struct Case {
    GroupPtr group;
    IrrepTable table;
    int nreps;
  };
  std::vector<Case> cases;
  {
    GroupPtr z6 = cyclic_product_group({6});
    cases.push_back({z6, IrrepTable::canonical_abelian(z6), 3});
    GroupPtr z43 = cyclic_product_group({4, 3});
    cases.push_back({z43, IrrepTable::canonical_abelian(z43), 2});
    auto [d4, d4t] = dihedral_group_d4();
    cases.push_back({d4, d4t, 3});
    GroupPtr grid = cyclic_product_group({16, 16});
    cases.push_back({grid, IrrepTable::canonical_abelian(grid), 2});
  }
  for (const Case& c : cases) {
    ChartPtr chart = make_chart(c.group, c.nreps);
    const int trials = c.group->order() > 64 ? 1 : 5;
    for (int t = 0; t < trials; ++t) {
      ConvKernel A = random_kernel(chart, rng);
      const std::vector<std::complex<double>> block_side = eigenvalues(A, c.table);
      const std::vector<std::complex<double>> dense_side =
          testsupport::zgeev_eigenvalues(kernel_to_matrix(A).matrix);
      REQUIRE(block_side.size() == dense_side.size());
      CHECK(eigenvalues_match(block_side, dense_side, 1e-8));
    }
  }
}

TEST_CASE("eigenvalue lists are sorted canonically with degree-fold repeats") {
  Rng rng(302);
  auto [d4, table] = dihedral_group_d4();
  ChartPtr chart = make_chart(d4, 2);
  ConvKernel A = random_kernel(chart, rng);
  const std::vector<std::complex<double>> vals = eigenvalues(A, table);
  CHECK(vals.size() == static_cast<std::size_t>(chart->set_size()));
  CHECK(std::is_sorted(vals.begin(), vals.end(), spectral_order_less));

  // The degree-2 block's eigenvalues each appear twice, and the dense
  // spectrum shows the same two-fold multiplicity.
  const SpectralDecomposition dec = spectral_decomposition(A, table);
  const std::vector<std::complex<double>> dense =
      testsupport::zgeev_eigenvalues(kernel_to_matrix(A).matrix);
  for (const IrrepSpectrum& blk : dec.blocks) {
    if (blk.degree != 2) continue;
    for (Eigen::Index i = 0; i < blk.values.size(); ++i) {
      const std::complex<double> v = blk.values[i];
      CHECK(std::count(vals.begin(), vals.end(), v) >= 2);
      int close = 0;
      for (const std::complex<double>& d : dense)
        if (std::abs(d - v) < 1e-7) ++close;
      CHECK(close >= 2);
    }
  }
}

TEST_CASE("spectral decompositions expose consistent block data") {
  Rng rng(303);
  GroupPtr g = cyclic_product_group({4, 3});
  const IrrepTable table = IrrepTable::canonical_abelian(g);
  ChartPtr chart = make_chart(g, 3);
  ConvKernel A = random_kernel(chart, rng);
  const SpectralDecomposition dec = spectral_decomposition(A, table);
  REQUIRE(static_cast<int>(dec.blocks.size()) == table.count());
  CHECK(dec.max_block_dim == 3);
  for (const IrrepSpectrum& blk : dec.blocks) {
    const Eigen::MatrixXcd B = fourier_block(A, table, blk.irrep);
    REQUIRE(blk.values.size() == B.rows());
    for (Eigen::Index i = 0; i < blk.values.size(); ++i) {
      const Eigen::VectorXcd v = blk.vectors.col(i);
      CHECK((B * v - blk.values[i] * v).norm() <= 1e-8 * std::max(1.0, B.norm()) * v.norm());
    }
    std::vector<std::complex<double>> sorted(blk.values.data(),
                                             blk.values.data() + blk.values.size());
    CHECK(std::is_sorted(sorted.begin(), sorted.end(), spectral_order_less));
    CHECK(blk.max_residual <= kEigenResidualTol);
  }
}

TEST_CASE("right and left eigenpairs satisfy their defining equations densely") {
  Rng rng(304);
  for (bool use_d4 : {false, true}) {
    ChartPtr chart;
    std::optional<IrrepTable> table;
    if (use_d4) {
      auto [d4, d4t] = dihedral_group_d4();
      chart = make_chart(d4, 2);
      table = d4t;
    } else {
      GroupPtr g = cyclic_product_group({6});
      chart = make_chart(g, 2);
      table = IrrepTable::canonical_abelian(g);
    }
    ConvKernel A = random_kernel(chart, rng);
    const Eigen::MatrixXcd K = kernel_to_matrix(A).matrix;
    const double kn = K.norm();

    const std::vector<EigenPair> right = right_eigenpairs(A, *table, true);
    const std::vector<EigenPair> left = left_eigenpairs(A, *table, true);
    REQUIRE(right.size() == static_cast<std::size_t>(chart->set_size()));
    REQUIRE(left.size() == right.size());

    for (const EigenPair& p : right) {
      REQUIRE(p.vector.has_value());
      CHECK_FALSE(p.left);
      CHECK(p.ok);
      const Eigen::VectorXcd v = flatten(*p.vector, *chart);
      CHECK(std::abs(v.norm() - 1.0) < 1e-10);  // unit Plancherel norm
      CHECK((K * v - p.value * v).norm() <= 1e-8 * std::max(1.0, kn));
    }
    for (const EigenPair& p : left) {
      REQUIRE(p.vector.has_value());
      CHECK(p.left);
      CHECK(p.ok);
      const Eigen::VectorXcd v = flatten(*p.vector, *chart);
      CHECK(std::abs(v.norm() - 1.0) < 1e-10);
      CHECK((v.transpose() * K - p.value * v.transpose()).norm() <= 1e-8 * std::max(1.0, kn));
    }

    // Tags point back into the block decomposition.
    const SpectralDecomposition dec = spectral_decomposition(A, *table);
    for (const EigenPair& p : right) {
      const IrrepSpectrum& blk = dec.blocks[static_cast<std::size_t>(p.tag.irrep)];
      CHECK(p.degree == blk.degree);
      CHECK(p.tag.index < static_cast<int>(blk.values.size()));
      CHECK(p.tag.copy < p.degree);
      CHECK(std::abs(p.value - blk.values[p.tag.index]) == 0.0);
    }
  }
}

TEST_CASE("phase normalization fixes the largest entry real positive") {
  Eigen::VectorXcd v(3);
  v << std::complex<double>(0.0, 2.0), std::complex<double>(1.0, 0.0),
      std::complex<double>(0.0, -2.0);
  normalize_phase(v);
  // Tie between |2i| and |-2i|: lowest index wins and becomes real positive.
  CHECK(v[0].real() == doctest::Approx(2.0));
  CHECK(std::abs(v[0].imag()) < 1e-15);

  Eigen::VectorXcd z = Eigen::VectorXcd::Zero(4);
  normalize_phase(z);
  CHECK(z.norm() == 0.0);

  Rng rng(305);
  Eigen::VectorXcd w(5);
  for (int i = 0; i < 5; ++i) w[i] = rng.cnormal();
  const double before = w.norm();
  normalize_phase(w);
  CHECK(std::abs(w.norm() - before) < 1e-12);  // a pure phase rotation
  Eigen::Index arg = 0;
  w.cwiseAbs().maxCoeff(&arg);
  CHECK(w[arg].real() > 0.0);
  CHECK(std::abs(w[arg].imag()) < 1e-12 * before);
}

TEST_CASE("the canonical spectrum order is by modulus then argument") {
  std::vector<std::complex<double>> vals{{0.0, 1.0}, {1.0, 0.0}, {-2.0, 0.0}, {0.0, -1.0}};
  std::sort(vals.begin(), vals.end(), spectral_order_less);
  CHECK(vals[0] == std::complex<double>(-2.0, 0.0));  // largest modulus first
  CHECK(vals[1] == std::complex<double>(0.0, -1.0));  // then increasing argument
  CHECK(vals[2] == std::complex<double>(1.0, 0.0));
  CHECK(vals[3] == std::complex<double>(0.0, 1.0));
}

}  // TEST_SUITE
