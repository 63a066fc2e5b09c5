#include <cmath>
#include <complex>

#include "doctest.h"
#include "gcedmd/gft.hpp"
#include "gcedmd/group.hpp"
#include "support.hpp"

using namespace gcedmd;

namespace {

struct Instance {
  GroupPtr group;
  IrrepTable table;
};

std::vector<Instance> built_in_instances() {
  std::vector<Instance> out;
  for (const std::vector<int>& orders :
       {std::vector<int>{6}, std::vector<int>{4, 3}, std::vector<int>{16, 16}}) {
    GroupPtr g = cyclic_product_group(orders);
    out.push_back({g, IrrepTable::canonical_abelian(g)});
  }
  auto [d4, d4_table] = dihedral_group_d4();
  out.push_back({d4, d4_table});
  return out;
}

}  // namespace

TEST_SUITE("gft") {

TEST_CASE("the transform equals the literal sum over the group") {
  Rng rng(101);
  for (const Instance& inst : built_in_instances()) {
    // Keep the literal oracle affordable on the largest group.
    const int trials = inst.group->order() > 64 ? 2 : 5;
    for (int t = 0; t < trials; ++t) {
      const int rows = rng.uniform_int(1, 3), cols = rng.uniform_int(1, 2);
      GroupFunction u = GroupFunction::random(inst.group, rows, cols, rng);
      FourierBlocks f = gft(u, inst.table);
      const std::vector<Eigen::MatrixXcd> oracle = testsupport::naive_gft(u, inst.table);
      REQUIRE(f.blocks.size() == oracle.size());
      for (std::size_t r = 0; r < oracle.size(); ++r) {
        const double scale = std::max(1.0, oracle[r].norm());
        CHECK((f.blocks[r] - oracle[r]).norm() / scale < 1e-12);
      }
    }
  }
}

TEST_CASE("gft then igft returns the original function") {
  Rng rng(102);
  for (const Instance& inst : built_in_instances())
    for (int t = 0; t < 100; ++t) {
      const int rows = rng.uniform_int(1, 3), cols = rng.uniform_int(1, 2);
      GroupFunction u = GroupFunction::random(inst.group, rows, cols, rng);
      GroupFunction back = igft(gft(u, inst.table), inst.table);
      const double scale = std::max(1.0, std::sqrt(u.norm_sq()));
      CHECK(std::sqrt((back.values() - u.values()).squaredNorm()) / scale < 1e-12);
    }
}

TEST_CASE("the Fourier norm matches the time-domain norm") {
  Rng rng(103);
  for (const Instance& inst : built_in_instances())
    for (int t = 0; t < 100; ++t) {
      GroupFunction u = GroupFunction::random(inst.group, rng.uniform_int(1, 4), 1, rng);
      const PlancherelCheck chk = plancherel_norms(u, inst.table);
      CHECK(std::abs(chk.time_norm_sq - chk.fourier_norm_sq) /
                std::max(1.0, chk.time_norm_sq) <
            1e-10);
      CHECK(std::abs(fourier_norm_sq(gft(u, inst.table)) - u.norm_sq()) /
                std::max(1.0, u.norm_sq()) <
            1e-10);
    }
}

TEST_CASE("the reversed transform pairs with the forward one") {
  // sum_g a(g) b(g) = (1/|G|) sum_rho d_rho Tr(a~(rho) b^(rho)) for scalars.
  Rng rng(104);
  for (const Instance& inst : built_in_instances())
    for (int t = 0; t < 20; ++t) {
      GroupFunction a = GroupFunction::random(inst.group, 1, 1, rng);
      GroupFunction b = GroupFunction::random(inst.group, 1, 1, rng);
      std::complex<double> direct = 0.0;
      for (int g = 0; g < inst.group->order(); ++g) direct += a.at(g, 0) * b.at(g, 0);
      const FourierBlocks ar = gft_reversed(a, inst.table);
      const FourierBlocks bf = gft(b, inst.table);
      std::complex<double> fourier = 0.0;
      for (std::size_t r = 0; r < ar.blocks.size(); ++r)
        fourier += static_cast<double>(ar.degrees[r]) * (ar.blocks[r] * bf.blocks[r]).trace();
      fourier /= static_cast<double>(inst.group->order());
      CHECK(std::abs(direct - fourier) < 1e-10 * std::max(1.0, std::abs(direct)));
    }
}

TEST_CASE("block products compose like operators") {
  Rng rng(105);
  for (const Instance& inst : built_in_instances()) {
    GroupFunction a = GroupFunction::random(inst.group, 3, 3, rng);
    GroupFunction u = GroupFunction::random(inst.group, 3, 1, rng);
    const FourierBlocks af = gft(a, inst.table);
    const FourierBlocks uf = gft(u, inst.table);
    const FourierBlocks prod = fourier_matmul(af, uf);
    REQUIRE(prod.blocks.size() == af.blocks.size());
    for (std::size_t r = 0; r < prod.blocks.size(); ++r)
      CHECK((prod.blocks[r] - af.blocks[r] * uf.blocks[r]).norm() < 1e-12);
    CHECK(prod.rows == 3);
    CHECK(prod.cols == 1);
  }
}

TEST_CASE("the FFT path on the grid group matches the literal sum") {
  GroupPtr g = cyclic_product_group({16, 16});
  IrrepTable table = IrrepTable::canonical_abelian(g);
  REQUIRE(table.canonical_abelian_form());
  Rng rng(106);
  GroupFunction u = GroupFunction::random(g, 2, 1, rng);
  FourierBlocks fast = gft(u, table);
  const std::vector<Eigen::MatrixXcd> oracle = testsupport::naive_gft(u, table);
  double worst = 0.0;
  for (std::size_t r = 0; r < oracle.size(); ++r)
    worst = std::max(worst, (fast.blocks[r] - oracle[r]).norm() / std::max(1.0, oracle[r].norm()));
  CHECK(worst < 1e-12);
}

TEST_CASE("random group functions are seed deterministic") {
  GroupPtr g = cyclic_product_group({6});
  Rng r1(7), r2(7);
  GroupFunction a = GroupFunction::random(g, 2, 2, r1);
  GroupFunction b = GroupFunction::random(g, 2, 2, r2);
  CHECK(a.values() == b.values());
}

}  // TEST_SUITE
