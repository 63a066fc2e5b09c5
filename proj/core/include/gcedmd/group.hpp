#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace gcedmd {

// Finite group as composition/inverse lookup tables over element ids 0..|G|-1.
// Id 0 is always the identity element.
class FiniteGroup {
 public:
  // compose_table[a * order + b] = a*b. Must satisfy the group axioms;
  // call validate() to check them.
  FiniteGroup(std::string name, int order, std::vector<std::int32_t> compose_table,
              std::vector<int> cyclic_structure = {});

  static constexpr int identity = 0;

  int order() const { return order_; }
  int compose(int a, int b) const { return compose_[static_cast<std::size_t>(a) * order_ + b]; }
  int inverse(int a) const { return inverse_[a]; }
  const std::string& name() const { return name_; }
  bool is_abelian() const { return abelian_; }

  // Nonempty iff the group was built as Z_{p1} x ... x Z_{pm}. Element ids are
  // then the row-major flattening of tuples (g_1, ..., g_m).
  const std::vector<int>& cyclic_structure() const { return structure_; }
  int tuple_to_id(const std::vector<int>& t) const;
  std::vector<int> id_to_tuple(int id) const;

  // Closure, identity and inverse checks are exhaustive. Associativity is
  // exhaustive for order <= 1024, otherwise 10^6 seeded random triples.
  // Throws numeric_error on any violation.
  void validate() const;

 private:
  std::string name_;
  int order_;
  std::vector<std::int32_t> compose_;
  std::vector<std::int32_t> inverse_;
  std::vector<int> structure_;
  bool abelian_ = false;
};

using GroupPtr = std::shared_ptr<const FiniteGroup>;

// Z_{p1} x ... x Z_{pm}; element id = row-major flattened tuple.
GroupPtr cyclic_product_group(const std::vector<int>& orders);

// Complete set of inequivalent unitary irreducible representations.
// Two storage forms: materialized matrices, or the closed-form table for
// products of cyclic groups where irrep k at element g is the 1x1 matrix
// [exp(-2*pi*i * sum_n g_n k_n / p_n)] (never materialized, so |G|^2 storage
// is avoided for large abelian groups).
class IrrepTable {
 public:
  IrrepTable(GroupPtr group, std::vector<std::vector<Eigen::MatrixXcd>> matrices);
  static IrrepTable canonical_abelian(GroupPtr group);

  const GroupPtr& group() const { return group_; }
  int count() const { return static_cast<int>(degrees_.size()); }
  int degree(int r) const { return degrees_[r]; }
  const std::vector<int>& degrees() const { return degrees_; }
  bool canonical_abelian_form() const { return lazy_abelian_; }

  Eigen::MatrixXcd matrix(int r, int g) const;
  std::complex<double> scalar(int r, int g) const;  // degree-1 fast path
  std::complex<double> character(int r, int g) const;

  struct Tolerances {
    double homomorphism = 1e-12;
    double orthogonality = 1e-10;
    double unitarity = 1e-10;
  };
  // Checks completeness (sum d^2 = |G|), identity images, unitarity, the
  // homomorphism property and character orthogonality. Exhaustive over all
  // (irrep, g, h) for |G| <= 256, sampled (10^5 seeded triples) above.
  // Throws numeric_error on violation.
  void validate(const Tolerances& tol) const;
  void validate() const { validate(Tolerances()); }

 private:
  GroupPtr group_;
  std::vector<int> degrees_;
  std::vector<std::vector<Eigen::MatrixXcd>> mats_;  // empty when lazy
  bool lazy_abelian_ = false;
};

// Dihedral group of the square: ids 0..3 are rotations r^k, ids 4..7 are s*r^k
// (s = horizontal flip). Returned with its full irrep table (four degree-1
// irreps and one degree-2 irrep).
std::pair<GroupPtr, IrrepTable> dihedral_group_d4();

// JSON irrep table exchange format (see README). Loading validates the table
// against the supplied group before returning it.
IrrepTable load_irrep_table(const std::filesystem::path& path, GroupPtr group);
void save_irrep_table(const std::filesystem::path& path, const IrrepTable& table);

// Right group action on a finite set {0..set_size-1}.
class RightAction {
 public:
  RightAction(GroupPtr group, int set_size, std::function<int(int, int)> act);
  static RightAction from_table(GroupPtr group, std::vector<std::vector<int>> table);
  // The free action on O = S x G with o = g*nreps + s and (s,h)*g = (s, hg).
  static RightAction canonical_product(GroupPtr group, int nreps);

  const GroupPtr& group() const { return group_; }
  int set_size() const { return set_size_; }
  int act(int o, int g) const { return act_(o, g); }

  // Checks the action axioms exhaustively; throws numeric_error on violation.
  void validate() const;

 private:
  GroupPtr group_;
  int set_size_;
  std::function<int(int, int)> act_;
};

// Trivialization O ~ S x G for a free action: representatives s (minimum
// element id per orbit, scanned in increasing order) and the bijection
// o = rep(s)*g <-> (s, g). The canonical form uses o = g*|S| + s with no
// stored tables.
class OrbitChart {
 public:
  static OrbitChart canonical(GroupPtr group, int nreps);

  const GroupPtr& group() const { return group_; }
  int num_reps() const { return nreps_; }
  int set_size() const { return set_size_; }
  int rep(int s) const { return canonical_ ? s : reps_[s]; }
  bool canonical_form() const { return canonical_; }

  int index(int s, int g) const {
    return canonical_ ? g * nreps_ + s : index_[static_cast<std::size_t>(s) * order_ + g];
  }
  // o -> (s, g) with o = rep(s)*g.
  std::pair<int, int> decompose(int o) const {
    return canonical_ ? std::pair<int, int>{o % nreps_, o / nreps_}
                      : std::pair<int, int>{inv_s_[o], inv_g_[o]};
  }
  // o*g through the chart: (s,h)*g = (s, hg).
  int act(int o, int g) const {
    auto [s, h] = decompose(o);
    return index(s, group_->compose(h, g));
  }

 private:
  friend OrbitChart orbit_chart(const RightAction& action);
  OrbitChart() = default;
  GroupPtr group_;
  int nreps_ = 0, set_size_ = 0, order_ = 0;
  bool canonical_ = false;
  std::vector<int> reps_;
  std::vector<std::int32_t> index_, inv_s_, inv_g_;
};

using ChartPtr = std::shared_ptr<const OrbitChart>;

// Builds the chart for a free action; throws numeric_error("action_not_free")
// when any stabilizer is nontrivial.
OrbitChart orbit_chart(const RightAction& action);

}  // namespace gcedmd
