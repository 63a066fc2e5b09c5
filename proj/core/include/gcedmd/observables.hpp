#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "gcedmd/gft.hpp"
#include "gcedmd/group.hpp"

namespace gcedmd {

// Real field over a structured set of points with m channels per point.
// For grid systems dims = {n1, n2} and the point id equals the row-major
// grid index, which is also the element id of the translation group
// Z_{n1} x Z_{n2}. Storage is point-major: data[p*channels + c].
struct StateField {
  std::vector<int> dims;
  int channels = 1;
  Eigen::VectorXd data;

  static StateField zero(std::vector<int> dims, int channels);
  int npoints() const;
  double& at(int p, int c) { return data[static_cast<Eigen::Index>(p) * channels + c]; }
  double at(int p, int c) const { return data[static_cast<Eigen::Index>(p) * channels + c]; }
  bool finite() const { return data.allFinite(); }
};

// Translated copy: out(x) = y(x + g) with g a translation group element id
// for the grid Z_{n1} x Z_{n2} (or Z_n when dims has one entry).
StateField shift_state(const StateField& y, int g);

enum class ObservableKind { identity, polynomial, random_feature };

std::string to_string(ObservableKind k);
ObservableKind observable_kind_from_string(const std::string& s);

// Generating observable chi: R^m -> R^|S| applied at the origin point, lifted
// to psi_{(s,g)}(y) = chi_s(g . y) = chi_s applied to the channel vector of y
// at point g. The lift is exactly equivariant: lift(shift_state(y, h)) at
// (s, g) equals lift(y) at (s, g h).
class ObservableMap {
 public:
  // chi_s(v) = v_s (|S| = m).
  static ObservableMap identity(int state_channels);
  // Scalar states, chi_s(v) = v^(s+1) for s = 0..degree-1.
  static ObservableMap polynomial(int degree);
  // chi(v) = softplus(W v + b), W and b drawn from the seeded stream.
  static ObservableMap random_feature(int count, int state_channels, std::uint64_t seed);

  ObservableKind kind() const { return kind_; }
  int channels() const { return channels_; }
  int state_channels() const { return state_channels_; }
  std::uint64_t seed() const { return seed_; }
  const Eigen::MatrixXd& weights() const { return W_; }
  const Eigen::VectorXd& bias() const { return b_; }

  Eigen::VectorXd evaluate(const Eigen::VectorXd& point_channels) const;
  GroupFunction lift(const StateField& y, const GroupPtr& group) const;

 private:
  ObservableMap() = default;
  ObservableKind kind_ = ObservableKind::identity;
  int channels_ = 0;
  int state_channels_ = 0;
  std::uint64_t seed_ = 0;
  Eigen::MatrixXd W_;
  Eigen::VectorXd b_;
};

// Affine map from lifted coordinates back to state channels, shared across
// points so reconstruction commutes with translations:
// y(p) ~ R * Re(u(p)) + c.
struct Reconstruction {
  Eigen::MatrixXd R;  // m x |S|
  Eigen::VectorXd c;  // m
  double fit_mse = 0.0;

  StateField apply(const GroupFunction& u, const std::vector<int>& dims) const;
};

}  // namespace gcedmd
