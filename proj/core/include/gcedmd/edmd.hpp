#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gcedmd/equivariant.hpp"
#include "gcedmd/lsq.hpp"
#include "gcedmd/observables.hpp"

namespace gcedmd {

struct DatasetMeta {
  std::string system = "synthetic";  // "spring" | "ks" | "spiral" | "synthetic"
  std::string pair_kind = "flow";    // "flow": up = psi(next state); "generator": up = K psi
  double dt = 0.0;
  std::uint64_t seed = 0;
  std::string config_json;           // echo of the generating configuration
};

// Paired lifted snapshots (u_i, u_i^+) over one orbit chart, with optional
// raw states for reconstruction fitting and rollout ground truth.
struct SnapshotDataset {
  ChartPtr chart;
  std::vector<GroupFunction> u, up;
  std::vector<StateField> y, yp;
  std::optional<ObservableMap> observables;
  DatasetMeta meta;

  int size() const { return static_cast<int>(u.size()); }
  void validate() const;
};

// Left translation of a lifted function: translate(u, g)_s(h) = u_s(h g^-1).
// This is the action induced on observations by transforming the state.
GroupFunction translate(const GroupFunction& u, int g);

// Evenly spaced subsample of count pairs (raw states follow when present).
SnapshotDataset subsample(const SnapshotDataset& data, int count);

// Pairs [begin, begin + count) in order (raw states follow when present).
SnapshotDataset slice(const SnapshotDataset& data, int begin, int count);

// Appends (translate(u, g), translate(up, g)) for every g, making the sample
// set closed under the group. Raw states are dropped.
SnapshotDataset group_augment(const SnapshotDataset& data);

struct TrainOptions {
  double rcond = 1e-10;
  double ridge = 0.0;
  int full_cap = 4096;  // train_full refuses |O| above this
};

struct ConvEdmdModel {
  ConvKernel kernel;
  FourierKernel fourier;  // cached gft of the kernel
  std::optional<ObservableMap> observables;
  std::optional<Reconstruction> recon;
  TrainOptions options;
  DatasetMeta meta;
  double train_loss = 0.0;
};

struct FullEdmdModel {
  ChartPtr chart;
  Eigen::MatrixXcd matrix;
  std::optional<ObservableMap> observables;
  std::optional<Reconstruction> recon;
  TrainOptions options;
  DatasetMeta meta;
  double train_loss = 0.0;
};

// Least-squares fit per irrep block: argmin_A sum_i ||A^(rho) u^_i(rho) -
// u^+_i(rho)||_F^2 for each rho independently, which by Plancherel minimizes
// the empirical loss over all equivariant matrices.
ConvEdmdModel train_conv(const SnapshotDataset& data, const IrrepTable& table,
                         const TrainOptions& opts = {});

// Unconstrained minimum-norm fit of the dense |O| x |O| matrix.
// Throws io_error("full_cap") when |O| exceeds opts.full_cap.
FullEdmdModel train_full(const SnapshotDataset& data, const TrainOptions& opts = {});

// (1/N) sum_i ||K u_i - u_i^+||^2 over the flat C^O coordinates.
double empirical_loss(const Eigen::MatrixXcd& K, const SnapshotDataset& data);
double empirical_loss(const EquivariantMatrix& K, const SnapshotDataset& data);
double empirical_loss(const FullEdmdModel& model, const SnapshotDataset& data);
// Fourier-side evaluation, identical by Plancherel.
double empirical_loss(const ConvEdmdModel& model, const SnapshotDataset& data,
                      const IrrepTable& table);

// Affine map u -> state fitted on the dataset's raw snapshots.
Reconstruction fit_reconstruction(const SnapshotDataset& data, const LsqOptions& opts = {});

}  // namespace gcedmd
