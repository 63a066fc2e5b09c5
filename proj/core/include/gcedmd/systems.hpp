#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gcedmd/edmd.hpp"
#include "gcedmd/observables.hpp"

namespace gcedmd {

// Discretized dynamical system on a periodic grid (or the spring chain).
// The sampling map step_system is equivariant under grid translations:
// step(shift_state(y, g)) = shift_state(step(y), g).
struct SystemConfig {
  std::string id = "ks";             // "spring" | "ks" | "spiral"
  std::vector<int> grid = {16, 16};  // {2} for spring
  double domain = 3.0 * M_PI;        // square side length (PDE systems)
  double dt = 1.0;                   // sampling interval
  int substeps = 20;                 // integrator substeps per sample
  double burn_in = 500.0;            // time units before recording starts
  double spring_k = 1.0;
  double spring_m = 1.0;
  bool ks_linear_only = false;       // drop the nonlinear term (test hook)

  int state_channels() const;
  GroupPtr make_group() const;
  void validate() const;
};

// One sampling interval of the flow map. Throws
// numeric_error("nonfinite_state") if the state leaves the finite range.
StateField step_system(const StateField& y, const SystemConfig& cfg);

// Seeded initial state: smooth low-mode field (ks), a perturbed spiral
// profile (spiral), or iid normal coordinates (spring).
StateField initial_condition(const SystemConfig& cfg, Rng& rng);

// Spring chain: four unit masses coupled by five springs between two walls.
// Reflection of the chain gives a free Z2 action; the generator matrix is
// equivariant under it.
Eigen::MatrixXd spring_matrix(double k, double m);  // 8x8 on (p1..p4, v1..v4)
RightAction spring_action();                        // reflection on those indices
ConvKernel spring_kernel(double k, double m);       // canonical chart, |S| = 4
StateField spring_flow(const StateField& y, double t, double k, double m);
// Closed-form spectrum, sorted by (-|value|, arg value).
std::vector<std::complex<double>> spring_spectrum(double k, double m);

// count lifted pairs recorded from t = start_time along one seeded
// trajectory. PDE systems record flow pairs (y_i, y_{i+1}); the spring draws
// iid states with generator pairs (u, K u) and requires identity observables.
// Raw states are stored alongside the lifted data.
SnapshotDataset generate_dataset(const SystemConfig& cfg, const ObservableMap& obs, int count,
                                 double start_time, std::uint64_t seed,
                                 const std::string& ic_label = "ic");

}  // namespace gcedmd
