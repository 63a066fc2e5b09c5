#pragma once

#include <complex>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gcedmd/edmd.hpp"
#include "gcedmd/speceig.hpp"

namespace gcedmd {

// ---------- Eigenpair quality ----------

struct SrrEntry {
  std::complex<double> value;
  double srr_percent = 0.0;
  int irrep = 0;  // -1 for dense-model pairs
  int degree = 1;
};

struct SrrReport {
  std::string test_id;
  std::vector<SrrEntry> entries;
};

// Squared relative residual of one left eigenpair on test pairs:
//   100% * mean_i |f(y_i^+) - value f(y_i)|^2 / mean_i |f(y_i)|^2
// where f(y) = sum_o v_o psi_o(y) is the candidate eigenfunction. Irrep-
// tagged pairs evaluate f through the Fourier block of the lifted snapshot
// (f = eta^T u^(rho) e_copy); dense pairs use their time-domain
// coefficients. Throws numeric_error("degenerate_eigenfunction") when f
// vanishes on the whole test set.
double srr(const EigenPair& pair, const SnapshotDataset& test, const IrrepTable& table);

// All pairs against one test set; each snapshot is transformed once.
SrrReport srr_report(const std::vector<EigenPair>& pairs, const SnapshotDataset& test,
                     const IrrepTable& table, std::string test_id = "");

// Eigenpairs of a dense model matrix, sorted by (-|value|, arg value), with
// tag.irrep = -1 and time-domain coefficients attached through the chart.
std::vector<EigenPair> dense_right_eigenpairs(const FullEdmdModel& model);
std::vector<EigenPair> dense_left_eigenpairs(const FullEdmdModel& model);

// True iff the equal-length lists can be perfectly paired with
// |a_i - b_j| <= tol (bipartite matching over a sorted candidate window).
bool eigenvalues_match(const std::vector<std::complex<double>>& a,
                       const std::vector<std::complex<double>>& b, double tol);

// Smallest t for which eigenvalues_match(a, b, t) holds: the exact min-max
// pairing distance between two spectra.
double eigenvalue_pairing_distance(const std::vector<std::complex<double>>& a,
                                   const std::vector<std::complex<double>>& b);

// Agreement of the dominant spectra of two models that may resolve
// different numbers of modes: the largest distance from any of the n
// largest-modulus values of either list to its nearest neighbour in the
// other full list. Robust when many eigenvalues tie in modulus (e.g. a
// spectrum filling the unit circle), where a top-n vs top-n pairing would
// compare arbitrary subsets.
double leading_agreement_distance(const std::vector<std::complex<double>>& a,
                                  const std::vector<std::complex<double>>& b, int n);

// ---------- Rollout ----------

enum class RolloutMode { observable, state };

std::string to_string(RolloutMode m);
RolloutMode rollout_mode_from_string(const std::string& s);

struct RolloutResult {
  std::vector<StateField> states;  // prediction after 1..k applications
  bool truncated = false;          // stopped early on a non-finite prediction
  RolloutMode mode = RolloutMode::observable;
};

// Iterates lift -> linear update -> reconstruct for steps >= 1 steps from
// y0. observable mode lifts once and keeps the loop closed in the lifted
// coordinates (repeated Fourier-block products); state mode re-lifts from
// the reconstructed state each step. The model must carry its observable
// map and a reconstruction.
RolloutResult rollout(const ConvEdmdModel& model, const IrrepTable& table, const StateField& y0,
                      int steps, RolloutMode mode = RolloutMode::observable);
RolloutResult rollout(const FullEdmdModel& model, const StateField& y0, int steps,
                      RolloutMode mode = RolloutMode::observable);

// Per-step relative L2 error ||pred_t - truth_t|| / ||truth_t|| over the
// grid, zipped up to the shorter list.
std::vector<double> rollout_error(const std::vector<StateField>& pred,
                                  const std::vector<StateField>& truth);

// Ground-truth states y_1..y_N for a rollout starting at data.y[0]: the
// successor states of a consecutive flow-pair window. Verifies that the
// window really is consecutive (yp_i == y_{i+1} bitwise).
std::vector<StateField> truth_states(const SnapshotDataset& data);

// ---------- CSV emitters ----------

// Columns: re, im, srr_percent, irrep, degree. A null srr writes nan.
void write_eigenvalue_csv(const std::filesystem::path& path, const std::vector<EigenPair>& pairs,
                          const std::vector<double>* srr_percent = nullptr);
void write_eigenvalue_csv(const std::filesystem::path& path, const SrrReport& report);
// Columns: step, rel_error (step starts at 1).
void write_rollout_csv(const std::filesystem::path& path, const std::vector<double>& rel_error);

// ---------- Artifact files ----------
// Datasets and models travel in the tensor-container format. The group,
// chart and observable map are rebuilt from the JSON metadata; products of
// cyclic groups get their closed-form irrep table back, while table-backed
// groups round-trip without one (spectral operations then need a table
// supplied by the caller).

void save_dataset(const std::filesystem::path& path, const SnapshotDataset& train,
                  const SnapshotDataset* test = nullptr);

struct LoadedData {
  SnapshotDataset train;
  std::optional<SnapshotDataset> test;
};
LoadedData load_dataset(const std::filesystem::path& path);

// wall_ms records training wall time in the file's metadata (pass a
// negative value to omit it); it is metadata only and never read back into
// the model.
void save_model(const std::filesystem::path& path, const ConvEdmdModel& model,
                double wall_ms = -1.0);
void save_model(const std::filesystem::path& path, const FullEdmdModel& model,
                double wall_ms = -1.0);

struct LoadedModel {
  std::optional<ConvEdmdModel> conv;
  std::optional<FullEdmdModel> full;
  std::optional<IrrepTable> table;  // present for cyclic-group models
};
LoadedModel load_model(const std::filesystem::path& path);

}  // namespace gcedmd
