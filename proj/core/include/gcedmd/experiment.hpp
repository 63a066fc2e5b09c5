#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "gcedmd/evalio.hpp"
#include "gcedmd/systems.hpp"

namespace gcedmd {

// A complete experiment description: system, observable family, training
// settings and evaluation protocol. Everything downstream (initial
// conditions, observable parameters) derives from the single seed through
// named substreams, so one config reproduces one result bit for bit.
struct ExperimentConfig {
  std::string name = "custom";
  SystemConfig system;

  struct Observables {
    ObservableKind kind = ObservableKind::random_feature;
    int count = 5;  // generating channels |S|
  } observables;

  struct Training {
    std::string mode = "conv";  // "conv" | "full"
    double rcond = 1e-10;
    double ridge = 0.0;
    int full_cap = 4096;
  } training;

  struct Evaluation {
    int train_count = 20;   // pairs used for training
    int window_count = 0;   // recorded pairs before the test block (0: train_count)
    int test_count = 200;   // held-out pairs following the window
    int rollout_steps = 0;  // trajectory comparison length (0: skip)
    RolloutMode rollout_mode = RolloutMode::observable;
  } evaluation;

  std::uint64_t seed = 2024;
  bool separate_test_ic = false;  // test split from its own initial condition

  // Built-in settings: "spring", "ks-small", "ks-large", "spiral-small",
  // "spiral". Throws io_error("bad_preset") for anything else.
  static ExperimentConfig preset(const std::string& name);
  // JSON document; an optional "preset" key selects the baseline the other
  // (all optional) fields override. Unknown keys are rejected.
  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig from_json_file(const std::filesystem::path& path);
  std::string to_json() const;
  void validate() const;

  // Recorded training-window length (train_count when unset).
  int window() const { return evaluation.window_count > 0 ? evaluation.window_count : evaluation.train_count; }
};

// The config's generating observable map (seeded from cfg.seed).
ObservableMap make_observables(const ExperimentConfig& cfg);

struct ExperimentData {
  SnapshotDataset train;
  SnapshotDataset test;
};

// Draws the train and test splits. Flow systems record one trajectory from
// the seeded initial condition: the training window right after burn-in and
// the test block immediately after it (or from a second initial condition
// when separate_test_ic is set). The spring draws i.i.d. generator pairs for
// both splits. train_count selects the window prefix used for training.
ExperimentData simulate_experiment(const ExperimentConfig& cfg);

// Trains the convolutional and (within full_cap) the unconstrained model on
// the same data, evaluates one-step test loss, eigenvalues, SRR and rollout,
// and writes dataset.gced, the model files, per-model CSVs and summary.json
// into out_dir. Returns the summary JSON text.
std::string run_compare(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace gcedmd
