// Batch driver for the group-convolutional EDMD toolkit.
//
// Subcommands: simulate, train, eig, srr, rollout, compare. Exit codes:
// 0 success, 1 usage or I/O failure, 2 numerical failure. Every failure
// path prints a single line "error: [code] message" to stderr.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "gcedmd/edmd.hpp"
#include "gcedmd/errors.hpp"
#include "gcedmd/evalio.hpp"
#include "gcedmd/experiment.hpp"
#include "gcedmd/parallel.hpp"
#include "gcedmd/speceig.hpp"

namespace {

using namespace gcedmd;

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\r', ' ');
  return s;
}

double wall_ms_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

ExperimentConfig config_from(const std::string& config_path, const std::string& preset) {
  require_input(config_path.empty() != preset.empty(), "bad_usage",
                "pass exactly one of --config FILE or --preset NAME");
  if (!preset.empty()) return ExperimentConfig::preset(preset);
  return ExperimentConfig::from_json_file(config_path);
}

// Irrep table for a loaded artifact's group: an explicit --irreps file wins,
// products of cyclic groups fall back to the closed-form table, anything
// else needs the file.
IrrepTable table_for(const GroupPtr& group, const std::string& irreps_path) {
  if (!irreps_path.empty()) return load_irrep_table(irreps_path, group);
  require_input(!group->cyclic_structure().empty(), "no_irrep_table",
                "group '" + group->name() +
                    "' has no built-in irrep table; pass --irreps FILE");
  return IrrepTable::canonical_abelian(group);
}

// Deterministic output order: decreasing modulus, increasing argument, with
// the solver's (irrep, index, copy) order breaking exact ties.
void sort_pairs(std::vector<EigenPair>& pairs) {
  std::stable_sort(pairs.begin(), pairs.end(), [](const EigenPair& a, const EigenPair& b) {
    return spectral_order_less(a.value, b.value);
  });
}

const SnapshotDataset& eval_split(const LoadedData& d) {
  return d.test ? *d.test : d.train;
}

void run_simulate(const std::string& config_path, const std::string& preset,
                  const std::string& out) {
  ExperimentConfig cfg = config_from(config_path, preset);
  ExperimentData data = simulate_experiment(cfg);
  save_dataset(out, data.train, &data.test);
  std::printf("dataset written: %s (train=%d, test=%d)\n", out.c_str(), data.train.size(),
              data.test.size());
}

void run_train(const std::string& data_path, const std::string& out, const std::string& mode,
               const TrainOptions& opts, const std::string& irreps_path) {
  require_input(mode == "conv" || mode == "full", "bad_mode",
                "--mode must be conv or full, got '" + mode + "'");
  LoadedData d = load_dataset(data_path);
  const auto t0 = std::chrono::steady_clock::now();
  if (mode == "conv") {
    IrrepTable table = table_for(d.train.chart->group(), irreps_path);
    ConvEdmdModel model = train_conv(d.train, table, opts);
    const double wall = wall_ms_since(t0);
    save_model(out, model, wall);
    std::printf("conv model written: %s (train_loss=%.6e, wall_ms=%.1f)\n", out.c_str(),
                model.train_loss, wall);
  } else {
    FullEdmdModel model = train_full(d.train, opts);
    const double wall = wall_ms_since(t0);
    save_model(out, model, wall);
    std::printf("full model written: %s (train_loss=%.6e, wall_ms=%.1f)\n", out.c_str(),
                model.train_loss, wall);
  }
}

std::vector<EigenPair> model_eigenpairs(const LoadedModel& m, bool left,
                                        const std::string& irreps_path) {
  std::vector<EigenPair> pairs;
  if (m.conv) {
    IrrepTable table = table_for(m.conv->kernel.chart->group(), irreps_path);
    pairs = left ? left_eigenpairs(m.conv->kernel, table, /*materialize=*/false)
                 : right_eigenpairs(m.conv->kernel, table, /*materialize=*/false);
  } else {
    pairs = left ? dense_left_eigenpairs(*m.full) : dense_right_eigenpairs(*m.full);
  }
  sort_pairs(pairs);
  return pairs;
}

void run_eig(const std::string& model_path, const std::string& out, bool left,
             const std::string& irreps_path) {
  LoadedModel m = load_model(model_path);
  std::vector<EigenPair> pairs = model_eigenpairs(m, left, irreps_path);
  write_eigenvalue_csv(out, pairs);
  std::printf("wrote %zu eigenvalues: %s\n", pairs.size(), out.c_str());
}

void run_srr(const std::string& model_path, const std::string& test_path, const std::string& out,
             const std::string& irreps_path) {
  LoadedModel m = load_model(model_path);
  LoadedData d = load_dataset(test_path);
  const SnapshotDataset& split = eval_split(d);
  std::vector<EigenPair> pairs = model_eigenpairs(m, /*left=*/true, irreps_path);
  // Dense pairs never touch the table; a trivial one stands in for models
  // whose group carries no built-in irreps.
  IrrepTable table = m.conv ? table_for(m.conv->kernel.chart->group(), irreps_path)
                            : IrrepTable::canonical_abelian(cyclic_product_group({1}));
  SrrReport report = srr_report(pairs, split, table, test_path);
  write_eigenvalue_csv(out, report);
  std::printf("wrote %zu srr entries: %s\n", report.entries.size(), out.c_str());
}

void run_rollout(const std::string& model_path, const std::string& test_path, int steps,
                 const std::string& out, const std::string& mode_str,
                 const std::string& irreps_path) {
  require_input(steps >= 1, "bad_steps", "--steps must be at least 1");
  const RolloutMode mode = rollout_mode_from_string(mode_str);
  LoadedModel m = load_model(model_path);
  LoadedData d = load_dataset(test_path);
  const SnapshotDataset& split = eval_split(d);
  std::vector<StateField> truth = truth_states(split);
  require_input(steps <= static_cast<int>(truth.size()), "bad_steps",
                "--steps exceeds the " + std::to_string(truth.size()) +
                    " ground-truth steps in the data");
  RolloutResult rr;
  if (m.conv) {
    IrrepTable table = table_for(m.conv->kernel.chart->group(), irreps_path);
    rr = rollout(*m.conv, table, split.y.front(), steps, mode);
  } else {
    rr = rollout(*m.full, split.y.front(), steps, mode);
  }
  std::vector<double> err = rollout_error(rr.states, truth);
  write_rollout_csv(out, err);
  double mean = 0.0;
  for (double e : err) mean += e;
  if (!err.empty()) mean /= static_cast<double>(err.size());
  std::printf("wrote %zu rollout steps: %s (mean_rel_error=%.6e%s)\n", err.size(), out.c_str(),
              mean, rr.truncated ? ", truncated" : "");
}

void run_compare_cmd(const std::string& config_path, const std::string& preset,
                     const std::string& out_dir) {
  ExperimentConfig cfg = config_from(config_path, preset);
  std::string summary = run_compare(cfg, out_dir);
  std::fputs(summary.c_str(), stdout);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"group-convolutional EDMD toolkit"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (0: all cores)")
      ->capture_default_str();

  std::string config_path, preset, out, data_path, model_path, test_path, irreps_path;
  std::string mode = "conv";
  std::string rollout_mode = "observable";
  TrainOptions opts;
  bool left = false;
  int steps = 0;

  CLI::App* simulate = app.add_subcommand("simulate", "generate a train/test dataset");
  simulate->add_option("--config", config_path, "experiment config JSON");
  simulate->add_option("--preset", preset, "built-in config name");
  simulate->add_option("--out", out, "output dataset file")->required();

  CLI::App* train = app.add_subcommand("train", "fit a model on a dataset");
  train->add_option("--data", data_path, "dataset file")->required();
  train->add_option("--out", out, "output model file")->required();
  train->add_option("--mode", mode, "conv | full")->capture_default_str();
  train->add_option("--rcond", opts.rcond, "pseudoinverse cutoff")->capture_default_str();
  train->add_option("--ridge", opts.ridge, "Tikhonov strength")->capture_default_str();
  train->add_option("--full-cap", opts.full_cap, "refuse --mode full above this state size")
      ->capture_default_str();
  train->add_option("--irreps", irreps_path, "irrep table JSON for table-backed groups");

  CLI::App* eig = app.add_subcommand("eig", "eigenvalues of a trained model");
  eig->add_option("--model", model_path, "model file")->required();
  eig->add_option("--out", out, "output CSV")->required();
  eig->add_flag("--left", left, "left eigenpairs instead of right");
  eig->add_option("--irreps", irreps_path, "irrep table JSON for table-backed groups");

  CLI::App* srr = app.add_subcommand("srr", "eigenpair residuals on held-out data");
  srr->add_option("--model", model_path, "model file")->required();
  srr->add_option("--test", test_path, "dataset file (test split when present)")->required();
  srr->add_option("--out", out, "output CSV")->required();
  srr->add_option("--irreps", irreps_path, "irrep table JSON for table-backed groups");

  CLI::App* rollout = app.add_subcommand("rollout", "multi-step prediction error");
  rollout->add_option("--model", model_path, "model file")->required();
  rollout->add_option("--test", test_path, "dataset file (test split when present)")->required();
  rollout->add_option("--steps", steps, "prediction horizon (>= 1)")->required();
  rollout->add_option("--out", out, "output CSV")->required();
  rollout->add_option("--mode", rollout_mode, "observable | state")->capture_default_str();
  rollout->add_option("--irreps", irreps_path, "irrep table JSON for table-backed groups");

  CLI::App* compare = app.add_subcommand("compare", "conv vs full side-by-side report");
  compare->add_option("--config", config_path, "experiment config JSON");
  compare->add_option("--preset", preset, "built-in config name");
  compare->add_option("--out", out, "output directory")->required();

  try {
    app.parse(argc, argv);
    if (threads > 0) set_num_threads(threads);
    if (simulate->parsed()) {
      run_simulate(config_path, preset, out);
    } else if (train->parsed()) {
      run_train(data_path, out, mode, opts, irreps_path);
    } else if (eig->parsed()) {
      run_eig(model_path, out, left, irreps_path);
    } else if (srr->parsed()) {
      run_srr(model_path, test_path, out, irreps_path);
    } else if (rollout->parsed()) {
      run_rollout(model_path, test_path, steps, out, rollout_mode, irreps_path);
    } else if (compare->parsed()) {
      run_compare_cmd(config_path, preset, out);
    }
    return 0;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error: [usage] %s\n", one_line(e.what()).c_str());
    return 1;
  } catch (const gcedmd::io_error& e) {
    std::fprintf(stderr, "error: [%s] %s\n", e.code().c_str(), one_line(e.what()).c_str());
    return 1;
  } catch (const gcedmd::numeric_error& e) {
    std::fprintf(stderr, "error: [%s] %s\n", e.code().c_str(), one_line(e.what()).c_str());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: [internal] %s\n", one_line(e.what()).c_str());
    return 1;
  }
}
