#include "gcedmd/experiment.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include "gcedmd/errors.hpp"

namespace gcedmd {

using json = nlohmann::json;

namespace {

double wall_ms_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    require_input(ok, "bad_config", "unknown key \"" + key + "\" in " + where);
  }
}

}  // namespace

ExperimentConfig ExperimentConfig::preset(const std::string& name) {
  ExperimentConfig c;
  c.name = name;
  if (name == "spring") {
    c.system.id = "spring";
    c.system.grid = {2};
    c.system.dt = 1.0;
    c.observables = {ObservableKind::identity, 4};
    c.evaluation = {64, 64, 64, 0, RolloutMode::observable};
    return c;
  }
  if (name == "ks-small" || name == "ks-large") {
    c.system.id = "ks";
    c.system.grid = {16, 16};
    c.system.domain = 3.0 * M_PI;
    c.system.dt = 1.0;
    c.system.substeps = 20;
    // The 20-pair preset records the fully settled wave (slow transients
    // make 200-step rollouts compound); the 300-pair preset keeps a mild
    // approach transient so that one-step generalization differences stay
    // resolved above roundoff (on the settled periodic orbit both models
    // interpolate the test window at ~1e-14 and the comparison is noise).
    c.system.burn_in = name == "ks-small" ? 1500.0 : 600.0;
    c.observables = {ObservableKind::random_feature, 5};
    c.evaluation = {name == "ks-small" ? 20 : 300, 300, 200, 200, RolloutMode::observable};
    // This initial-condition stream settles onto the diagonally traveling
    // wave rather than one of the weakly unstable stationary patterns.
    c.seed = 1;
    return c;
  }
  if (name == "spiral" || name == "spiral-small") {
    const bool small = name == "spiral-small";
    c.system.id = "spiral";
    c.system.grid = small ? std::vector<int>{24, 24} : std::vector<int>{48, 48};
    c.system.domain = 40.0;
    c.system.dt = 0.2;
    c.system.substeps = 4;
    c.system.burn_in = 100.0;
    c.observables = {ObservableKind::random_feature, small ? 8 : 30};
    c.evaluation = small ? Evaluation{60, 60, 30, 30, RolloutMode::observable}
                         : Evaluation{300, 300, 200, 200, RolloutMode::observable};
    c.separate_test_ic = true;
    return c;
  }
  throw io_error("bad_preset",
                 "unknown preset \"" + name +
                     "\" (try spring, ks-small, ks-large, spiral-small, spiral)");
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw io_error("bad_config", std::string("config is not valid JSON: ") + e.what());
  }
  require_input(j.is_object(), "bad_config", "config must be a JSON object");
  reject_unknown_keys(j,
                      {"preset", "name", "seed", "separate_test_ic", "system", "observables",
                       "training", "evaluation"},
                      "config");

  ExperimentConfig c =
      j.contains("preset") ? preset(j["preset"].get<std::string>()) : ExperimentConfig{};
  c.name = j.value("name", c.name);
  c.seed = j.value("seed", c.seed);
  c.separate_test_ic = j.value("separate_test_ic", c.separate_test_ic);

  if (j.contains("system")) {
    const json& s = j["system"];
    reject_unknown_keys(
        s, {"id", "grid", "domain", "dt", "substeps", "burn_in", "spring_k", "spring_m",
            "ks_linear_only"},
        "system");
    c.system.id = s.value("id", c.system.id);
    c.system.grid = s.value("grid", c.system.grid);
    c.system.domain = s.value("domain", c.system.domain);
    c.system.dt = s.value("dt", c.system.dt);
    c.system.substeps = s.value("substeps", c.system.substeps);
    c.system.burn_in = s.value("burn_in", c.system.burn_in);
    c.system.spring_k = s.value("spring_k", c.system.spring_k);
    c.system.spring_m = s.value("spring_m", c.system.spring_m);
    c.system.ks_linear_only = s.value("ks_linear_only", c.system.ks_linear_only);
  }
  if (j.contains("observables")) {
    const json& o = j["observables"];
    reject_unknown_keys(o, {"kind", "count"}, "observables");
    if (o.contains("kind"))
      c.observables.kind = observable_kind_from_string(o["kind"].get<std::string>());
    c.observables.count = o.value("count", c.observables.count);
  }
  if (j.contains("training")) {
    const json& t = j["training"];
    reject_unknown_keys(t, {"mode", "rcond", "ridge", "full_cap"}, "training");
    c.training.mode = t.value("mode", c.training.mode);
    c.training.rcond = t.value("rcond", c.training.rcond);
    c.training.ridge = t.value("ridge", c.training.ridge);
    c.training.full_cap = t.value("full_cap", c.training.full_cap);
  }
  if (j.contains("evaluation")) {
    const json& e = j["evaluation"];
    reject_unknown_keys(
        e, {"train_count", "window_count", "test_count", "rollout_steps", "rollout_mode"},
        "evaluation");
    c.evaluation.train_count = e.value("train_count", c.evaluation.train_count);
    c.evaluation.window_count = e.value("window_count", c.evaluation.window_count);
    c.evaluation.test_count = e.value("test_count", c.evaluation.test_count);
    c.evaluation.rollout_steps = e.value("rollout_steps", c.evaluation.rollout_steps);
    if (e.contains("rollout_mode"))
      c.evaluation.rollout_mode = rollout_mode_from_string(e["rollout_mode"].get<std::string>());
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require_input(in.good(), "file_not_found", "cannot open config: " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return from_json_text(text.str());
}

std::string ExperimentConfig::to_json() const {
  json j;
  j["name"] = name;
  j["seed"] = seed;
  j["separate_test_ic"] = separate_test_ic;
  j["system"] = {{"id", system.id},
                 {"grid", system.grid},
                 {"domain", system.domain},
                 {"dt", system.dt},
                 {"substeps", system.substeps},
                 {"burn_in", system.burn_in},
                 {"spring_k", system.spring_k},
                 {"spring_m", system.spring_m},
                 {"ks_linear_only", system.ks_linear_only}};
  j["observables"] = {{"kind", to_string(observables.kind)}, {"count", observables.count}};
  j["training"] = {{"mode", training.mode},
                   {"rcond", training.rcond},
                   {"ridge", training.ridge},
                   {"full_cap", training.full_cap}};
  j["evaluation"] = {{"train_count", evaluation.train_count},
                     {"window_count", evaluation.window_count},
                     {"test_count", evaluation.test_count},
                     {"rollout_steps", evaluation.rollout_steps},
                     {"rollout_mode", to_string(evaluation.rollout_mode)}};
  return j.dump(2);
}

void ExperimentConfig::validate() const {
  system.validate();
  require_input(observables.count >= 1, "bad_config", "need at least one observable channel");
  if (observables.kind == ObservableKind::identity)
    require_input(observables.count == system.state_channels(), "bad_config",
                  "identity observables need count == state channels");
  if (observables.kind == ObservableKind::polynomial)
    require_input(system.state_channels() == 1, "bad_config",
                  "polynomial observables need scalar states");
  require_input(training.mode == "conv" || training.mode == "full", "bad_config",
                "training mode must be conv or full");
  require_input(training.rcond >= 0.0 && training.ridge >= 0.0 && training.full_cap >= 1,
                "bad_config", "training settings must be nonnegative");
  const Evaluation& e = evaluation;
  require_input(e.train_count >= 0 && e.window_count >= 0 && e.test_count >= 0 &&
                    e.rollout_steps >= 0,
                "bad_config", "evaluation counts must be nonnegative");
  require_input(e.window_count == 0 || e.train_count <= e.window_count, "bad_config",
                "train_count cannot exceed the recorded window");
}

ObservableMap make_observables(const ExperimentConfig& cfg) {
  const int m = cfg.system.state_channels();
  switch (cfg.observables.kind) {
    case ObservableKind::identity:
      return ObservableMap::identity(m);
    case ObservableKind::polynomial:
      return ObservableMap::polynomial(cfg.observables.count);
    case ObservableKind::random_feature:
      return ObservableMap::random_feature(cfg.observables.count, m, cfg.seed);
  }
  throw io_error("bad_config", "unknown observable kind");
}

namespace {

SnapshotDataset empty_split(const ExperimentConfig& cfg, const ObservableMap& obs) {
  SnapshotDataset d;
  d.chart = std::make_shared<OrbitChart>(
      OrbitChart::canonical(cfg.system.make_group(), obs.channels()));
  d.observables = obs;
  d.meta.system = cfg.system.id;
  d.meta.pair_kind = cfg.system.id == "spring" ? "generator" : "flow";
  d.meta.dt = cfg.system.dt;
  d.meta.seed = cfg.seed;
  return d;
}

}  // namespace

ExperimentData simulate_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const ObservableMap obs = make_observables(cfg);
  const int train_count = cfg.evaluation.train_count;
  const int test_count = cfg.evaluation.test_count;
  const int window = cfg.window();

  ExperimentData out{empty_split(cfg, obs), empty_split(cfg, obs)};
  if (cfg.system.id == "spring") {
    if (train_count > 0)
      out.train = generate_dataset(cfg.system, obs, train_count, 0.0, cfg.seed, "ic");
    if (test_count > 0)
      out.test = generate_dataset(cfg.system, obs, test_count, 0.0, cfg.seed, "ic-test");
  } else if (cfg.separate_test_ic) {
    if (window > 0) {
      SnapshotDataset all =
          generate_dataset(cfg.system, obs, window, cfg.system.burn_in, cfg.seed, "ic");
      out.train = train_count == window || train_count == 0
                      ? std::move(all)
                      : slice(all, 0, train_count);
      if (train_count == 0) out.train = empty_split(cfg, obs);
    }
    if (test_count > 0)
      out.test =
          generate_dataset(cfg.system, obs, test_count, cfg.system.burn_in, cfg.seed, "ic-test");
  } else if (window + test_count > 0) {
    SnapshotDataset all = generate_dataset(cfg.system, obs, window + test_count,
                                           cfg.system.burn_in, cfg.seed, "ic");
    if (train_count > 0) out.train = slice(all, 0, train_count);
    if (test_count > 0) out.test = slice(all, window, test_count);
  }
  const std::string echo = cfg.to_json();
  out.train.meta.config_json = echo;
  out.test.meta.config_json = echo;
  return out;
}

namespace {

json rollout_summary(const std::vector<double>& err, bool truncated) {
  json j;
  j["steps"] = err.size();
  j["truncated"] = truncated;
  if (!err.empty()) {
    double mean = 0.0, biggest = 0.0;
    for (double e : err) {
      mean += e;
      biggest = std::max(biggest, e);
    }
    j["mean_rel_error"] = mean / static_cast<double>(err.size());
    j["max_rel_error"] = biggest;
  }
  return j;
}

std::vector<std::complex<double>> leading_values(const std::vector<EigenPair>& pairs, int k) {
  std::vector<std::complex<double>> v;
  v.reserve(pairs.size());
  for (const EigenPair& p : pairs) v.push_back(p.value);
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
    if (a == b) return false;
    return spectral_order_less(a, b);
  });
  if (static_cast<int>(v.size()) > k) v.resize(static_cast<std::size_t>(k));
  return v;
}

}  // namespace

std::string run_compare(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  cfg.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  require_input(!ec, "file_write", "cannot create output directory: " + out_dir.string());

  json sum;
  sum["config"] = json::parse(cfg.to_json());

  const auto t_sim = std::chrono::steady_clock::now();
  ExperimentData data = simulate_experiment(cfg);
  sum["simulate_wall_ms"] = wall_ms_since(t_sim);
  require_input(data.train.size() > 0 && data.test.size() > 0, "bad_config",
                "comparison needs nonempty train and test splits");
  save_dataset(out_dir / "dataset.gced", data.train, &data.test);

  const GroupPtr& group = data.train.chart->group();
  require_input(!group->cyclic_structure().empty(), "bad_config",
                "comparison is wired for translation (cyclic product) groups");
  const IrrepTable table = IrrepTable::canonical_abelian(group);
  const TrainOptions opts{cfg.training.rcond, cfg.training.ridge, cfg.training.full_cap};
  const bool flow = data.test.meta.pair_kind == "flow";
  const int steps = flow && !data.test.y.empty()
                        ? std::min(cfg.evaluation.rollout_steps, data.test.size())
                        : 0;

  // Convolutional model.
  std::vector<std::complex<double>> conv_spectrum;
  {
    const auto t0 = std::chrono::steady_clock::now();
    ConvEdmdModel conv = train_conv(data.train, table, opts);
    const double wall = wall_ms_since(t0);
    save_model(out_dir / "conv_model.gced", conv, wall);
    json jc;
    jc["wall_ms_train"] = wall;
    jc["train_loss"] = conv.train_loss;
    jc["test_loss"] = empirical_loss(conv, data.test, table);

    const std::vector<EigenPair> right = right_eigenpairs(conv.fourier, table, false);
    for (const EigenPair& p : right) conv_spectrum.push_back(p.value);
    write_eigenvalue_csv(out_dir / "conv_eig.csv", right);
    const std::vector<EigenPair> left = left_eigenpairs(conv.fourier, table, false);
    const SrrReport rep = srr_report(left, data.test, table, cfg.name);
    write_eigenvalue_csv(out_dir / "conv_srr.csv", rep);
    jc["eigenvalues"] = right.size();
    for (const std::complex<double>& v : leading_values(right, 10))
      jc["leading_eigenvalues"].push_back({v.real(), v.imag()});

    if (steps > 0) {
      const RolloutResult rr =
          rollout(conv, table, data.test.y[0], steps, cfg.evaluation.rollout_mode);
      const std::vector<double> err = rollout_error(rr.states, truth_states(data.test));
      write_rollout_csv(out_dir / "conv_rollout.csv", err);
      jc["rollout"] = rollout_summary(err, rr.truncated);
    } else {
      jc["rollout"] = nullptr;
    }
    sum["conv"] = std::move(jc);
  }

  // Unconstrained model on the same data (skipped above the size cap).
  if (data.train.chart->set_size() > opts.full_cap) {
    sum["full"] = {{"skipped", "observable count " +
                                   std::to_string(data.train.chart->set_size()) +
                                   " exceeds full_cap " + std::to_string(opts.full_cap)}};
  } else {
    const auto t0 = std::chrono::steady_clock::now();
    FullEdmdModel full = train_full(data.train, opts);
    const double wall = wall_ms_since(t0);
    save_model(out_dir / "full_model.gced", full, wall);
    json jf;
    jf["wall_ms_train"] = wall;
    jf["train_loss"] = full.train_loss;
    jf["test_loss"] = empirical_loss(full, data.test);

    const std::vector<EigenPair> right = dense_right_eigenpairs(full);
    std::vector<std::complex<double>> full_spectrum;
    for (const EigenPair& p : right) full_spectrum.push_back(p.value);
    write_eigenvalue_csv(out_dir / "full_eig.csv", right);
    const std::vector<EigenPair> left = dense_left_eigenpairs(full);
    const SrrReport rep = srr_report(left, data.test, table, cfg.name);
    write_eigenvalue_csv(out_dir / "full_srr.csv", rep);
    jf["eigenvalues"] = right.size();
    for (const std::complex<double>& v : leading_values(right, 10))
      jf["leading_eigenvalues"].push_back({v.real(), v.imag()});

    if (steps > 0) {
      const RolloutResult rr = rollout(full, data.test.y[0], steps, cfg.evaluation.rollout_mode);
      const std::vector<double> err = rollout_error(rr.states, truth_states(data.test));
      write_rollout_csv(out_dir / "full_rollout.csv", err);
      jf["rollout"] = rollout_summary(err, rr.truncated);
    } else {
      jf["rollout"] = nullptr;
    }
    sum["full"] = std::move(jf);

    if (!conv_spectrum.empty() && !full_spectrum.empty())
      sum["leading_eig_max_distance"] =
          leading_agreement_distance(conv_spectrum, full_spectrum, 10);
  }

  const std::string text = sum.dump(2);
  std::ofstream out(out_dir / "summary.json", std::ios::binary);
  require_input(out.good(), "file_write", "cannot write summary.json");
  out << text << '\n';
  out.flush();
  require_input(out.good(), "file_write", "failed writing summary.json");
  return text;
}

}  // namespace gcedmd
