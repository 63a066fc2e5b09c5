#include "gcedmd/evalio.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <utility>

#include "gcedmd/container.hpp"
#include "gcedmd/errors.hpp"
#include "gcedmd/parallel.hpp"

namespace gcedmd {

using json = nlohmann::json;

// ---------- Eigenpair quality ----------

namespace {

// f(y) = eta^T u^(rho) e_copy for an irrep-tagged left pair.
std::complex<double> fourier_eval(const EigenPair& p, const FourierBlocks& f) {
  const Eigen::MatrixXcd& B = f.blocks[static_cast<std::size_t>(p.tag.irrep)];
  require_input(p.fourier.size() == B.rows() && p.tag.copy < B.cols(), "bad_pair",
                "eigenpair coefficients do not match the lifted snapshot");
  return (p.fourier.transpose() * B.col(p.tag.copy))(0);
}

// f(y) = sum_{s,g} v_s(g) u_s(g) for a pair with time-domain coefficients.
std::complex<double> dense_eval(const GroupFunction& v, const GroupFunction& u) {
  require_input(v.rows() == u.rows() && v.order() == u.order(), "bad_pair",
                "eigenpair coefficients do not match the lifted snapshot");
  return v.values().cwiseProduct(u.values()).sum();
}

}  // namespace

SrrReport srr_report(const std::vector<EigenPair>& pairs, const SnapshotDataset& test,
                     const IrrepTable& table, std::string test_id) {
  require_input(!pairs.empty(), "no_pairs", "srr needs at least one eigenpair");
  test.validate();
  const int N = test.size();
  const int P = static_cast<int>(pairs.size());
  bool any_fourier = false;
  for (const EigenPair& p : pairs) {
    require_input(p.left, "not_left", "srr takes left eigenpairs");
    if (p.tag.irrep >= 0) {
      require_input(p.tag.irrep < table.count(), "bad_pair", "pair irrep outside the table");
      any_fourier = true;
    } else {
      require_input(p.vector.has_value(), "bad_pair",
                    "dense pairs need time-domain coefficients");
    }
  }

  // Stream over samples so only one pair of transforms is alive at a time.
  std::vector<double> num(static_cast<std::size_t>(P), 0.0);
  std::vector<double> den(static_cast<std::size_t>(P), 0.0);
  for (int i = 0; i < N; ++i) {
    FourierBlocks fu, fup;
    if (any_fourier) {
      fu = gft(test.u[i], table);
      fup = gft(test.up[i], table);
    }
    parallel_for(P, [&](int p) {
      const EigenPair& pr = pairs[static_cast<std::size_t>(p)];
      std::complex<double> f, fp;
      if (pr.tag.irrep >= 0) {
        f = fourier_eval(pr, fu);
        fp = fourier_eval(pr, fup);
      } else {
        f = dense_eval(*pr.vector, test.u[i]);
        fp = dense_eval(*pr.vector, test.up[i]);
      }
      num[static_cast<std::size_t>(p)] += std::norm(fp - pr.value * f);
      den[static_cast<std::size_t>(p)] += std::norm(f);
    });
  }

  SrrReport rep;
  rep.test_id = std::move(test_id);
  rep.entries.reserve(pairs.size());
  for (int p = 0; p < P; ++p) {
    require_numeric(den[static_cast<std::size_t>(p)] > 0.0, "degenerate_eigenfunction",
                    "candidate eigenfunction vanishes on the whole test set");
    rep.entries.push_back({pairs[static_cast<std::size_t>(p)].value,
                           100.0 * num[static_cast<std::size_t>(p)] /
                               den[static_cast<std::size_t>(p)],
                           pairs[static_cast<std::size_t>(p)].tag.irrep,
                           pairs[static_cast<std::size_t>(p)].degree});
  }
  return rep;
}

double srr(const EigenPair& pair, const SnapshotDataset& test, const IrrepTable& table) {
  return srr_report({pair}, test, table).entries[0].srr_percent;
}

namespace {

std::vector<EigenPair> dense_pairs(const FullEdmdModel& model, bool left) {
  require_input(model.matrix.rows() == model.matrix.cols() && model.matrix.rows() >= 1,
                "bad_model", "dense model matrix must be square");
  require_input(static_cast<bool>(model.chart), "bad_model", "dense model needs an orbit chart");
  Eigen::MatrixXcd M = model.matrix;
  if (left) M.transposeInPlace();
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(M, true);
  require_numeric(es.info() == Eigen::Success, "eigensolver_failed",
                  "dense eigensolver did not converge");
  const Eigen::Index n = M.rows();
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (es.eigenvalues()[a] == es.eigenvalues()[b]) return false;
    return spectral_order_less(es.eigenvalues()[a], es.eigenvalues()[b]);
  });
  std::vector<EigenPair> out;
  out.reserve(static_cast<std::size_t>(n));
  for (std::size_t rank = 0; rank < idx.size(); ++rank) {
    const int i = idx[rank];
    EigenPair p;
    p.value = es.eigenvalues()[i];
    p.tag = {-1, static_cast<int>(rank), 0};
    p.degree = 1;
    p.left = left;
    Eigen::VectorXcd x = es.eigenvectors().col(i);
    p.residual = (M * x - p.value * x).norm() / x.norm();
    p.ok = p.residual <= kEigenResidualTol;
    x /= x.norm();
    normalize_phase(x);
    p.fourier = x;  // flat C^O coordinates for dense pairs
    p.vector = unflatten(x, model.chart);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

std::vector<EigenPair> dense_right_eigenpairs(const FullEdmdModel& model) {
  return dense_pairs(model, false);
}

std::vector<EigenPair> dense_left_eigenpairs(const FullEdmdModel& model) {
  return dense_pairs(model, true);
}

bool eigenvalues_match(const std::vector<std::complex<double>>& a,
                       const std::vector<std::complex<double>>& b, double tol) {
  if (a.size() != b.size()) return false;
  const int n = static_cast<int>(a.size());
  if (n == 0) return true;

  // Candidates for a_i are the b_j within tol in real part (sorted window).
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    return std::make_pair(b[static_cast<std::size_t>(x)].real(),
                          b[static_cast<std::size_t>(x)].imag()) <
           std::make_pair(b[static_cast<std::size_t>(y)].real(),
                          b[static_cast<std::size_t>(y)].imag());
  });
  std::vector<double> re(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) re[static_cast<std::size_t>(j)] = b[order[j]].real();

  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto lo = std::lower_bound(re.begin(), re.end(), a[static_cast<std::size_t>(i)].real() - tol);
    const auto hi = std::upper_bound(re.begin(), re.end(), a[static_cast<std::size_t>(i)].real() + tol);
    for (auto it = lo; it != hi; ++it) {
      const int j = order[static_cast<std::size_t>(it - re.begin())];
      if (std::abs(a[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(j)]) <= tol)
        adj[static_cast<std::size_t>(i)].push_back(j);
    }
  }

  // Kuhn's augmenting-path matching.
  std::vector<int> match_b(static_cast<std::size_t>(n), -1);
  std::vector<char> seen;
  std::function<bool(int)> augment = [&](int i) -> bool {
    for (int j : adj[static_cast<std::size_t>(i)]) {
      if (seen[static_cast<std::size_t>(j)]) continue;
      seen[static_cast<std::size_t>(j)] = 1;
      if (match_b[static_cast<std::size_t>(j)] < 0 || augment(match_b[static_cast<std::size_t>(j)])) {
        match_b[static_cast<std::size_t>(j)] = i;
        return true;
      }
    }
    return false;
  };
  for (int i = 0; i < n; ++i) {
    seen.assign(static_cast<std::size_t>(n), 0);
    if (!augment(i)) return false;
  }
  return true;
}

double eigenvalue_pairing_distance(const std::vector<std::complex<double>>& a,
                                   const std::vector<std::complex<double>>& b) {
  require_input(a.size() == b.size(), "size_mismatch",
                "pairing distance needs equal-length spectra");
  if (a.empty()) return 0.0;
  double hi = 0.0;
  for (const auto& x : a)
    for (const auto& y : b) hi = std::max(hi, std::abs(x - y));
  if (eigenvalues_match(a, b, 0.0)) return 0.0;
  double lo = 0.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (eigenvalues_match(a, b, mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

double leading_agreement_distance(const std::vector<std::complex<double>>& a,
                                  const std::vector<std::complex<double>>& b, int n) {
  require_input(!a.empty() && !b.empty(), "size_mismatch",
                "leading agreement needs two nonempty spectra");
  require_input(n >= 1, "size_mismatch", "leading agreement needs n >= 1");
  const auto by_modulus = [](const std::complex<double>& x, const std::complex<double>& y) {
    if (std::abs(x) != std::abs(y)) return std::abs(x) > std::abs(y);
    if (x.real() != y.real()) return x.real() < y.real();
    return x.imag() < y.imag();
  };
  const auto one_sided = [&](const std::vector<std::complex<double>>& lead,
                             const std::vector<std::complex<double>>& pool) {
    std::vector<std::complex<double>> top = lead;
    std::sort(top.begin(), top.end(), by_modulus);
    top.resize(std::min<std::size_t>(top.size(), static_cast<std::size_t>(n)));
    double worst = 0.0;
    for (const auto& x : top) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& y : pool) best = std::min(best, std::abs(x - y));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(one_sided(a, b), one_sided(b, a));
}

// ---------- Rollout ----------

std::string to_string(RolloutMode m) {
  return m == RolloutMode::observable ? "observable" : "state";
}

RolloutMode rollout_mode_from_string(const std::string& s) {
  if (s == "observable") return RolloutMode::observable;
  if (s == "state") return RolloutMode::state;
  throw io_error("bad_rollout_mode", "rollout mode must be observable or state: " + s);
}

namespace {

void check_rollout_inputs(const std::optional<ObservableMap>& obs,
                          const std::optional<Reconstruction>& recon, const StateField& y0,
                          int order, int nreps, int steps) {
  require_input(steps >= 1, "bad_steps", "rollout needs steps >= 1");
  require_input(obs.has_value() && recon.has_value(), "no_reconstruction",
                "rollout needs the model's observable map and reconstruction");
  require_input(obs->state_channels() == y0.channels, "bad_state",
                "initial state channels do not match the model's observables");
  require_input(y0.npoints() == order, "bad_state",
                "initial state needs one point per group element");
  require_input(obs->channels() == nreps && recon->R.cols() == nreps, "bad_model",
                "observable map and reconstruction do not match the kernel width");
  require_input(y0.finite(), "bad_state", "initial state must be finite");
}

}  // namespace

RolloutResult rollout(const ConvEdmdModel& model, const IrrepTable& table, const StateField& y0,
                      int steps, RolloutMode mode) {
  const GroupPtr& G = model.kernel.chart->group();
  check_rollout_inputs(model.observables, model.recon, y0, G->order(),
                       model.kernel.chart->num_reps(), steps);
  require_input(!model.fourier.blocks.empty(), "no_fourier",
                "model kernel has no Fourier blocks");
  RolloutResult res;
  res.mode = mode;
  res.states.reserve(static_cast<std::size_t>(steps));
  if (mode == RolloutMode::observable) {
    FourierVector uhat = gft(model.observables->lift(y0, G), table);
    for (int t = 0; t < steps; ++t) {
      uhat = fourier_matmul(model.fourier, uhat);
      StateField yt = model.recon->apply(igft(uhat, table), y0.dims);
      if (!yt.finite()) {
        res.truncated = true;
        break;
      }
      res.states.push_back(std::move(yt));
    }
  } else {
    StateField y = y0;
    for (int t = 0; t < steps; ++t) {
      const FourierVector uhat =
          fourier_matmul(model.fourier, gft(model.observables->lift(y, G), table));
      y = model.recon->apply(igft(uhat, table), y0.dims);
      if (!y.finite()) {
        res.truncated = true;
        break;
      }
      res.states.push_back(y);
    }
  }
  return res;
}

RolloutResult rollout(const FullEdmdModel& model, const StateField& y0, int steps,
                      RolloutMode mode) {
  require_input(static_cast<bool>(model.chart), "bad_model", "dense model needs an orbit chart");
  const GroupPtr& G = model.chart->group();
  check_rollout_inputs(model.observables, model.recon, y0, G->order(), model.chart->num_reps(),
                       steps);
  require_input(model.matrix.rows() == model.chart->set_size() &&
                    model.matrix.cols() == model.matrix.rows(),
                "bad_model", "dense matrix does not match the chart");
  RolloutResult res;
  res.mode = mode;
  res.states.reserve(static_cast<std::size_t>(steps));
  if (mode == RolloutMode::observable) {
    Eigen::VectorXcd z = flatten(model.observables->lift(y0, G), *model.chart);
    for (int t = 0; t < steps; ++t) {
      z = model.matrix * z;
      StateField yt = model.recon->apply(unflatten(z, model.chart), y0.dims);
      if (!yt.finite()) {
        res.truncated = true;
        break;
      }
      res.states.push_back(std::move(yt));
    }
  } else {
    StateField y = y0;
    for (int t = 0; t < steps; ++t) {
      const Eigen::VectorXcd z =
          model.matrix * flatten(model.observables->lift(y, G), *model.chart);
      y = model.recon->apply(unflatten(z, model.chart), y0.dims);
      if (!y.finite()) {
        res.truncated = true;
        break;
      }
      res.states.push_back(y);
    }
  }
  return res;
}

std::vector<double> rollout_error(const std::vector<StateField>& pred,
                                  const std::vector<StateField>& truth) {
  const std::size_t n = std::min(pred.size(), truth.size());
  std::vector<double> err;
  err.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    require_input(pred[t].data.size() == truth[t].data.size(), "bad_state",
                  "prediction and truth shapes differ");
    const double den = truth[t].data.norm();
    const double num = (pred[t].data - truth[t].data).norm();
    if (den > 0.0)
      err.push_back(num / den);
    else
      err.push_back(num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  }
  return err;
}

std::vector<StateField> truth_states(const SnapshotDataset& data) {
  require_input(data.meta.pair_kind == "flow", "bad_pair_kind",
                "rollout ground truth needs flow pairs");
  require_input(!data.y.empty() && data.y.size() == data.yp.size(), "no_states",
                "dataset carries no raw states");
  for (std::size_t i = 1; i < data.y.size(); ++i) {
    const bool same = data.y[i].data.size() == data.yp[i - 1].data.size() &&
                      data.y[i].data.cwiseEqual(data.yp[i - 1].data).all();
    require_input(same, "not_consecutive",
                  "dataset pairs are not a consecutive trajectory window");
  }
  return data.yp;
}

// ---------- CSV emitters ----------

namespace {

std::string fmt(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);  // binary: identical bytes everywhere
  require_input(out.good(), "file_write", "cannot open for writing: " + path.string());
  return out;
}

void write_eig_rows(std::ofstream& out, const std::vector<EigenPair>& pairs,
                    const std::vector<double>* srr_percent) {
  out << "re,im,srr_percent,irrep,degree\n";
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const EigenPair& p = pairs[i];
    out << fmt(p.value.real()) << ',' << fmt(p.value.imag()) << ','
        << (srr_percent ? fmt((*srr_percent)[i]) : "nan") << ',' << p.tag.irrep << ','
        << p.degree << '\n';
  }
}

}  // namespace

void write_eigenvalue_csv(const std::filesystem::path& path, const std::vector<EigenPair>& pairs,
                          const std::vector<double>* srr_percent) {
  require_input(!srr_percent || srr_percent->size() == pairs.size(), "bad_report",
                "srr values do not match the pair list");
  std::ofstream out = open_csv(path);
  write_eig_rows(out, pairs, srr_percent);
  out.flush();
  require_input(out.good(), "file_write", "failed writing: " + path.string());
}

void write_eigenvalue_csv(const std::filesystem::path& path, const SrrReport& report) {
  std::ofstream out = open_csv(path);
  out << "re,im,srr_percent,irrep,degree\n";
  for (const SrrEntry& e : report.entries)
    out << fmt(e.value.real()) << ',' << fmt(e.value.imag()) << ',' << fmt(e.srr_percent) << ','
        << e.irrep << ',' << e.degree << '\n';
  out.flush();
  require_input(out.good(), "file_write", "failed writing: " + path.string());
}

void write_rollout_csv(const std::filesystem::path& path, const std::vector<double>& rel_error) {
  std::ofstream out = open_csv(path);
  out << "step,rel_error\n";
  for (std::size_t t = 0; t < rel_error.size(); ++t)
    out << (t + 1) << ',' << fmt(rel_error[t]) << '\n';
  out.flush();
  require_input(out.good(), "file_write", "failed writing: " + path.string());
}

// ---------- Artifact files ----------

namespace {

json group_descriptor(const FiniteGroup& G, TensorContainer& c) {
  json j;
  if (!G.cyclic_structure().empty()) {
    j["kind"] = "cyclic";
    j["orders"] = G.cyclic_structure();
    return j;
  }
  const int n = G.order();
  require_input(n <= 4096, "group_too_large",
                "refusing to store a composition table with order above 4096");
  j["kind"] = "table";
  j["name"] = G.name();
  j["order"] = n;
  std::vector<double> t(static_cast<std::size_t>(n) * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) t[static_cast<std::size_t>(a) * n + b] = G.compose(a, b);
  c.put_f64("group/compose", {n, n}, std::move(t));
  return j;
}

GroupPtr load_group(const json& j, const TensorContainer& c) {
  require_input(j.is_object() && j.contains("kind"), "bad_file", "missing group descriptor");
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "cyclic") return cyclic_product_group(j["orders"].get<std::vector<int>>());
  require_input(kind == "table", "bad_file", "unknown group kind: " + kind);
  const int n = j["order"].get<int>();
  const std::vector<double>& t = c.f64("group/compose");
  require_input(static_cast<std::int64_t>(t.size()) == static_cast<std::int64_t>(n) * n,
                "bad_file", "composition table size mismatch");
  std::vector<std::int32_t> tab(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) tab[i] = static_cast<std::int32_t>(t[i]);
  auto g = std::make_shared<FiniteGroup>(j["name"].get<std::string>(), n, std::move(tab));
  g->validate();
  return g;
}

json chart_descriptor(const OrbitChart& ch, TensorContainer& c) {
  json j;
  j["nreps"] = ch.num_reps();
  if (ch.canonical_form()) {
    j["kind"] = "canonical";
    return j;
  }
  j["kind"] = "action";
  const int no = ch.set_size();
  const int n = ch.group()->order();
  std::vector<double> t(static_cast<std::size_t>(no) * n);
  for (int o = 0; o < no; ++o)
    for (int g = 0; g < n; ++g) t[static_cast<std::size_t>(o) * n + g] = ch.act(o, g);
  c.put_f64("chart/action", {no, n}, std::move(t));
  return j;
}

ChartPtr load_chart(const json& j, const GroupPtr& group, const TensorContainer& c) {
  require_input(j.is_object() && j.contains("kind") && j.contains("nreps"), "bad_file",
                "missing chart descriptor");
  const int nreps = j["nreps"].get<int>();
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "canonical")
    return std::make_shared<OrbitChart>(OrbitChart::canonical(group, nreps));
  require_input(kind == "action", "bad_file", "unknown chart kind: " + kind);
  const std::vector<std::int64_t>& shape = c.shape("chart/action");
  require_input(shape.size() == 2 && shape[1] == group->order(), "bad_file",
                "chart action table does not match the group");
  const int no = static_cast<int>(shape[0]);
  const int n = group->order();
  const std::vector<double>& t = c.f64("chart/action");
  std::vector<std::vector<int>> table(static_cast<std::size_t>(no), std::vector<int>(n));
  for (int o = 0; o < no; ++o)
    for (int g = 0; g < n; ++g)
      table[static_cast<std::size_t>(o)][static_cast<std::size_t>(g)] =
          static_cast<int>(t[static_cast<std::size_t>(o) * n + g]);
  auto chart =
      std::make_shared<OrbitChart>(orbit_chart(RightAction::from_table(group, std::move(table))));
  require_input(chart->num_reps() == nreps, "bad_file",
                "rebuilt chart disagrees with the stored orbit count");
  return chart;
}

json obs_descriptor(const std::optional<ObservableMap>& obs, TensorContainer& c) {
  if (!obs) return json(nullptr);
  json j;
  j["kind"] = to_string(obs->kind());
  j["channels"] = obs->channels();
  j["state_channels"] = obs->state_channels();
  if (obs->kind() == ObservableKind::random_feature) {
    j["seed"] = obs->seed();
    const Eigen::MatrixXd& W = obs->weights();
    std::vector<double> w(static_cast<std::size_t>(W.rows()) * W.cols());
    for (Eigen::Index r = 0; r < W.rows(); ++r)
      for (Eigen::Index cc = 0; cc < W.cols(); ++cc)
        w[static_cast<std::size_t>(r) * W.cols() + cc] = W(r, cc);
    c.put_f64("obs/W", {W.rows(), W.cols()}, std::move(w));
    c.put_f64("obs/b", {obs->bias().size()},
              std::vector<double>(obs->bias().data(), obs->bias().data() + obs->bias().size()));
  }
  return j;
}

std::optional<ObservableMap> load_observables(const json& j) {
  if (j.is_null()) return std::nullopt;
  require_input(j.is_object() && j.contains("kind"), "bad_file", "bad observable descriptor");
  const ObservableKind kind = observable_kind_from_string(j["kind"].get<std::string>());
  const int channels = j["channels"].get<int>();
  const int state_channels = j["state_channels"].get<int>();
  switch (kind) {
    case ObservableKind::identity:
      require_input(channels == state_channels, "bad_file",
                    "identity observables need matching channel counts");
      return ObservableMap::identity(state_channels);
    case ObservableKind::polynomial:
      require_input(state_channels == 1, "bad_file",
                    "polynomial observables need scalar states");
      return ObservableMap::polynomial(channels);
    case ObservableKind::random_feature:
      return ObservableMap::random_feature(channels, state_channels,
                                           j["seed"].get<std::uint64_t>());
  }
  throw io_error("bad_file", "unknown observable kind");
}

json meta_descriptor(const DatasetMeta& m) {
  json j;
  j["system"] = m.system;
  j["pair_kind"] = m.pair_kind;
  j["dt"] = m.dt;
  j["seed"] = m.seed;
  j["config_json"] = m.config_json;
  return j;
}

DatasetMeta load_meta(const json& j) {
  DatasetMeta m;
  m.system = j["system"].get<std::string>();
  m.pair_kind = j["pair_kind"].get<std::string>();
  m.dt = j["dt"].get<double>();
  m.seed = j["seed"].get<std::uint64_t>();
  m.config_json = j["config_json"].get<std::string>();
  return m;
}

void put_split(TensorContainer& c, const std::string& prefix, const SnapshotDataset& d,
               json& j) {
  const int N = d.size();
  const int n = d.chart->group()->order();
  const int S = d.chart->num_reps();
  std::vector<std::complex<double>> u(static_cast<std::size_t>(N) * n * S);
  std::vector<std::complex<double>> up(u.size());
  for (int i = 0; i < N; ++i)
    for (int g = 0; g < n; ++g)
      for (int s = 0; s < S; ++s) {
        const std::size_t at = (static_cast<std::size_t>(i) * n + g) * S + s;
        u[at] = d.u[i].at(g, s);
        up[at] = d.up[i].at(g, s);
      }
  c.put_c128(prefix + "/u", {N, n, S}, std::move(u));
  c.put_c128(prefix + "/up", {N, n, S}, std::move(up));

  const auto put_states = [&](const std::string& name, const std::vector<StateField>& ys) {
    if (ys.empty()) return;
    const int P = ys[0].npoints();
    const int m = ys[0].channels;
    std::vector<double> buf(static_cast<std::size_t>(N) * P * m);
    for (int i = 0; i < N; ++i) {
      require_input(ys[i].npoints() == P && ys[i].channels == m, "bad_dataset",
                    "raw state shapes differ across the dataset");
      for (int pt = 0; pt < P; ++pt)
        for (int ch = 0; ch < m; ++ch)
          buf[(static_cast<std::size_t>(i) * P + pt) * m + ch] = ys[i].at(pt, ch);
    }
    c.put_f64(prefix + "/" + name, {N, P, m}, std::move(buf));
    j["state_dims"] = ys[0].dims;
    j["state_channels"] = m;
  };
  put_states("y", d.y);
  put_states("yp", d.yp);

  j["count"] = N;
  j.update(meta_descriptor(d.meta));
}

SnapshotDataset get_split(const TensorContainer& c, const std::string& prefix, const json& j,
                          const ChartPtr& chart, const std::optional<ObservableMap>& obs) {
  SnapshotDataset d;
  d.chart = chart;
  d.observables = obs;
  d.meta = load_meta(j);
  const int N = j["count"].get<int>();
  const int n = chart->group()->order();
  const int S = chart->num_reps();
  const std::vector<std::int64_t> want{N, n, S};
  require_input(c.shape(prefix + "/u") == want && c.shape(prefix + "/up") == want, "bad_file",
                "lifted tensors do not match the chart");
  const std::vector<std::complex<double>>& u = c.c128(prefix + "/u");
  const std::vector<std::complex<double>>& up = c.c128(prefix + "/up");
  for (int i = 0; i < N; ++i) {
    GroupFunction ui(chart->group(), S, 1), upi(chart->group(), S, 1);
    for (int g = 0; g < n; ++g)
      for (int s = 0; s < S; ++s) {
        const std::size_t at = (static_cast<std::size_t>(i) * n + g) * S + s;
        ui.at(g, s) = u[at];
        upi.at(g, s) = up[at];
      }
    d.u.push_back(std::move(ui));
    d.up.push_back(std::move(upi));
  }

  const auto get_states = [&](const std::string& name, std::vector<StateField>& ys) {
    if (!c.has(prefix + "/" + name)) return;
    const std::vector<int> dims = j["state_dims"].get<std::vector<int>>();
    const int m = j["state_channels"].get<int>();
    const std::vector<double>& buf = c.f64(prefix + "/" + name);
    StateField proto = StateField::zero(dims, m);
    const int P = proto.npoints();
    require_input(c.shape(prefix + "/" + name) == std::vector<std::int64_t>{N, P, m}, "bad_file",
                  "raw state tensor does not match the recorded shape");
    for (int i = 0; i < N; ++i) {
      StateField y = proto;
      for (int pt = 0; pt < P; ++pt)
        for (int ch = 0; ch < m; ++ch)
          y.at(pt, ch) = buf[(static_cast<std::size_t>(i) * P + pt) * m + ch];
      ys.push_back(std::move(y));
    }
  };
  get_states("y", d.y);
  get_states("yp", d.yp);
  if (N > 0) d.validate();
  return d;
}

json parse_meta(const TensorContainer& c) {
  // set_meta validated this as a JSON object already.
  return json::parse(c.meta_text());
}

json recon_descriptor(const std::optional<Reconstruction>& recon, TensorContainer& c) {
  if (!recon) return json(nullptr);
  json j;
  j["fit_mse"] = recon->fit_mse;
  const Eigen::MatrixXd& R = recon->R;
  std::vector<double> r(static_cast<std::size_t>(R.rows()) * R.cols());
  for (Eigen::Index i = 0; i < R.rows(); ++i)
    for (Eigen::Index k = 0; k < R.cols(); ++k)
      r[static_cast<std::size_t>(i) * R.cols() + k] = R(i, k);
  c.put_f64("recon/R", {R.rows(), R.cols()}, std::move(r));
  c.put_f64("recon/c", {recon->c.size()},
            std::vector<double>(recon->c.data(), recon->c.data() + recon->c.size()));
  return j;
}

std::optional<Reconstruction> load_recon(const json& j, const TensorContainer& c) {
  if (j.is_null()) return std::nullopt;
  Reconstruction rec;
  rec.fit_mse = j["fit_mse"].get<double>();
  const std::vector<std::int64_t>& shape = c.shape("recon/R");
  require_input(shape.size() == 2, "bad_file", "reconstruction matrix must be 2-d");
  rec.R.resize(shape[0], shape[1]);
  const std::vector<double>& r = c.f64("recon/R");
  for (Eigen::Index i = 0; i < rec.R.rows(); ++i)
    for (Eigen::Index k = 0; k < rec.R.cols(); ++k)
      rec.R(i, k) = r[static_cast<std::size_t>(i) * rec.R.cols() + k];
  const std::vector<double>& cc = c.f64("recon/c");
  rec.c = Eigen::Map<const Eigen::VectorXd>(cc.data(), static_cast<Eigen::Index>(cc.size()));
  require_input(rec.c.size() == rec.R.rows(), "bad_file",
                "reconstruction offset does not match the matrix");
  return rec;
}

json options_descriptor(const TrainOptions& o) {
  return json{{"rcond", o.rcond}, {"ridge", o.ridge}, {"full_cap", o.full_cap}};
}

TrainOptions load_options(const json& j) {
  TrainOptions o;
  o.rcond = j["rcond"].get<double>();
  o.ridge = j["ridge"].get<double>();
  o.full_cap = j["full_cap"].get<int>();
  return o;
}

}  // namespace

void save_dataset(const std::filesystem::path& path, const SnapshotDataset& train,
                  const SnapshotDataset* test) {
  require_input(static_cast<bool>(train.chart), "bad_dataset", "dataset needs an orbit chart");
  if (train.size() > 0) train.validate();
  if (test) {
    require_input(static_cast<bool>(test->chart) &&
                      test->chart->group()->order() == train.chart->group()->order() &&
                      test->chart->num_reps() == train.chart->num_reps(),
                  "bad_dataset", "train and test splits must share one chart");
    if (test->size() > 0) test->validate();
  }
  TensorContainer c;
  json meta;
  meta["format"] = "dataset";
  meta["group"] = group_descriptor(*train.chart->group(), c);
  meta["chart"] = chart_descriptor(*train.chart, c);
  meta["observables"] = obs_descriptor(train.observables, c);
  meta["train"] = json::object();
  put_split(c, "train", train, meta["train"]);
  if (test) {
    meta["test"] = json::object();
    put_split(c, "test", *test, meta["test"]);
  }
  c.set_meta(meta.dump());
  c.save(path);
}

LoadedData load_dataset(const std::filesystem::path& path) {
  const TensorContainer c = TensorContainer::load(path);
  const json meta = parse_meta(c);
  require_input(meta.contains("format") && meta["format"] == "dataset", "bad_file",
                "not a dataset file: " + path.string());
  const GroupPtr group = load_group(meta["group"], c);
  const ChartPtr chart = load_chart(meta["chart"], group, c);
  const std::optional<ObservableMap> obs = load_observables(meta["observables"]);
  LoadedData out{get_split(c, "train", meta["train"], chart, obs), std::nullopt};
  if (meta.contains("test")) out.test = get_split(c, "test", meta["test"], chart, obs);
  return out;
}

namespace {

json model_meta_common(const DatasetMeta& data, const TrainOptions& opts, double train_loss,
                       double wall_ms) {
  json meta;
  meta["format"] = "model";
  meta["options"] = options_descriptor(opts);
  meta["train_loss"] = train_loss;
  meta["data"] = meta_descriptor(data);
  if (wall_ms >= 0.0) meta["wall_ms"] = wall_ms;
  return meta;
}

}  // namespace

void save_model(const std::filesystem::path& path, const ConvEdmdModel& model, double wall_ms) {
  const ChartPtr& chart = model.kernel.chart;
  require_input(static_cast<bool>(chart), "bad_model", "model needs an orbit chart");
  TensorContainer c;
  json meta = model_meta_common(model.meta, model.options, model.train_loss, wall_ms);
  meta["mode"] = "conv";
  meta["group"] = group_descriptor(*chart->group(), c);
  meta["chart"] = chart_descriptor(*chart, c);
  meta["observables"] = obs_descriptor(model.observables, c);
  meta["recon"] = recon_descriptor(model.recon, c);
  const int n = chart->group()->order();
  const int S = chart->num_reps();
  std::vector<std::complex<double>> k(static_cast<std::size_t>(n) * S * S);
  for (int g = 0; g < n; ++g)
    for (int r = 0; r < S; ++r)
      for (int cc = 0; cc < S; ++cc)
        k[(static_cast<std::size_t>(g) * S + r) * S + cc] = model.kernel.coeffs.at(g, r, cc);
  c.put_c128("kernel", {n, S, S}, std::move(k));
  c.set_meta(meta.dump());
  c.save(path);
}

void save_model(const std::filesystem::path& path, const FullEdmdModel& model, double wall_ms) {
  require_input(static_cast<bool>(model.chart), "bad_model", "model needs an orbit chart");
  TensorContainer c;
  json meta = model_meta_common(model.meta, model.options, model.train_loss, wall_ms);
  meta["mode"] = "full";
  meta["group"] = group_descriptor(*model.chart->group(), c);
  meta["chart"] = chart_descriptor(*model.chart, c);
  meta["observables"] = obs_descriptor(model.observables, c);
  meta["recon"] = recon_descriptor(model.recon, c);
  const Eigen::Index no = model.matrix.rows();
  require_input(model.matrix.cols() == no && no == model.chart->set_size(), "bad_model",
                "dense matrix does not match the chart");
  std::vector<std::complex<double>> m(static_cast<std::size_t>(no) * no);
  for (Eigen::Index i = 0; i < no; ++i)
    for (Eigen::Index jj = 0; jj < no; ++jj)
      m[static_cast<std::size_t>(i) * no + jj] = model.matrix(i, jj);
  c.put_c128("matrix", {no, no}, std::move(m));
  c.set_meta(meta.dump());
  c.save(path);
}

LoadedModel load_model(const std::filesystem::path& path) {
  const TensorContainer c = TensorContainer::load(path);
  const json meta = parse_meta(c);
  require_input(meta.contains("format") && meta["format"] == "model", "bad_file",
                "not a model file: " + path.string());
  const GroupPtr group = load_group(meta["group"], c);
  const ChartPtr chart = load_chart(meta["chart"], group, c);
  const std::optional<ObservableMap> obs = load_observables(meta["observables"]);
  const std::optional<Reconstruction> recon = load_recon(meta["recon"], c);
  const TrainOptions opts = load_options(meta["options"]);
  const DatasetMeta data = load_meta(meta["data"]);
  const double train_loss = meta["train_loss"].get<double>();
  const std::string mode = meta["mode"].get<std::string>();

  LoadedModel out;
  if (!group->cyclic_structure().empty())
    out.table = IrrepTable::canonical_abelian(group);

  if (mode == "conv") {
    const int n = group->order();
    const int S = chart->num_reps();
    require_input(c.shape("kernel") == std::vector<std::int64_t>{n, S, S}, "bad_file",
                  "kernel tensor does not match the chart");
    const std::vector<std::complex<double>>& k = c.c128("kernel");
    ConvKernel kernel{chart, GroupFunction(group, S, S)};
    for (int g = 0; g < n; ++g)
      for (int r = 0; r < S; ++r)
        for (int cc = 0; cc < S; ++cc)
          kernel.coeffs.at(g, r, cc) = k[(static_cast<std::size_t>(g) * S + r) * S + cc];
    FourierKernel fourier;
    if (out.table) fourier = gft(kernel.coeffs, *out.table);
    out.conv = ConvEdmdModel{std::move(kernel), std::move(fourier), obs,
                             recon,             opts,               data,
                             train_loss};
    return out;
  }
  require_input(mode == "full", "bad_file", "unknown model mode: " + mode);
  const int no = chart->set_size();
  require_input(c.shape("matrix") == std::vector<std::int64_t>{no, no}, "bad_file",
                "matrix tensor does not match the chart");
  const std::vector<std::complex<double>>& m = c.c128("matrix");
  Eigen::MatrixXcd M(no, no);
  for (int i = 0; i < no; ++i)
    for (int jj = 0; jj < no; ++jj) M(i, jj) = m[static_cast<std::size_t>(i) * no + jj];
  out.full = FullEdmdModel{chart, std::move(M), obs, recon, opts, data, train_loss};
  return out;
}

}  // namespace gcedmd
