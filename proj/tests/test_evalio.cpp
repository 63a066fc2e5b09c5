#include <complex>
#include <cstring>
#include <fstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "gcedmd/container.hpp"
#include "gcedmd/edmd.hpp"
#include "gcedmd/equivariant.hpp"
#include "gcedmd/errors.hpp"
#include "gcedmd/evalio.hpp"
#include "gcedmd/group.hpp"
#include "gcedmd/observables.hpp"
#include "gcedmd/rng.hpp"
#include "gcedmd/speceig.hpp"
#include "gcedmd/systems.hpp"
#include "support.hpp"

using namespace gcedmd;
using testsupport::TempDir;

namespace {

using cplx = std::complex<double>;

// Little-endian u64, as the container header writes it.
void append_u64(std::string& s, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

// Assembles a container file from a raw header string and payload bytes.
std::string container_bytes(const std::string& header, const std::string& payload) {
  std::string s = "GCED1";
  append_u64(s, header.size());
  s += header;
  s += payload;
  return s;
}

SnapshotDataset kernel_dataset(const ConvKernel& A, const IrrepTable& table, int count,
                               Rng& rng) {
  SnapshotDataset data;
  data.chart = A.chart;
  for (int i = 0; i < count; ++i) {
    GroupFunction u = GroupFunction::random(A.chart->group(), A.chart->num_reps(), 1, rng);
    data.up.push_back(convolve(A, u, table));
    data.u.push_back(std::move(u));
  }
  return data;
}

Reconstruction identity_recon(int channels) {
  return Reconstruction{Eigen::MatrixXd::Identity(channels, channels),
                        Eigen::VectorXd::Zero(channels), 0.0};
}

// Conv model whose kernel is c * identity: every lifted coordinate is scaled
// by c each step.
ConvEdmdModel scaling_model(double c, GroupPtr group, const IrrepTable& table) {
  auto chart = std::make_shared<OrbitChart>(OrbitChart::canonical(group, 1));
  ConvKernel A = zero_kernel(chart);
  A.coeffs.at(FiniteGroup::identity, 0, 0) = c;
  return ConvEdmdModel{A,
                       gft(A.coeffs, table),
                       ObservableMap::identity(1),
                       identity_recon(1),
                       TrainOptions{},
                       DatasetMeta{},
                       0.0};
}

}  // namespace

TEST_SUITE("evalio") {
  TEST_CASE("tensor container round-trips tensors and metadata bit for bit") {
    TempDir dir("gcedmd-test");
    TensorContainer c;
    c.set_meta(R"({"alpha": 1, "tag": "x"})");
    const std::vector<double> f = {1.0, -2.5, 3.25e-17, 4e300, -0.0, 7.125};
    const std::vector<cplx> z = {{1.5, -2.5}, {0.0, 1e-300}, {-3.0, 4.0}};
    c.put_f64("a/real", {2, 3}, f);
    c.put_c128("b", {3}, z);
    c.save(dir.path() / "t.gced");

    const TensorContainer r = TensorContainer::load(dir.path() / "t.gced");
    CHECK(r.names() == std::vector<std::string>{"a/real", "b"});
    CHECK(r.shape("a/real") == std::vector<std::int64_t>{2, 3});
    CHECK(r.dtype("b") == "c128");
    REQUIRE(r.f64("a/real").size() == f.size());
    CHECK(std::memcmp(r.f64("a/real").data(), f.data(), f.size() * sizeof(double)) == 0);
    REQUIRE(r.c128("b").size() == z.size());
    CHECK(std::memcmp(r.c128("b").data(), z.data(), z.size() * sizeof(cplx)) == 0);
    CHECK(nlohmann::json::parse(r.meta_text()) == nlohmann::json::parse(c.meta_text()));
  }

  TEST_CASE("tensor container rejects malformed put and get calls") {
    TensorContainer c;
    CHECK_THROWS_WITH_AS(c.set_meta("[]"), doctest::Contains("bad_meta"), io_error);
    CHECK_THROWS_WITH_AS(c.set_meta("{ not json"), doctest::Contains("bad_meta"), io_error);
    CHECK_THROWS_WITH_AS(c.put_f64("", {1}, {0.0}), doctest::Contains("bad_tensor"), io_error);
    CHECK_THROWS_WITH_AS(c.put_f64("x", {3}, {0.0}), doctest::Contains("bad_tensor"), io_error);
    CHECK_THROWS_WITH_AS(c.put_f64("x", {-1}, {}), doctest::Contains("bad_shape"), io_error);
    c.put_f64("x", {1}, {2.0});
    CHECK_THROWS_WITH_AS(c.f64("nope"), doctest::Contains("missing_tensor"), io_error);
    CHECK_THROWS_WITH_AS(c.c128("x"), doctest::Contains("bad_dtype"), io_error);
  }

  TEST_CASE("container loading reports distinct corruption causes") {
    TempDir dir("gcedmd-test");
    const auto file = dir.path() / "c.gced";
    TensorContainer c;
    c.put_f64("x", {4}, {1.0, 2.0, 3.0, 4.0});
    c.save(file);
    std::string good = testsupport::read_file(file);

    CHECK_THROWS_WITH_AS(TensorContainer::load(dir.path() / "absent.gced"),
                         doctest::Contains("file_not_found"), io_error);

    std::string bad = good;
    bad[0] = 'X';
    testsupport::write_file(file, bad);
    CHECK_THROWS_WITH_AS(TensorContainer::load(file), doctest::Contains("bad_magic"), io_error);

    testsupport::write_file(file, good.substr(0, good.size() - 9));
    CHECK_THROWS_WITH_AS(TensorContainer::load(file), doctest::Contains("truncated"), io_error);

    testsupport::write_file(file, container_bytes("this is not json", ""));
    CHECK_THROWS_WITH_AS(TensorContainer::load(file), doctest::Contains("bad_header"), io_error);

    testsupport::write_file(
        file, container_bytes(R"({"meta": {}, "tensors": [{"name": "x", "dtype": "f32",)"
                              R"( "shape": [1], "offset": 0}]})",
                              std::string(8, '\0')));
    CHECK_THROWS_WITH_AS(TensorContainer::load(file), doctest::Contains("bad_dtype"), io_error);

    testsupport::write_file(
        file, container_bytes(R"({"meta": {}, "tensors": [)"
                              R"({"name": "x", "dtype": "f64", "shape": [2], "offset": 0},)"
                              R"({"name": "y", "dtype": "f64", "shape": [2], "offset": 8}]})",
                              std::string(24, '\0')));
    CHECK_THROWS_WITH_AS(TensorContainer::load(file), doctest::Contains("overlap"), io_error);

    testsupport::write_file(
        file, container_bytes(R"({"meta": {}, "tensors": [{"name": "x", "dtype": "f64",)"
                              R"( "shape": [4], "offset": 0}]})",
                              std::string(16, '\0')));
    CHECK_THROWS_WITH_AS(TensorContainer::load(file), doctest::Contains("truncated"), io_error);
  }

  TEST_CASE("datasets round-trip through their artifact file") {
    TempDir dir("gcedmd-test");
    SystemConfig cfg;
    cfg.id = "ks";
    cfg.grid = {8, 8};
    cfg.domain = 16.0;
    cfg.dt = 0.2;
    cfg.substeps = 2;
    const ObservableMap obs = ObservableMap::random_feature(3, 1, 77);
    const SnapshotDataset train = generate_dataset(cfg, obs, 4, 0.0, 21, "train_ic");
    const SnapshotDataset test = generate_dataset(cfg, obs, 2, 0.0, 22, "test_ic");
    save_dataset(dir.path() / "d.gced", train, &test);

    const LoadedData back = load_dataset(dir.path() / "d.gced");
    REQUIRE(back.test.has_value());
    CHECK(back.train.size() == 4);
    CHECK(back.test->size() == 2);
    CHECK(back.train.chart->group()->order() == 64);
    CHECK(back.train.chart->num_reps() == 3);
    CHECK(back.train.meta.system == "ks");
    CHECK(back.train.meta.seed == 21);
    CHECK(back.train.meta.dt == cfg.dt);
    REQUIRE(back.train.observables.has_value());
    CHECK(back.train.observables->kind() == ObservableKind::random_feature);
    CHECK(back.train.observables->seed() == 77);
    CHECK((back.train.observables->weights() - obs.weights()).norm() == 0.0);
    for (int i = 0; i < 4; ++i) {
      CHECK((back.train.u[i].values() - train.u[i].values()).norm() == 0.0);
      CHECK((back.train.up[i].values() - train.up[i].values()).norm() == 0.0);
      CHECK((back.train.y[i].data - train.y[i].data).norm() == 0.0);
      CHECK((back.train.yp[i].data - train.yp[i].data).norm() == 0.0);
    }
    CHECK((back.test->u[1].values() - test.u[1].values()).norm() == 0.0);
  }

  TEST_CASE("conv models round-trip with a rebuilt irrep table for cyclic groups") {
    TempDir dir("gcedmd-test");
    GroupPtr group = cyclic_product_group({6});
    const IrrepTable table = IrrepTable::canonical_abelian(group);
    auto chart = std::make_shared<OrbitChart>(OrbitChart::canonical(group, 2));
    Rng rng(31, "conv_model");
    const ConvKernel truth = random_kernel(chart, rng);
    SnapshotDataset data = kernel_dataset(truth, table, 30, rng);
    data.meta.system = "synthetic";
    data.meta.pair_kind = "generator";
    ConvEdmdModel model = train_conv(data, table);
    model.observables = ObservableMap::identity(2);
    model.recon = identity_recon(2);
    save_model(dir.path() / "m.gced", model, 12.5);

    const LoadedModel back = load_model(dir.path() / "m.gced");
    REQUIRE(back.conv.has_value());
    CHECK(!back.full.has_value());
    REQUIRE(back.table.has_value());
    CHECK(back.table->count() == 6);
    CHECK((back.conv->kernel.coeffs.values() - model.kernel.coeffs.values()).norm() == 0.0);
    CHECK(back.conv->train_loss == model.train_loss);
    CHECK(back.conv->options.rcond == model.options.rcond);
    CHECK(back.conv->meta.pair_kind == "generator");
    REQUIRE(back.conv->recon.has_value());
    CHECK((back.conv->recon->R - model.recon->R).norm() == 0.0);
    REQUIRE(back.conv->observables.has_value());
    CHECK(back.conv->observables->kind() == ObservableKind::identity);
  }

  TEST_CASE("models over table-backed groups round-trip without an irrep table") {
    TempDir dir("gcedmd-test");
    auto [group, table] = dihedral_group_d4();
    auto chart = std::make_shared<OrbitChart>(OrbitChart::canonical(group, 2));
    Rng rng(5, "d4_model");
    ConvEdmdModel model{random_kernel(chart, rng), FourierBlocks{}, std::nullopt, std::nullopt,
                        TrainOptions{},            DatasetMeta{},   0.0};
    model.fourier = gft(model.kernel.coeffs, table);
    save_model(dir.path() / "m.gced", model);
    const LoadedModel back = load_model(dir.path() / "m.gced");
    REQUIRE(back.conv.has_value());
    CHECK(!back.table.has_value());
    CHECK((back.conv->kernel.coeffs.values() - model.kernel.coeffs.values()).norm() == 0.0);
    CHECK(back.conv->kernel.chart->group()->order() == 8);
  }

  TEST_CASE("full models round-trip exactly") {
    TempDir dir("gcedmd-test");
    GroupPtr group = cyclic_product_group({4});
    const IrrepTable table = IrrepTable::canonical_abelian(group);
    auto chart = std::make_shared<OrbitChart>(OrbitChart::canonical(group, 1));
    Rng rng(9, "full_model");
    Eigen::MatrixXcd M(4, 4);
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) M(r, c) = cplx(rng.normal(), rng.normal());
    SnapshotDataset data;
    data.chart = chart;
    for (int i = 0; i < 10; ++i) {
      GroupFunction u = GroupFunction::random(group, 1, 1, rng);
      data.up.push_back(unflatten(M * flatten(u, *chart), chart));
      data.u.push_back(std::move(u));
    }
    const FullEdmdModel model = train_full(data);
    save_model(dir.path() / "f.gced", model, 3.0);
    const LoadedModel back = load_model(dir.path() / "f.gced");
    REQUIRE(back.full.has_value());
    CHECK(!back.conv.has_value());
    CHECK((back.full->matrix - model.matrix).norm() == 0.0);
    CHECK(back.full->train_loss == model.train_loss);
    CHECK(back.full->chart->set_size() == 4);
  }

  TEST_CASE("eigenvalue matching pairs spectra up to a tolerance") {
    const std::vector<cplx> a = {{1.0, 0.0}, {0.0, 1.0}};
    const std::vector<cplx> b = {{0.0, 1.0 + 1e-9}, {1.0, 0.0}};
    CHECK(eigenvalues_match(a, b, 1e-8));
    CHECK(!eigenvalues_match(a, b, 1e-10));
    CHECK(!eigenvalues_match(a, {{1.0, 0.0}}, 1.0));  // length mismatch
    CHECK(eigenvalues_match({}, {}, 0.0));

    // A greedy nearest match fails here; only the crossed pairing works.
    const std::vector<cplx> c = {{0.0, 0.0}, {1.0, 0.0}};
    const std::vector<cplx> d = {{0.4, 0.0}, {-0.4, 0.0}};
    CHECK(eigenvalues_match(c, d, 0.6 + 1e-12));
    CHECK(!eigenvalues_match(c, d, 0.5));

    CHECK(eigenvalue_pairing_distance({{0.0, 0.0}, {2.0, 0.0}}, {{2.0, 0.0}, {1.0, 0.0}}) ==
          doctest::Approx(1.0).epsilon(1e-12));
    Rng rng(12, "perm");
    std::vector<cplx> big, shuffled;
    for (int i = 0; i < 12; ++i) big.push_back({rng.normal(), rng.normal()});
    shuffled = big;
    std::reverse(shuffled.begin(), shuffled.end());
    std::swap(shuffled[0], shuffled[5]);
    CHECK(eigenvalue_pairing_distance(big, shuffled) == 0.0);
    CHECK_THROWS_WITH_AS(eigenvalue_pairing_distance(big, {{0.0, 0.0}}),
                         doctest::Contains("size_mismatch"), io_error);
  }

  TEST_CASE("leading agreement distance compares dominant spectra") {
    const std::vector<cplx> a = {{2.0, 0.0}, {1.0, 0.0}, {0.5, 0.0}};
    const std::vector<cplx> b = {{2.1, 0.0}, {1.0, 0.0}};
    CHECK(leading_agreement_distance(a, b, 1) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(leading_agreement_distance(a, b, 2) == doctest::Approx(0.1).epsilon(1e-12));
    // With n past both lengths the 0.5 tail must find its nearest neighbour.
    CHECK(leading_agreement_distance(a, b, 10) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(leading_agreement_distance(a, a, 3) == 0.0);
    CHECK_THROWS_WITH_AS(leading_agreement_distance({}, b, 1),
                         doctest::Contains("size_mismatch"), io_error);
    CHECK_THROWS_WITH_AS(leading_agreement_distance(a, b, 0),
                         doctest::Contains("size_mismatch"), io_error);
  }

  TEST_CASE("left eigenpairs of the generating kernel have zero residual ratio") {
    GroupPtr group = cyclic_product_group({6});
    const IrrepTable table = IrrepTable::canonical_abelian(group);
    auto chart = std::make_shared<OrbitChart>(OrbitChart::canonical(group, 2));
    Rng rng(44, "srr");
    const ConvKernel A = random_kernel(chart, rng);
    const SnapshotDataset test = kernel_dataset(A, table, 12, rng);
    const std::vector<EigenPair> pairs = left_eigenpairs(A, table, false);
    REQUIRE(pairs.size() == 12);

    const SrrReport rep = srr_report(pairs, test, table, "test_0");
    CHECK(rep.test_id == "test_0");
    REQUIRE(rep.entries.size() == pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      CHECK(rep.entries[i].srr_percent <= 1e-10);
      CHECK(rep.entries[i].value == pairs[i].value);
      CHECK(rep.entries[i].irrep == pairs[i].tag.irrep);
    }

    // Shifting one eigenvalue by delta must raise srr to exactly
    // 100 |delta|^2 mean|f|^2 / mean|f|^2 = 100 |delta|^2.
    EigenPair off = pairs[3];
    off.value += 0.3;
    CHECK(srr(off, test, table) == doctest::Approx(9.0).epsilon(1e-6));
  }

  TEST_CASE("srr rejects right pairs and flags vanishing eigenfunctions") {
    GroupPtr group = cyclic_product_group({6});
    const IrrepTable table = IrrepTable::canonical_abelian(group);
    auto chart = std::make_shared<OrbitChart>(OrbitChart::canonical(group, 1));
    SnapshotDataset test;
    test.chart = chart;
    GroupFunction flat(group, 1, 1);
    flat.values().setOnes();  // only the trivial-irrep block is nonzero
    test.u = {flat, flat};
    test.up = {flat, flat};

    EigenPair p;
    p.left = true;
    p.value = 0.5;
    p.tag = {1, 0, 0};
    p.fourier = Eigen::VectorXcd::Ones(1);
    CHECK_THROWS_WITH_AS(srr(p, test, table), doctest::Contains("degenerate_eigenfunction"),
                         numeric_error);

    p.tag.irrep = 0;
    p.left = false;
    CHECK_THROWS_WITH_AS(srr(p, test, table), doctest::Contains("not_left"), io_error);
  }

  TEST_CASE("dense eigenpairs mirror the model matrix spectrum") {
    GroupPtr group = cyclic_product_group({4});
    auto chart = std::make_shared<OrbitChart>(OrbitChart::canonical(group, 1));
    const IrrepTable table = IrrepTable::canonical_abelian(group);
    Rng rng(3, "dense_pairs");
    Eigen::MatrixXcd M(4, 4);
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) M(r, c) = cplx(rng.normal(), rng.normal());
    SnapshotDataset data;
    data.chart = chart;
    for (int i = 0; i < 9; ++i) {
      GroupFunction u = GroupFunction::random(group, 1, 1, rng);
      data.up.push_back(unflatten(M * flatten(u, *chart), chart));
      data.u.push_back(std::move(u));
    }
    const FullEdmdModel model = train_full(data);
    REQUIRE((model.matrix - M).norm() <= 1e-8 * M.norm());

    const std::vector<EigenPair> right = dense_right_eigenpairs(model);
    const std::vector<EigenPair> left = dense_left_eigenpairs(model);
    REQUIRE(right.size() == 4);
    std::vector<cplx> values;
    for (const EigenPair& p : right) {
      values.push_back(p.value);
      CHECK(p.tag.irrep == -1);
      CHECK(!p.left);
      REQUIRE(p.vector.has_value());
      const Eigen::VectorXcd v = flatten(*p.vector, *chart);
      CHECK((model.matrix * v - p.value * v).norm() <= 1e-8 * std::max(1.0, v.norm()));
    }
    CHECK(std::is_sorted(values.begin(), values.end(), [](const cplx& x, const cplx& y) {
      return spectral_order_less(x, y);
    }));
    CHECK(eigenvalues_match(values, testsupport::zgeev_eigenvalues(M), 1e-8));

    for (const EigenPair& p : left) {
      CHECK(p.left);
      REQUIRE(p.vector.has_value());
      const Eigen::VectorXcd v = flatten(*p.vector, *chart);
      CHECK((model.matrix.transpose() * v - p.value * v).norm() <=
            1e-8 * std::max(1.0, v.norm()));
    }
    // On exactly generated pairs every dense left pair has srr ~ 0.
    const SrrReport rep = srr_report(left, data, table);
    for (const SrrEntry& e : rep.entries) {
      CHECK(e.srr_percent <= 1e-8);
      CHECK(e.irrep == -1);
    }
  }

  TEST_CASE("rollout of a scaling kernel follows the closed-form powers") {
    GroupPtr group = cyclic_product_group({4});
    const IrrepTable table = IrrepTable::canonical_abelian(group);
    const ConvEdmdModel model = scaling_model(0.9, group, table);
    Rng rng(8, "rollout");
    StateField y0 = StateField::zero({4}, 1);
    for (int p = 0; p < 4; ++p) y0.at(p, 0) = rng.normal();

    for (RolloutMode mode : {RolloutMode::observable, RolloutMode::state}) {
      const RolloutResult res = rollout(model, table, y0, 5, mode);
      CHECK(!res.truncated);
      REQUIRE(res.states.size() == 5);
      for (int t = 0; t < 5; ++t) {
        const double factor = std::pow(0.9, t + 1);
        for (int p = 0; p < 4; ++p)
          CHECK(res.states[t].at(p, 0) == doctest::Approx(factor * y0.at(p, 0)).epsilon(1e-12));
      }
    }

    // The dense model with the same scaling matrix predicts identically.
    auto chart = std::make_shared<OrbitChart>(OrbitChart::canonical(group, 1));
    const FullEdmdModel dense{chart,
                              0.9 * Eigen::MatrixXcd::Identity(4, 4),
                              ObservableMap::identity(1),
                              identity_recon(1),
                              TrainOptions{},
                              DatasetMeta{},
                              0.0};
    const RolloutResult res = rollout(dense, y0, 5);
    REQUIRE(res.states.size() == 5);
    for (int t = 0; t < 5; ++t)
      CHECK((res.states[t].data - std::pow(0.9, t + 1) * y0.data).norm() <= 1e-12);
  }

  TEST_CASE("rollout stops early when predictions leave the finite range") {
    GroupPtr group = cyclic_product_group({4});
    const IrrepTable table = IrrepTable::canonical_abelian(group);
    const ConvEdmdModel model = scaling_model(10.0, group, table);
    StateField y0 = StateField::zero({4}, 1);
    for (int p = 0; p < 4; ++p) y0.at(p, 0) = 1e300;
    const RolloutResult res = rollout(model, table, y0, 20);
    CHECK(res.truncated);
    CHECK(res.states.size() < 20);
    CHECK(!res.states.empty());
    CHECK(res.states.back().finite());
  }

  TEST_CASE("rollout validates its inputs") {
    GroupPtr group = cyclic_product_group({4});
    const IrrepTable table = IrrepTable::canonical_abelian(group);
    ConvEdmdModel model = scaling_model(0.5, group, table);
    StateField y0 = StateField::zero({4}, 1);
    CHECK_THROWS_WITH_AS(rollout(model, table, y0, 0), doctest::Contains("bad_steps"), io_error);
    model.recon.reset();
    CHECK_THROWS_WITH_AS(rollout(model, table, y0, 3), doctest::Contains("no_reconstruction"),
                         io_error);
    model = scaling_model(0.5, group, table);
    const StateField wrong = StateField::zero({5}, 1);
    CHECK_THROWS_WITH_AS(rollout(model, table, wrong, 3), doctest::Contains("bad_state"),
                         io_error);
    CHECK_THROWS_WITH_AS(rollout_mode_from_string("sideways"),
                         doctest::Contains("bad_rollout_mode"), io_error);
    CHECK(rollout_mode_from_string("observable") == RolloutMode::observable);
    CHECK(to_string(RolloutMode::state) == "state");
  }

  TEST_CASE("rollout error is the per-step relative distance, zipped") {
    StateField t1 = StateField::zero({2}, 1);
    t1.at(0, 0) = 3.0;
    t1.at(1, 0) = 4.0;  // norm 5
    StateField p1 = t1;
    p1.at(0, 0) = 3.0 + 0.5;
    StateField t2 = t1;
    StateField p2 = t2;
    p2.data *= 1.25;
    const std::vector<double> err = rollout_error({p1, p2, p1}, {t1, t2});
    REQUIRE(err.size() == 2);  // zipped to the shorter list
    CHECK(err[0] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(err[1] == doctest::Approx(0.25).epsilon(1e-12));

    StateField zero = StateField::zero({2}, 1);
    const std::vector<double> z = rollout_error({p1}, {zero});
    CHECK(std::isinf(z[0]));
    CHECK(rollout_error({zero}, {zero})[0] == 0.0);
  }

  TEST_CASE("rollout ground truth requires a consecutive window") {
    SystemConfig cfg;
    cfg.id = "ks";
    cfg.grid = {8, 8};
    cfg.domain = 16.0;
    cfg.dt = 0.2;
    cfg.substeps = 2;
    const ObservableMap obs = ObservableMap::identity(1);
    SnapshotDataset data = generate_dataset(cfg, obs, 4, 0.0, 3, "ic");
    const std::vector<StateField> truth = truth_states(data);
    REQUIRE(truth.size() == 4);
    for (int i = 0; i < 4; ++i) CHECK((truth[i].data - data.yp[i].data).norm() == 0.0);

    data.yp[0].at(0, 0) += 1e-12;
    CHECK_THROWS_WITH_AS(truth_states(data), doctest::Contains("not_consecutive"), io_error);
    data.meta.pair_kind = "generator";
    CHECK_THROWS_WITH_AS(truth_states(data), doctest::Contains("bad_pair_kind"), io_error);
  }

  TEST_CASE("csv emitters write exact deterministic text") {
    TempDir dir("gcedmd-test");
    EigenPair p1, p2;
    p1.value = {0.5, -0.25};
    p1.tag = {0, 0, 0};
    p1.degree = 1;
    p2.value = {-1.0, 2.0};
    p2.tag = {3, 1, 0};
    p2.degree = 2;
    const std::vector<EigenPair> pairs = {p1, p2};

    write_eigenvalue_csv(dir.path() / "eig.csv", pairs);
    CHECK(testsupport::read_file(dir.path() / "eig.csv") ==
          "re,im,srr_percent,irrep,degree\n"
          "0.5,-0.25,nan,0,1\n"
          "-1,2,nan,3,2\n");

    const std::vector<double> srr_vals = {12.5, 0.0625};
    write_eigenvalue_csv(dir.path() / "eig2.csv", pairs, &srr_vals);
    CHECK(testsupport::read_file(dir.path() / "eig2.csv") ==
          "re,im,srr_percent,irrep,degree\n"
          "0.5,-0.25,12.5,0,1\n"
          "-1,2,0.0625,3,2\n");
    const std::vector<double> wrong = {1.0};
    CHECK_THROWS_WITH_AS(write_eigenvalue_csv(dir.path() / "bad.csv", pairs, &wrong),
                         doctest::Contains("bad_report"), io_error);

    write_rollout_csv(dir.path() / "roll.csv", {0.25, 0.5});
    CHECK(testsupport::read_file(dir.path() / "roll.csv") ==
          "step,rel_error\n"
          "1,0.25\n"
          "2,0.5\n");

    // Identical inputs must give identical bytes.
    write_rollout_csv(dir.path() / "roll2.csv", {0.25, 0.5});
    CHECK(testsupport::read_file(dir.path() / "roll2.csv") ==
          testsupport::read_file(dir.path() / "roll.csv"));
  }
}
