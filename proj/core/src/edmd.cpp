#include "gcedmd/edmd.hpp"

#include <cmath>

#include "gcedmd/errors.hpp"
#include "gcedmd/fft.hpp"
#include "gcedmd/parallel.hpp"

namespace gcedmd {

void SnapshotDataset::validate() const {
  require_input(static_cast<bool>(chart), "bad_dataset", "dataset needs an orbit chart");
  require_input(!u.empty() && u.size() == up.size(), "bad_dataset",
                "dataset needs matching u/up pair lists");
  const int nreps = chart->num_reps();
  const int n = chart->group()->order();
  for (std::size_t i = 0; i < u.size(); ++i) {
    require_input(u[i].rows() == nreps && u[i].cols() == 1 && u[i].order() == n &&
                      up[i].rows() == nreps && up[i].cols() == 1 && up[i].order() == n,
                  "bad_dataset", "lifted pair shape does not match the chart");
    require_numeric(u[i].values().allFinite() && up[i].values().allFinite(), "nonfinite_data",
                    "dataset contains non-finite values");
  }
  require_input(y.empty() || y.size() == u.size(), "bad_dataset",
                "raw state list must match the pair count");
  require_input(yp.empty() || yp.size() == up.size(), "bad_dataset",
                "raw successor list must match the pair count");
}

GroupFunction translate(const GroupFunction& u, int g) {
  const FiniteGroup& G = *u.group();
  const int ginv = G.inverse(g);
  GroupFunction out(u.group(), u.rows(), u.cols());
  for (int h = 0; h < G.order(); ++h) {
    const int src = G.compose(h, ginv);
    for (int c = 0; c < u.channels(); ++c)
      out.values()(h, c) = u.values()(src, c);
  }
  return out;
}

SnapshotDataset subsample(const SnapshotDataset& data, int count) {
  require_input(count >= 1 && count <= data.size(), "bad_dataset",
                "subsample count must be in [1, N]");
  SnapshotDataset out;
  out.chart = data.chart;
  out.observables = data.observables;
  out.meta = data.meta;
  for (int j = 0; j < count; ++j) {
    const int i = static_cast<int>(static_cast<long long>(j) * data.size() / count);
    out.u.push_back(data.u[i]);
    out.up.push_back(data.up[i]);
    if (!data.y.empty()) out.y.push_back(data.y[i]);
    if (!data.yp.empty()) out.yp.push_back(data.yp[i]);
  }
  return out;
}

SnapshotDataset slice(const SnapshotDataset& data, int begin, int count) {
  require_input(begin >= 0 && count >= 1 && begin + count <= data.size(), "bad_dataset",
                "slice range must lie inside the dataset");
  SnapshotDataset out;
  out.chart = data.chart;
  out.observables = data.observables;
  out.meta = data.meta;
  for (int i = begin; i < begin + count; ++i) {
    out.u.push_back(data.u[i]);
    out.up.push_back(data.up[i]);
    if (!data.y.empty()) out.y.push_back(data.y[i]);
    if (!data.yp.empty()) out.yp.push_back(data.yp[i]);
  }
  return out;
}

SnapshotDataset group_augment(const SnapshotDataset& data) {
  data.validate();
  SnapshotDataset out;
  out.chart = data.chart;
  out.observables = data.observables;
  out.meta = data.meta;
  const int n = data.chart->group()->order();
  out.u.reserve(static_cast<std::size_t>(data.size()) * n);
  out.up.reserve(static_cast<std::size_t>(data.size()) * n);
  for (int i = 0; i < data.size(); ++i)
    for (int g = 0; g < n; ++g) {
      out.u.push_back(translate(data.u[i], g));
      out.up.push_back(translate(data.up[i], g));
    }
  return out;
}

ConvEdmdModel train_conv(const SnapshotDataset& data, const IrrepTable& table,
                         const TrainOptions& opts) {
  require_numeric(!data.u.empty(), "empty_data", "cannot train on an empty dataset");
  data.validate();
  require_input(table.group()->order() == data.chart->group()->order(), "bad_dataset",
                "irrep table does not match the dataset's group");
  const int N = data.size();
  const int nreps = data.chart->num_reps();
  const int n = data.chart->group()->order();
  const LsqOptions lsq{opts.rcond, opts.ridge};

  FourierKernel fk;
  fk.group = data.chart->group();
  fk.degrees = table.degrees();
  fk.rows = fk.cols = nreps;
  fk.blocks.resize(fk.degrees.size());
  std::vector<double> block_err(fk.degrees.size(), 0.0);

  if (table.canonical_abelian_form()) {
    // One FFT per sample; irrep k's data block is row k across samples.
    std::vector<Eigen::MatrixXcd> U(N), Up(N);
    for (int i = 0; i < N; ++i) {
      U[i].resize(n, nreps);
      Up[i].resize(n, nreps);
      dft(fk.group->cyclic_structure(), nreps, data.u[i].values().data(), U[i].data(),
          kDftForward);
      dft(fk.group->cyclic_structure(), nreps, data.up[i].values().data(), Up[i].data(),
          kDftForward);
    }
    parallel_for(n, [&](int k) {
      Eigen::MatrixXcd X(nreps, N), Y(nreps, N);
      for (int i = 0; i < N; ++i) {
        X.col(i) = U[i].row(k).transpose();
        Y.col(i) = Up[i].row(k).transpose();
      }
      fk.blocks[k] = solve_left_lsq(X, Y, lsq);
      block_err[k] = (fk.blocks[k] * X - Y).squaredNorm();
    });
  } else {
    std::vector<FourierBlocks> U(N), Up(N);
    for (int i = 0; i < N; ++i) {
      U[i] = gft(data.u[i], table);
      Up[i] = gft(data.up[i], table);
    }
    parallel_for(table.count(), [&](int r) {
      const int d = table.degree(r);
      Eigen::MatrixXcd X(nreps * d, N * d), Y(nreps * d, N * d);
      for (int i = 0; i < N; ++i) {
        X.middleCols(static_cast<Eigen::Index>(i) * d, d) = U[i].blocks[r];
        Y.middleCols(static_cast<Eigen::Index>(i) * d, d) = Up[i].blocks[r];
      }
      fk.blocks[r] = solve_left_lsq(X, Y, lsq);
      block_err[r] = d * (fk.blocks[r] * X - Y).squaredNorm();
    });
  }

  double loss = 0.0;
  for (std::size_t r = 0; r < block_err.size(); ++r) loss += block_err[r];
  loss /= static_cast<double>(N) * n;

  ConvEdmdModel model{ConvKernel{data.chart, igft(fk, table)}, std::move(fk),
                      data.observables, std::nullopt, opts, data.meta, loss};
  if (!data.y.empty()) model.recon = fit_reconstruction(data, lsq);
  return model;
}

FullEdmdModel train_full(const SnapshotDataset& data, const TrainOptions& opts) {
  require_numeric(!data.u.empty(), "empty_data", "cannot train on an empty dataset");
  data.validate();
  const int total = data.chart->set_size();
  require_input(total <= opts.full_cap, "full_cap",
                "full-matrix training refused: |O| = " + std::to_string(total) + " exceeds cap " +
                    std::to_string(opts.full_cap));
  const int N = data.size();
  Eigen::MatrixXcd U(total, N), Up(total, N);
  for (int i = 0; i < N; ++i) {
    U.col(i) = flatten(data.u[i], *data.chart);
    Up.col(i) = flatten(data.up[i], *data.chart);
  }
  const LsqOptions lsq{opts.rcond, opts.ridge};
  Eigen::MatrixXcd K = solve_left_lsq(U, Up, lsq);
  const double loss = (K * U - Up).squaredNorm() / N;
  FullEdmdModel model{data.chart, std::move(K), data.observables,
                      std::nullopt, opts,       data.meta,
                      loss};
  if (!data.y.empty()) model.recon = fit_reconstruction(data, lsq);
  return model;
}

double empirical_loss(const Eigen::MatrixXcd& K, const SnapshotDataset& data) {
  data.validate();
  require_input(K.rows() == data.chart->set_size() && K.cols() == data.chart->set_size(),
                "bad_matrix", "matrix size does not match the dataset's chart");
  double acc = 0.0;
  for (int i = 0; i < data.size(); ++i) {
    const Eigen::VectorXcd x = flatten(data.u[i], *data.chart);
    const Eigen::VectorXcd xp = flatten(data.up[i], *data.chart);
    acc += (K * x - xp).squaredNorm();
  }
  return acc / data.size();
}

double empirical_loss(const EquivariantMatrix& K, const SnapshotDataset& data) {
  return empirical_loss(K.matrix, data);
}

double empirical_loss(const FullEdmdModel& model, const SnapshotDataset& data) {
  return empirical_loss(model.matrix, data);
}

double empirical_loss(const ConvEdmdModel& model, const SnapshotDataset& data,
                      const IrrepTable& table) {
  data.validate();
  require_input(model.fourier.rows == data.chart->num_reps(), "bad_dataset",
                "model and dataset channel counts differ");
  const int n = data.chart->group()->order();
  double acc = 0.0;
  for (int i = 0; i < data.size(); ++i) {
    const FourierBlocks ui = gft(data.u[i], table);
    const FourierBlocks upi = gft(data.up[i], table);
    double sample = 0.0;
    for (std::size_t r = 0; r < ui.blocks.size(); ++r)
      sample +=
          ui.degrees[r] * (model.fourier.blocks[r] * ui.blocks[r] - upi.blocks[r]).squaredNorm();
    acc += sample / n;
  }
  return acc / data.size();
}

Reconstruction fit_reconstruction(const SnapshotDataset& data, const LsqOptions& opts) {
  data.validate();
  require_input(!data.y.empty(), "bad_dataset",
                "reconstruction fit needs raw states in the dataset");
  const int nreps = data.chart->num_reps();
  const int n = data.chart->group()->order();
  const int m = data.y.front().channels;
  const Eigen::Index cols = static_cast<Eigen::Index>(data.size()) * n;
  Eigen::MatrixXd D(nreps + 1, cols), Y(m, cols);
  Eigen::Index col = 0;
  for (int i = 0; i < data.size(); ++i) {
    require_input(data.y[i].npoints() == n && data.y[i].channels == m, "bad_dataset",
                  "raw state shape is inconsistent");
    for (int g = 0; g < n; ++g, ++col) {
      for (int s = 0; s < nreps; ++s) D(s, col) = data.u[i].at(g, s).real();
      D(nreps, col) = 1.0;
      for (int c = 0; c < m; ++c) Y(c, col) = data.y[i].at(g, c);
    }
  }
  const Eigen::MatrixXd R_aug = solve_left_lsq(D, Y, opts);
  Reconstruction rec;
  rec.R = R_aug.leftCols(nreps);
  rec.c = R_aug.col(nreps);
  rec.fit_mse = (R_aug * D - Y).squaredNorm() / static_cast<double>(cols);
  return rec;
}

}  // namespace gcedmd
