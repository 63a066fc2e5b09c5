#pragma once

// Shared helpers for the test suites. Oracles here are written from the
// defining formulas with plain loops (or a third-party eigensolver) so they
// stay independent of the library code paths they check.

#include <lapacke.h>

#include <array>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "gcedmd/equivariant.hpp"
#include "gcedmd/gft.hpp"
#include "gcedmd/group.hpp"
#include "gcedmd/observables.hpp"

namespace testsupport {

inline gcedmd::ChartPtr make_chart(gcedmd::GroupPtr group, int nreps) {
  return std::make_shared<gcedmd::OrbitChart>(
      gcedmd::OrbitChart::canonical(std::move(group), nreps));
}

// u^(rho) = sum_g u(g) (x) rho(g), straight from the definition. Channel
// (a, b) of a (rows, cols) function lands in sub-block (a, b) of the
// (rows*d, cols*d) Fourier block.
inline std::vector<Eigen::MatrixXcd> naive_gft(const gcedmd::GroupFunction& u,
                                               const gcedmd::IrrepTable& table) {
  std::vector<Eigen::MatrixXcd> blocks;
  for (int r = 0; r < table.count(); ++r) {
    const int d = table.degree(r);
    Eigen::MatrixXcd block = Eigen::MatrixXcd::Zero(u.rows() * d, u.cols() * d);
    for (int g = 0; g < u.order(); ++g) {
      const Eigen::MatrixXcd rho = table.matrix(r, g);
      for (int a = 0; a < u.rows(); ++a)
        for (int b = 0; b < u.cols(); ++b)
          block.block(a * d, b * d, d, d) += u.at(g, a, b) * rho;
    }
    blocks.push_back(std::move(block));
  }
  return blocks;
}

// (A u)_s(g) = sum_{s', h} A_{s,s'}(h) u_{s'}(h^-1 g), straight from the
// definition.
inline gcedmd::GroupFunction naive_convolve(const gcedmd::ConvKernel& A,
                                            const gcedmd::GroupFunction& u) {
  const gcedmd::GroupPtr& group = A.coeffs.group();
  const int n = group->order(), reps = A.coeffs.rows();
  gcedmd::GroupFunction out(group, reps, u.cols());
  for (int g = 0; g < n; ++g)
    for (int s = 0; s < reps; ++s)
      for (int c = 0; c < u.cols(); ++c) {
        std::complex<double> acc = 0.0;
        for (int h = 0; h < n; ++h) {
          const int hg = group->compose(group->inverse(h), g);
          for (int sp = 0; sp < u.rows(); ++sp)
            acc += A.coeffs.at(h, s, sp) * u.at(hg, sp, c);
        }
        out.at(g, s, c) = acc;
      }
  return out;
}

// Eigenvalues of a dense complex matrix through LAPACK's zgeev, an
// implementation independent of the Eigen solver used by the library.
inline std::vector<std::complex<double>> zgeev_eigenvalues(Eigen::MatrixXcd m) {
  const int n = static_cast<int>(m.rows());
  std::vector<std::complex<double>> w(static_cast<std::size_t>(n));
  const int info = LAPACKE_zgeev(
      LAPACK_COL_MAJOR, 'N', 'N', n, reinterpret_cast<lapack_complex_double*>(m.data()), n,
      reinterpret_cast<lapack_complex_double*>(w.data()), nullptr, n, nullptr, n);
  if (info != 0) throw std::runtime_error("zgeev failed: info " + std::to_string(info));
  return w;
}

// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    auto base = std::filesystem::temp_directory_path();
    for (int i = 0; i < 10000; ++i) {
      auto candidate = base / (tag + "-" + std::to_string(i));
      std::error_code ec;
      if (std::filesystem::create_directory(candidate, ec)) {
        path_ = candidate;
        return;
      }
    }
    throw std::runtime_error("cannot create temp dir for tag " + tag);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string cli_path() {
  if (const char* env = std::getenv("GCEDMD_CLI")) return env;
  return GCEDMD_CLI_PATH;
}

struct CliResult {
  int exit_code = -1;
  std::string out;  // stdout
  std::string err;  // stderr
};

// Runs the CLI with the given argument string; captures stdout and stderr.
inline CliResult run_cli(const std::string& args) {
  TempDir dir("gcedmd-cli-err");
  const std::string err_file = dir.file("stderr.txt").string();
  const std::string cmd = cli_path() + " " + args + " 2>" + err_file;
  CliResult res;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) throw std::runtime_error("popen failed for: " + cmd);
  std::array<char, 4096> buf;
  std::size_t got;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) res.out.append(buf.data(), got);
  const int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  if (FILE* f = std::fopen(err_file.c_str(), "rb")) {
    while ((got = fread(buf.data(), 1, buf.size(), f)) > 0) res.err.append(buf.data(), got);
    std::fclose(f);
  }
  return res;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::string text;
  if (FILE* f = std::fopen(p.string().c_str(), "rb")) {
    std::array<char, 65536> buf;
    std::size_t got;
    while ((got = fread(buf.data(), 1, buf.size(), f)) > 0) text.append(buf.data(), got);
    std::fclose(f);
  }
  return text;
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  FILE* f = std::fopen(p.string().c_str(), "wb");
  if (!f) throw std::runtime_error("cannot write " + p.string());
  fwrite(text.data(), 1, text.size(), f);
  std::fclose(f);
}

inline gcedmd::StateField random_state(const std::vector<int>& dims, int channels,
                                       gcedmd::Rng& rng, double scale = 1.0) {
  gcedmd::StateField y = gcedmd::StateField::zero(dims, channels);
  for (Eigen::Index i = 0; i < y.data.size(); ++i) y.data[i] = scale * rng.normal();
  return y;
}

}  // namespace testsupport
