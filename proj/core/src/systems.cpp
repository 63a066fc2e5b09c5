#include "gcedmd/systems.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <cstring>
#include <map>
#include <mutex>

#include "gcedmd/errors.hpp"
#include "gcedmd/fft.hpp"

namespace gcedmd {

namespace {

std::string double_bits(double x) {
  std::uint64_t b;
  std::memcpy(&b, &x, sizeof(b));
  return std::to_string(b);
}

// Spectral helper state shared by the PDE steppers: signed wavenumbers and
// the 2/3-rule mask for a n1 x n2 grid on a periodic square of side L.
struct SpectralGrid {
  int n1, n2, n;
  Eigen::ArrayXd qx, qy;    // physical wavenumbers 2*pi*k~ / L
  Eigen::ArrayXd q2;        // |q|^2
  Eigen::ArrayXd dealias;   // 1 inside the 2/3 ball, 0 outside
  std::vector<int> dims;

  SpectralGrid(int n1_, int n2_, double L) : n1(n1_), n2(n2_), n(n1_ * n2_), dims{n1_, n2_} {
    qx.resize(n);
    qy.resize(n);
    q2.resize(n);
    dealias.resize(n);
    for (int a = 0; a < n1; ++a) {
      const int ka = a <= n1 / 2 ? a : a - n1;
      // First derivative of a real field must stay real, so the Nyquist
      // column differentiates to zero; the dissipative symbol q2 keeps the
      // true magnitude (a zero there would leave those modes undamped).
      const int ka_dx = 2 * a == n1 ? 0 : ka;
      for (int b = 0; b < n2; ++b) {
        const int kb = b <= n2 / 2 ? b : b - n2;
        const int kb_dx = 2 * b == n2 ? 0 : kb;
        const int p = a * n2 + b;
        qx[p] = 2.0 * M_PI * ka_dx / L;
        qy[p] = 2.0 * M_PI * kb_dx / L;
        const double qxt = 2.0 * M_PI * ka / L, qyt = 2.0 * M_PI * kb / L;
        q2[p] = qxt * qxt + qyt * qyt;
        const bool keep = std::abs(ka) <= n1 / 3 && std::abs(kb) <= n2 / 3;
        dealias[p] = keep ? 1.0 : 0.0;
      }
    }
  }
};

Eigen::ArrayXcd to_spectrum(const StateField& y, int channel, const SpectralGrid& grid) {
  Eigen::ArrayXcd real_field(grid.n);
  for (int p = 0; p < grid.n; ++p) real_field[p] = y.at(p, channel);
  Eigen::ArrayXcd out(grid.n);
  dft(grid.dims, 1, real_field.data(), out.data(), kDftForward);
  return out;
}

void from_spectrum(const Eigen::ArrayXcd& v, StateField& y, int channel,
                   const SpectralGrid& grid) {
  Eigen::ArrayXcd field(grid.n);
  dft(grid.dims, 1, v.data(), field.data(), kDftBackward);
  const double scale = 1.0 / grid.n;
  for (int p = 0; p < grid.n; ++p) y.at(p, channel) = field[p].real() * scale;
}

// ETDRK4 tables (contour-integral evaluation of the phi functions) for the
// diagonal linear symbol q^2 - q^4.
struct KsTables {
  SpectralGrid grid;
  bool linear_only;
  double h;
  Eigen::ArrayXd E, E2, Q, f1, f2, f3;

  KsTables(int n1, int n2, double L, double h_, bool linear_only_)
      : grid(n1, n2, L), linear_only(linear_only_), h(h_) {
    const int n = grid.n;
    const Eigen::ArrayXd Lsym = grid.q2 - grid.q2 * grid.q2;
    E = (h * Lsym).exp();
    E2 = (0.5 * h * Lsym).exp();
    Q.setZero(n);
    f1.setZero(n);
    f2.setZero(n);
    f3.setZero(n);
    const int M = 32;
    for (int m = 0; m < M; ++m) {
      const std::complex<double> r = std::polar(1.0, M_PI * (m + 0.5) / M);
      for (int p = 0; p < n; ++p) {
        const std::complex<double> z = h * Lsym[p] + r;
        const std::complex<double> ez = std::exp(z);
        const std::complex<double> z2 = z * z, z3 = z2 * z;
        Q[p] += (h * ((std::exp(z / 2.0) - 1.0) / z)).real();
        f1[p] += (h * ((-4.0 - z + ez * (4.0 - 3.0 * z + z2)) / z3)).real();
        f2[p] += (h * ((2.0 + z + ez * (-2.0 + z)) / z3)).real();
        f3[p] += (h * ((-4.0 - 3.0 * z - z2 + ez * (4.0 - z)) / z3)).real();
      }
    }
    Q /= M;
    f1 /= M;
    f2 /= M;
    f3 /= M;
  }

  // N(v^) = -1/2 F[ |grad y|^2 ], dealiased, with the mean mode pinned to
  // zero (the standard zero-mean gauge; the raw equation drifts linearly in
  // the mean, which carries no information).
  Eigen::ArrayXcd nonlinear(const Eigen::ArrayXcd& v) const {
    const int n = grid.n;
    if (linear_only) return Eigen::ArrayXcd::Zero(n);
    Eigen::ArrayXcd gx = std::complex<double>(0, 1) * grid.qx * v;
    Eigen::ArrayXcd gy = std::complex<double>(0, 1) * grid.qy * v;
    Eigen::ArrayXcd wx(n), wy(n);
    dft(grid.dims, 1, gx.data(), wx.data(), kDftBackward);
    dft(grid.dims, 1, gy.data(), wy.data(), kDftBackward);
    const double scale = 1.0 / n;
    Eigen::ArrayXcd sq(n);
    for (int p = 0; p < n; ++p) {
      const double a = wx[p].real() * scale;
      const double b = wy[p].real() * scale;
      sq[p] = a * a + b * b;
    }
    Eigen::ArrayXcd out(n);
    dft(grid.dims, 1, sq.data(), out.data(), kDftForward);
    out *= -0.5 * grid.dealias;
    out[0] = 0.0;
    return out;
  }

  void substep(Eigen::ArrayXcd& v) const {
    const Eigen::ArrayXcd Nv = nonlinear(v);
    const Eigen::ArrayXcd a = E2 * v + Q * Nv;
    const Eigen::ArrayXcd Na = nonlinear(a);
    const Eigen::ArrayXcd b = E2 * v + Q * Na;
    const Eigen::ArrayXcd Nb = nonlinear(b);
    const Eigen::ArrayXcd c = E2 * a + Q * (2.0 * Nb - Nv);
    const Eigen::ArrayXcd Nc = nonlinear(c);
    v = E * v + Nv * f1 + 2.0 * (Na + Nb) * f2 + Nc * f3;
  }
};

// Strang splitting for the spiraling-wave system: exact Fourier diffusion
// half-steps around a pointwise RK4 reaction step.
struct SpiralTables {
  SpectralGrid grid;
  double h;
  Eigen::ArrayXd Du_half, Dv_half;  // exp(-d q^2 h/2)

  static constexpr double kDu = 0.2;  // 1/5
  static constexpr double kDv = 1.0;

  SpiralTables(int n1, int n2, double L, double h_) : grid(n1, n2, L), h(h_) {
    Du_half = (-kDu * grid.q2 * (h / 2.0)).exp();
    Dv_half = (-kDv * grid.q2 * (h / 2.0)).exp();
  }

  static inline void reaction(double u, double v, double& fu, double& fv) {
    const double amp = u * u + v * v;
    fu = 3.0 * u + (v - u) * amp;
    fv = 3.0 * v - (u + v) * amp;
  }

  void react_rk4(Eigen::ArrayXd& u, Eigen::ArrayXd& v) const {
    for (int p = 0; p < grid.n; ++p) {
      const double u0 = u[p], v0 = v[p];
      double k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v;
      reaction(u0, v0, k1u, k1v);
      reaction(u0 + 0.5 * h * k1u, v0 + 0.5 * h * k1v, k2u, k2v);
      reaction(u0 + 0.5 * h * k2u, v0 + 0.5 * h * k2v, k3u, k3v);
      reaction(u0 + h * k3u, v0 + h * k3v, k4u, k4v);
      u[p] = u0 + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
      v[p] = v0 + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
  }

  void diffuse_half(Eigen::ArrayXd& u, Eigen::ArrayXd& v) const {
    const int n = grid.n;
    Eigen::ArrayXcd cu(n), cv(n), su(n), sv(n);
    for (int p = 0; p < n; ++p) {
      cu[p] = u[p];
      cv[p] = v[p];
    }
    dft(grid.dims, 1, cu.data(), su.data(), kDftForward);
    dft(grid.dims, 1, cv.data(), sv.data(), kDftForward);
    su *= Du_half;
    sv *= Dv_half;
    dft(grid.dims, 1, su.data(), cu.data(), kDftBackward);
    dft(grid.dims, 1, sv.data(), cv.data(), kDftBackward);
    const double scale = 1.0 / n;
    for (int p = 0; p < n; ++p) {
      u[p] = cu[p].real() * scale;
      v[p] = cv[p].real() * scale;
    }
  }

  void substep(Eigen::ArrayXd& u, Eigen::ArrayXd& v) const {
    diffuse_half(u, v);
    react_rk4(u, v);
    diffuse_half(u, v);
  }
};

std::mutex g_tables_mutex;
std::map<std::string, std::shared_ptr<KsTables>> g_ks_tables;
std::map<std::string, std::shared_ptr<SpiralTables>> g_spiral_tables;

std::shared_ptr<KsTables> ks_tables_for(const SystemConfig& cfg) {
  const double h = cfg.dt / cfg.substeps;
  std::string key = std::to_string(cfg.grid[0]) + "," + std::to_string(cfg.grid[1]) + "|" +
                    double_bits(cfg.domain) + "|" + double_bits(h) + "|" +
                    (cfg.ks_linear_only ? "L" : "N");
  std::lock_guard<std::mutex> lock(g_tables_mutex);
  auto it = g_ks_tables.find(key);
  if (it != g_ks_tables.end()) return it->second;
  auto t = std::make_shared<KsTables>(cfg.grid[0], cfg.grid[1], cfg.domain, h,
                                      cfg.ks_linear_only);
  g_ks_tables.emplace(std::move(key), t);
  return t;
}

std::shared_ptr<SpiralTables> spiral_tables_for(const SystemConfig& cfg) {
  const double h = cfg.dt / cfg.substeps;
  std::string key = std::to_string(cfg.grid[0]) + "," + std::to_string(cfg.grid[1]) + "|" +
                    double_bits(cfg.domain) + "|" + double_bits(h);
  std::lock_guard<std::mutex> lock(g_tables_mutex);
  auto it = g_spiral_tables.find(key);
  if (it != g_spiral_tables.end()) return it->second;
  auto t = std::make_shared<SpiralTables>(cfg.grid[0], cfg.grid[1], cfg.domain, h);
  g_spiral_tables.emplace(std::move(key), t);
  return t;
}

StateField ks_step(const StateField& y, const SystemConfig& cfg) {
  auto tables = ks_tables_for(cfg);
  Eigen::ArrayXcd v = to_spectrum(y, 0, tables->grid);
  v[0] = 0.0;  // zero-mean gauge
  for (int k = 0; k < cfg.substeps; ++k) tables->substep(v);
  StateField out = y;
  from_spectrum(v, out, 0, tables->grid);
  return out;
}

StateField spiral_step(const StateField& y, const SystemConfig& cfg) {
  auto tables = spiral_tables_for(cfg);
  const int n = tables->grid.n;
  Eigen::ArrayXd u(n), v(n);
  for (int p = 0; p < n; ++p) {
    u[p] = y.at(p, 0);
    v[p] = y.at(p, 1);
  }
  for (int k = 0; k < cfg.substeps; ++k) tables->substep(u, v);
  StateField out = y;
  for (int p = 0; p < n; ++p) {
    out.at(p, 0) = u[p];
    out.at(p, 1) = v[p];
  }
  return out;
}

// Chart-layout spring state -> physical coordinates (p1..p4, v1..v4).
Eigen::VectorXd spring_to_physical(const StateField& y) {
  Eigen::VectorXd x(8);
  x[0] = y.at(0, 0);  // p1
  x[1] = y.at(0, 1);  // p2
  x[2] = y.at(1, 1);  // p3
  x[3] = y.at(1, 0);  // p4
  x[4] = y.at(0, 2);  // v1
  x[5] = y.at(0, 3);  // v2
  x[6] = y.at(1, 3);  // v3
  x[7] = y.at(1, 2);  // v4
  return x;
}

StateField spring_from_physical(const Eigen::VectorXd& x) {
  StateField y = StateField::zero({2}, 4);
  y.at(0, 0) = x[0];
  y.at(0, 1) = x[1];
  y.at(1, 1) = x[2];
  y.at(1, 0) = x[3];
  y.at(0, 2) = x[4];
  y.at(0, 3) = x[5];
  y.at(1, 3) = x[6];
  y.at(1, 2) = x[7];
  return y;
}

}  // namespace

int SystemConfig::state_channels() const {
  if (id == "ks") return 1;
  if (id == "spiral") return 2;
  if (id == "spring") return 4;
  throw io_error("bad_system", "unknown system id: " + id);
}

GroupPtr SystemConfig::make_group() const {
  return cyclic_product_group(grid);
}

void SystemConfig::validate() const {
  require_input(id == "ks" || id == "spiral" || id == "spring", "bad_system",
                "system id must be ks, spiral or spring");
  require_input(dt > 0.0 && substeps >= 1 && burn_in >= 0.0, "bad_system",
                "time discretization must be positive");
  if (id == "spring") {
    require_input(grid == std::vector<int>{2}, "bad_system", "spring grid must be {2}");
    require_input(spring_k > 0.0 && spring_m > 0.0, "bad_system",
                  "spring constants must be positive");
  } else {
    require_input(grid.size() == 2 && grid[0] >= 4 && grid[1] >= 4, "bad_system",
                  "PDE systems need a 2-d grid of at least 4 points per axis");
    require_input(domain > 0.0, "bad_system", "domain length must be positive");
  }
}

StateField step_system(const StateField& y, const SystemConfig& cfg) {
  cfg.validate();
  require_input(y.npoints() == cfg.make_group()->order() && y.channels == cfg.state_channels(),
                "bad_state", "state shape does not match the system");
  StateField out = cfg.id == "ks"       ? ks_step(y, cfg)
                   : cfg.id == "spiral" ? spiral_step(y, cfg)
                                        : spring_flow(y, cfg.dt, cfg.spring_k, cfg.spring_m);
  require_numeric(out.finite(), "nonfinite_state", "state left the finite range during a step");
  return out;
}

StateField initial_condition(const SystemConfig& cfg, Rng& rng) {
  cfg.validate();
  if (cfg.id == "spring") {
    StateField y = StateField::zero({2}, 4);
    for (int p = 0; p < 2; ++p)
      for (int c = 0; c < 4; ++c) y.at(p, c) = rng.normal();
    return y;
  }
  const int n1 = cfg.grid[0], n2 = cfg.grid[1];
  StateField y = StateField::zero(cfg.grid, cfg.state_channels());
  if (cfg.id == "ks") {
    // Random smooth low-mode field, zero mean; the burn-in carries it onto
    // the attractor (for the preset seeds, a diagonally traveling wave).
    const int kmax = 3;
    std::vector<double> amp, ph;
    for (int ka = -kmax; ka <= kmax; ++ka)
      for (int kb = -kmax; kb <= kmax; ++kb) {
        if (ka == 0 && kb == 0) continue;
        const double decay = 1.0 / (1.0 + ka * ka + kb * kb);
        amp.push_back(0.3 * decay * rng.normal());
        ph.push_back(rng.uniform(0.0, 2.0 * M_PI));
      }
    for (int a = 0; a < n1; ++a)
      for (int b = 0; b < n2; ++b) {
        double val = 0.0;
        std::size_t idx = 0;
        for (int ka = -kmax; ka <= kmax; ++ka)
          for (int kb = -kmax; kb <= kmax; ++kb) {
            if (ka == 0 && kb == 0) continue;
            val += amp[idx] * std::cos(2.0 * M_PI * (ka * a / double(n1) + kb * b / double(n2)) +
                                       ph[idx]);
            ++idx;
          }
        y.at(a * n2 + b, 0) = val;
      }
    double mean = 0.0;
    for (int p = 0; p < n1 * n2; ++p) mean += y.at(p, 0);
    mean /= n1 * n2;
    for (int p = 0; p < n1 * n2; ++p) y.at(p, 0) -= mean;
    return y;
  }
  // Spiral profile u+iv = tanh(r) exp(i(theta - r + phase)), randomly rotated
  // and off-centered; burn-in settles it onto the limit cycle.
  const double phase = rng.uniform(0.0, 2.0 * M_PI);
  const double cx = cfg.domain * (0.5 + 0.1 * rng.uniform(-1.0, 1.0));
  const double cy = cfg.domain * (0.5 + 0.1 * rng.uniform(-1.0, 1.0));
  for (int a = 0; a < n1; ++a)
    for (int b = 0; b < n2; ++b) {
      const double x = cfg.domain * a / n1 - cx;
      const double yy = cfg.domain * b / n2 - cy;
      const double r = std::sqrt(x * x + yy * yy);
      const double th = std::atan2(yy, x);
      y.at(a * n2 + b, 0) = std::tanh(r) * std::cos(th - r + phase);
      y.at(a * n2 + b, 1) = std::tanh(r) * std::sin(th - r + phase);
    }
  return y;
}

Eigen::MatrixXd spring_matrix(double k, double m) {
  require_input(k > 0.0 && m > 0.0, "bad_system", "spring constants must be positive");
  const double c = k / m;
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(8, 8);
  for (int i = 0; i < 4; ++i) K(i, 4 + i) = 1.0;
  for (int i = 0; i < 4; ++i) {
    K(4 + i, i) = -2.0 * c;
    if (i > 0) K(4 + i, i - 1) = c;
    if (i < 3) K(4 + i, i + 1) = c;
  }
  return K;
}

RightAction spring_action() {
  auto z2 = cyclic_product_group({2});
  // Reflection i -> 5-i on masses: p1<->p4, p2<->p3 and the same on
  // velocities, acting on coordinate indices (p1..p4, v1..v4).
  std::vector<std::vector<int>> table(8, std::vector<int>(2));
  const int refl[8] = {3, 2, 1, 0, 7, 6, 5, 4};
  for (int o = 0; o < 8; ++o) {
    table[o][0] = o;
    table[o][1] = refl[o];
  }
  return RightAction::from_table(std::move(z2), std::move(table));
}

ConvKernel spring_kernel(double k, double m) {
  require_input(k > 0.0 && m > 0.0, "bad_system", "spring constants must be positive");
  const double c = k / m;
  auto chart = std::make_shared<OrbitChart>(OrbitChart::canonical(cyclic_product_group({2}), 4));
  ConvKernel A = zero_kernel(chart);
  Eigen::MatrixXcd Ae = Eigen::MatrixXcd::Zero(4, 4), Aa = Eigen::MatrixXcd::Zero(4, 4);
  // Representatives (p1, p2, v1, v2); the reflected copy holds (p4, p3, v4, v3).
  Ae(0, 2) = 1.0;
  Ae(1, 3) = 1.0;
  Ae(2, 0) = -2.0 * c;
  Ae(2, 1) = c;
  Ae(3, 0) = c;
  Ae(3, 1) = -2.0 * c;
  Aa(3, 1) = c;  // dv2/dt picks up c*p3, which lives at (s=1) of the reflected copy
  A.coeffs.set_matrix_at(0, Ae);
  A.coeffs.set_matrix_at(1, Aa);
  return A;
}

StateField spring_flow(const StateField& y, double t, double k, double m) {
  require_input(y.dims == std::vector<int>{2} && y.channels == 4, "bad_state",
                "spring state must be a Z2 field with 4 channels");
  const Eigen::MatrixXd K = spring_matrix(k, m);
  const Eigen::MatrixXd F = (t * K).exp();
  return spring_from_physical(F * spring_to_physical(y));
}

std::vector<std::complex<double>> spring_spectrum(double k, double m) {
  const double c = k / m;
  const double s5 = std::sqrt(5.0);
  std::vector<std::complex<double>> out;
  for (double w2 : {(3.0 - s5) / 2.0, (3.0 + s5) / 2.0, (5.0 - s5) / 2.0, (5.0 + s5) / 2.0}) {
    const double w = std::sqrt(c * w2);
    out.push_back({0.0, w});
    out.push_back({0.0, -w});
  }
  std::sort(out.begin(), out.end(), [](auto a, auto b) {
    if (std::abs(a) != std::abs(b)) return std::abs(a) > std::abs(b);
    return std::arg(a) < std::arg(b);
  });
  return out;
}

SnapshotDataset generate_dataset(const SystemConfig& cfg, const ObservableMap& obs, int count,
                                 double start_time, std::uint64_t seed,
                                 const std::string& ic_label) {
  cfg.validate();
  require_input(count >= 1, "bad_dataset", "need at least one pair");
  require_input(obs.state_channels() == cfg.state_channels(), "bad_observables",
                "observable map does not match the system's channel count");
  GroupPtr group = cfg.make_group();
  auto chart = std::make_shared<OrbitChart>(OrbitChart::canonical(group, obs.channels()));
  SnapshotDataset data;
  data.chart = chart;
  data.observables = obs;
  data.meta.system = cfg.id;
  data.meta.dt = cfg.dt;
  data.meta.seed = seed;
  Rng rng(seed, ic_label);

  if (cfg.id == "spring") {
    require_input(obs.kind() == ObservableKind::identity, "bad_observables",
                  "spring datasets use generator pairs and need identity observables");
    data.meta.pair_kind = "generator";
    const Eigen::MatrixXd K = spring_matrix(cfg.spring_k, cfg.spring_m);
    for (int i = 0; i < count; ++i) {
      StateField y = initial_condition(cfg, rng);
      StateField ydot = spring_from_physical(K * spring_to_physical(y));
      data.u.push_back(obs.lift(y, group));
      data.up.push_back(obs.lift(ydot, group));
      data.y.push_back(std::move(y));
      data.yp.push_back(std::move(ydot));
    }
    return data;
  }

  data.meta.pair_kind = "flow";
  StateField y = initial_condition(cfg, rng);
  const long long lead = std::llround(start_time / cfg.dt);
  for (long long i = 0; i < lead; ++i) y = step_system(y, cfg);
  for (int i = 0; i < count; ++i) {
    StateField yn = step_system(y, cfg);
    data.u.push_back(obs.lift(y, group));
    data.up.push_back(obs.lift(yn, group));
    data.y.push_back(std::move(y));
    data.yp.push_back(yn);
    y = std::move(yn);
  }
  return data;
}

}  // namespace gcedmd
