#include "gcedmd/equivariant.hpp"

#include <memory>

#include "gcedmd/errors.hpp"

namespace gcedmd {

namespace {

void check_kernel(const ConvKernel& A) {
  require_input(static_cast<bool>(A.chart) && A.coeffs.rows() == A.chart->num_reps() &&
                    A.coeffs.cols() == A.chart->num_reps() &&
                    A.coeffs.order() == A.chart->group()->order(),
                "bad_kernel", "kernel channel shape must be |S| x |S| over the chart's group");
}

}  // namespace

ConvKernel zero_kernel(ChartPtr chart) {
  require_input(static_cast<bool>(chart), "bad_kernel", "kernel needs a chart");
  GroupFunction a(chart->group(), chart->num_reps(), chart->num_reps());
  return {std::move(chart), std::move(a)};
}

ConvKernel random_kernel(ChartPtr chart, Rng& rng) {
  require_input(static_cast<bool>(chart), "bad_kernel", "kernel needs a chart");
  GroupFunction a =
      GroupFunction::random(chart->group(), chart->num_reps(), chart->num_reps(), rng);
  return {std::move(chart), std::move(a)};
}

GroupFunction convolve(const ConvKernel& A, const GroupFunction& u, const IrrepTable& table,
                       ConvPath path) {
  check_kernel(A);
  require_input(u.rows() == A.coeffs.cols() && u.order() == A.coeffs.order(), "bad_kernel",
                "operand channel count must match the kernel");
  if (path == ConvPath::automatic) {
    path = table.canonical_abelian_form() && u.order() >= 16 ? ConvPath::fourier
                                                             : ConvPath::direct;
  }
  if (path == ConvPath::fourier)
    return igft(fourier_matmul(gft(A.coeffs, table), gft(u, table)), table);

  const FiniteGroup& G = *u.group();
  const int n = G.order();
  GroupFunction out(u.group(), A.coeffs.rows(), u.cols());
  for (int h = 0; h < n; ++h) {
    const int hinv = G.inverse(h);
    for (int g = 0; g < n; ++g) {
      const int src = G.compose(hinv, g);
      for (int s = 0; s < A.coeffs.rows(); ++s)
        for (int c = 0; c < u.cols(); ++c) {
          std::complex<double> acc = 0.0;
          for (int sp = 0; sp < A.coeffs.cols(); ++sp)
            acc += A.coeffs.at(h, s, sp) * u.at(src, sp, c);
          out.at(g, s, c) += acc;
        }
    }
  }
  return out;
}

ConvKernel compose_kernels(const ConvKernel& A, const ConvKernel& B) {
  check_kernel(A);
  check_kernel(B);
  require_input(A.chart->group()->order() == B.chart->group()->order() &&
                    A.coeffs.cols() == B.coeffs.rows(),
                "bad_kernel", "kernels are not composable");
  const FiniteGroup& G = *A.coeffs.group();
  const int n = G.order();
  ConvKernel out = zero_kernel(A.chart);
  for (int h = 0; h < n; ++h) {
    const Eigen::MatrixXcd Ah = A.coeffs.matrix_at(h);
    const int hinv = G.inverse(h);
    for (int g = 0; g < n; ++g) {
      const Eigen::MatrixXcd prod = Ah * B.coeffs.matrix_at(G.compose(hinv, g));
      out.coeffs.set_matrix_at(g, out.coeffs.matrix_at(g) + prod);
    }
  }
  return out;
}

ConvKernel transpose_kernel(const ConvKernel& A) {
  check_kernel(A);
  const FiniteGroup& G = *A.coeffs.group();
  ConvKernel out = zero_kernel(A.chart);
  for (int g = 0; g < G.order(); ++g)
    out.coeffs.set_matrix_at(g, A.coeffs.matrix_at(G.inverse(g)).transpose());
  return out;
}

EquivariantMatrix kernel_to_matrix(const ConvKernel& A) {
  check_kernel(A);
  const OrbitChart& chart = *A.chart;
  const FiniteGroup& G = *chart.group();
  const int total = chart.set_size();
  require_input(total <= 8192, "matrix_too_large",
                "dense materialization refused above 8192 rows");
  Eigen::MatrixXcd K(total, total);
  for (int o = 0; o < total; ++o) {
    const auto [s, g] = chart.decompose(o);
    for (int op = 0; op < total; ++op) {
      const auto [sp, h] = chart.decompose(op);
      K(o, op) = A.coeffs.at(G.compose(g, G.inverse(h)), s, sp);
    }
  }
  return {A.chart, std::move(K)};
}

double equivariance_defect(const Eigen::MatrixXcd& K, const OrbitChart& chart) {
  const int total = chart.set_size();
  require_input(K.rows() == total && K.cols() == total, "bad_matrix",
                "matrix size must match the chart's set");
  double defect = 0.0;
  for (int g = 0; g < chart.group()->order(); ++g)
    for (int o = 0; o < total; ++o) {
      const int og = chart.act(o, g);
      for (int op = 0; op < total; ++op)
        defect = std::max(defect, std::abs(K(og, chart.act(op, g)) - K(o, op)));
    }
  return defect;
}

ConvKernel matrix_to_kernel(const EquivariantMatrix& K, double tol) {
  require_input(static_cast<bool>(K.chart), "bad_matrix", "matrix needs a chart");
  const double defect = equivariance_defect(K.matrix, *K.chart);
  require_numeric(defect <= tol, "not_equivariant",
                  "matrix does not commute with the action (defect " + std::to_string(defect) +
                      ")");
  const OrbitChart& chart = *K.chart;
  const FiniteGroup& G = *chart.group();
  ConvKernel out = zero_kernel(K.chart);
  for (int g = 0; g < G.order(); ++g)
    for (int s = 0; s < chart.num_reps(); ++s)
      for (int sp = 0; sp < chart.num_reps(); ++sp)
        out.coeffs.at(g, s, sp) =
            K.matrix(chart.index(s, FiniteGroup::identity), chart.index(sp, G.inverse(g)));
  return out;
}

namespace {

Eigen::MatrixXcd group_average(const Eigen::MatrixXcd& K, int order, int total,
                               const std::function<int(int, int)>& act) {
  Eigen::MatrixXcd avg = Eigen::MatrixXcd::Zero(total, total);
  std::vector<int> perm(total);
  for (int g = 0; g < order; ++g) {
    for (int o = 0; o < total; ++o) perm[o] = act(o, g);
    for (int o = 0; o < total; ++o)
      for (int op = 0; op < total; ++op) avg(o, op) += K(perm[o], perm[op]);
  }
  return avg / static_cast<double>(order);
}

}  // namespace

EquivariantMatrix symmetrize(const Eigen::MatrixXcd& K, const RightAction& action) {
  require_input(K.rows() == action.set_size() && K.cols() == action.set_size(), "bad_matrix",
                "matrix size must match the action's set");
  auto chart = std::make_shared<OrbitChart>(orbit_chart(action));
  Eigen::MatrixXcd avg = group_average(K, action.group()->order(), action.set_size(),
                                       [&](int o, int g) { return action.act(o, g); });
  return {std::move(chart), std::move(avg)};
}

EquivariantMatrix symmetrize(const Eigen::MatrixXcd& K, ChartPtr chart) {
  require_input(static_cast<bool>(chart) && K.rows() == chart->set_size() &&
                    K.cols() == chart->set_size(),
                "bad_matrix", "matrix size must match the chart's set");
  Eigen::MatrixXcd avg = group_average(K, chart->group()->order(), chart->set_size(),
                                       [&](int o, int g) { return chart->act(o, g); });
  return {std::move(chart), std::move(avg)};
}

GroupFunction unflatten(const Eigen::VectorXcd& y, const ChartPtr& chart) {
  require_input(static_cast<bool>(chart) && y.size() == chart->set_size(), "bad_vector",
                "vector length must equal the chart's set size");
  GroupFunction u(chart->group(), chart->num_reps(), 1);
  for (int g = 0; g < chart->group()->order(); ++g)
    for (int s = 0; s < chart->num_reps(); ++s) u.at(g, s) = y[chart->index(s, g)];
  return u;
}

Eigen::VectorXcd flatten(const GroupFunction& u, const OrbitChart& chart) {
  require_input(u.rows() == chart.num_reps() && u.cols() == 1 &&
                    u.order() == chart.group()->order(),
                "bad_vector", "group function shape must match the chart");
  Eigen::VectorXcd y(chart.set_size());
  for (int g = 0; g < chart.group()->order(); ++g)
    for (int s = 0; s < chart.num_reps(); ++s) y[chart.index(s, g)] = u.at(g, s);
  return y;
}

}  // namespace gcedmd
