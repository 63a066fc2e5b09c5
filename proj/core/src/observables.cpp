#include "gcedmd/observables.hpp"

#include <cmath>

#include "gcedmd/errors.hpp"
#include "gcedmd/rng.hpp"

namespace gcedmd {

StateField StateField::zero(std::vector<int> dims, int channels) {
  StateField y;
  y.dims = std::move(dims);
  y.channels = channels;
  long long n = 1;
  for (int d : y.dims) {
    require_input(d >= 1, "bad_state", "state dimensions must be positive");
    n *= d;
  }
  require_input(channels >= 1 && n >= 1, "bad_state", "state needs points and channels");
  y.data = Eigen::VectorXd::Zero(n * channels);
  return y;
}

int StateField::npoints() const {
  int n = 1;
  for (int d : dims) n *= d;
  return n;
}

StateField shift_state(const StateField& y, int g) {
  StateField out = y;
  const int rank = static_cast<int>(y.dims.size());
  std::vector<int> t(rank);
  int rem = g;
  for (int k = rank; k-- > 0;) {
    t[k] = rem % y.dims[k];
    rem /= y.dims[k];
  }
  require_input(rem == 0, "bad_state", "shift id out of range");
  const int n = y.npoints();
  std::vector<int> x(rank);
  for (int p = 0; p < n; ++p) {
    int r = p;
    for (int k = rank; k-- > 0;) {
      x[k] = r % y.dims[k];
      r /= y.dims[k];
    }
    int src = 0;
    for (int k = 0; k < rank; ++k) src = src * y.dims[k] + (x[k] + t[k]) % y.dims[k];
    for (int c = 0; c < y.channels; ++c) out.at(p, c) = y.at(src, c);
  }
  return out;
}

std::string to_string(ObservableKind k) {
  switch (k) {
    case ObservableKind::identity: return "identity";
    case ObservableKind::polynomial: return "polynomial";
    case ObservableKind::random_feature: return "random_feature";
  }
  return "identity";
}

ObservableKind observable_kind_from_string(const std::string& s) {
  if (s == "identity") return ObservableKind::identity;
  if (s == "polynomial") return ObservableKind::polynomial;
  if (s == "random_feature") return ObservableKind::random_feature;
  throw io_error("bad_observables", "unknown observable kind: " + s);
}

ObservableMap ObservableMap::identity(int state_channels) {
  require_input(state_channels >= 1, "bad_observables", "need at least one channel");
  ObservableMap m;
  m.kind_ = ObservableKind::identity;
  m.channels_ = state_channels;
  m.state_channels_ = state_channels;
  return m;
}

ObservableMap ObservableMap::polynomial(int degree) {
  require_input(degree >= 1, "bad_observables", "polynomial degree must be positive");
  ObservableMap m;
  m.kind_ = ObservableKind::polynomial;
  m.channels_ = degree;
  m.state_channels_ = 1;
  return m;
}

ObservableMap ObservableMap::random_feature(int count, int state_channels, std::uint64_t seed) {
  require_input(count >= 1 && state_channels >= 1, "bad_observables",
                "need at least one feature and one channel");
  ObservableMap m;
  m.kind_ = ObservableKind::random_feature;
  m.channels_ = count;
  m.state_channels_ = state_channels;
  m.seed_ = seed;
  Rng rng(seed, "observables");
  m.W_.resize(count, state_channels);
  m.b_.resize(count);
  for (int i = 0; i < count; ++i)
    for (int j = 0; j < state_channels; ++j) m.W_(i, j) = rng.normal();
  for (int i = 0; i < count; ++i) m.b_(i) = rng.uniform(-1.0, 1.0);
  return m;
}

namespace {

// Overflow-safe softplus log(1 + exp(x)).
inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

}  // namespace

Eigen::VectorXd ObservableMap::evaluate(const Eigen::VectorXd& v) const {
  require_input(v.size() == state_channels_, "bad_observables",
                "point channel count does not match the observable map");
  switch (kind_) {
    case ObservableKind::identity:
      return v;
    case ObservableKind::polynomial: {
      Eigen::VectorXd out(channels_);
      double p = 1.0;
      for (int s = 0; s < channels_; ++s) {
        p *= v[0];
        out[s] = p;
      }
      return out;
    }
    case ObservableKind::random_feature: {
      Eigen::VectorXd z = W_ * v + b_;
      for (int s = 0; s < channels_; ++s) z[s] = softplus(z[s]);
      return z;
    }
  }
  return v;
}

GroupFunction ObservableMap::lift(const StateField& y, const GroupPtr& group) const {
  require_input(group->order() == y.npoints(), "bad_observables",
                "group order must equal the number of state points");
  require_input(y.channels == state_channels_, "bad_observables",
                "state channel count does not match the observable map");
  GroupFunction u(group, channels_, 1);
  Eigen::VectorXd v(state_channels_);
  for (int g = 0; g < group->order(); ++g) {
    for (int c = 0; c < state_channels_; ++c) v[c] = y.at(g, c);
    const Eigen::VectorXd chi = evaluate(v);
    for (int s = 0; s < channels_; ++s) u.at(g, s) = chi[s];
  }
  return u;
}

StateField Reconstruction::apply(const GroupFunction& u, const std::vector<int>& dims) const {
  require_input(R.cols() == u.rows() && u.cols() == 1, "bad_reconstruction",
                "reconstruction shape does not match the lifted function");
  StateField y = StateField::zero(dims, static_cast<int>(R.rows()));
  require_input(y.npoints() == u.order(), "bad_reconstruction",
                "grid size does not match the group order");
  Eigen::VectorXd ur(u.rows());
  for (int g = 0; g < u.order(); ++g) {
    for (int s = 0; s < u.rows(); ++s) ur[s] = u.at(g, s).real();
    const Eigen::VectorXd v = R * ur + c;
    for (int ch = 0; ch < y.channels; ++ch) y.at(g, ch) = v[ch];
  }
  return y;
}

}  // namespace gcedmd
