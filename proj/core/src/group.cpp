#include "gcedmd/group.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <random>

#include "gcedmd/errors.hpp"

namespace gcedmd {

using json = nlohmann::json;

FiniteGroup::FiniteGroup(std::string name, int order, std::vector<std::int32_t> compose_table,
                         std::vector<int> cyclic_structure)
    : name_(std::move(name)),
      order_(order),
      compose_(std::move(compose_table)),
      structure_(std::move(cyclic_structure)) {
  require_input(order_ >= 1, "bad_group", "group order must be positive");
  require_input(compose_.size() == static_cast<std::size_t>(order_) * order_, "bad_group",
                "composition table must be order^2 entries");
  for (std::int32_t v : compose_)
    require_input(v >= 0 && v < order_, "bad_group", "composition table entry out of range");
  for (int a = 0; a < order_; ++a) {
    require_input(compose(identity, a) == a && compose(a, identity) == a, "bad_group",
                  "element 0 is not an identity");
  }
  inverse_.assign(order_, -1);
  for (int a = 0; a < order_; ++a) {
    for (int b = 0; b < order_; ++b) {
      if (compose(a, b) == identity) {
        require_input(inverse_[a] == -1 && compose(b, a) == identity, "bad_group",
                      "element lacks a unique two-sided inverse");
        inverse_[a] = b;
      }
    }
    require_input(inverse_[a] >= 0, "bad_group", "element lacks an inverse");
  }
  abelian_ = true;
  for (int a = 0; a < order_ && abelian_; ++a)
    for (int b = a + 1; b < order_; ++b)
      if (compose(a, b) != compose(b, a)) {
        abelian_ = false;
        break;
      }
}

int FiniteGroup::tuple_to_id(const std::vector<int>& t) const {
  require_input(!structure_.empty() && t.size() == structure_.size(), "bad_group",
                "group has no cyclic structure of that rank");
  int id = 0;
  for (std::size_t n = 0; n < t.size(); ++n) {
    const int p = structure_[n];
    const int c = ((t[n] % p) + p) % p;
    id = id * p + c;
  }
  return id;
}

std::vector<int> FiniteGroup::id_to_tuple(int id) const {
  require_input(!structure_.empty(), "bad_group", "group has no cyclic structure");
  std::vector<int> t(structure_.size());
  for (std::size_t n = structure_.size(); n-- > 0;) {
    t[n] = id % structure_[n];
    id /= structure_[n];
  }
  return t;
}

void FiniteGroup::validate() const {
  // Closure, identity and inverses were enforced at construction; re-check the
  // latin-square property (cancellation) exhaustively, then associativity.
  std::vector<char> seen(order_);
  for (int a = 0; a < order_; ++a) {
    std::fill(seen.begin(), seen.end(), 0);
    for (int b = 0; b < order_; ++b) seen[compose(a, b)] = 1;
    for (int c = 0; c < order_; ++c)
      require_numeric(seen[c] == 1, "group_axioms", "row of composition table is not a bijection");
  }
  auto check = [&](int a, int b, int c) {
    require_numeric(compose(compose(a, b), c) == compose(a, compose(b, c)), "group_axioms",
                    "composition is not associative");
  };
  if (order_ <= 1024) {
    for (int a = 0; a < order_; ++a)
      for (int b = 0; b < order_; ++b)
        for (int c = 0; c < order_; ++c) check(a, b, c);
  } else {
    std::mt19937_64 eng(0x61786f6d73ULL);
    for (int i = 0; i < 1000000; ++i) {
      const int a = static_cast<int>(eng() % order_);
      const int b = static_cast<int>(eng() % order_);
      const int c = static_cast<int>(eng() % order_);
      check(a, b, c);
    }
  }
}

GroupPtr cyclic_product_group(const std::vector<int>& orders) {
  require_input(!orders.empty(), "bad_group", "cyclic product needs at least one factor");
  long long n = 1;
  for (int p : orders) {
    require_input(p >= 1, "bad_group", "cyclic factor must be positive");
    n *= p;
    require_input(n <= (1 << 20), "bad_group", "group too large");
  }
  const int order = static_cast<int>(n);
  const int rank = static_cast<int>(orders.size());
  std::vector<std::int32_t> table(static_cast<std::size_t>(order) * order);
  std::vector<int> ta(rank), tb(rank);
  for (int a = 0; a < order; ++a) {
    int rem = a;
    for (int k = rank; k-- > 0;) {
      ta[k] = rem % orders[k];
      rem /= orders[k];
    }
    for (int b = 0; b < order; ++b) {
      rem = b;
      for (int k = rank; k-- > 0;) {
        tb[k] = rem % orders[k];
        rem /= orders[k];
      }
      int id = 0;
      for (int k = 0; k < rank; ++k) id = id * orders[k] + (ta[k] + tb[k]) % orders[k];
      table[static_cast<std::size_t>(a) * order + b] = id;
    }
  }
  std::string name = "Z" + std::to_string(orders[0]);
  for (int k = 1; k < rank; ++k) name += "xZ" + std::to_string(orders[k]);
  return std::make_shared<FiniteGroup>(name, order, std::move(table), orders);
}

IrrepTable::IrrepTable(GroupPtr group, std::vector<std::vector<Eigen::MatrixXcd>> matrices)
    : group_(std::move(group)), mats_(std::move(matrices)) {
  require_input(static_cast<bool>(group_), "bad_irreps", "irrep table needs a group");
  degrees_.reserve(mats_.size());
  for (const auto& rep : mats_) {
    require_input(rep.size() == static_cast<std::size_t>(group_->order()), "bad_irreps",
                  "irrep must supply one matrix per group element");
    const auto d = rep.front().rows();
    require_input(d >= 1, "bad_irreps", "irrep degree must be positive");
    for (const auto& m : rep)
      require_input(m.rows() == d && m.cols() == d, "bad_irreps",
                    "irrep matrices must be square of constant degree");
    degrees_.push_back(static_cast<int>(d));
  }
}

IrrepTable IrrepTable::canonical_abelian(GroupPtr group) {
  require_input(static_cast<bool>(group) && !group->cyclic_structure().empty(), "bad_irreps",
                "canonical abelian irreps need a product-of-cyclic group");
  IrrepTable t(std::move(group), {});
  t.lazy_abelian_ = true;
  t.degrees_.assign(t.group_->order(), 1);
  return t;
}

std::complex<double> IrrepTable::scalar(int r, int g) const {
  if (lazy_abelian_) {
    const auto& p = group_->cyclic_structure();
    const auto k = group_->id_to_tuple(r);
    const auto t = group_->id_to_tuple(g);
    double phase = 0.0;
    for (std::size_t n = 0; n < p.size(); ++n)
      phase += static_cast<double>(t[n]) * static_cast<double>(k[n]) / p[n];
    return std::polar(1.0, -2.0 * M_PI * phase);
  }
  return mats_[r][g](0, 0);
}

Eigen::MatrixXcd IrrepTable::matrix(int r, int g) const {
  if (lazy_abelian_) {
    Eigen::MatrixXcd m(1, 1);
    m(0, 0) = scalar(r, g);
    return m;
  }
  return mats_[r][g];
}

std::complex<double> IrrepTable::character(int r, int g) const {
  if (degrees_[r] == 1) return scalar(r, g);
  return mats_[r][g].trace();
}

void IrrepTable::validate(const Tolerances& tol) const {
  const int n = group_->order();
  long long dsum = 0;
  for (int d : degrees_) dsum += static_cast<long long>(d) * d;
  require_numeric(dsum == n, "irreps_incomplete",
                  "sum of squared degrees must equal the group order");
  for (int r = 0; r < count(); ++r) {
    const int d = degrees_[r];
    require_numeric((matrix(r, FiniteGroup::identity) - Eigen::MatrixXcd::Identity(d, d))
                            .cwiseAbs()
                            .maxCoeff() <= tol.homomorphism,
                    "irrep_identity", "irrep does not map identity to I");
    for (int g = 0; g < n; ++g) {
      const Eigen::MatrixXcd m = matrix(r, g);
      require_numeric((m.adjoint() * m - Eigen::MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff() <=
                          tol.unitarity,
                      "irrep_unitarity", "irrep matrix is not unitary");
    }
  }
  auto hom = [&](int r, int g, int h) {
    const double err =
        (matrix(r, group_->compose(g, h)) - matrix(r, g) * matrix(r, h)).cwiseAbs().maxCoeff();
    require_numeric(err <= tol.homomorphism, "irrep_homomorphism",
                    "irrep violates rho(gh) = rho(g)rho(h)");
  };
  if (n <= 256) {
    for (int r = 0; r < count(); ++r)
      for (int g = 0; g < n; ++g)
        for (int h = 0; h < n; ++h) hom(r, g, h);
  } else {
    std::mt19937_64 eng(0x69727265ULL);
    for (int i = 0; i < 100000; ++i)
      hom(static_cast<int>(eng() % count()), static_cast<int>(eng() % n),
          static_cast<int>(eng() % n));
  }
  auto orth = [&](int r1, int r2) {
    std::complex<double> acc = 0.0;
    for (int g = 0; g < n; ++g) acc += character(r1, g) * std::conj(character(r2, g));
    const double expect = r1 == r2 ? static_cast<double>(n) : 0.0;
    require_numeric(std::abs(acc - expect) <= tol.orthogonality * n, "irrep_orthogonality",
                    "characters are not orthogonal");
  };
  if (count() <= 256) {
    for (int r1 = 0; r1 < count(); ++r1)
      for (int r2 = r1; r2 < count(); ++r2) orth(r1, r2);
  } else {
    std::mt19937_64 eng(0x6f727468ULL);
    for (int r = 0; r < count(); ++r) orth(r, r);
    for (int i = 0; i < 512; ++i) {
      const int r1 = static_cast<int>(eng() % count());
      const int r2 = static_cast<int>(eng() % count());
      orth(r1, r2);
    }
  }
}

std::pair<GroupPtr, IrrepTable> dihedral_group_d4() {
  // Ids 0..3 = r^k, 4..7 = s r^k with s r s = r^-1.
  const int n = 8;
  std::vector<std::int32_t> table(n * n);
  auto id = [](bool flip, int k) { return (flip ? 4 : 0) + ((k % 4) + 4) % 4; };
  for (int a = 0; a < n; ++a) {
    const bool fa = a >= 4;
    const int ka = a % 4;
    for (int b = 0; b < n; ++b) {
      const bool fb = b >= 4;
      const int kb = b % 4;
      // (s^fa r^ka)(s^fb r^kb) = s^(fa xor fb) r^(kb + (fb ? -ka : ka))
      table[static_cast<std::size_t>(a) * n + b] = id(fa != fb, kb + (fb ? -ka : ka));
    }
  }
  auto group = std::make_shared<FiniteGroup>("D4", n, std::move(table));

  std::vector<std::vector<Eigen::MatrixXcd>> mats;
  auto one_dim = [&](double chi_r, double chi_s) {
    std::vector<Eigen::MatrixXcd> rep(n, Eigen::MatrixXcd(1, 1));
    for (int g = 0; g < n; ++g) {
      const double rpart = std::pow(chi_r, g % 4);
      rep[g](0, 0) = (g >= 4 ? chi_s : 1.0) * rpart;
    }
    return rep;
  };
  mats.push_back(one_dim(1.0, 1.0));
  mats.push_back(one_dim(1.0, -1.0));
  mats.push_back(one_dim(-1.0, 1.0));
  mats.push_back(one_dim(-1.0, -1.0));
  Eigen::Matrix2cd R, S;
  R << 0, -1, 1, 0;
  S << 1, 0, 0, -1;
  std::vector<Eigen::MatrixXcd> two(n);
  for (int g = 0; g < n; ++g) {
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Identity();
    for (int k = 0; k < g % 4; ++k) m = R * m;
    if (g >= 4) m = S * m;
    two[g] = m;
  }
  mats.push_back(std::move(two));
  return {group, IrrepTable(group, std::move(mats))};
}

namespace {

json matrix_to_json(const Eigen::MatrixXcd& m) {
  json flat = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      flat.push_back({m(i, j).real(), m(i, j).imag()});
  return flat;
}

Eigen::MatrixXcd matrix_from_json(const json& flat, int d) {
  require_input(flat.is_array() && flat.size() == static_cast<std::size_t>(d) * d,
                "bad_irrep_file", "irrep matrix has wrong entry count");
  Eigen::MatrixXcd m(d, d);
  std::size_t idx = 0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const json& e = flat[idx++];
      require_input(e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number(),
                    "bad_irrep_file", "irrep matrix entry must be [re, im]");
      m(i, j) = std::complex<double>(e[0].get<double>(), e[1].get<double>());
    }
  return m;
}

}  // namespace

IrrepTable load_irrep_table(const std::filesystem::path& path, GroupPtr group) {
  std::ifstream in(path);
  require_input(in.good(), "file_not_found", "cannot open irrep file: " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw io_error("bad_irrep_file", std::string("irrep file is not valid JSON: ") + e.what());
  }
  require_input(doc.is_object() && doc.contains("group_order") && doc.contains("irreps"),
                "bad_irrep_file", "irrep file needs group_order and irreps fields");
  require_input(doc["group_order"].is_number_integer() &&
                    doc["group_order"].get<int>() == group->order(),
                "bad_irrep_file", "irrep file group_order does not match the group");
  require_input(doc["irreps"].is_array() && !doc["irreps"].empty(), "bad_irrep_file",
                "irrep file has no irreps");
  std::vector<std::vector<Eigen::MatrixXcd>> mats;
  for (const json& rep : doc["irreps"]) {
    require_input(rep.is_object() && rep.contains("degree") && rep.contains("matrices"),
                  "bad_irrep_file", "each irrep needs degree and matrices");
    const int d = rep["degree"].get<int>();
    require_input(d >= 1, "bad_irrep_file", "irrep degree must be positive");
    const json& ms = rep["matrices"];
    require_input(ms.is_array() && ms.size() == static_cast<std::size_t>(group->order()),
                  "bad_irrep_file", "irrep needs one matrix per group element");
    std::vector<Eigen::MatrixXcd> rep_mats;
    rep_mats.reserve(ms.size());
    for (const json& m : ms) rep_mats.push_back(matrix_from_json(m, d));
    mats.push_back(std::move(rep_mats));
  }
  IrrepTable table(std::move(group), std::move(mats));
  table.validate();
  return table;
}

void save_irrep_table(const std::filesystem::path& path, const IrrepTable& table) {
  require_input(table.group()->order() <= 4096, "bad_irrep_file",
                "refusing to materialize an irrep table this large");
  json doc;
  doc["group_order"] = table.group()->order();
  doc["irreps"] = json::array();
  for (int r = 0; r < table.count(); ++r) {
    json rep;
    rep["degree"] = table.degree(r);
    rep["matrices"] = json::array();
    for (int g = 0; g < table.group()->order(); ++g)
      rep["matrices"].push_back(matrix_to_json(table.matrix(r, g)));
    doc["irreps"].push_back(std::move(rep));
  }
  std::ofstream out(path);
  require_input(out.good(), "file_write", "cannot write irrep file: " + path.string());
  out << doc.dump();
  require_input(out.good(), "file_write", "failed writing irrep file: " + path.string());
}

RightAction::RightAction(GroupPtr group, int set_size, std::function<int(int, int)> act)
    : group_(std::move(group)), set_size_(set_size), act_(std::move(act)) {
  require_input(static_cast<bool>(group_) && set_size_ >= 1 && static_cast<bool>(act_),
                "bad_action", "action needs a group, a nonempty set and a map");
}

RightAction RightAction::from_table(GroupPtr group, std::vector<std::vector<int>> table) {
  require_input(static_cast<bool>(group) && !table.empty(), "bad_action",
                "action table must be nonempty");
  const int n = static_cast<int>(table.size());
  for (const auto& row : table) {
    require_input(row.size() == static_cast<std::size_t>(group->order()), "bad_action",
                  "action table row must have one entry per group element");
    for (int v : row)
      require_input(v >= 0 && v < n, "bad_action", "action table entry out of range");
  }
  auto shared = std::make_shared<std::vector<std::vector<int>>>(std::move(table));
  return RightAction(std::move(group), n,
                     [shared](int o, int g) { return (*shared)[o][g]; });
}

RightAction RightAction::canonical_product(GroupPtr group, int nreps) {
  require_input(nreps >= 1, "bad_action", "need at least one representative");
  const int size = nreps * group->order();
  return RightAction(group, size, [group, nreps](int o, int h) {
    const int s = o % nreps;
    const int k = o / nreps;
    return group->compose(k, h) * nreps + s;
  });
}

void RightAction::validate() const {
  const int n = group_->order();
  for (int o = 0; o < set_size_; ++o) {
    const int oe = act(o, FiniteGroup::identity);
    require_numeric(oe == o, "action_axioms", "o * e must equal o");
  }
  const long long cost = static_cast<long long>(set_size_) * n * n;
  auto check = [&](int o, int g, int h) {
    require_numeric(act(act(o, g), h) == act(o, group_->compose(g, h)), "action_axioms",
                    "(o*g)*h must equal o*(gh)");
  };
  if (cost <= 20000000) {
    for (int o = 0; o < set_size_; ++o)
      for (int g = 0; g < n; ++g)
        for (int h = 0; h < n; ++h) check(o, g, h);
  } else {
    std::mt19937_64 eng(0x616374ULL);
    for (int i = 0; i < 1000000; ++i)
      check(static_cast<int>(eng() % set_size_), static_cast<int>(eng() % n),
            static_cast<int>(eng() % n));
  }
}

OrbitChart OrbitChart::canonical(GroupPtr group, int nreps) {
  require_input(static_cast<bool>(group) && nreps >= 1, "bad_chart",
                "chart needs a group and at least one representative");
  OrbitChart c;
  c.group_ = std::move(group);
  c.nreps_ = nreps;
  c.order_ = c.group_->order();
  c.set_size_ = nreps * c.order_;
  c.canonical_ = true;
  return c;
}

OrbitChart orbit_chart(const RightAction& action) {
  const int n = action.group()->order();
  const int total = action.set_size();
  require_numeric(total % n == 0, "action_not_free",
                  "set size must be a multiple of the group order for a free action");
  OrbitChart c;
  c.group_ = action.group();
  c.order_ = n;
  c.set_size_ = total;
  c.inv_s_.assign(total, -1);
  c.inv_g_.assign(total, -1);
  for (int o = 0; o < total; ++o) {
    if (c.inv_s_[o] >= 0) continue;
    const int s = static_cast<int>(c.reps_.size());
    c.reps_.push_back(o);
    for (int g = 0; g < n; ++g) {
      const int og = action.act(o, g);
      require_numeric(og >= 0 && og < total, "bad_action", "action image out of range");
      require_numeric(c.inv_s_[og] < 0, "action_not_free",
                      "action has a nontrivial stabilizer or overlapping orbits");
      c.inv_s_[og] = s;
      c.inv_g_[og] = g;
    }
  }
  c.nreps_ = static_cast<int>(c.reps_.size());
  c.index_.assign(static_cast<std::size_t>(c.nreps_) * n, -1);
  for (int o = 0; o < total; ++o)
    c.index_[static_cast<std::size_t>(c.inv_s_[o]) * n + c.inv_g_[o]] = o;
  return c;
}

}  // namespace gcedmd
