#include "md/modular.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

namespace md {

bool Label::operator<(const Label& o) const {
  if (kind != o.kind) return static_cast<int>(kind) < static_cast<int>(o.kind);
  if (side != o.side) return side < o.side;
  if (elem != o.elem) return elem < o.elem;
  return sign < o.sign;
}

std::string Label::str() const {
  std::ostringstream os;
  auto coords = [&]() {
    os << "(";
    for (std::size_t i = 0; i < elem.size(); ++i) {
      if (i) os << ",";
      os << elem[i];
    }
    os << ")";
  };
  switch (kind) {
    case Kind::Point0: os << "0"; break;
    case Kind::PointPi: os << "pi"; break;
    case Kind::U0:
      coords();
      os << ":0";
      break;
    case Kind::UPi:
      coords();
      os << ":pi";
      break;
    case Kind::Paired:
      os << (side == 0 ? "G" : "H");
      coords();
      os << (sign > 0 ? "+" : "-");
      break;
    case Kind::Grouplike:
      os << (side == 0 ? "g" : "h");
      coords();
      break;
    case Kind::Prod:
      os << "[" << elem[0] << "x" << elem[1] << "]";
      break;
  }
  return os.str();
}

Label label_point0() { return Label{Label::Kind::Point0, 0, {}, 0}; }
Label label_pointpi() { return Label{Label::Kind::PointPi, 0, {}, 0}; }
Label label_u0(const Elem& u) { return Label{Label::Kind::U0, 0, u, 0}; }
Label label_upi(const Elem& u) { return Label{Label::Kind::UPi, 0, u, 0}; }
Label label_paired(int side, const Elem& x, int sign) {
  return Label{Label::Kind::Paired, side, x, sign};
}
Label label_grouplike(int side, const Elem& x) {
  return Label{Label::Kind::Grouplike, side, x, 0};
}

ModularData pointed(const QuadraticForm& f) {
  require(is_nondegenerate(f), errc::precondition, "pointed data needs a nondegenerate form");
  const Group& g = f.group;
  auto elems = g.elements();
  const int n = static_cast<int>(elems.size());
  ModularData md;
  md.S.resize(n, n);
  md.T.reserve(n);
  md.duality.resize(n);
  double a = 1.0 / std::sqrt(static_cast<double>(n));
  for (int i = 0; i < n; ++i) {
    md.labels.push_back(label_grouplike(0, elems[i]));
    md.T.push_back(f.q(elems[i]));
    md.duality[i] = static_cast<int>(g.index_of(g.neg(elems[i])));
    for (int j = 0; j < n; ++j) md.S(i, j) = a * f.pair(elems[i], elems[j]).conj().eval();
  }
  md.c = gauss_sum(f, 1).value;
  return md;
}

ModularData tensor(const ModularData& a, const ModularData& b) {
  ModularData md;
  const int n = a.rank(), m = b.rank();
  md.S.resize(n * m, n * m);
  md.T.reserve(n * m);
  md.duality.resize(n * m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      Label l{Label::Kind::Prod, 0, {i, j}, 0};
      md.labels.push_back(l);
      md.T.push_back(a.T[i] * b.T[j]);
      md.duality[i * m + j] = a.duality[i] * m + b.duality[j];
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < m; ++l) md.S(i * m + j, k * m + l) = a.S(i, k) * b.S(j, l);
  md.c = a.c * b.c;
  return md;
}

namespace {

double max_abs(const Matrix& m) {
  double r = 0;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) r = std::max(r, std::abs(m(i, j)));
  return r;
}

}  // namespace

bool RelationReport::pass() const {
  return unitarity <= tol && symmetry <= tol && s2_minus_c <= tol && st3_minus_cc <= tol &&
         ct_commute && row0_positive && t0_is_one && c_modulus_dev <= 1e-12;
}

std::string RelationReport::summary() const {
  std::ostringstream os;
  os << "unitarity=" << unitarity << " symmetry=" << symmetry << " S2-C=" << s2_minus_c
     << " (ST)3-cC=" << st3_minus_cc << " CT=TC:" << (ct_commute ? "yes" : "no")
     << " row0>0:" << (row0_positive ? "yes" : "no") << " T order=" << t_order << " c=("
     << c.real() << "," << c.imag() << ")";
  return os.str();
}

RelationReport verify_relations(const ModularData& md, double tol) {
  const int n = md.rank();
  require(n >= 1, errc::invalid_argument, "empty modular data");
  require(md.S.rows() == n && md.S.cols() == n && static_cast<int>(md.T.size()) == n &&
              static_cast<int>(md.duality.size()) == n,
          errc::invalid_argument, "inconsistent modular data shape");
  RelationReport rep;
  rep.tol = tol;

  Matrix C = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) C(i, md.duality[i]) = 1.0;

  rep.unitarity = max_abs(md.S * md.S.adjoint() - Matrix::Identity(n, n));
  rep.symmetry = max_abs(md.S - md.S.transpose());
  rep.s2_minus_c = max_abs(md.S * md.S - C);

  rep.row0_positive = true;
  for (int j = 0; j < n; ++j)
    if (!(md.S(0, j).real() > 0) || std::abs(md.S(0, j).imag()) > tol) rep.row0_positive = false;

  rep.t0_is_one = md.T[0].is_one();
  rep.ct_commute = true;
  for (int i = 0; i < n; ++i)
    if (md.T[md.duality[i]] != md.T[i]) rep.ct_commute = false;
  rep.t_order = 1;
  for (const auto& t : md.T) rep.t_order = lcm_i64(rep.t_order, t.order());

  // central charge from the Gauss-sum formula, then tested against (ST)^3
  cx c = 0;
  for (int i = 0; i < n; ++i) c += md.S(0, i) * md.S(0, i) * md.T[i].eval();
  c /= md.S(0, 0);
  rep.c = c;
  rep.c_modulus_dev = std::abs(std::abs(c) - 1.0);

  Matrix ST = md.S;
  for (int i = 0; i < n; ++i) {
    cx t = md.T[i].eval();
    for (int j = 0; j < n; ++j) ST(j, i) *= t;
  }
  rep.st3_minus_cc = max_abs(ST * ST * ST - c * C);
  return rep;
}

FusionTensor verlinde_numeric(const ModularData& md, double tol, int threads) {
  const int n = md.rank();
  FusionTensor N;
  N.n = n;
  N.v.assign(static_cast<std::size_t>(n) * n * n, 0);

  std::vector<double> residual_per_i(n, 0.0);
  std::vector<std::string> offender_per_i(n);

  auto sweep = [&](int i0, int i1) {
    for (int i = i0; i < i1; ++i) {
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          cx acc = 0;
          for (int a = 0; a < n; ++a)
            acc += md.S(a, i) * md.S(a, j) * md.S(a, k) / md.S(0, a);
          double rounded = std::round(acc.real());
          double res = std::max(std::abs(acc.real() - rounded), std::abs(acc.imag()));
          if (res > residual_per_i[i]) {
            residual_per_i[i] = res;
            if (res > tol || rounded < 0) {
              std::ostringstream os;
              os << "N[" << md.labels[i].str() << "," << md.labels[j].str() << ","
                 << md.labels[k].str() << "] = (" << acc.real() << "," << acc.imag() << ")";
              offender_per_i[i] = os.str();
            }
          }
          if (rounded < 0 && offender_per_i[i].empty()) {
            std::ostringstream os;
            os << "N[" << md.labels[i].str() << "," << md.labels[j].str() << ","
               << md.labels[k].str() << "] = " << rounded << " < 0";
            offender_per_i[i] = os.str();
            residual_per_i[i] = 1.0;
          }
          N.at(i, j, k) = static_cast<std::int64_t>(rounded);
        }
    }
  };

  if (threads <= 1 || n < 8) {
    sweep(0, n);
  } else {
    int nt = std::min(threads, n);
    std::vector<std::thread> pool;
    int chunk = (n + nt - 1) / nt;
    for (int t = 0; t < nt; ++t) {
      int lo = t * chunk, hi = std::min(n, lo + chunk);
      if (lo < hi) pool.emplace_back(sweep, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  for (int i = 0; i < n; ++i) {
    N.max_round_residual = std::max(N.max_round_residual, residual_per_i[i]);
    if (residual_per_i[i] > tol)
      fail(errc::integrality, "Verlinde coefficient not a non-negative integer: " +
                                  (offender_per_i[i].empty() ? "?" : offender_per_i[i]));
  }
  for (std::size_t idx = 0; idx < N.v.size(); ++idx)
    if (N.v[idx] < 0)
      fail(errc::integrality, "negative Verlinde coefficient encountered");
  return N;
}

std::vector<cx> fs_numeric(const ModularData& md, const FusionTensor& N, std::int64_t n) {
  const int r = md.rank();
  require(N.n == r, errc::invalid_argument, "fusion tensor does not match data rank");
  std::vector<cx> nu(r, 0.0);
  for (int k = 0; k < r; ++k) {
    int kbar = md.duality[k];
    cx acc = 0;
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) {
        std::int64_t nij = N.at(i, j, kbar);  // N_{ij}^k = N_{i j kbar}
        if (nij == 0) continue;
        Phase ratio = md.T[j] * md.T[i].inv();
        acc += static_cast<double>(nij) * md.S(0, i) * md.S(0, j) * ratio.pow(n).eval();
      }
    nu[k] = acc;
  }
  return nu;
}

FsCheck check_fs2(const ModularData& md, const FusionTensor& N, double tol) {
  FsCheck out;
  auto nu2 = fs_numeric(md, N, 2);
  for (int k = 0; k < md.rank(); ++k) {
    FsCheck::Row row;
    row.label = md.labels[k];
    row.self_dual = md.duality[k] == k;
    row.value = nu2[k];
    if (row.self_dual) {
      row.pass = std::abs(nu2[k] - cx(1, 0)) <= tol || std::abs(nu2[k] - cx(-1, 0)) <= tol;
      if (!row.pass) row.note = "self-dual label needs nu2 = +-1";
    } else {
      row.pass = std::abs(nu2[k]) <= tol;
      if (!row.pass) row.note = "non-self-dual label needs nu2 = 0";
    }
    out.pass = out.pass && row.pass;
    out.rows.push_back(std::move(row));
  }
  return out;
}

bool fs3_decomposable(cx value, std::int64_t total, double tol) {
  // value = a + b*zeta3 + c*zeta3^2, a+b+c = total  =>  solve the 3x3 system
  double re = value.real(), im = value.imag();
  double n = static_cast<double>(total);
  double a = (n + 2 * re) / 3.0;
  double b = (n - re + std::sqrt(3.0) * im) / 3.0;
  double c = (n - re - std::sqrt(3.0) * im) / 3.0;
  for (double x : {a, b, c}) {
    double r = std::round(x);
    if (std::abs(x - r) > tol || r < -tol) return false;
  }
  return true;
}

FsCheck check_fs3(const ModularData& md, const FusionTensor& N, double tol) {
  FsCheck out;
  auto nu3 = fs_numeric(md, N, 3);
  for (int k = 0; k < md.rank(); ++k) {
    FsCheck::Row row;
    row.label = md.labels[k];
    row.self_dual = md.duality[k] == k;
    row.value = nu3[k];
    std::int64_t nkkk = N.at(k, k, k);
    row.pass = fs3_decomposable(nu3[k], nkkk, tol);
    if (!row.pass) {
      std::ostringstream os;
      os << "nu3 not a sum of " << nkkk << " cube roots of unity";
      row.note = os.str();
    }
    out.pass = out.pass && row.pass;
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace md
