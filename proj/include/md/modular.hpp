#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "md/quadform.hpp"

namespace md {

using Matrix = Eigen::MatrixXcd;

// Index-set label. u0/u_pi carry an element of the common fixed-point group;
// pointlike labels are the singleton 0/pi blocks; paired labels carry an
// element plus a sign; grouplike labels carry an orbit representative of one
// of the two input groups (side 0 = first, side 1 = second).
struct Label {
  enum class Kind { U0, UPi, Point0, PointPi, Paired, Grouplike, Prod };
  Kind kind = Kind::Point0;
  int side = 0;
  Elem elem;     // empty for pointlike
  int sign = 0;  // +1/-1 for paired, 0 otherwise

  bool operator==(const Label& o) const {
    return kind == o.kind && side == o.side && elem == o.elem && sign == o.sign;
  }
  bool operator<(const Label& o) const;
  std::string str() const;
};

Label label_point0();
Label label_pointpi();
Label label_u0(const Elem& u);
Label label_upi(const Elem& u);
Label label_paired(int side, const Elem& x, int sign);
Label label_grouplike(int side, const Elem& x);

struct ModularData {
  std::vector<Label> labels;
  Matrix S;
  std::vector<Phase> T;
  std::vector<int> duality;  // involutive permutation with duality[0] == 0
  cx c = 1.0;

  int rank() const { return static_cast<int>(labels.size()); }
};

// modular data of a pointed theory attached to a metric group
ModularData pointed(const QuadraticForm& q);

// Kronecker/entrywise product on the product label set
ModularData tensor(const ModularData& a, const ModularData& b);

struct RelationReport {
  double unitarity = 0;       // ||S S* - I||_inf
  double symmetry = 0;        // ||S - S^t||_inf
  double s2_minus_c = 0;      // ||S^2 - C||_inf
  double st3_minus_cc = 0;    // ||(ST)^3 - cC||_inf
  bool ct_commute = false;    // T[dual(i)] == T[i] exactly, as phases
  bool row0_positive = false; // S_{0,j} > 0 for all j
  bool t0_is_one = false;
  std::int64_t t_order = 1;   // lcm of the T entry orders
  cx c = 1.0;
  double c_modulus_dev = 0;
  double tol = kTolRelations;

  bool pass() const;
  std::string summary() const;
};

RelationReport verify_relations(const ModularData& md, double tol = kTolRelations);

struct FusionTensor {
  int n = 0;
  std::vector<std::int64_t> v;  // dense n^3, fully symmetric

  std::int64_t& at(int i, int j, int k) { return v[(static_cast<std::size_t>(i) * n + j) * n + k]; }
  std::int64_t at(int i, int j, int k) const {
    return v[(static_cast<std::size_t>(i) * n + j) * n + k];
  }
  double max_round_residual = 0;
};

// Verlinde coefficients: each entry must be within tol of a non-negative
// integer, otherwise an integrality error naming the worst offender is thrown.
// threads > 1 parallelizes over the first index with deterministic output.
FusionTensor verlinde_numeric(const ModularData& md, double tol = kTolIntegrality,
                              int threads = 1);

// nu_n per label, from the Verlinde tensor and the rotation-invariant formula
std::vector<cx> fs_numeric(const ModularData& md, const FusionTensor& N, std::int64_t n);

struct FsCheck {
  struct Row {
    Label label;
    bool self_dual = false;
    cx value;
    bool pass = false;
    std::string note;
  };
  std::vector<Row> rows;
  bool pass = true;
};

// FS2: nu_2 = 0 off the self-dual labels, +-1 on them
FsCheck check_fs2(const ModularData& md, const FusionTensor& N, double tol = kTolIntegrality);
// FS3: nu_3(k) must decompose as a + b*zeta_3 + c*zeta_3^2 with
// a,b,c >= 0 integers summing to N_{kkk}
FsCheck check_fs3(const ModularData& md, const FusionTensor& N, double tol = kTolIntegrality);

// does x + y*zeta_3 + z*zeta_3^2 = value admit non-negative integers summing to total?
bool fs3_decomposable(cx value, std::int64_t total, double tol = kTolIntegrality);

}  // namespace md
