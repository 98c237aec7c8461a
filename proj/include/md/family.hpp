#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "md/modular.hpp"
#include "md/quadform.hpp"

namespace md {

enum class FamilyId { A, B, C, D, E };

std::string family_name(FamilyId f);
FamilyId family_from_name(const std::string& s);

// identification of the two fixed-point subgroups with one abstract group
struct UIdent {
  Group u;
  GroupMap into_first;
  GroupMap into_second;
};

// raw, unvalidated input for a family construction
struct FamilyInput {
  FamilyId family = FamilyId::A;
  Involutive first;   // (G, q1, theta1)
  Involutive second;  // (Gamma, q2, theta2)
  std::optional<UIdent> u_map;                  // family A (optional; derived otherwise)
  std::optional<Elem> k0, sigma0;               // family C marked elements
  std::optional<std::string> case_tag;          // family C: "A1" / "A2"
  bool alt_sections = false;                    // pick lex-greatest orbit reps instead
};

struct AdmissibilityReport {
  FamilyId family = FamilyId::A;
  struct Condition {
    std::string name;
    bool satisfied = false;
    std::string detail;
  };
  std::vector<Condition> conditions;

  bool all_pass() const;
  std::string summary() const;
};

struct FamilyInstance {
  FamilyId family = FamilyId::A;
  Involutive first;
  Involutive second;
  Phase c;  // exact eighth root of unity, = normalized Gauss sum of q1

  UIdent u;            // A and C ({0,u0} for C); trivial for B/D/E
  Elem k0, sigma0;     // C marked order-two elements (g0/gamma0 for B)
  std::vector<Elem> kstar;      // C: K_* in G; B: {g0}; D/E: K\{0}
  std::vector<Elem> sigmastar;  // C: Sigma_* in Gamma; B: {gamma0}
  bool case_a1 = true;          // C dispatch
  Phase s;                      // B and C
  std::vector<std::vector<Phase>> f_table;  // C: f[k index][sigma index]

  std::vector<Elem> gstar;  // section G_*
  std::vector<Elem> hstar;  // section Gamma_*

  std::int64_t sizeG() const { return first.size(); }
  std::int64_t sizeH() const { return second.size(); }
};

AdmissibilityReport admissibility_report(const FamilyInput& in);
// throws errc::precondition carrying the report summary when a condition fails
FamilyInstance family_instance_make(const FamilyInput& in);

std::vector<Label> family_labels(const FamilyInstance& inst);
std::vector<int> family_duality(const FamilyInstance& inst);

// Builds the S/T data and asserts the modular relations at tol; a violation
// is an internal-consistency error, never silently returned.
ModularData family_build(const FamilyInstance& inst, double tol = kTolRelations);

// exact integer tensor from the per-family closed formulas
FusionTensor family_closed_verlinde(const FamilyInstance& inst);
// exact diagonal N_{kkk} only (enough for the FS3 predicate)
std::vector<std::int64_t> family_closed_selfcoupling(const FamilyInstance& inst);

// closed-formula indicators per label (twisted Gauss sums numeric, deltas exact)
std::vector<cx> family_closed_fs(const FamilyInstance& inst, std::int64_t m);

// family C: the six exact identities for the f-table; throws on failure
void verify_f_identities(const FamilyInstance& inst);

// FS2/FS3 via the closed formulas; also emits the named Gauss-sum predicates
// for the families that define them
struct FsSummary {
  bool fs2 = true;
  bool fs3 = true;
  std::vector<std::pair<std::string, bool>> predicates;
};
FsSummary family_fs_summary(const FamilyInstance& inst, double tol = kTolIntegrality);

// combined twisted Gauss sum over both groups at a common fixed-point element
cx combined_gauss(const FamilyInstance& inst, const Elem& u_abstract, std::int64_t m);

}  // namespace md
