#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "md/group.hpp"
#include "md/phase.hpp"

namespace md {

// Quadratic form stored by Gram data: values on generators plus pairings of
// generator pairs. Everything else follows by the polarization identity.
struct QuadraticForm {
  Group group;
  std::vector<Phase> diag;     // diag[i] = q(e_i)
  std::vector<Phase> offdiag;  // flattened i<j: <e_i,e_j>

  const Phase& off(std::size_t i, std::size_t j) const;

  Phase q(const Elem& x) const;
  Phase pair(const Elem& a, const Elem& b) const;
};

QuadraticForm quadform_make(const Group& g, std::vector<Phase> diag, std::vector<Phase> offdiag);
// convenience: q(x) = base^(r * x^2) on a cyclic group
QuadraticForm cyclic_form(std::int64_t order, const Phase& gen_value);

Phase q_eval(const QuadraticForm& f, const Elem& x);
Phase pairing(const QuadraticForm& f, const Elem& a, const Elem& b);
bool is_nondegenerate(const QuadraticForm& f, std::int64_t max_order = 4096);

struct GaussData {
  cx value;            // numerator / normalizer
  PhaseSum numerator;  // unnormalized character sum
  double normalizer;   // sqrt(|G|)
};

GaussData gauss_sum(const QuadraticForm& f, std::int64_t k);
GaussData twisted_gauss_sum(const QuadraticForm& f, const Elem& u, std::int64_t m);
// exact eighth root of unity equal to G(q) for nondegenerate q; the octant is
// snapped numerically and then certified by the exact squared identity
Phase gauss_sum_root(const QuadraticForm& f);

// Metric group with a form-preserving involution.
struct Involutive {
  QuadraticForm form;
  GroupMap theta;

  const Group& group() const { return form.group; }
  std::int64_t size() const { return form.group.size(); }
};

// validates: theta involution preserving q, q nondegenerate
Involutive involutive_make(QuadraticForm form, GroupMap theta);
Involutive involutive_neg(QuadraticForm form);  // theta = -1

Subgroup orthogonal_complement(const Involutive& img, const Subgroup& h);

// restriction of an involutive metric group to a theta-stable subgroup,
// re-presented on an abstract product-of-cyclic copy
struct RestrictedImg {
  Involutive img;
  GroupMap embedding;  // abstract copy -> parent
};
RestrictedImg restrict_involutive(const Involutive& img, const Subgroup& h);

// Splitting along a subgroup with nondegenerate restricted form:
// G = L x L^perp with q and theta factoring accordingly.
std::pair<RestrictedImg, RestrictedImg> split(const Involutive& img, const Subgroup& l);

// (even part, odd part with theta=+1, odd part with theta=-1)
struct CanonicalDecomposition {
  RestrictedImg even;
  RestrictedImg odd_plus;
  RestrictedImg odd_minus;
};
CanonicalDecomposition canonical_decomposition(const Involutive& img);

std::vector<QuadraticForm> enumerate_quadratic_forms(const Group& g, bool nondegenerate_only,
                                                     std::int64_t max_order = 64);

// Isomorphism of involutive metric groups: a group isomorphism carrying
// (q_a, theta_a) to (q_b, theta_b); returns a witness when one exists.
std::optional<GroupMap> are_isomorphic(const Involutive& a, const Involutive& b,
                                       std::int64_t max_order = 64);

// plain quadratic-form isomorphism; degenerate forms allowed
std::optional<GroupMap> forms_isomorphic(const QuadraticForm& a, const QuadraticForm& b,
                                         std::int64_t max_order = 64);

// restriction of a form to a subgroup, re-presented abstractly (no
// nondegeneracy requirement)
struct RestrictedForm {
  QuadraticForm form;
  GroupMap embedding;
};
RestrictedForm restrict_form(const QuadraticForm& f, const Subgroup& h);

}  // namespace md
