#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "md/common.hpp"

namespace md {

using Elem = std::vector<std::int64_t>;  // coords, coords[i] in [0, d_i)

// Finite abelian group presented as Z_{d_0} x ... x Z_{d_{k-1}}. The given
// shape is preserved (no divisor-chain normalization): named shapes matter.
struct Group {
  std::vector<std::int64_t> orders;

  std::int64_t size() const;
  std::size_t rank() const { return orders.size(); }

  Elem zero() const { return Elem(orders.size(), 0); }
  Elem reduce(Elem x) const;
  Elem add(const Elem& a, const Elem& b) const;
  Elem neg(const Elem& a) const;
  Elem sub(const Elem& a, const Elem& b) const;
  Elem mul(const Elem& a, std::int64_t k) const;
  bool is_zero(const Elem& a) const;
  std::int64_t elem_order(const Elem& a) const;

  // lexicographic enumeration; index <-> element
  std::vector<Elem> elements() const;
  std::int64_t index_of(const Elem& a) const;
  Elem element_at(std::int64_t idx) const;

  bool operator==(const Group& o) const { return orders == o.orders; }
  std::string str() const;
};

Group group_make(const std::vector<std::int64_t>& orders);

// Homomorphism given by generator images. Well-definedness (image order
// divides generator order) is checked at construction.
struct GroupMap {
  Group source;
  Group target;
  std::vector<Elem> images;  // one per source generator

  Elem apply(const Elem& x) const;
  bool is_endo_involution() const;  // source==target and map^2 == id
  bool is_identity() const;
};

GroupMap group_map(const Group& src, const Group& tgt, std::vector<Elem> images);
GroupMap identity_map(const Group& g);
GroupMap negation_map(const Group& g);
GroupMap compose(const GroupMap& f, const GroupMap& g);  // x -> f(g(x))

struct Subgroup {
  Group parent;
  std::vector<Elem> members;  // sorted canonically (lex)

  std::int64_t size() const { return static_cast<std::int64_t>(members.size()); }
  bool contains(const Elem& x) const;
};

Subgroup subgroup_from(const Group& g, std::vector<Elem> members);
Subgroup subgroup_generated(const Group& g, const std::vector<Elem>& gens);
Subgroup two_torsion(const Group& g);
// (2-part, odd part) as subgroups; |G_e| * |G_o| = |G|
std::pair<Subgroup, Subgroup> even_odd_split(const Group& g);
Subgroup fixed_subgroup(const Group& g, const GroupMap& t);

// All automorphisms of g (or those of the exact given order), in a canonical
// deterministic order. Brute force over generator images with pruning.
std::vector<GroupMap> enumerate_automorphisms(const Group& g,
                                              std::optional<std::int64_t> order_filter = {},
                                              std::int64_t max_group_order = 64);

// Present a subgroup abstractly: an independent generating set, the abstract
// group it spans, and the embedding of the abstract copy into the parent.
struct SubgroupBasis {
  Group abstract;        // Z_{m_1} x ... from the chosen generators
  GroupMap embedding;    // abstract -> parent
};
SubgroupBasis subgroup_basis(const Subgroup& h);

}  // namespace md
