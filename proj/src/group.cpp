#include "md/group.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "md/phase.hpp"

namespace md {

std::int64_t Group::size() const {
  std::int64_t n = 1;
  for (auto d : orders) n *= d;
  return n;
}

Elem Group::reduce(Elem x) const {
  require(x.size() == orders.size(), errc::invalid_argument, "element rank mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] %= orders[i];
    if (x[i] < 0) x[i] += orders[i];
  }
  return x;
}

Elem Group::add(const Elem& a, const Elem& b) const {
  require(a.size() == orders.size() && b.size() == orders.size(), errc::invalid_argument,
          "element rank mismatch");
  Elem r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = (a[i] + b[i]) % orders[i];
  return r;
}

Elem Group::neg(const Elem& a) const {
  Elem r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] == 0 ? 0 : orders[i] - a[i];
  return r;
}

Elem Group::sub(const Elem& a, const Elem& b) const { return add(a, neg(b)); }

Elem Group::mul(const Elem& a, std::int64_t k) const {
  Elem r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::int64_t v = (a[i] * (k % orders[i])) % orders[i];
    if (v < 0) v += orders[i];
    r[i] = v;
  }
  return r;
}

bool Group::is_zero(const Elem& a) const {
  for (auto v : a)
    if (v != 0) return false;
  return true;
}

std::int64_t Group::elem_order(const Elem& a) const {
  std::int64_t o = 1;
  for (std::size_t i = 0; i < a.size(); ++i) o = lcm_i64(o, orders[i] / gcd_i64(a[i], orders[i]));
  return o;
}

std::vector<Elem> Group::elements() const {
  std::vector<Elem> out;
  out.reserve(static_cast<std::size_t>(size()));
  Elem cur = zero();
  while (true) {
    out.push_back(cur);
    std::size_t i = orders.size();
    while (i > 0) {
      --i;
      if (++cur[i] < orders[i]) break;
      cur[i] = 0;
      if (i == 0) return out;
    }
    if (orders.empty()) return out;
  }
}

std::int64_t Group::index_of(const Elem& a) const {
  std::int64_t idx = 0;
  for (std::size_t i = 0; i < orders.size(); ++i) idx = idx * orders[i] + a[i];
  return idx;
}

Elem Group::element_at(std::int64_t idx) const {
  Elem a(orders.size());
  for (std::size_t i = orders.size(); i-- > 0;) {
    a[i] = idx % orders[i];
    idx /= orders[i];
  }
  return a;
}

std::string Group::str() const {
  if (orders.empty()) return "0";
  std::ostringstream os;
  for (std::size_t i = 0; i < orders.size(); ++i) {
    if (i) os << "x";
    os << "Z" << orders[i];
  }
  return os.str();
}

Group group_make(const std::vector<std::int64_t>& orders) {
  for (auto d : orders)
    require(d >= 2, errc::invalid_argument, "cyclic factor order must be >= 2");
  return Group{orders};
}

Elem GroupMap::apply(const Elem& x) const {
  Elem r = target.zero();
  for (std::size_t i = 0; i < images.size(); ++i) r = target.add(r, target.mul(images[i], x[i]));
  return r;
}

bool GroupMap::is_endo_involution() const {
  if (!(source == target)) return false;
  for (std::size_t i = 0; i < images.size(); ++i) {
    Elem gen = source.zero();
    gen[i] = 1;
    if (apply(apply(gen)) != gen) return false;
  }
  return true;
}

bool GroupMap::is_identity() const {
  if (!(source == target)) return false;
  for (std::size_t i = 0; i < images.size(); ++i) {
    Elem gen = source.zero();
    gen[i] = 1;
    if (images[i] != gen) return false;
  }
  return true;
}

GroupMap group_map(const Group& src, const Group& tgt, std::vector<Elem> images) {
  require(images.size() == src.orders.size(), errc::invalid_argument,
          "one image per source generator required");
  for (std::size_t i = 0; i < images.size(); ++i) {
    images[i] = tgt.reduce(images[i]);
    require(tgt.is_zero(tgt.mul(images[i], src.orders[i])), errc::invalid_argument,
            "generator image order does not divide generator order");
  }
  return GroupMap{src, tgt, std::move(images)};
}

GroupMap identity_map(const Group& g) {
  std::vector<Elem> images;
  for (std::size_t i = 0; i < g.orders.size(); ++i) {
    Elem e = g.zero();
    e[i] = 1;
    images.push_back(e);
  }
  return GroupMap{g, g, images};
}

GroupMap negation_map(const Group& g) {
  std::vector<Elem> images;
  for (std::size_t i = 0; i < g.orders.size(); ++i) {
    Elem e = g.zero();
    e[i] = g.orders[i] - 1;
    images.push_back(e);
  }
  return GroupMap{g, g, images};
}

GroupMap compose(const GroupMap& f, const GroupMap& g) {
  require(g.target == f.source, errc::invalid_argument, "composition target/source mismatch");
  std::vector<Elem> images;
  for (const auto& im : g.images) images.push_back(f.apply(im));
  return GroupMap{g.source, f.target, images};
}

bool Subgroup::contains(const Elem& x) const {
  return std::binary_search(members.begin(), members.end(), x);
}

Subgroup subgroup_from(const Group& g, std::vector<Elem> members) {
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  return Subgroup{g, std::move(members)};
}

Subgroup subgroup_generated(const Group& g, const std::vector<Elem>& gens) {
  std::set<Elem> seen{g.zero()};
  std::vector<Elem> frontier{g.zero()};
  while (!frontier.empty()) {
    std::vector<Elem> next;
    for (const auto& x : frontier)
      for (const auto& s : gens) {
        Elem y = g.add(x, s);
        if (seen.insert(y).second) next.push_back(y);
      }
    frontier = std::move(next);
  }
  return subgroup_from(g, std::vector<Elem>(seen.begin(), seen.end()));
}

Subgroup two_torsion(const Group& g) {
  std::vector<Elem> m;
  for (const auto& x : g.elements())
    if (g.is_zero(g.mul(x, 2))) m.push_back(x);
  return subgroup_from(g, std::move(m));
}

std::pair<Subgroup, Subgroup> even_odd_split(const Group& g) {
  std::vector<Elem> even, odd;
  for (const auto& x : g.elements()) {
    std::int64_t o = g.elem_order(x);
    if ((o & (o - 1)) == 0) even.push_back(x);  // 2-power order
    if (o % 2 == 1) odd.push_back(x);
  }
  return {subgroup_from(g, std::move(even)), subgroup_from(g, std::move(odd))};
}

Subgroup fixed_subgroup(const Group& g, const GroupMap& t) {
  require(t.source == g && t.target == g, errc::invalid_argument,
          "fixed points need an endomorphism of the group");
  std::vector<Elem> m;
  for (const auto& x : g.elements())
    if (t.apply(x) == x) m.push_back(x);
  return subgroup_from(g, std::move(m));
}

namespace {

// span(images of an automorphism prefix) must grow by exactly d_i at each
// level; that makes the full map bijective with no final check.
void auto_backtrack(const Group& g, const std::vector<Elem>& all, std::vector<Elem>& images,
                    std::set<Elem>& span, std::size_t i, std::vector<GroupMap>& out) {
  if (i == g.orders.size()) {
    out.push_back(GroupMap{g, g, images});
    return;
  }
  for (const auto& cand : all) {
    if (g.elem_order(cand) != g.orders[i]) continue;
    // direct extension: no nonzero multiple of cand may fall into the span
    bool indep = true;
    Elem acc = cand;
    for (std::int64_t k = 1; k < g.orders[i]; ++k) {
      if (span.count(acc)) {
        indep = false;
        break;
      }
      acc = g.add(acc, cand);
    }
    if (!indep) continue;
    std::set<Elem> bigger = span;
    acc = cand;
    std::vector<Elem> base(span.begin(), span.end());
    for (std::int64_t k = 1; k < g.orders[i]; ++k) {
      for (const auto& s : base) bigger.insert(g.add(s, acc));
      acc = g.add(acc, cand);
    }
    images.push_back(cand);
    auto_backtrack(g, all, images, bigger, i + 1, out);
    images.pop_back();
  }
}

std::int64_t map_order(const Group& g, const GroupMap& m) {
  GroupMap cur = m;
  for (std::int64_t k = 1; k <= g.size() * g.size(); ++k) {
    if (cur.is_identity()) return k;
    cur = compose(m, cur);
  }
  fail(errc::inconsistency, "automorphism order not found");
}

}  // namespace

std::vector<GroupMap> enumerate_automorphisms(const Group& g,
                                              std::optional<std::int64_t> order_filter,
                                              std::int64_t max_group_order) {
  require(g.size() <= max_group_order, errc::resource_limit,
          "group order exceeds automorphism enumeration bound");
  std::vector<GroupMap> out;
  if (g.orders.empty()) {
    out.push_back(GroupMap{g, g, {}});
    if (order_filter && *order_filter != 1) out.clear();
    return out;
  }
  std::vector<Elem> all = g.elements();
  std::vector<Elem> images;
  std::set<Elem> span{g.zero()};
  auto_backtrack(g, all, images, span, 0, out);
  if (order_filter) {
    std::vector<GroupMap> filtered;
    for (const auto& m : out)
      if (map_order(g, m) == *order_filter) filtered.push_back(m);
    out = std::move(filtered);
  }
  return out;
}

SubgroupBasis subgroup_basis(const Subgroup& h) {
  const Group& g = h.parent;
  // Peel off cyclic direct summands of maximal order. An element whose order
  // in the quotient by the current span is maximal admits a lift of that
  // exact order; such a lift generates a direct summand.
  std::vector<Elem> basis;
  std::vector<std::int64_t> orders;
  std::set<Elem> span{g.zero()};
  auto quotient_order = [&](const Elem& x) {
    std::int64_t k = 1;
    Elem acc = x;
    while (!span.count(acc)) {
      acc = g.add(acc, x);
      ++k;
    }
    return k;
  };
  while (static_cast<std::int64_t>(span.size()) < h.size()) {
    std::int64_t best_oq = 0;
    for (const auto& x : h.members)
      if (!span.count(x)) best_oq = std::max(best_oq, quotient_order(x));
    bool placed = false;
    for (const auto& x : h.members) {
      if (span.count(x) || quotient_order(x) != best_oq) continue;
      for (const auto& s : span) {
        Elem cand = g.add(x, s);
        if (g.elem_order(cand) != best_oq) continue;
        basis.push_back(cand);
        orders.push_back(best_oq);
        std::set<Elem> bigger = span;
        Elem acc = cand;
        std::vector<Elem> base(span.begin(), span.end());
        for (std::int64_t k = 1; k < best_oq; ++k) {
          for (const auto& b : base) bigger.insert(g.add(b, acc));
          acc = g.add(acc, cand);
        }
        span = std::move(bigger);
        placed = true;
        break;
      }
      if (placed) break;
    }
    require(placed, errc::inconsistency, "subgroup basis extraction failed");
  }
  Group abstract = orders.empty() ? Group{{}} : group_make(orders);
  return SubgroupBasis{abstract, GroupMap{abstract, g, basis}};
}

}  // namespace md
