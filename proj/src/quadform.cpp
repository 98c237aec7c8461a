#include "md/quadform.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace md {

namespace {

std::size_t off_index(std::size_t rank, std::size_t i, std::size_t j) {
  // flattened strictly-upper-triangular index for i<j
  return i * rank - i * (i + 1) / 2 + (j - i - 1);
}

}  // namespace

const Phase& QuadraticForm::off(std::size_t i, std::size_t j) const {
  return offdiag[off_index(group.rank(), i, j)];
}

Phase QuadraticForm::q(const Elem& x) const {
  Phase r = Phase::one();
  const std::size_t n = group.rank();
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] == 0) continue;
    r = r * diag[i].pow(x[i] * x[i]);
    for (std::size_t j = i + 1; j < n; ++j)
      if (x[j] != 0) r = r * off(i, j).pow(x[i] * x[j]);
  }
  return r;
}

Phase QuadraticForm::pair(const Elem& a, const Elem& b) const {
  Phase r = Phase::one();
  const std::size_t n = group.rank();
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] != 0 && b[i] != 0) r = r * diag[i].pow(2 * a[i] * b[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      std::int64_t e = a[i] * b[j] + a[j] * b[i];
      if (e != 0) r = r * off(i, j).pow(e);
    }
  }
  return r;
}

QuadraticForm quadform_make(const Group& g, std::vector<Phase> diag, std::vector<Phase> offdiag) {
  const std::size_t n = g.rank();
  require(diag.size() == n, errc::invalid_argument, "one diagonal value per generator required");
  require(offdiag.size() == n * (n - 1) / 2, errc::invalid_argument,
          "one pairing value per generator pair required");
  for (std::size_t i = 0; i < n; ++i) {
    std::int64_t d = g.orders[i];
    std::int64_t cap = (d % 2 == 1) ? d : 2 * d;
    require(cap % diag[i].order() == 0, errc::invalid_argument,
            "generator value order incompatible with generator order");
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      std::int64_t cap = gcd_i64(g.orders[i], g.orders[j]);
      require(cap % offdiag[off_index(n, i, j)].order() == 0, errc::invalid_argument,
              "pairing value order incompatible with generator orders");
    }
  return QuadraticForm{g, std::move(diag), std::move(offdiag)};
}

QuadraticForm cyclic_form(std::int64_t order, const Phase& gen_value) {
  return quadform_make(group_make({order}), {gen_value}, {});
}

Phase q_eval(const QuadraticForm& f, const Elem& x) { return f.q(f.group.reduce(x)); }

Phase pairing(const QuadraticForm& f, const Elem& a, const Elem& b) {
  return f.pair(f.group.reduce(a), f.group.reduce(b));
}

bool is_nondegenerate(const QuadraticForm& f, std::int64_t max_order) {
  require(f.group.size() <= max_order, errc::resource_limit,
          "group order exceeds nondegeneracy check bound");
  const auto elems = f.group.elements();
  for (const auto& g : elems) {
    if (f.group.is_zero(g)) continue;
    bool in_kernel = true;
    for (const auto& h : elems) {
      if (!f.pair(g, h).is_one()) {
        in_kernel = false;
        break;
      }
    }
    if (in_kernel) return false;
  }
  return true;
}

GaussData gauss_sum(const QuadraticForm& f, std::int64_t k) {
  PhaseSum num;
  for (const auto& g : f.group.elements()) num.add(f.q(g).pow(k), 1);
  double norm = std::sqrt(static_cast<double>(f.group.size()));
  return GaussData{num.eval() / norm, num, norm};
}

GaussData twisted_gauss_sum(const QuadraticForm& f, const Elem& u, std::int64_t m) {
  Elem uu = f.group.reduce(u);
  PhaseSum num;
  for (const auto& g : f.group.elements()) num.add(f.pair(uu, g) * f.q(g).pow(m), 1);
  double norm = std::sqrt(static_cast<double>(f.group.size()));
  return GaussData{num.eval() / norm, num, norm};
}

Phase gauss_sum_root(const QuadraticForm& f) {
  GaussData gd = gauss_sum(f, 1);
  // nearest eighth root of unity
  int best = 0;
  double bestd = 1e99;
  for (int a = 0; a < 8; ++a) {
    double d = std::abs(gd.value - Phase(a, 8).eval());
    if (d < bestd) {
      bestd = d;
      best = a;
    }
  }
  require(bestd < 1e-6, errc::inconsistency,
          "normalized Gauss sum is not an eighth root of unity");
  // certify: numerator^2 == zeta_8^(2a) * |G| exactly
  PhaseSum sq = gd.numerator * gd.numerator;
  sq -= PhaseSum(Phase(2 * best, 8)) * Rational(static_cast<long>(f.group.size()));
  require(sq.is_zero(), errc::inconsistency, "Gauss sum octant certification failed");
  return Phase(best, 8);
}

Involutive involutive_make(QuadraticForm form, GroupMap theta) {
  require(theta.source == form.group && theta.target == form.group, errc::invalid_argument,
          "involution must act on the form's group");
  require(theta.is_endo_involution(), errc::invalid_argument, "map is not an involution");
  for (const auto& g : form.group.elements())
    require(form.q(theta.apply(g)) == form.q(g), errc::invalid_argument,
            "involution does not preserve the form");
  require(is_nondegenerate(form), errc::invalid_argument, "form is degenerate");
  return Involutive{std::move(form), std::move(theta)};
}

Involutive involutive_neg(QuadraticForm form) {
  GroupMap th = negation_map(form.group);
  return involutive_make(std::move(form), std::move(th));
}

Subgroup orthogonal_complement(const Involutive& img, const Subgroup& h) {
  std::vector<Elem> members;
  for (const auto& g : img.group().elements()) {
    bool ok = true;
    for (const auto& x : h.members)
      if (!img.form.pair(g, x).is_one()) {
        ok = false;
        break;
      }
    if (ok) members.push_back(g);
  }
  return subgroup_from(img.group(), std::move(members));
}

RestrictedImg restrict_involutive(const Involutive& img, const Subgroup& h) {
  SubgroupBasis sb = subgroup_basis(h);
  const Group& a = sb.abstract;
  const std::size_t n = a.rank();
  std::vector<Phase> diag(n), offdiag(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) diag[i] = img.form.q(sb.embedding.images[i]);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      offdiag[off_index(n, i, j)] = img.form.pair(sb.embedding.images[i], sb.embedding.images[j]);
  QuadraticForm form = quadform_make(a, std::move(diag), std::move(offdiag));
  // express theta on the abstract copy: theta(b_i) written in basis coords
  std::vector<Elem> theta_images;
  for (std::size_t i = 0; i < n; ++i) {
    Elem target = img.theta.apply(sb.embedding.images[i]);
    bool found = false;
    for (const auto& cand : a.elements()) {
      if (sb.embedding.apply(cand) == target) {
        theta_images.push_back(cand);
        found = true;
        break;
      }
    }
    require(found, errc::precondition, "subgroup is not stable under the involution");
  }
  GroupMap th = group_map(a, a, theta_images);
  return RestrictedImg{involutive_make(std::move(form), std::move(th)), sb.embedding};
}

std::pair<RestrictedImg, RestrictedImg> split(const Involutive& img, const Subgroup& l) {
  for (const auto& x : l.members)
    require(l.contains(img.theta.apply(x)), errc::precondition,
            "splitting subgroup must be stable under the involution");
  if (l.size() > 1) {
    for (const auto& x : l.members) {
      if (img.group().is_zero(x)) continue;
      bool in_kernel = true;
      for (const auto& y : l.members)
        if (!img.form.pair(x, y).is_one()) {
          in_kernel = false;
          break;
        }
      require(!in_kernel, errc::precondition, "restriction to the subgroup is degenerate");
    }
    RestrictedImg on_l = restrict_involutive(img, l);
    Subgroup perp = orthogonal_complement(img, l);
    require(on_l.img.size() * perp.size() == img.size(), errc::inconsistency,
            "split parts do not cover the group");
    return {std::move(on_l), restrict_involutive(img, perp)};
  }
  // trivial subgroup: (trivial, everything)
  Group trivial{{}};
  RestrictedImg t{involutive_make(quadform_make(trivial, {}, {}), GroupMap{trivial, trivial, {}}),
                  GroupMap{trivial, img.group(), {}}};
  Subgroup whole = subgroup_from(img.group(), img.group().elements());
  return {std::move(t), restrict_involutive(img, whole)};
}

CanonicalDecomposition canonical_decomposition(const Involutive& img) {
  auto [even_sub, odd_sub] = even_odd_split(img.group());
  RestrictedImg even = restrict_involutive(img, even_sub);
  RestrictedImg odd = restrict_involutive(img, odd_sub);
  // diagonalize theta on the odd part: x = (x+theta x)/2 + (x - theta x)/2
  const Group& og = odd.img.group();
  std::vector<Elem> plus, minus;
  for (const auto& x : og.elements()) {
    if (odd.img.theta.apply(x) == x) plus.push_back(x);
    if (odd.img.theta.apply(x) == og.neg(x)) minus.push_back(x);
  }
  RestrictedImg odd_plus = restrict_involutive(odd.img, subgroup_from(og, std::move(plus)));
  RestrictedImg odd_minus = restrict_involutive(odd.img, subgroup_from(og, std::move(minus)));
  // re-root the embeddings of the odd eigenparts at the parent group
  odd_plus.embedding = compose(odd.embedding, odd_plus.embedding);
  odd_minus.embedding = compose(odd.embedding, odd_minus.embedding);
  return CanonicalDecomposition{std::move(even), std::move(odd_plus), std::move(odd_minus)};
}

std::vector<QuadraticForm> enumerate_quadratic_forms(const Group& g, bool nondegenerate_only,
                                                     std::int64_t max_order) {
  require(g.size() <= max_order, errc::resource_limit,
          "group order exceeds form enumeration bound");
  const std::size_t n = g.rank();
  std::vector<std::vector<Phase>> diag_choices(n), off_choices(n * (n - 1) / 2);
  double combos = 1;
  for (std::size_t i = 0; i < n; ++i) {
    std::int64_t cap = (g.orders[i] % 2 == 1) ? g.orders[i] : 2 * g.orders[i];
    for (std::int64_t k = 0; k < cap; ++k) diag_choices[i].push_back(Phase(k, cap));
    combos *= static_cast<double>(cap);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      std::int64_t cap = gcd_i64(g.orders[i], g.orders[j]);
      auto& c = off_choices[off_index(n, i, j)];
      for (std::int64_t k = 0; k < cap; ++k) c.push_back(Phase(k, cap));
      combos *= static_cast<double>(cap);
    }
  require(combos <= 5e6, errc::resource_limit, "form enumeration too large");

  std::vector<QuadraticForm> out;
  std::vector<Phase> diag(n), off(n * (n - 1) / 2);
  auto emit = [&]() {
    QuadraticForm f{g, diag, off};
    if (!nondegenerate_only || is_nondegenerate(f)) out.push_back(f);
  };
  // odometer over all choices
  std::vector<std::size_t> idx(n + off.size(), 0);
  while (true) {
    for (std::size_t i = 0; i < n; ++i) diag[i] = diag_choices[i][idx[i]];
    for (std::size_t k = 0; k < off.size(); ++k) off[k] = off_choices[k][idx[n + k]];
    emit();
    std::size_t pos = idx.size();
    bool done = idx.empty();
    while (pos > 0) {
      --pos;
      std::size_t limit =
          pos < n ? diag_choices[pos].size() : off_choices[pos - n].size();
      if (++idx[pos] < limit) break;
      idx[pos] = 0;
      if (pos == 0) done = true;
    }
    if (done) break;
  }
  return out;
}

namespace {

void iso_backtrack(const Involutive& a, const Involutive& b, const std::vector<Elem>& b_elems,
                   std::vector<Elem>& images, std::set<Elem>& span,
                   std::optional<GroupMap>& witness) {
  if (witness) return;
  const Group& ga = a.group();
  const Group& gb = b.group();
  const std::size_t i = images.size();
  if (i == ga.rank()) {
    GroupMap phi{ga, gb, images};
    // transport of the involution, checked on generators
    for (std::size_t k = 0; k < ga.rank(); ++k) {
      Elem gen = ga.zero();
      gen[k] = 1;
      if (phi.apply(a.theta.apply(gen)) != b.theta.apply(images[k])) return;
    }
    witness = phi;
    return;
  }
  Elem gen = ga.zero();
  gen[i] = 1;
  const Phase qa = a.form.q(gen);
  for (const auto& cand : b_elems) {
    if (gb.elem_order(cand) != ga.orders[i]) continue;
    if (b.form.q(cand) != qa) continue;
    bool ok = true;
    for (std::size_t j = 0; j < i; ++j) {
      Elem gj = ga.zero();
      gj[j] = 1;
      if (b.form.pair(images[j], cand) != a.form.pair(gj, gen)) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    // independence of the span so far
    Elem acc = cand;
    for (std::int64_t k = 1; k < ga.orders[i] && ok; ++k) {
      if (span.count(acc)) ok = false;
      acc = gb.add(acc, cand);
    }
    if (!ok) continue;
    std::set<Elem> bigger = span;
    acc = cand;
    std::vector<Elem> base(span.begin(), span.end());
    for (std::int64_t k = 1; k < ga.orders[i]; ++k) {
      for (const auto& s : base) bigger.insert(gb.add(s, acc));
      acc = gb.add(acc, cand);
    }
    images.push_back(cand);
    iso_backtrack(a, b, b_elems, images, bigger, witness);
    images.pop_back();
    if (witness) return;
  }
}

}  // namespace

std::optional<GroupMap> are_isomorphic(const Involutive& a, const Involutive& b,
                                       std::int64_t max_order) {
  require(a.size() <= max_order && b.size() <= max_order, errc::resource_limit,
          "group order exceeds isomorphism test bound");
  if (a.size() != b.size()) return std::nullopt;
  std::vector<Elem> b_elems = b.group().elements();
  std::vector<Elem> images;
  std::set<Elem> span{b.group().zero()};
  std::optional<GroupMap> witness;
  iso_backtrack(a, b, b_elems, images, span, witness);
  return witness;
}

std::optional<GroupMap> forms_isomorphic(const QuadraticForm& a, const QuadraticForm& b,
                                         std::int64_t max_order) {
  require(a.group.size() <= max_order && b.group.size() <= max_order, errc::resource_limit,
          "group order exceeds isomorphism test bound");
  if (a.group.size() != b.group.size()) return std::nullopt;
  // reuse the involutive search with the identity involution on both sides
  Involutive ia{a, identity_map(a.group)};
  Involutive ib{b, identity_map(b.group)};
  std::vector<Elem> b_elems = b.group.elements();
  std::vector<Elem> images;
  std::set<Elem> span{b.group.zero()};
  std::optional<GroupMap> witness;
  iso_backtrack(ia, ib, b_elems, images, span, witness);
  return witness;
}

RestrictedForm restrict_form(const QuadraticForm& f, const Subgroup& h) {
  SubgroupBasis sb = subgroup_basis(h);
  const Group& a = sb.abstract;
  const std::size_t n = a.rank();
  std::vector<Phase> diag(n), offdiag(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) diag[i] = f.q(sb.embedding.images[i]);
  std::size_t idx = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      offdiag[idx++] = f.pair(sb.embedding.images[i], sb.embedding.images[j]);
  return RestrictedForm{quadform_make(a, std::move(diag), std::move(offdiag)), sb.embedding};
}

}  // namespace md
