#include "md/family.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace md {

std::string family_name(FamilyId f) {
  switch (f) {
    case FamilyId::A: return "A";
    case FamilyId::B: return "B";
    case FamilyId::C: return "C";
    case FamilyId::D: return "D";
    case FamilyId::E: return "E";
  }
  return "?";
}

FamilyId family_from_name(const std::string& s) {
  if (s == "A" || s == "a") return FamilyId::A;
  if (s == "B" || s == "b") return FamilyId::B;
  if (s == "C" || s == "c") return FamilyId::C;
  if (s == "D" || s == "d") return FamilyId::D;
  if (s == "E" || s == "e") return FamilyId::E;
  fail(errc::parse, "unknown family: " + s);
}

bool AdmissibilityReport::all_pass() const {
  for (const auto& c : conditions)
    if (!c.satisfied) return false;
  return true;
}

std::string AdmissibilityReport::summary() const {
  std::ostringstream os;
  os << "family " << family_name(family) << ":";
  for (const auto& c : conditions)
    os << "\n  [" << (c.satisfied ? "ok" : "FAIL") << "] " << c.name
       << (c.detail.empty() ? "" : ": " + c.detail);
  return os.str();
}

namespace {

using Cond = AdmissibilityReport::Condition;

// ----- shared helpers ---------------------------------------------------

// one representative per 2-orbit {x, pair(x)} outside the fixed block
std::vector<Elem> section_of(const Group& g, const std::vector<Elem>& fixed_block,
                             const std::function<Elem(const Elem&)>& pair_map,
                             bool alt) {
  std::set<Elem> fixed(fixed_block.begin(), fixed_block.end());
  std::vector<Elem> out;
  for (const auto& x : g.elements()) {
    if (fixed.count(x)) continue;
    Elem y = pair_map(x);
    const Elem& rep = alt ? std::max(x, y) : std::min(x, y);
    if (x == rep) out.push_back(x);
  }
  return out;
}

struct Ctx {
  const FamilyInstance& inst;
  const Group& G;
  const Group& H;

  explicit Ctx(const FamilyInstance& i)
      : inst(i), G(i.first.group()), H(i.second.group()) {}

  Phase pairG(const Elem& a, const Elem& b) const { return inst.first.form.pair(a, b); }
  Phase pairH(const Elem& a, const Elem& b) const { return inst.second.form.pair(a, b); }
  Phase qG(const Elem& a) const { return inst.first.form.q(a); }
  Phase qH(const Elem& a) const { return inst.second.form.q(a); }
  Elem thG(const Elem& a) const { return inst.first.theta.apply(a); }
  Elem thH(const Elem& a) const { return inst.second.theta.apply(a); }
  Elem embG(const Elem& u) const { return inst.u.into_first.apply(u); }
  Elem embH(const Elem& u) const { return inst.u.into_second.apply(u); }

  // an element of the G-side fixed-point image pulled back to abstract U
  Elem pullG(const Elem& x) const {
    for (const auto& u : inst.u.u.elements())
      if (embG(u) == x) return u;
    fail(errc::inconsistency, "element not in the identified fixed-point subgroup");
  }
  Elem pullH(const Elem& x) const {
    for (const auto& u : inst.u.u.elements())
      if (embH(u) == x) return u;
    fail(errc::inconsistency, "element not in the identified fixed-point subgroup");
  }
};

Rational delta(bool b) { return Rational(b ? 1 : 0); }

// ----- admissibility + construction -------------------------------------

UIdent trivial_u(const Group& g, const Group& h) {
  Group t{{}};
  return UIdent{t, GroupMap{t, g, {}}, GroupMap{t, h, {}}};
}

// exact Gauss-sum opposition; on success also hands out c = G(q1)
void cond_gauss_opposition(std::vector<Cond>& cs, const Involutive& a, const Involutive& b,
                           std::optional<Phase>& c_out) {
  Cond c;
  c.name = "gauss-sums-opposite";
  try {
    Phase r1 = gauss_sum_root(a.form);
    Phase r2 = gauss_sum_root(b.form);
    c.satisfied = (r1 == r2 * Phase::minus_one());
    c.detail = "G(q1)=" + r1.str() + ", G(q2)=" + r2.str();
    if (c.satisfied) {
      // certify the opposition once more at the phase-sum level:
      // (sum q1)^2 |Gamma| == (sum q2)^2 |G|
      PhaseSum s1 = gauss_sum(a.form, 1).numerator;
      PhaseSum s2 = gauss_sum(b.form, 1).numerator;
      PhaseSum lhs = s1 * s1 * Rational(static_cast<long>(b.size()));
      lhs -= s2 * s2 * Rational(static_cast<long>(a.size()));
      if (!lhs.is_zero()) {
        c.satisfied = false;
        c.detail += " (exact certification failed)";
      }
    }
    if (c.satisfied) c_out = gauss_sum_root(a.form);
  } catch (const error& e) {
    c.satisfied = false;
    c.detail = e.what();
  }
  cs.push_back(std::move(c));
}

bool theta_is_negation(const Involutive& img) {
  for (const auto& x : img.group().elements())
    if (img.theta.apply(x) != img.group().neg(x)) return false;
  return true;
}

std::vector<Elem> fixed_elems(const Involutive& img) {
  return fixed_subgroup(img.group(), img.theta).members;
}

struct Analysis {
  AdmissibilityReport report;
  std::optional<FamilyInstance> instance;
};

void finish_sections(FamilyInstance& inst, const FamilyInput& in,
                     const std::vector<Elem>& fixedG, const std::vector<Elem>& fixedH) {
  const Group& G = inst.first.group();
  const Group& H = inst.second.group();
  auto pair1 = [&](const Elem& x) { return inst.first.theta.apply(x); };
  auto pair2 = [&](const Elem& x) { return inst.second.theta.apply(x); };
  inst.gstar = section_of(G, fixedG, pair1, in.alt_sections);
  inst.hstar = section_of(H, fixedH, pair2, in.alt_sections);
}

Analysis analyze_a(const FamilyInput& in) {
  Analysis out;
  out.report.family = FamilyId::A;
  auto& cs = out.report.conditions;
  std::optional<Phase> c;
  cond_gauss_opposition(cs, in.first, in.second, c);

  Subgroup f1 = fixed_subgroup(in.first.group(), in.first.theta);
  Subgroup f2 = fixed_subgroup(in.second.group(), in.second.theta);

  std::optional<UIdent> u;
  {
    Cond cc;
    cc.name = "fixed-points-identified";
    if (in.u_map) {
      const UIdent& m = *in.u_map;
      bool ok = m.into_first.source == m.u && m.into_second.source == m.u &&
                m.into_first.target == in.first.group() &&
                m.into_second.target == in.second.group();
      if (ok) {
        std::set<Elem> im1, im2;
        for (const auto& x : m.u.elements()) {
          Elem a = m.into_first.apply(x);
          Elem b = m.into_second.apply(x);
          im1.insert(a);
          im2.insert(b);
          if (!f1.contains(a) || !f2.contains(b)) ok = false;
          if (in.first.form.q(a) != in.second.form.q(b)) ok = false;
        }
        if (static_cast<std::int64_t>(im1.size()) != m.u.size() ||
            static_cast<std::int64_t>(im2.size()) != m.u.size())
          ok = false;
        if (im1.size() != static_cast<std::size_t>(f1.size()) ||
            im2.size() != static_cast<std::size_t>(f2.size()))
          ok = false;
      }
      cc.satisfied = ok;
      if (!ok) cc.detail = "provided identification is not a form-preserving bijection";
      if (ok) u = m;
    } else {
      RestrictedForm r1 = restrict_form(in.first.form, f1);
      RestrictedForm r2 = restrict_form(in.second.form, f2);
      auto w = forms_isomorphic(r1.form, r2.form);
      cc.satisfied = w.has_value();
      if (w) {
        u = UIdent{r1.form.group, r1.embedding, compose(r2.embedding, *w)};
        cc.detail = "fixed points " + r1.form.group.str() + " with matching form values";
      } else {
        cc.detail = "fixed-point metric groups are not isomorphic";
      }
    }
    cs.push_back(std::move(cc));
  }

  {
    Cond cc;
    cc.name = "size-constraint";
    std::int64_t nG = in.first.size(), nH = in.second.size();
    std::int64_t nU = u ? u->u.size() : f1.size();
    std::int64_t diff = nH - nG;
    Rational prefactor = rat(4 * nU, diff == 0 ? 1 : diff);
    bool ok4 = diff == 4 * nU;
    bool ok2 = diff == 2 * nU && (nG / nU) % 2 == 0 && nG % nU == 0;
    cc.satisfied = diff > 0 && (ok4 || ok2);
    std::ostringstream os;
    os << "|Gamma|-|G| = " << diff << ", |U| = " << nU << ", prefactor 4|U|/(|Gamma|-|G|) = "
       << (diff > 0 ? rat_to_string(prefactor) : std::string("-"));
    if (!cc.satisfied && diff > 0 && !rat_is_integer(prefactor)) os << " (non-integral)";
    cc.detail = os.str();
    cs.push_back(std::move(cc));
  }

  if (!out.report.all_pass()) return out;

  FamilyInstance inst;
  inst.family = FamilyId::A;
  inst.first = in.first;
  inst.second = in.second;
  inst.c = *c;
  inst.u = *u;
  finish_sections(inst, in, f1.members, f2.members);
  out.instance = std::move(inst);
  return out;
}

Analysis analyze_b(const FamilyInput& in) {
  Analysis out;
  out.report.family = FamilyId::B;
  auto& cs = out.report.conditions;

  {
    Cond cc;
    cc.name = "involutions-are-negation";
    cc.satisfied = theta_is_negation(in.first) && theta_is_negation(in.second);
    cs.push_back(std::move(cc));
  }
  std::optional<Phase> c;
  cond_gauss_opposition(cs, in.first, in.second, c);

  Subgroup t1 = two_torsion(in.first.group());
  Subgroup t2 = two_torsion(in.second.group());
  {
    Cond cc;
    cc.name = "two-torsion-Z2";
    cc.satisfied = t1.size() == 2 && t2.size() == 2;
    cc.detail = "|G_2| = " + std::to_string(t1.size()) + ", |Gamma_2| = " +
                std::to_string(t2.size());
    cs.push_back(std::move(cc));
  }
  {
    Cond cc;
    cc.name = "size-constraint";
    cc.satisfied = in.second.size() == in.first.size() + 2;
    cc.detail = "|Gamma|-|G| = " + std::to_string(in.second.size() - in.first.size());
    cs.push_back(std::move(cc));
  }
  if (!out.report.all_pass()) return out;

  Elem g0 = t1.members[0];
  if (in.first.group().is_zero(g0)) g0 = t1.members[1];
  Elem gamma0 = t2.members[0];
  if (in.second.group().is_zero(gamma0)) gamma0 = t2.members[1];

  Phase pg = in.first.form.pair(g0, g0);
  Phase ph = in.second.form.pair(gamma0, gamma0);
  {
    Cond cc;
    cc.name = "marked-self-pairings-opposite";
    cc.satisfied = pg == ph * Phase::minus_one();
    cc.detail = "<g0,g0> = " + pg.str() + ", <gamma0,gamma0> = " + ph.str();
    cs.push_back(std::move(cc));
  }
  {
    Cond cc;
    cc.name = "central-charge-square";
    Phase lhs = c->pow(2);
    Phase rhs = in.first.form.q(g0).inv() * in.second.form.q(gamma0);
    cc.satisfied = lhs == rhs;
    cc.detail = "c^2 = " + lhs.str() + ", q1(g0)^-1 q2(gamma0) = " + rhs.str();
    cs.push_back(std::move(cc));
  }
  if (!out.report.all_pass()) return out;

  // s = c (q1(g0)^-1 + q2(gamma0)^-1)/sqrt(2), evaluated exactly: the ratio
  // of the two inverted values is +-i, so the sum is sqrt(2) times a phase
  Phase p = in.first.form.q(g0).inv();
  Phase r = in.second.form.q(gamma0).inv();
  Phase ratio = r * p.inv();
  Phase s;
  {
    Cond cc;
    cc.name = "s-is-fourth-root";
    if (ratio == Phase(1, 4)) {
      s = *c * p * Phase(1, 8);
      cc.satisfied = true;
    } else if (ratio == Phase(3, 4)) {
      s = *c * p * Phase(7, 8);
      cc.satisfied = true;
    } else {
      cc.satisfied = false;
      cc.detail = "q2(gamma0)^-1 / q1(g0)^-1 = " + ratio.str() + ", expected +-i";
    }
    if (cc.satisfied) {
      // s^2 = <g0,g0> holds exactly on every instance
      cc.satisfied = s.pow(2) == pg && s.pow(4).is_one();
      cc.detail = "s = " + s.str();
    }
    cs.push_back(std::move(cc));
  }
  if (!out.report.all_pass()) return out;

  FamilyInstance inst;
  inst.family = FamilyId::B;
  inst.first = in.first;
  inst.second = in.second;
  inst.c = *c;
  inst.u = trivial_u(in.first.group(), in.second.group());
  inst.k0 = g0;
  inst.sigma0 = gamma0;
  inst.kstar = {g0};
  inst.sigmastar = {gamma0};
  inst.s = s;
  finish_sections(inst, in, t1.members, t2.members);
  out.instance = std::move(inst);
  return out;
}

Analysis analyze_c(const FamilyInput& in) {
  Analysis out;
  out.report.family = FamilyId::C;
  auto& cs = out.report.conditions;
  std::optional<Phase> c;
  cond_gauss_opposition(cs, in.first, in.second, c);

  Subgroup f1 = fixed_subgroup(in.first.group(), in.first.theta);
  Subgroup f2 = fixed_subgroup(in.second.group(), in.second.theta);
  {
    Cond cc;
    cc.name = "fixed-points-order-4";
    cc.satisfied = f1.size() == 4 && f2.size() == 4;
    cc.detail = "|G^theta| = " + std::to_string(f1.size()) + ", |Gamma^theta| = " +
                std::to_string(f2.size());
    cs.push_back(std::move(cc));
  }
  {
    Cond cc;
    cc.name = "size-constraint";
    cc.satisfied = in.second.size() == in.first.size() + 4;
    cc.detail = "|Gamma|-|G| = " + std::to_string(in.second.size() - in.first.size());
    cs.push_back(std::move(cc));
  }
  if (!out.report.all_pass()) return out;

  const Group& G = in.first.group();
  const Group& H = in.second.group();

  // candidate marked pairs: order-two fixed elements with equal form values
  auto order2_fixed = [](const Group& g, const Subgroup& f) {
    std::vector<Elem> v;
    for (const auto& x : f.members)
      if (!g.is_zero(x) && g.is_zero(g.mul(x, 2))) v.push_back(x);
    return v;
  };
  std::vector<Elem> cand_k = order2_fixed(G, f1), cand_s = order2_fixed(H, f2);

  auto dispatch = [&](const Elem& k0, const Elem& s0, std::string& diag) -> std::optional<bool> {
    // K_* and Sigma_* relative to the marked elements
    std::vector<Elem> ks, ss;
    for (const auto& x : f1.members)
      if (!G.is_zero(x) && x != k0) ks.push_back(x);
    for (const auto& x : f2.members)
      if (!H.is_zero(x) && x != s0) ss.push_back(x);
    if (ks.size() != 2 || ss.size() != 2) {
      diag = "marked complement is not a two-element set";
      return std::nullopt;
    }
    bool eq_k = in.first.form.q(ks[0]) == in.first.form.q(ks[1]);
    bool eq_s = in.second.form.q(ss[0]) == in.second.form.q(ss[1]);
    bool neg_k = in.first.form.q(ks[0]) == in.first.form.q(ks[1]) * Phase::minus_one();
    bool neg_s = in.second.form.q(ss[0]) == in.second.form.q(ss[1]) * Phase::minus_one();
    bool a1 = eq_k && neg_s;
    bool a2 = neg_k && eq_s;
    if (a1 && a2) {
      diag = "both dispatch patterns hold";
      return std::nullopt;
    }
    if (!a1 && !a2) {
      std::ostringstream os;
      os << "neither dispatch pattern holds (q1 on K_*: " << in.first.form.q(ks[0]).str() << ","
         << in.first.form.q(ks[1]).str() << "; q2 on Sigma_*: " << in.second.form.q(ss[0]).str()
         << "," << in.second.form.q(ss[1]).str() << ")";
      Phase uu = in.first.form.pair(k0, k0);
      if (uu.is_minus_one())
        os << "; <u0,u0> = -1: this input belongs to the two-torsion-Z2 family after "
              "splitting off the fixed metric group";
      diag = os.str();
      return std::nullopt;
    }
    return a1;
  };

  Elem k0, s0;
  bool case_a1 = true;
  {
    Cond cc;
    cc.name = "marked-elements";
    bool found = false;
    std::string last_diag = "no order-two fixed elements with matching form values";
    if (in.k0 || in.sigma0) {
      if (!in.k0 || !in.sigma0) {
        cc.satisfied = false;
        cc.detail = "both marked elements must be given together";
        cs.push_back(std::move(cc));
        return out;
      }
      Elem a = G.reduce(*in.k0), b = H.reduce(*in.sigma0);
      bool valid = std::find(cand_k.begin(), cand_k.end(), a) != cand_k.end() &&
                   std::find(cand_s.begin(), cand_s.end(), b) != cand_s.end() &&
                   in.first.form.q(a) == in.second.form.q(b);
      if (valid) {
        auto d = dispatch(a, b, last_diag);
        if (d) {
          k0 = a;
          s0 = b;
          case_a1 = *d;
          found = true;
        }
      } else {
        last_diag = "marked elements are not order-two fixed elements with equal form values";
      }
    } else {
      for (const auto& a : cand_k) {
        for (const auto& b : cand_s) {
          if (in.first.form.q(a) != in.second.form.q(b)) continue;
          auto d = dispatch(a, b, last_diag);
          if (d) {
            k0 = a;
            s0 = b;
            case_a1 = *d;
            found = true;
            break;
          }
        }
        if (found) break;
      }
    }
    cc.satisfied = found;
    if (!found) cc.detail = last_diag;
    cs.push_back(std::move(cc));
    if (!found) return out;
  }
  if (in.case_tag) {
    Cond cc;
    cc.name = "case-tag-consistent";
    bool want_a1 = *in.case_tag == "A1";
    bool want_a2 = *in.case_tag == "A2";
    cc.satisfied = (want_a1 && case_a1) || (want_a2 && !case_a1);
    cc.detail = "inferred case " + std::string(case_a1 ? "A1" : "A2");
    cs.push_back(std::move(cc));
  }

  std::vector<Elem> ks, ss;
  for (const auto& x : f1.members)
    if (!G.is_zero(x) && x != k0) ks.push_back(x);
  for (const auto& x : f2.members)
    if (!H.is_zero(x) && x != s0) ss.push_back(x);

  Phase s = case_a1 ? *c * in.first.form.q(ks[0]).inv() : *c * in.second.form.q(ss[0]).inv();
  {
    Cond cc;
    cc.name = "s-is-fourth-root";
    cc.satisfied = s.pow(4).is_one();
    cc.detail = "s = " + s.str();
    cs.push_back(std::move(cc));
  }

  // integrality conditions on the paired blocks
  {
    Cond cc;
    cc.name = "paired-block-first";
    cc.satisfied = true;
    for (const auto& k : ks) {
      Phase a1p = in.first.form.pair(k0, k);
      Phase a2p = s.pow(2) * in.first.form.pair(k, k);
      if (!(a1p.is_minus_one() || a2p.is_one())) cc.satisfied = false;
    }
    if (!cc.satisfied) cc.detail = "(1+<u0,k>)(1-s^2<k,k>) != 0 on K_*";
    cs.push_back(std::move(cc));
  }
  {
    Cond cc;
    cc.name = "paired-block-second";
    cc.satisfied = true;
    for (const auto& sg : ss) {
      Phase a1p = in.second.form.pair(s0, sg);
      Phase a2p = s.pow(2) * in.second.form.pair(sg, sg);
      if (!(a1p.is_minus_one() || a2p.is_minus_one())) cc.satisfied = false;
    }
    if (!cc.satisfied) cc.detail = "(1+<u0,sigma>)(1+s^2<sigma,sigma>) != 0 on Sigma_*";
    cs.push_back(std::move(cc));
  }
  {
    Cond cc;
    cc.name = "cyclic-fixed-points-need-fermion";
    bool okG = true, okH = true;
    bool cyc1 = false, cyc2 = false;
    for (const auto& x : f1.members)
      if (G.elem_order(x) == 4) cyc1 = true;
    for (const auto& x : f2.members)
      if (H.elem_order(x) == 4) cyc2 = true;
    if (cyc1) okG = in.first.form.q(k0).is_minus_one();
    if (cyc2) okH = in.second.form.q(s0).is_minus_one();
    cc.satisfied = okG && okH;
    cs.push_back(std::move(cc));
  }
  // consequences of the dispatch assumptions, certified exactly
  {
    Cond cc;
    cc.name = "marked-pair-consequences";
    bool ok = in.first.form.pair(k0, k0).is_one() && in.second.form.pair(s0, s0).is_one();
    ok = ok && in.first.form.pair(ks[0], ks[0]) == in.first.form.pair(ks[1], ks[1]);
    ok = ok && in.second.form.pair(ss[0], ss[0]) == in.second.form.pair(ss[1], ss[1]);
    ok = ok && in.first.form.q(k0).is_real_sign();
    PhaseSum e4;
    e4.add(s * in.first.form.q(ks[0]), 1);
    e4.add(s * in.first.form.q(ks[1]), 1);
    e4.add(s * in.second.form.q(ss[0]), 1);
    e4.add(s * in.second.form.q(ss[1]), 1);
    e4.add(*c, -2);
    ok = ok && e4.is_zero();
    cc.satisfied = ok;
    cs.push_back(std::move(cc));
  }
  if (!out.report.all_pass()) return out;

  FamilyInstance inst;
  inst.family = FamilyId::C;
  inst.first = in.first;
  inst.second = in.second;
  inst.c = *c;
  inst.k0 = k0;
  inst.sigma0 = s0;
  inst.kstar = ks;
  inst.sigmastar = ss;
  inst.case_a1 = case_a1;
  inst.s = s;
  // U = {0, u0} identified with {0,k0} and {0,sigma0}
  Group u2 = group_make({2});
  inst.u = UIdent{u2, GroupMap{u2, G, {k0}}, GroupMap{u2, H, {s0}}};

  // f table: normalize f(k1,sigma1) = s, propagate along the two shifts
  // f(k+k0,sigma) = f(k,sigma) conj<u0,sigma>, f(k,sigma+sigma0) = f(k,sigma) conj<k,u0>
  inst.f_table.assign(2, std::vector<Phase>(2));
  Phase shift_k = in.second.form.pair(s0, ss[0]).conj();  // changing k1 -> k2 = k1+k0
  Phase shift_s = in.first.form.pair(ks[0], k0).conj();   // changing sigma1 -> sigma2
  Phase shift_s2 = in.first.form.pair(ks[1], k0).conj();
  inst.f_table[0][0] = inst.s;
  inst.f_table[1][0] = inst.s * shift_k;
  inst.f_table[0][1] = inst.s * shift_s;
  inst.f_table[1][1] = inst.s * shift_k * shift_s2;
  {
    Cond cc;
    cc.name = "f-table-consistent";
    // all four entries must be +-s, and the two propagation routes to
    // f(k2,sigma2) must agree
    bool ok = true;
    for (int i = 0; i < 2 && ok; ++i)
      for (int j = 0; j < 2 && ok; ++j) {
        Phase ratio = inst.f_table[i][j] * inst.s.inv();
        if (!ratio.is_real_sign()) ok = false;
      }
    Phase alt = inst.s * shift_s * in.second.form.pair(s0, ss[1]).conj();
    ok = ok && alt == inst.f_table[1][1];
    cc.satisfied = ok;
    out.report.conditions.push_back(std::move(cc));
    if (!ok) return out;
  }

  finish_sections(inst, in, f1.members, f2.members);
  out.instance = std::move(inst);
  return out;
}

Analysis analyze_de(const FamilyInput& in, bool is_e) {
  Analysis out;
  out.report.family = is_e ? FamilyId::E : FamilyId::D;
  auto& cs = out.report.conditions;
  {
    Cond cc;
    cc.name = "involutions-are-negation";
    cc.satisfied = theta_is_negation(in.first) && theta_is_negation(in.second);
    cs.push_back(std::move(cc));
  }
  std::optional<Phase> c;
  cond_gauss_opposition(cs, in.first, in.second, c);
  {
    Cond cc;
    cc.name = "even-odd-split";
    bool g_even = in.first.size() % 2 == 0;
    bool h_odd = in.second.size() % 2 == 1;
    cc.satisfied = g_even && h_odd;
    cc.detail = "|G| = " + std::to_string(in.first.size()) + ", |Gamma| = " +
                std::to_string(in.second.size());
    cs.push_back(std::move(cc));
  }
  Subgroup t1 = two_torsion(in.first.group());
  {
    Cond cc;
    cc.name = "two-torsion-Z2xZ2";
    cc.satisfied = t1.size() == 4;
    cc.detail = "|G_2| = " + std::to_string(t1.size());
    cs.push_back(std::move(cc));
  }
  {
    Cond cc;
    cc.name = "size-constraint";
    std::int64_t diff = in.second.size() - in.first.size();
    cc.satisfied = is_e ? diff == -1 : diff == 1;
    std::ostringstream os;
    os << "|Gamma|-|G| = " << diff << ", N_pi,pi,pi formula value = "
       << (diff != 0 ? rat_to_string(rat(4, is_e ? -diff : diff)) : std::string("-"));
    cc.detail = os.str();
    cs.push_back(std::move(cc));
  }
  if (!out.report.all_pass()) return out;

  FamilyInstance inst;
  inst.family = is_e ? FamilyId::E : FamilyId::D;
  inst.first = in.first;
  inst.second = in.second;
  inst.c = *c;
  inst.u = trivial_u(in.first.group(), in.second.group());
  for (const auto& x : t1.members)
    if (!in.first.group().is_zero(x)) inst.kstar.push_back(x);
  finish_sections(inst, in,  t1.members, {in.second.group().zero()});
  out.instance = std::move(inst);
  return out;
}

Analysis analyze(const FamilyInput& in) {
  switch (in.family) {
    case FamilyId::A: return analyze_a(in);
    case FamilyId::B: return analyze_b(in);
    case FamilyId::C: return analyze_c(in);
    case FamilyId::D: return analyze_de(in, false);
    case FamilyId::E: return analyze_de(in, true);
  }
  fail(errc::invalid_argument, "unknown family");
}

}  // namespace

AdmissibilityReport admissibility_report(const FamilyInput& in) { return analyze(in).report; }

FamilyInstance family_instance_make(const FamilyInput& in) {
  Analysis a = analyze(in);
  if (!a.instance) fail(errc::precondition, "inadmissible input:\n" + a.report.summary());
  if (in.family == FamilyId::C) verify_f_identities(*a.instance);
  return std::move(*a.instance);
}

// ----- labels and duality -------------------------------------------------

std::vector<Label> family_labels(const FamilyInstance& inst) {
  std::vector<Label> out;
  switch (inst.family) {
    case FamilyId::A:
    case FamilyId::C: {
      for (const auto& u : inst.u.u.elements()) out.push_back(label_u0(u));
      for (const auto& u : inst.u.u.elements()) out.push_back(label_upi(u));
      if (inst.family == FamilyId::C) {
        for (const auto& k : inst.kstar)
          for (int e : {1, -1}) out.push_back(label_paired(0, k, e));
      }
      for (const auto& g : inst.gstar) out.push_back(label_grouplike(0, g));
      if (inst.family == FamilyId::C) {
        for (const auto& sg : inst.sigmastar)
          for (int e : {1, -1}) out.push_back(label_paired(1, sg, e));
      }
      for (const auto& h : inst.hstar) out.push_back(label_grouplike(1, h));
      break;
    }
    case FamilyId::B: {
      out.push_back(label_point0());
      out.push_back(label_pointpi());
      for (int e : {1, -1}) out.push_back(label_paired(0, inst.k0, e));
      for (const auto& g : inst.gstar) out.push_back(label_grouplike(0, g));
      for (int e : {1, -1}) out.push_back(label_paired(1, inst.sigma0, e));
      for (const auto& h : inst.hstar) out.push_back(label_grouplike(1, h));
      break;
    }
    case FamilyId::D:
    case FamilyId::E: {
      out.push_back(label_point0());
      out.push_back(label_pointpi());
      for (const auto& k : inst.kstar)
        for (int e : {1, -1}) out.push_back(label_paired(0, k, e));
      for (const auto& g : inst.gstar) out.push_back(label_grouplike(0, g));
      for (const auto& h : inst.hstar) out.push_back(label_grouplike(1, h));
      break;
    }
  }
  return out;
}

namespace {

// orbit representative of -x among the section labels
Elem dual_rep(const Group& g, const GroupMap& theta, const std::vector<Elem>& star,
              const Elem& x) {
  Elem m = g.neg(x);
  if (std::find(star.begin(), star.end(), m) != star.end()) return m;
  Elem t = theta.apply(m);
  require(std::find(star.begin(), star.end(), t) != star.end(), errc::inconsistency,
          "dual representative not found in section");
  return t;
}

int find_label(const std::vector<Label>& ls, const Label& l) {
  auto it = std::find(ls.begin(), ls.end(), l);
  require(it != ls.end(), errc::inconsistency, "label lookup failed");
  return static_cast<int>(it - ls.begin());
}

}  // namespace

std::vector<int> family_duality(const FamilyInstance& inst) {
  Ctx ctx(inst);
  std::vector<Label> ls = family_labels(inst);
  std::vector<int> dual(ls.size());
  for (std::size_t i = 0; i < ls.size(); ++i) {
    const Label& l = ls[i];
    Label d = l;
    switch (l.kind) {
      case Label::Kind::Point0:
      case Label::Kind::PointPi:
        break;  // self-dual
      case Label::Kind::U0:
        d = label_u0(inst.u.u.neg(l.elem));
        break;
      case Label::Kind::UPi:
        d = label_upi(inst.u.u.neg(l.elem));
        break;
      case Label::Kind::Paired: {
        int sign_mul = 1;
        Elem target = l.elem;
        if (inst.family == FamilyId::B) {
          sign_mul = ctx.pairG(inst.k0, inst.k0).as_sign();
        } else if (inst.family == FamilyId::C) {
          sign_mul = inst.s.pow(2).as_sign();
          target = l.side == 0 ? ctx.G.neg(l.elem) : ctx.H.neg(l.elem);
        } else {  // D, E
          sign_mul = inst.c.pow(2).as_sign() * ctx.pairG(l.elem, l.elem).as_sign();
        }
        d = label_paired(l.side, target, l.sign * sign_mul);
        break;
      }
      case Label::Kind::Grouplike:
        d = label_grouplike(
            l.side, l.side == 0 ? dual_rep(ctx.G, inst.first.theta, inst.gstar, l.elem)
                                : dual_rep(ctx.H, inst.second.theta, inst.hstar, l.elem));
        break;
      case Label::Kind::Prod:
        fail(errc::invalid_argument, "product labels do not occur in family data");
    }
    dual[i] = find_label(ls, d);
  }
  return dual;
}

// ----- S/T construction ----------------------------------------------------

namespace {

cx entry_a(const Ctx& c, double a, double b, const Label& x, const Label& y) {
  using K = Label::Kind;
  const FamilyInstance& inst = c.inst;
  auto PG = [&](const Elem& p, const Elem& q) { return c.pairG(p, q).conj().eval(); };
  auto PH = [&](const Elem& p, const Elem& q) { return c.pairH(p, q).conj().eval(); };
  if (x.kind == K::U0 || x.kind == K::UPi) {
    bool xpi = x.kind == K::UPi;
    if (y.kind == K::U0 || y.kind == K::UPi) {
      bool ypi = y.kind == K::UPi;
      double w = (xpi == ypi) ? (a - b) / 2 : (a + b) / 2;
      return w * PG(c.embG(x.elem), c.embG(y.elem));
    }
    if (y.kind == K::Grouplike && y.side == 0) return a * PG(c.embG(x.elem), y.elem);
    return (xpi ? -b : b) * PH(c.embH(x.elem), y.elem);
  }
  if (x.kind == K::Grouplike && x.side == 0) {
    if (y.kind == K::U0 || y.kind == K::UPi) return a * PG(x.elem, c.embG(y.elem));
    if (y.kind == K::Grouplike && y.side == 0)
      return a * (PG(x.elem, y.elem) + PG(c.thG(x.elem), y.elem));
    return 0.0;
  }
  // x second-side grouplike
  if (y.kind == K::U0) return b * PH(x.elem, c.embH(y.elem));
  if (y.kind == K::UPi) return -b * PH(x.elem, c.embH(y.elem));
  if (y.kind == K::Grouplike && y.side == 1)
    return -b * (PH(x.elem, y.elem) + PH(c.thH(x.elem), y.elem));
  return 0.0;
}

cx entry_b(const Ctx& c, double a, double b, const Label& x, const Label& y) {
  using K = Label::Kind;
  const FamilyInstance& inst = c.inst;
  double s8 = 1.0 / (2.0 * std::sqrt(2.0));
  cx sval = inst.s.eval();
  auto block = [&](const Label& l) {
    switch (l.kind) {
      case K::Point0: return 0;
      case K::PointPi: return 1;
      case K::Paired: return l.side == 0 ? 2 : 4;
      case K::Grouplike: return l.side == 0 ? 3 : 5;
      default: fail(errc::inconsistency, "bad label in two-torsion family");
    }
  };
  int bx = block(x), by = block(y);
  if (bx > by) return entry_b(c, a, b, y, x);
  cx pgg = c.pairG(inst.k0, inst.k0).eval();
  cx phh = c.pairH(inst.sigma0, inst.sigma0).eval();
  switch (bx * 8 + by) {
    case 0 * 8 + 0: return (a - b) / 2;
    case 0 * 8 + 1: return (a + b) / 2;
    case 0 * 8 + 2: return a / 2;
    case 0 * 8 + 3: return a;
    case 0 * 8 + 4: return b / 2;
    case 0 * 8 + 5: return b;
    case 1 * 8 + 1: return (a - b) / 2;
    case 1 * 8 + 2: return a / 2;
    case 1 * 8 + 3: return a;
    case 1 * 8 + 4: return -b / 2;
    case 1 * 8 + 5: return -b;
    case 2 * 8 + 2: return (a / 2 + double(x.sign * y.sign) * s8 * sval) * pgg;
    case 2 * 8 + 3: return a * c.pairG(inst.k0, y.elem).eval();
    case 2 * 8 + 4: return double(x.sign * y.sign) * s8 * sval;
    case 2 * 8 + 5: return 0.0;
    case 3 * 8 + 3:
      return a * (c.pairG(x.elem, y.elem).eval() + c.pairG(x.elem, y.elem).conj().eval());
    case 3 * 8 + 4: return 0.0;
    case 3 * 8 + 5: return 0.0;
    case 4 * 8 + 4: return -(b / 2 - double(x.sign * y.sign) * s8 * sval) * phh;
    case 4 * 8 + 5: return -b * c.pairH(inst.sigma0, y.elem).eval();
    case 5 * 8 + 5:
      return -b * (c.pairH(x.elem, y.elem).eval() + c.pairH(x.elem, y.elem).conj().eval());
    default: fail(errc::inconsistency, "unhandled block pair");
  }
}

cx entry_c(const Ctx& c, double a, double b, const Label& x, const Label& y) {
  using K = Label::Kind;
  const FamilyInstance& inst = c.inst;
  auto kind_rank = [&](const Label& l) {
    switch (l.kind) {
      case K::U0: return 0;
      case K::UPi: return 1;
      case K::Paired: return l.side == 0 ? 2 : 4;
      case K::Grouplike: return l.side == 0 ? 3 : 5;
      default: fail(errc::inconsistency, "bad label in order-4 family");
    }
  };
  int bx = kind_rank(x), by = kind_rank(y);
  if (bx > by) return entry_c(c, a, b, y, x);
  auto fval = [&](const Elem& k, const Elem& sg) {
    int i = k == inst.kstar[0] ? 0 : 1;
    int j = sg == inst.sigmastar[0] ? 0 : 1;
    return inst.f_table[i][j].eval();
  };
  cx sval = inst.s.eval();
  switch (bx * 8 + by) {
    case 0 * 8 + 0:
      return (a - b) / 2 * c.pairG(c.embG(x.elem), c.embG(y.elem)).conj().eval();
    case 0 * 8 + 1:
      return (a + b) / 2 * c.pairG(c.embG(x.elem), c.embG(y.elem)).conj().eval();
    case 1 * 8 + 1:
      return (a - b) / 2 * c.pairG(c.embG(x.elem), c.embG(y.elem)).conj().eval();
    case 0 * 8 + 2:
    case 1 * 8 + 2:
      return a / 2 * c.pairG(c.embG(x.elem), y.elem).conj().eval();
    case 0 * 8 + 3:
    case 1 * 8 + 3:
      return a * c.pairG(c.embG(x.elem), y.elem).conj().eval();
    case 0 * 8 + 4:
      return b / 2 * c.pairH(c.embH(x.elem), y.elem).conj().eval();
    case 1 * 8 + 4:
      return -b / 2 * c.pairH(c.embH(x.elem), y.elem).conj().eval();
    case 0 * 8 + 5:
      return b * c.pairH(c.embH(x.elem), y.elem).conj().eval();
    case 1 * 8 + 5:
      return -b * c.pairH(c.embH(x.elem), y.elem).conj().eval();
    case 2 * 8 + 2:
      return (a / 2 + double(x.sign * y.sign) / 4.0 * sval) *
             c.pairG(x.elem, y.elem).conj().eval();
    case 2 * 8 + 3:
      return a * c.pairG(x.elem, y.elem).conj().eval();
    case 2 * 8 + 4:
      return double(x.sign * y.sign) / 4.0 * fval(x.elem, y.elem);
    case 2 * 8 + 5:
      return 0.0;
    case 3 * 8 + 3:
      return a * (c.pairG(x.elem, y.elem).conj().eval() +
                  c.pairG(x.elem, c.thG(y.elem)).conj().eval());
    case 3 * 8 + 4:
    case 3 * 8 + 5:
      return 0.0;
    case 4 * 8 + 4:
      return -(b / 2 - double(x.sign * y.sign) / 4.0 * sval) *
             c.pairH(x.elem, y.elem).conj().eval();
    case 4 * 8 + 5:
      return -b * c.pairH(x.elem, y.elem).conj().eval();
    case 5 * 8 + 5:
      return -b * (c.pairH(x.elem, y.elem).conj().eval() +
                   c.pairH(x.elem, c.thH(y.elem)).conj().eval());
    default: fail(errc::inconsistency, "unhandled block pair");
  }
}

cx entry_d(const Ctx& c, double a, double b, const Label& x, const Label& y) {
  using K = Label::Kind;
  const FamilyInstance& inst = c.inst;
  auto block = [&](const Label& l) {
    switch (l.kind) {
      case K::Point0: return 0;
      case K::PointPi: return 1;
      case K::Paired: return 2;
      case K::Grouplike: return l.side == 0 ? 3 : 4;
      default: fail(errc::inconsistency, "bad label in split-size family");
    }
  };
  int bx = block(x), by = block(y);
  if (bx > by) return entry_d(c, a, b, y, x);
  switch (bx * 8 + by) {
    case 0 * 8 + 0: return (a - b) / 2;
    case 0 * 8 + 1: return (a + b) / 2;
    case 0 * 8 + 2: return a / 2;
    case 0 * 8 + 3: return a;
    case 0 * 8 + 4: return b;
    case 1 * 8 + 1: return (a - b) / 2;
    case 1 * 8 + 2: return a / 2;
    case 1 * 8 + 3: return a;
    case 1 * 8 + 4: return -b;
    case 2 * 8 + 2: {
      cx v = a * c.pairG(x.elem, y.elem).eval();
      if (x.elem == y.elem)
        v += inst.c.eval() * double(x.sign * y.sign) * c.qG(x.elem).eval();
      return v / 2.0;
    }
    case 2 * 8 + 3: return a * c.pairG(x.elem, y.elem).eval();
    case 2 * 8 + 4: return 0.0;
    case 3 * 8 + 3:
      return a * (c.pairG(x.elem, y.elem).eval() + c.pairG(x.elem, y.elem).conj().eval());
    case 3 * 8 + 4: return 0.0;
    case 4 * 8 + 4:
      return -b * (c.pairH(x.elem, y.elem).eval() + c.pairH(x.elem, y.elem).conj().eval());
    default: fail(errc::inconsistency, "unhandled block pair");
  }
}

Phase t_entry(const Ctx& c, const Label& l) {
  using K = Label::Kind;
  switch (l.kind) {
    case K::Point0:
    case K::PointPi: return Phase::one();
    case K::U0:
    case K::UPi: return c.qG(c.embG(l.elem));
    case K::Paired: return l.side == 0 ? c.qG(l.elem) : c.qH(l.elem);
    case K::Grouplike: return l.side == 0 ? c.qG(l.elem) : c.qH(l.elem);
    default: fail(errc::inconsistency, "bad label");
  }
}

}  // namespace

ModularData family_build(const FamilyInstance& inst, double tol) {
  Ctx ctx(inst);
  ModularData md;
  md.labels = family_labels(inst);
  md.duality = family_duality(inst);
  const int n = static_cast<int>(md.labels.size());
  md.S.resize(n, n);
  double a = 1.0 / std::sqrt(static_cast<double>(inst.sizeG()));
  double b = 1.0 / std::sqrt(static_cast<double>(inst.sizeH()));
  bool is_e = inst.family == FamilyId::E;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cx v;
      switch (inst.family) {
        case FamilyId::A: v = entry_a(ctx, a, b, md.labels[i], md.labels[j]); break;
        case FamilyId::B: v = entry_b(ctx, a, b, md.labels[i], md.labels[j]); break;
        case FamilyId::C: v = entry_c(ctx, a, b, md.labels[i], md.labels[j]); break;
        case FamilyId::D:
        case FamilyId::E: v = entry_d(ctx, a, b, md.labels[i], md.labels[j]); break;
      }
      if (is_e) {
        double fi = md.labels[i].kind == Label::Kind::Point0 ? 1.0 : -1.0;
        double fj = md.labels[j].kind == Label::Kind::Point0 ? 1.0 : -1.0;
        v = -fi * fj * v;
      }
      md.S(i, j) = v;
    }
  for (int i = 0; i < n; ++i) md.T.push_back(t_entry(ctx, md.labels[i]));
  md.c = is_e ? -inst.c.eval() : inst.c.eval();

  RelationReport rep = verify_relations(md, tol);
  if (!rep.pass())
    fail(errc::inconsistency,
         "constructed data violates the modular relations (validator gap): " + rep.summary());
  return md;
}

// ----- closed-form Verlinde -------------------------------------------------

namespace {

Label dual_label(const FamilyInstance& inst, const Label& l) {
  Ctx ctx(inst);
  switch (l.kind) {
    case Label::Kind::Point0:
    case Label::Kind::PointPi: return l;
    case Label::Kind::U0: return label_u0(inst.u.u.neg(l.elem));
    case Label::Kind::UPi: return label_upi(inst.u.u.neg(l.elem));
    case Label::Kind::Paired: {
      int sign_mul = 1;
      Elem target = l.elem;
      if (inst.family == FamilyId::B) {
        sign_mul = ctx.pairG(inst.k0, inst.k0).as_sign();
      } else if (inst.family == FamilyId::C) {
        sign_mul = inst.s.pow(2).as_sign();
        target = l.side == 0 ? ctx.G.neg(l.elem) : ctx.H.neg(l.elem);
      } else {
        sign_mul = inst.c.pow(2).as_sign() * ctx.pairG(l.elem, l.elem).as_sign();
      }
      return label_paired(l.side, target, l.sign * sign_mul);
    }
    case Label::Kind::Grouplike:
      return label_grouplike(l.side,
                             l.side == 0
                                 ? dual_rep(ctx.G, inst.first.theta, inst.gstar, l.elem)
                                 : dual_rep(ctx.H, inst.second.theta, inst.hstar, l.elem));
    default: fail(errc::invalid_argument, "label without a dual");
  }
}

// exact subgroup character sums: (1/|U|) sum over v in U of the pairings
Rational indicator_first(const Ctx& c, const Elem& x) {
  PhaseSum s;
  for (const auto& v : c.inst.u.u.elements()) s.add(c.pairG(x, c.embG(v)), 1);
  auto r = s.as_rational();
  require(r.has_value(), errc::inconsistency, "subgroup character sum not rational");
  return *r / Rational(static_cast<long>(c.inst.u.u.size()));
}

Rational indicator_second(const Ctx& c, const Elem& x) {
  PhaseSum s;
  for (const auto& v : c.inst.u.u.elements()) s.add(c.pairH(x, c.embH(v)), 1);
  auto r = s.as_rational();
  require(r.has_value(), errc::inconsistency, "subgroup character sum not rational");
  return *r / Rational(static_cast<long>(c.inst.u.u.size()));
}

Rational indicator_mixed(const Ctx& c, const Elem& xg, const Elem& xh) {
  PhaseSum s;
  for (const auto& v : c.inst.u.u.elements())
    s.add(c.pairG(xg, c.embG(v)) * c.pairH(xh, c.embH(v)), 1);
  auto r = s.as_rational();
  require(r.has_value(), errc::inconsistency, "subgroup character sum not rational");
  return *r / Rational(static_cast<long>(c.inst.u.u.size()));
}

int rank_a(const Label& l) {
  switch (l.kind) {
    case Label::Kind::U0: return 0;
    case Label::Kind::UPi: return 1;
    case Label::Kind::Grouplike: return l.side == 0 ? 2 : 3;
    default: fail(errc::inconsistency, "bad label in near-group family");
  }
}

PhaseSum closed_a(const Ctx& c, Label x, Label y, Label z) {
  const FamilyInstance& inst = c.inst;
  std::array<Label, 3> L{x, y, z};
  std::sort(L.begin(), L.end(), [](const Label& p, const Label& q) {
    return rank_a(p) < rank_a(q);
  });
  x = L[0];
  y = L[1];
  z = L[2];
  const int code = rank_a(x) * 100 + rank_a(y) * 10 + rank_a(z);
  const Group& U = inst.u.u;
  const Group& G = c.G;
  const Group& H = c.H;
  Rational P = rat(4 * U.size(), inst.sizeH() - inst.sizeG());
  auto e1 = [&](const Label& l) { return c.embG(l.elem); };
  auto e2 = [&](const Label& l) { return c.embH(l.elem); };
  Rational r(0);
  switch (code) {
    case 0: r = delta(U.is_zero(U.add(U.add(x.elem, y.elem), z.elem))); break;
    case 11: r = delta(U.is_zero(U.add(U.add(x.elem, y.elem), z.elem))); break;
    case 1: break;
    case 2: case 3: case 12: case 13: break;
    case 22: {
      Elem w = G.add(e1(x), G.add(y.elem, z.elem));
      Elem wt = G.add(e1(x), G.add(c.thG(y.elem), z.elem));
      r = delta(G.is_zero(w)) + delta(G.is_zero(wt));
      break;
    }
    case 23: break;
    case 33: {
      Elem w = H.add(e2(x), H.add(y.elem, z.elem));
      Elem wt = H.add(e2(x), H.add(c.thH(y.elem), z.elem));
      r = delta(H.is_zero(w)) + delta(H.is_zero(wt));
      break;
    }
    case 111: r = P * indicator_first(c, G.add(e1(x), G.add(e1(y), e1(z)))); break;
    case 112: r = P * indicator_first(c, G.add(e1(x), G.add(e1(y), z.elem))); break;
    case 113: r = P * indicator_second(c, H.add(e2(x), H.add(e2(y), z.elem))); break;
    case 122: {
      Elem w = G.add(e1(x), G.add(y.elem, z.elem));
      Elem wt = G.add(e1(x), G.add(c.thG(y.elem), z.elem));
      r = P * indicator_first(c, w) + delta(G.is_zero(w)) + delta(G.is_zero(wt));
      break;
    }
    case 123: r = P * indicator_mixed(c, G.add(e1(x), y.elem), z.elem); break;
    case 133: {
      Elem w = H.add(e2(x), H.add(y.elem, z.elem));
      Elem wt = H.add(e2(x), H.add(c.thH(y.elem), z.elem));
      r = P * indicator_second(c, w) - delta(H.is_zero(w)) - delta(H.is_zero(wt));
      break;
    }
    case 222: {
      Elem w = G.add(x.elem, G.add(y.elem, z.elem));
      r = P * indicator_first(c, w) + delta(G.is_zero(w)) +
          delta(G.is_zero(G.add(c.thG(x.elem), G.add(y.elem, z.elem)))) +
          delta(G.is_zero(G.add(x.elem, G.add(c.thG(y.elem), z.elem)))) +
          delta(G.is_zero(G.add(x.elem, G.add(y.elem, c.thG(z.elem)))));
      break;
    }
    case 223: r = P * indicator_mixed(c, G.add(x.elem, y.elem), z.elem); break;
    case 233: r = P * indicator_mixed(c, x.elem, H.add(y.elem, z.elem)); break;
    case 333: {
      Elem w = H.add(x.elem, H.add(y.elem, z.elem));
      r = P * indicator_second(c, w) - delta(H.is_zero(w)) -
          delta(H.is_zero(H.add(c.thH(x.elem), H.add(y.elem, z.elem)))) -
          delta(H.is_zero(H.add(x.elem, H.add(c.thH(y.elem), z.elem)))) -
          delta(H.is_zero(H.add(x.elem, H.add(y.elem, c.thH(z.elem)))));
      break;
    }
    default: fail(errc::inconsistency, "unhandled label combination");
  }
  return PhaseSum::rational(r);
}

int rank_b(const Label& l) {
  switch (l.kind) {
    case Label::Kind::Point0: return 0;
    case Label::Kind::PointPi: return 1;
    case Label::Kind::Paired: return l.side == 0 ? 2 : 4;
    case Label::Kind::Grouplike: return l.side == 0 ? 3 : 5;
    default: fail(errc::inconsistency, "bad label in two-torsion family");
  }
}

PhaseSum closed_b(const Ctx& c, Label x, Label y, Label z) {
  const FamilyInstance& inst = c.inst;
  std::array<Label, 3> L{x, y, z};
  std::sort(L.begin(), L.end(), [](const Label& p, const Label& q) {
    return rank_b(p) < rank_b(q);
  });
  x = L[0];
  y = L[1];
  z = L[2];
  if (x.kind == Label::Kind::Point0)
    return PhaseSum::rational(delta(y == dual_label(inst, z)));
  const Group& G = c.G;
  const Group& H = c.H;
  Rational D = rat(1, inst.sizeH() - inst.sizeG());
  int pgg = c.pairG(inst.k0, inst.k0).as_sign();
  const int code = rank_b(x) * 100 + rank_b(y) * 10 + rank_b(z);
  Rational r(0);
  switch (code) {
    case 111: r = D * 4; break;
    case 112: r = D * 2; break;
    case 113: r = D * 4; break;
    case 114: r = D * 2; break;
    case 115: r = D * 4; break;
    case 122: r = D + rat(1, 2); break;
    case 123: r = D * 2; break;
    case 124: r = D + rat(y.sign * z.sign, 2); break;
    case 125: r = D * 2; break;
    case 133: r = D * 4 + delta(y.elem == z.elem); break;
    case 134: r = D * 2; break;
    case 135: r = D * 4; break;
    case 144: r = D - rat(1, 2); break;
    case 145: r = D * 2; break;
    case 155: r = D * 4 - delta(y.elem == z.elem); break;
    case 222:
      r = D / 2 + rat(x.sign * y.sign + y.sign * z.sign + z.sign * x.sign, 4);
      break;
    case 223:
      r = D + Rational(x.sign * y.sign * c.pairG(G.add(inst.k0, z.elem), inst.k0).as_sign()) /
                  Rational(2);
      break;
    case 224:
      r = D / 2 +
          Rational(z.sign * (x.sign + y.sign) * pgg + x.sign * y.sign) / Rational(4);
      break;
    case 225:
      r = D - Rational(x.sign * y.sign * pgg *
                       c.pairH(inst.sigma0, z.elem).as_sign()) /
                  Rational(2);
      break;
    case 233: {
      Elem w = G.add(inst.k0, G.add(y.elem, z.elem));
      Elem w2 = G.add(inst.k0, G.sub(y.elem, z.elem));
      r = D * 2 + delta(G.is_zero(w)) + delta(G.is_zero(w2));
      break;
    }
    case 234:
      r = D + Rational(x.sign * z.sign * c.pairG(y.elem, inst.k0).as_sign()) / Rational(2);
      break;
    case 235: r = D * 2; break;
    case 244:
      r = D / 2 +
          Rational(y.sign * z.sign - x.sign * (y.sign + z.sign) * pgg) / Rational(4);
      break;
    case 245:
      r = D + Rational(x.sign * y.sign * c.pairH(z.elem, inst.sigma0).as_sign()) / Rational(2);
      break;
    case 255: r = D * 2; break;
    case 333: {
      Elem s = G.add(x.elem, G.add(y.elem, z.elem));
      r = D * 4 + delta(G.is_zero(s)) +
          delta(G.is_zero(G.add(G.neg(x.elem), G.add(y.elem, z.elem)))) +
          delta(G.is_zero(G.add(x.elem, G.sub(z.elem, y.elem)))) +
          delta(G.is_zero(G.sub(G.add(x.elem, y.elem), z.elem)));
      break;
    }
    case 334: r = D * 2; break;
    case 335: r = D * 4; break;
    case 344:
      r = D + Rational(y.sign * z.sign *
                       c.pairG(G.add(inst.k0, x.elem), inst.k0).as_sign()) /
                  Rational(2);
      break;
    case 345: r = D * 2; break;
    case 355: r = D * 4; break;
    case 444:
      r = D / 2 + rat(x.sign * y.sign + y.sign * z.sign + z.sign * x.sign, 4);
      break;
    case 445:
      r = D + Rational(x.sign * y.sign *
                       c.pairH(H.add(inst.sigma0, z.elem), inst.sigma0).as_sign()) /
                  Rational(2);
      break;
    case 455: {
      Elem w = H.add(inst.sigma0, H.add(y.elem, z.elem));
      Elem w2 = H.add(inst.sigma0, H.sub(y.elem, z.elem));
      r = D * 2 - delta(H.is_zero(w)) - delta(H.is_zero(w2));
      break;
    }
    case 555: {
      Elem s = H.add(x.elem, H.add(y.elem, z.elem));
      r = D * 4 - delta(H.is_zero(s)) -
          delta(H.is_zero(H.add(H.neg(x.elem), H.add(y.elem, z.elem)))) -
          delta(H.is_zero(H.add(x.elem, H.sub(z.elem, y.elem)))) -
          delta(H.is_zero(H.sub(H.add(x.elem, y.elem), z.elem)));
      break;
    }
    default: fail(errc::inconsistency, "unhandled label combination");
  }
  return PhaseSum::rational(r);
}

int rank_c(const Label& l) {
  switch (l.kind) {
    case Label::Kind::U0: return 0;
    case Label::Kind::UPi: return 1;
    case Label::Kind::Paired: return l.side == 0 ? 2 : 4;
    case Label::Kind::Grouplike: return l.side == 0 ? 3 : 5;
    default: fail(errc::inconsistency, "bad label in order-4 family");
  }
}

PhaseSum closed_c(const Ctx& c, Label x, Label y, Label z) {
  const FamilyInstance& inst = c.inst;
  std::array<Label, 3> L{x, y, z};
  std::sort(L.begin(), L.end(), [](const Label& p, const Label& q) {
    return rank_c(p) < rank_c(q);
  });
  x = L[0];
  y = L[1];
  z = L[2];
  const Group& U = inst.u.u;
  const Group& G = c.G;
  const Group& H = c.H;
  const Elem k0 = inst.k0, s0 = inst.sigma0;
  const Elem k1 = inst.kstar[0], sg1 = inst.sigmastar[0];
  Phase s2 = inst.s.pow(2);
  auto fphase = [&](const Elem& k, const Elem& sg) {
    int i = k == inst.kstar[0] ? 0 : 1;
    int j = sg == inst.sigmastar[0] ? 0 : 1;
    return inst.f_table[i][j];
  };
  // cross-group transport of an element of {0,k0} / {0,sigma0}
  auto toH = [&](const Elem& wg) { return G.is_zero(wg) ? H.zero() : s0; };
  auto toG = [&](const Elem& wh) { return H.is_zero(wh) ? G.zero() : k0; };
  auto sgn1 = [&](const Elem& a, const Elem& b) { return Rational(c.pairG(a, b).as_sign()); };
  auto sgn2 = [&](const Elem& a, const Elem& b) { return Rational(c.pairH(a, b).as_sign()); };
  const int code = rank_c(x) * 100 + rank_c(y) * 10 + rank_c(z);
  PhaseSum r;
  auto add_rat = [&](const Rational& v) { r += PhaseSum::rational(v); };
  switch (code) {
    case 0: add_rat(delta(U.is_zero(U.add(U.add(x.elem, y.elem), z.elem)))); break;
    case 11: add_rat(delta(U.is_zero(U.add(U.add(x.elem, y.elem), z.elem)))); break;
    case 1: case 2: case 3: case 4: case 5: break;
    case 12: case 13: case 14: case 15: break;
    case 22:
      add_rat(delta(G.is_zero(G.add(c.embG(x.elem), G.add(y.elem, z.elem))) &&
                    y.sign == z.sign));
      break;
    case 23: case 24: case 25: break;
    case 33: {
      Elem w = G.add(c.embG(x.elem), G.add(y.elem, z.elem));
      Elem wt = G.add(c.embG(x.elem), G.add(y.elem, c.thG(z.elem)));
      add_rat(delta(G.is_zero(w)) + delta(G.is_zero(wt)));
      break;
    }
    case 34: case 35: break;
    case 44:
      add_rat(delta(H.is_zero(H.add(c.embH(x.elem), H.add(y.elem, z.elem))) &&
                    y.sign == z.sign));
      break;
    case 45: break;
    case 55: {
      Elem w = H.add(c.embH(x.elem), H.add(y.elem, z.elem));
      Elem wt = H.add(c.embH(x.elem), H.add(y.elem, c.thH(z.elem)));
      add_rat(delta(H.is_zero(w)) + delta(H.is_zero(wt)));
      break;
    }
    case 111: add_rat(Rational(2)); break;
    case 112: add_rat((Rational(1) + sgn1(z.elem, k0)) / 2); break;
    case 113: add_rat(Rational(1) + sgn1(z.elem, k0)); break;
    case 114: add_rat((Rational(1) + sgn2(z.elem, s0)) / 2); break;
    case 115: add_rat(Rational(1) + sgn2(z.elem, s0)); break;
    case 122: {
      // w = u + k + k' lies in {0, k0}
      Elem w = G.add(c.embG(x.elem), G.add(y.elem, z.elem));
      add_rat((Rational(1) + delta(G.is_zero(w))) / 2);
      Rational term = sgn1(w, k1) - sgn2(toH(w), sg1);
      add_rat(Rational(y.sign * z.sign) * term / 4 * (s2.is_one() ? 1 : -1));
      break;
    }
    case 123: add_rat((Rational(1) + sgn1(G.add(y.elem, z.elem), k0)) / 2); break;
    case 124: break;
    case 125: add_rat((Rational(1) + sgn1(y.elem, k0) * sgn2(z.elem, s0)) / 2); break;
    case 133: {
      Elem w = G.add(c.embG(x.elem), G.add(y.elem, z.elem));
      Elem wt = G.add(c.embG(x.elem), G.add(y.elem, c.thG(z.elem)));
      add_rat(Rational(1) + sgn1(G.add(y.elem, z.elem), k0) + delta(G.is_zero(w)) +
              delta(G.is_zero(wt)));
      break;
    }
    case 134: add_rat((Rational(1) + sgn1(y.elem, k0) * sgn2(z.elem, s0)) / 2); break;
    case 135: add_rat(Rational(1) + sgn1(y.elem, k0) * sgn2(z.elem, s0)); break;
    case 144: {
      Elem w = H.add(c.embH(x.elem), H.add(y.elem, z.elem));
      add_rat((Rational(1) - delta(H.is_zero(w))) / 2);
      Rational term = sgn1(toG(w), k1) - sgn2(w, sg1);
      add_rat(Rational(y.sign * z.sign) * term / 4 * (s2.is_one() ? 1 : -1));
      break;
    }
    case 145: add_rat((Rational(1) + sgn2(H.add(y.elem, z.elem), s0)) / 2); break;
    case 155: {
      Elem w = H.add(c.embH(x.elem), H.add(y.elem, z.elem));
      Elem wt = H.add(c.embH(x.elem), H.add(y.elem, c.thH(z.elem)));
      add_rat(Rational(1) + sgn2(H.add(y.elem, z.elem), s0) - delta(H.is_zero(w)) -
              delta(H.is_zero(wt)));
      break;
    }
    case 222: {
      Elem w = G.add(x.elem, G.add(y.elem, z.elem));
      Rational signs(1 + x.sign * y.sign + y.sign * z.sign + z.sign * x.sign);
      add_rat((Rational(1) + sgn1(k0, w)) * signs / 8);
      break;
    }
    case 223: {
      // (1 + s^2 ee' conj<k, k+k'+g>)(1 + <g,u0>)/4
      PhaseSum one = PhaseSum::rational(Rational(1));
      Phase inner = c.pairG(x.elem, G.add(G.add(x.elem, y.elem), z.elem)).conj();
      PhaseSum lhs = one + PhaseSum(s2 * inner) * Rational(x.sign * y.sign);
      PhaseSum rhs = one + PhaseSum::rational(sgn1(z.elem, k0));
      r += lhs * rhs * rat(1, 4);
      break;
    }
    case 224: {
      // (1+<sigma,u0>)(1+ee' + e''(e+e') <k+k',k> s f(k,sigma))/8
      PhaseSum inner = PhaseSum::rational(Rational(1 + x.sign * y.sign));
      Phase t = inst.s * fphase(x.elem, z.elem) * c.pairG(G.add(x.elem, y.elem), x.elem);
      inner += PhaseSum(t) * Rational(z.sign * (x.sign + y.sign));
      PhaseSum rhs = PhaseSum::rational(Rational(1) + sgn2(z.elem, s0));
      r += inner * rhs * rat(1, 8);
      break;
    }
    case 225: {
      // (1+<gamma,u0>)(1 - ee' s^2 <k-k',sigma1> conj<gamma,sigma1>)/4
      Elem w = G.sub(x.elem, y.elem);  // in {0,k0}
      PhaseSum one = PhaseSum::rational(Rational(1));
      Phase t = s2 * c.pairH(toH(w), sg1) * c.pairH(z.elem, sg1).conj();
      PhaseSum lhs = one - PhaseSum(t) * Rational(x.sign * y.sign);
      PhaseSum rhs = one + PhaseSum::rational(sgn2(z.elem, s0));
      r += lhs * rhs * rat(1, 4);
      break;
    }
    case 233: {
      Elem w = G.add(x.elem, G.add(y.elem, z.elem));
      Elem wt = G.add(x.elem, G.add(y.elem, c.thG(z.elem)));
      add_rat((Rational(1) + sgn1(w, k0)) / 2 + delta(G.is_zero(w)) + delta(G.is_zero(wt)));
      break;
    }
    case 234: {
      // (1 + ee' s f(k,sigma) conj<k+g,k>)(1 - <g,u0>)/4
      PhaseSum one = PhaseSum::rational(Rational(1));
      Phase t = inst.s * fphase(x.elem, z.elem) * c.pairG(G.add(x.elem, y.elem), x.elem).conj();
      PhaseSum lhs = one + PhaseSum(t) * Rational(x.sign * z.sign);
      PhaseSum rhs = one - PhaseSum::rational(sgn1(y.elem, k0));
      r += lhs * rhs * rat(1, 4);
      break;
    }
    case 235:
      add_rat((Rational(1) + sgn1(G.add(x.elem, y.elem), k0) * sgn2(z.elem, s0)) / 2);
      break;
    case 244: {
      // (1+ee' - e''(e+e') s f(k,sigma) conj<sigma+sigma',sigma>)(1+<k,u0>)/8
      PhaseSum inner = PhaseSum::rational(Rational(1 + y.sign * z.sign));
      Phase t = inst.s * fphase(x.elem, y.elem) * c.pairH(H.add(y.elem, z.elem), y.elem).conj();
      inner -= PhaseSum(t) * Rational(x.sign * (y.sign + z.sign));
      PhaseSum rhs = PhaseSum::rational(Rational(1) + sgn1(x.elem, k0));
      r += inner * rhs * rat(1, 8);
      break;
    }
    case 245: {
      // (1 - ee' s f(k,sigma) conj<sigma+gamma,sigma>)(1-<gamma,u0>)/4
      PhaseSum one = PhaseSum::rational(Rational(1));
      Phase t = inst.s * fphase(x.elem, y.elem) * c.pairH(H.add(y.elem, z.elem), y.elem).conj();
      PhaseSum lhs = one - PhaseSum(t) * Rational(x.sign * y.sign);
      PhaseSum rhs = one - PhaseSum::rational(sgn2(z.elem, s0));
      r += lhs * rhs * rat(1, 4);
      break;
    }
    case 255:
      add_rat((Rational(1) + sgn1(x.elem, k0) * sgn2(H.add(y.elem, z.elem), s0)) / 2);
      break;
    case 333: {
      Elem w = G.add(x.elem, G.add(y.elem, z.elem));
      add_rat(Rational(1) + sgn1(w, k0) + delta(G.is_zero(w)) +
              delta(G.is_zero(G.add(c.thG(x.elem), G.add(y.elem, z.elem)))) +
              delta(G.is_zero(G.add(x.elem, G.add(c.thG(y.elem), z.elem)))) +
              delta(G.is_zero(G.add(x.elem, G.add(y.elem, c.thG(z.elem))))));
      break;
    }
    case 334:
      add_rat((Rational(1) + sgn1(G.add(x.elem, y.elem), k0) * sgn2(z.elem, s0)) / 2);
      break;
    case 335:
      add_rat(Rational(1) + sgn1(G.add(x.elem, y.elem), k0) * sgn2(z.elem, s0));
      break;
    case 344: {
      // (1 + ee' s^2 conj<g,k1> <k1, sigma-sigma'>)(1+<g,u0>)/4
      Elem w = H.sub(y.elem, z.elem);  // in {0, sigma0}
      PhaseSum one = PhaseSum::rational(Rational(1));
      Phase t = s2 * c.pairG(x.elem, k1).conj() * c.pairG(k1, toG(w));
      PhaseSum lhs = one + PhaseSum(t) * Rational(y.sign * z.sign);
      PhaseSum rhs = one + PhaseSum::rational(sgn1(x.elem, k0));
      r += lhs * rhs * rat(1, 4);
      break;
    }
    case 345:
      add_rat((Rational(1) + sgn1(x.elem, k0) * sgn2(H.add(y.elem, z.elem), s0)) / 2);
      break;
    case 355:
      add_rat(Rational(1) + sgn1(x.elem, k0) * sgn2(H.add(y.elem, z.elem), s0));
      break;
    case 444: {
      Elem w = H.add(x.elem, H.add(y.elem, z.elem));
      Rational signs(1 + x.sign * y.sign + y.sign * z.sign + z.sign * x.sign);
      add_rat((Rational(1) + sgn2(w, s0)) * signs / 8);
      break;
    }
    case 445: {
      // (1 - ee' s^2 conj<sigma+sigma'+gamma, sigma>)(1+<sigma+sigma'+gamma,u0>)/4
      Elem w = H.add(x.elem, H.add(y.elem, z.elem));
      PhaseSum one = PhaseSum::rational(Rational(1));
      Phase t = s2 * c.pairH(w, x.elem).conj();
      PhaseSum lhs = one - PhaseSum(t) * Rational(x.sign * y.sign);
      PhaseSum rhs = one + PhaseSum::rational(sgn2(w, s0));
      r += lhs * rhs * rat(1, 4);
      break;
    }
    case 455: {
      Elem w = H.add(x.elem, H.add(y.elem, z.elem));
      Elem wt = H.add(x.elem, H.add(y.elem, c.thH(z.elem)));
      add_rat((Rational(1) + sgn2(w, s0)) / 2 - delta(H.is_zero(w)) - delta(H.is_zero(wt)));
      break;
    }
    case 555: {
      Elem w = H.add(x.elem, H.add(y.elem, z.elem));
      add_rat(Rational(1) + sgn2(w, s0) - delta(H.is_zero(w)) -
              delta(H.is_zero(H.add(c.thH(x.elem), H.add(y.elem, z.elem)))) -
              delta(H.is_zero(H.add(x.elem, H.add(c.thH(y.elem), z.elem)))) -
              delta(H.is_zero(H.add(x.elem, H.add(y.elem, c.thH(z.elem))))));
      break;
    }
    default: fail(errc::inconsistency, "unhandled label combination");
  }
  return r;
}

int rank_d(const Label& l) {
  switch (l.kind) {
    case Label::Kind::Point0: return 0;
    case Label::Kind::PointPi: return 1;
    case Label::Kind::Paired: return 2;
    case Label::Kind::Grouplike: return l.side == 0 ? 3 : 4;
    default: fail(errc::inconsistency, "bad label in split-size family");
  }
}

PhaseSum closed_d(const Ctx& c, Label x, Label y, Label z) {
  const FamilyInstance& inst = c.inst;
  std::array<Label, 3> L{x, y, z};
  std::sort(L.begin(), L.end(), [](const Label& p, const Label& q) {
    return rank_d(p) < rank_d(q);
  });
  x = L[0];
  y = L[1];
  z = L[2];
  bool is_e = inst.family == FamilyId::E;
  Rational twist(1);
  if (is_e) {
    int nonzero = 0;
    for (const auto& l : L)
      if (l.kind != Label::Kind::Point0) ++nonzero;
    twist = Rational(nonzero % 2 == 0 ? 1 : -1);
  }
  if (x.kind == Label::Kind::Point0)
    return PhaseSum::rational(twist * delta(y == dual_label(inst, z)));
  const Group& G = c.G;
  const Group& H = c.H;
  Rational D = rat(1, inst.sizeH() - inst.sizeG());
  int c2 = inst.c.pow(2).as_sign();
  const int code = rank_d(x) * 100 + rank_d(y) * 10 + rank_d(z);
  Rational r(0);
  switch (code) {
    case 111: case 113: case 114: r = D * 4; break;
    case 112: r = D * 2; break;
    case 122: r = D + delta(y == dual_label(inst, z)); break;
    case 123: case 124: r = D * 2; break;
    case 133: r = D * 4 + delta(y.elem == z.elem); break;
    case 134: r = D * 4; break;
    case 144: r = D * 4 - delta(y.elem == z.elem); break;
    case 222: {
      r = (D + delta(G.is_zero(G.add(x.elem, G.add(y.elem, z.elem))))) / 2;
      auto term = [&](const Label& p, const Label& q, const Label& t) {
        // ee' <k,k+k''> delta_{k,k'}; all pairings are signs here
        if (p.elem != q.elem) return Rational(0);
        return Rational(p.sign * q.sign *
                        c.pairG(p.elem, G.add(p.elem, t.elem)).as_sign());
      };
      r += Rational(c2) * (term(x, y, z) + term(y, z, x) + term(z, x, y)) / 2;
      break;
    }
    case 223: {
      r = D;
      if (x.elem == y.elem)
        r += Rational(c2 * x.sign * y.sign *
                      c.pairG(x.elem, G.add(x.elem, z.elem)).as_sign());
      break;
    }
    case 224: r = D; break;
    case 233: {
      Elem w = G.add(x.elem, G.add(y.elem, z.elem));
      Elem w2 = G.add(x.elem, G.sub(y.elem, z.elem));
      r = D * 2 + delta(G.is_zero(w)) + delta(G.is_zero(w2));
      break;
    }
    case 234: case 244: r = D * 2; break;
    case 333: {
      r = D * 4 + delta(G.is_zero(G.add(x.elem, G.add(y.elem, z.elem)))) +
          delta(G.add(x.elem, y.elem) == z.elem) + delta(G.add(y.elem, z.elem) == x.elem) +
          delta(G.add(z.elem, x.elem) == y.elem);
      break;
    }
    case 334: case 344: r = D * 4; break;
    case 444: {
      r = D * 4 - delta(H.is_zero(H.add(x.elem, H.add(y.elem, z.elem)))) -
          delta(H.add(x.elem, y.elem) == z.elem) - delta(H.add(y.elem, z.elem) == x.elem) -
          delta(H.add(z.elem, x.elem) == y.elem);
      break;
    }
    default: fail(errc::inconsistency, "unhandled label combination");
  }
  return PhaseSum::rational(twist * r);
}

PhaseSum closed_entry(const Ctx& c, const Label& x, const Label& y, const Label& z) {
  switch (c.inst.family) {
    case FamilyId::A: return closed_a(c, x, y, z);
    case FamilyId::B: return closed_b(c, x, y, z);
    case FamilyId::C: return closed_c(c, x, y, z);
    case FamilyId::D:
    case FamilyId::E: return closed_d(c, x, y, z);
  }
  fail(errc::invalid_argument, "unknown family");
}

std::int64_t entry_to_int(const PhaseSum& p, const Label& x, const Label& y, const Label& z) {
  auto r = p.as_rational();
  if (!r || !rat_is_integer(*r) || *r < 0)
    fail(errc::integrality, "closed-form coefficient is not a non-negative integer at N[" +
                                x.str() + "," + y.str() + "," + z.str() + "]" +
                                (r ? " = " + rat_to_string(*r) : ""));
  return *rat_to_i64(*r);
}

}  // namespace

FusionTensor family_closed_verlinde(const FamilyInstance& inst) {
  Ctx ctx(inst);
  std::vector<Label> ls = family_labels(inst);
  const int n = static_cast<int>(ls.size());
  FusionTensor N;
  N.n = n;
  N.v.assign(static_cast<std::size_t>(n) * n * n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      for (int k = j; k < n; ++k) {
        std::int64_t v = entry_to_int(closed_entry(ctx, ls[i], ls[j], ls[k]), ls[i], ls[j], ls[k]);
        int idx[3] = {i, j, k};
        std::sort(idx, idx + 3);
        do {
          N.at(idx[0], idx[1], idx[2]) = v;
        } while (std::next_permutation(idx, idx + 3));
      }
  return N;
}

std::vector<std::int64_t> family_closed_selfcoupling(const FamilyInstance& inst) {
  Ctx ctx(inst);
  std::vector<Label> ls = family_labels(inst);
  std::vector<std::int64_t> out;
  out.reserve(ls.size());
  for (const auto& l : ls)
    out.push_back(entry_to_int(closed_entry(ctx, l, l, l), l, l, l));
  return out;
}

// ----- closed-form indicators ----------------------------------------------

cx combined_gauss(const FamilyInstance& inst, const Elem& u_abstract, std::int64_t m) {
  Ctx ctx(inst);
  return twisted_gauss_sum(inst.first.form, ctx.embG(u_abstract), m).value +
         twisted_gauss_sum(inst.second.form, ctx.embH(u_abstract), m).value;
}

std::vector<cx> family_closed_fs(const FamilyInstance& inst, std::int64_t m) {
  Ctx ctx(inst);
  const Group& U = inst.u.u;
  const Group& G = ctx.G;
  const Group& H = ctx.H;
  std::vector<Label> ls = family_labels(inst);
  std::vector<double> g2;  // |combined gauss|^2 per element of U
  std::vector<Elem> u_elems = U.elements();
  for (const auto& v : u_elems) g2.push_back(std::norm(combined_gauss(inst, v, m)));

  double DG = static_cast<double>(inst.sizeH() - inst.sizeG());
  auto sum_over_u = [&](const std::function<cx(const Elem&)>& chi) {
    cx acc = 0;
    for (std::size_t i = 0; i < u_elems.size(); ++i) acc += chi(u_elems[i]) * g2[i];
    return acc;
  };

  std::vector<cx> nu;
  nu.reserve(ls.size());
  for (const auto& l : ls) {
    cx val = 0;
    switch (inst.family) {
      case FamilyId::A: {
        if (l.kind == Label::Kind::U0) {
          Elem mu = U.mul(l.elem, m);
          val = U.is_zero(mu) ? ctx.qG(ctx.embG(l.elem)).pow(m).eval() : cx(0);
        } else if (l.kind == Label::Kind::UPi) {
          val = sum_over_u([&](const Elem& v) {
                  return ctx.pairG(ctx.embG(l.elem), ctx.embG(v)).eval();
                }) /
                DG;
        } else if (l.side == 0) {
          val = sum_over_u([&](const Elem& v) {
                  return ctx.pairG(l.elem, ctx.embG(v)).eval();
                }) /
                DG;
          if (G.is_zero(G.mul(l.elem, m))) val += ctx.qG(l.elem).pow(m).eval();
        } else {
          val = sum_over_u([&](const Elem& v) {
                  return ctx.pairH(l.elem, ctx.embH(v)).eval();
                }) /
                DG;
          if (H.is_zero(H.mul(l.elem, m))) val -= ctx.qH(l.elem).pow(m).eval();
        }
        break;
      }
      case FamilyId::B: {
        double w2 = g2[0];
        switch (l.kind) {
          case Label::Kind::Point0: val = 1.0; break;
          case Label::Kind::PointPi: val = w2 / 2; break;
          case Label::Kind::Paired:
            if (l.side == 0) {
              val = w2 / 4;
              if (G.is_zero(G.mul(inst.k0, m))) val += ctx.qG(inst.k0).pow(m).eval() / 2.0;
            } else {
              val = w2 / 4;
              if (H.is_zero(H.mul(inst.sigma0, m))) val -= ctx.qH(inst.sigma0).pow(m).eval() / 2.0;
            }
            break;
          case Label::Kind::Grouplike:
            if (l.side == 0) {
              val = w2 / 2;
              if (G.is_zero(G.mul(l.elem, m))) val += ctx.qG(l.elem).pow(m).eval();
            } else {
              val = w2 / 2;
              if (H.is_zero(H.mul(l.elem, m))) val -= ctx.qH(l.elem).pow(m).eval();
            }
            break;
          default: fail(errc::inconsistency, "bad label");
        }
        break;
      }
      case FamilyId::C: {
        switch (l.kind) {
          case Label::Kind::U0: {
            Elem mu = U.mul(l.elem, m);
            val = U.is_zero(mu) ? ctx.qG(ctx.embG(l.elem)).pow(m).eval() : cx(0);
            break;
          }
          case Label::Kind::UPi:
            val = sum_over_u([&](const Elem& v) {
                    return ctx.pairG(ctx.embG(l.elem), ctx.embG(v)).eval();
                  }) /
                  4.0;
            break;
          case Label::Kind::Paired:
            if (l.side == 0) {
              val = sum_over_u([&](const Elem& v) {
                      return ctx.pairG(l.elem, ctx.embG(v)).eval();
                    }) /
                    8.0;
              if (G.is_zero(G.mul(l.elem, m))) val += ctx.qG(l.elem).pow(m).eval() / 2.0;
            } else {
              val = sum_over_u([&](const Elem& v) {
                      return ctx.pairH(l.elem, ctx.embH(v)).eval();
                    }) /
                    8.0;
              if (H.is_zero(H.mul(l.elem, m))) val -= ctx.qH(l.elem).pow(m).eval() / 2.0;
            }
            break;
          case Label::Kind::Grouplike:
            if (l.side == 0) {
              val = sum_over_u([&](const Elem& v) {
                      return ctx.pairG(l.elem, ctx.embG(v)).eval();
                    }) /
                    4.0;
              if (G.is_zero(G.mul(l.elem, m))) val += ctx.qG(l.elem).pow(m).eval();
            } else {
              val = sum_over_u([&](const Elem& v) {
                      return ctx.pairH(l.elem, ctx.embH(v)).eval();
                    }) /
                    4.0;
              if (H.is_zero(H.mul(l.elem, m))) val -= ctx.qH(l.elem).pow(m).eval();
            }
            break;
          default: fail(errc::inconsistency, "bad label");
        }
        break;
      }
      case FamilyId::D:
      case FamilyId::E: {
        bool is_e = inst.family == FamilyId::E;
        double w2 = g2[0];
        double sgn = is_e ? -1.0 : 1.0;
        switch (l.kind) {
          case Label::Kind::Point0: val = 1.0; break;
          case Label::Kind::PointPi: val = w2; break;
          case Label::Kind::Paired: {
            cx t = w2;
            if (G.is_zero(G.mul(l.elem, m))) t += sgn * ctx.qG(l.elem).pow(m).eval();
            val = t / 2.0;
            break;
          }
          case Label::Kind::Grouplike:
            val = w2;
            if (l.side == 0) {
              if (G.is_zero(G.mul(l.elem, m))) val += sgn * ctx.qG(l.elem).pow(m).eval();
            } else {
              if (H.is_zero(H.mul(l.elem, m))) val -= sgn * ctx.qH(l.elem).pow(m).eval();
            }
            break;
          default: fail(errc::inconsistency, "bad label");
        }
        break;
      }
    }
    nu.push_back(val);
  }
  return nu;
}

void verify_f_identities(const FamilyInstance& inst) {
  require(inst.family == FamilyId::C, errc::invalid_argument,
          "f-table identities only exist for the order-4 family");
  Ctx c(inst);
  const auto& K = inst.kstar;
  const auto& S = inst.sigmastar;
  auto f = [&](int i, int j) { return inst.f_table[i][j]; };
  const Phase s = inst.s;
  const Phase cc = inst.c;
  auto check = [&](const PhaseSum& p, const std::string& which) {
    require(p.is_zero(), errc::inconsistency, "f-table identity failed: " + which);
  };
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      // (1) sum_l <k'-k,l> + sum_sigma f(k,sigma) conj f(k',sigma) = 4 delta_{k,k'}
      PhaseSum p1;
      for (int l = 0; l < 2; ++l) p1.add(c.pairG(c.G.sub(K[b], K[a]), K[l]), 1);
      for (int sg = 0; sg < 2; ++sg) p1.add(f(a, sg) * f(b, sg).conj(), 1);
      p1.add(Phase::one(), a == b ? -4 : 0);
      check(p1, "row-orthogonality");
      // (2) the sigma-side analogue
      PhaseSum p2;
      for (int t = 0; t < 2; ++t) p2.add(c.pairH(c.H.sub(S[b], S[a]), S[t]), 1);
      for (int k = 0; k < 2; ++k) p2.add(f(k, a) * f(k, b).conj(), 1);
      p2.add(Phase::one(), a == b ? -4 : 0);
      check(p2, "column-orthogonality");
      // (4) s^2 sum_l conj<k+k',l> q1(l) + sum_sigma f(k,s)f(k',s) q2(s)
      //     = 2 c s conj(<k,k'> q1(k) q1(k'))
      PhaseSum p4;
      for (int l = 0; l < 2; ++l)
        p4.add(s.pow(2) * c.pairG(c.G.add(K[a], K[b]), K[l]).conj() * c.qG(K[l]), 1);
      for (int sg = 0; sg < 2; ++sg) p4.add(f(a, sg) * f(b, sg) * c.qH(S[sg]), 1);
      p4.add(cc * s * (c.pairG(K[a], K[b]) * c.qG(K[a]) * c.qG(K[b])).conj(), -2);
      check(p4, "first-side-twisted");
      // (6) sum_l f(l,s)f(l,s') q1(l) + s^2 sum_t conj<s+s',t> q2(t)
      //     = 2 c s conj(<s,s'> q2(s) q2(s'))
      PhaseSum p6;
      for (int l = 0; l < 2; ++l) p6.add(f(l, a) * f(l, b) * c.qG(K[l]), 1);
      for (int t = 0; t < 2; ++t)
        p6.add(s.pow(2) * c.pairH(c.H.add(S[a], S[b]), S[t]).conj() * c.qH(S[t]), 1);
      p6.add(cc * s * (c.pairH(S[a], S[b]) * c.qH(S[a]) * c.qH(S[b])).conj(), -2);
      check(p6, "second-side-twisted");
      // (3) s sum_l conj<k,l> conj f(l,sigma) + conj s sum_t <sigma,t> f(k,t) = 0
      PhaseSum p3;
      for (int l = 0; l < 2; ++l) p3.add(s * c.pairG(K[a], K[l]).conj() * f(l, b).conj(), 1);
      for (int t = 0; t < 2; ++t) p3.add(s.conj() * c.pairH(S[b], S[t]) * f(a, t), 1);
      check(p3, "cross-orthogonality");
      // (5) s (sum_l f(l,sigma) conj<k,l> q1(l) + sum_t f(k,t) conj<sigma,t> q2(t))
      //     = 2 c f(k,sigma) conj(q1(k) q2(sigma))
      PhaseSum p5;
      for (int l = 0; l < 2; ++l) p5.add(s * f(l, b) * c.pairG(K[a], K[l]).conj() * c.qG(K[l]), 1);
      for (int t = 0; t < 2; ++t) p5.add(s * f(a, t) * c.pairH(S[b], S[t]).conj() * c.qH(S[t]), 1);
      p5.add(cc * f(a, b) * (c.qG(K[a]) * c.qH(S[b])).conj(), -2);
      check(p5, "cross-twisted");
    }
}

FsSummary family_fs_summary(const FamilyInstance& inst, double tol) {
  FsSummary out;
  std::vector<Label> ls = family_labels(inst);
  std::vector<int> dual = family_duality(inst);
  std::vector<cx> nu2 = family_closed_fs(inst, 2);
  std::vector<cx> nu3 = family_closed_fs(inst, 3);
  std::vector<std::int64_t> diag = family_closed_selfcoupling(inst);
  for (std::size_t i = 0; i < ls.size(); ++i) {
    bool self_dual = dual[i] == static_cast<int>(i);
    bool ok2 = self_dual ? (std::abs(nu2[i] - cx(1, 0)) <= tol ||
                            std::abs(nu2[i] - cx(-1, 0)) <= tol)
                         : std::abs(nu2[i]) <= tol;
    out.fs2 = out.fs2 && ok2;
    out.fs3 = out.fs3 && fs3_decomposable(nu3[i], diag[i], tol);
  }
  cx g12 = combined_gauss(inst, inst.u.u.zero(), 2);
  cx g13 = combined_gauss(inst, inst.u.u.zero(), 3);
  switch (inst.family) {
    case FamilyId::B:
      out.predicates.emplace_back("fs2-gauss-norm-sqrt2",
                                  std::abs(std::abs(g12) - std::sqrt(2.0)) <= tol);
      out.predicates.emplace_back("fs3-gauss-norm-2", std::abs(std::abs(g13) - 2.0) <= tol);
      break;
    case FamilyId::D:
    case FamilyId::E:
      out.predicates.emplace_back("fs2-gauss-norm-1", std::abs(std::abs(g12) - 1.0) <= tol);
      out.predicates.emplace_back("fs3-gauss-norm-2", std::abs(std::abs(g13) - 2.0) <= tol);
      break;
    case FamilyId::A:
      out.predicates.emplace_back("fs3-twisted-norm-2", std::abs(std::abs(g13) - 2.0) <= tol);
      break;
    case FamilyId::C: {
      cx gu2 = combined_gauss(inst, Elem{1}, 2);
      out.predicates.emplace_back(
          "fs2-norm-square-sum-4",
          std::abs(std::norm(g12) + std::norm(gu2) - 4.0) <= tol);
      break;
    }
  }
  return out;
}

}  // namespace md
