#include "relaxforge/qphp.hpp"

#include "relaxforge/error.hpp"

namespace relaxforge {

namespace {

std::string idx(int i) { return std::to_string(i); }
std::string idx(int i, int j) { return std::to_string(i) + "," + std::to_string(j); }
std::string idx(int i, int j, int k) { return idx(i, j) + "," + std::to_string(k); }

Rational rat(const Scalar& s, const std::string& what) {
  auto q = s.as_rational();
  if (!q) fail(ErrorKind::IrrationalGram, what + " = " + s.str() + " is irrational");
  return *q;
}

int ceil_log2(int h) {
  int k = 0;
  while ((1 << k) < h) ++k;
  return k;
}

}  // namespace

std::uint32_t php_var(int h, int i, int j) { return static_cast<std::uint32_t>(1 + i * h + j); }

FeasibilityProblem php_negation_hqfp(int p, int h) {
  if (p < 1 || h < 1) fail(ErrorKind::DimensionMismatch, "need at least one pigeon and one hole");
  FeasibilityProblem prob;
  prob.n = static_cast<std::size_t>(1 + p * h);
  prob.mode = Mode::HQFP;
  prob.variables.push_back("lambda");
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < h; ++j) prob.variables.push_back("v_{" + idx(i + 1, j + 1) + "}");
  }
  {
    Constraint c;
    c.A.add_product(0, 0, 1);
    c.b = 1;
    c.label = "y0";
    prob.constraints.push_back(std::move(c));
  }
  for (int i = 0; i < p; ++i) {
    Constraint c;
    for (int j = 0; j < h; ++j) c.A.add_product(php_var(h, i, j), php_var(h, i, j), 1);
    c.A.add_product(0, 0, -1);
    c.label = "y1a[" + idx(i + 1) + "]";
    prob.constraints.push_back(std::move(c));
  }
  for (int i = 0; i < p; ++i) {
    Constraint c;
    for (int j = 0; j < h; ++j) c.A.add_product(php_var(h, i, j), 0, 1);
    c.A.add_product(0, 0, -1);
    c.label = "y1b[" + idx(i + 1) + "]";
    prob.constraints.push_back(std::move(c));
  }
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < h; ++j) {
      for (int j2 = j + 1; j2 < h; ++j2) {
        Constraint c;
        c.A.add_product(php_var(h, i, j), php_var(h, i, j2), 1);
        c.label = "y2[" + idx(i + 1, j + 1, j2 + 1) + "]";
        prob.constraints.push_back(std::move(c));
      }
    }
  }
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < p; ++i) {
      for (int i2 = i + 1; i2 < p; ++i2) {
        Constraint c;
        c.A.add_product(php_var(h, i, j), php_var(h, i2, j), 1);
        c.label = "y3[" + idx(j + 1, i + 1, i2 + 1) + "]";
        prob.constraints.push_back(std::move(c));
      }
    }
  }
  return prob;
}

DualWitness qphp_dual_witness(int p, int h) {
  if (p < 1 || h < 1) fail(ErrorKind::DimensionMismatch, "need at least one pigeon and one hole");
  if (p <= h) {
    fail(ErrorKind::NotARefutation, "p <= h: the template gives <w,b> = 1 - p/h = " +
                                        (Rational(1) - Rational(p, h)).str() + " >= 0");
  }
  return qphp_dual_template(p, h);
}

DualWitness qphp_dual_template(int p, int h) {
  Rational ih(1, h);
  DualWitness w;
  w.w.push_back(Rational(1) - Rational(p, h));
  for (int i = 0; i < p; ++i) w.w.push_back(ih);
  // the lambda-part products carry a factor 1/2 in the symmetric encoding
  for (int i = 0; i < p; ++i) w.w.push_back(Rational(-2) * ih);
  for (int i = 0; i < p * h * (h - 1) / 2; ++i) w.w.push_back(0);
  for (int i = 0; i < h * p * (p - 1) / 2; ++i) w.w.push_back(Rational(2) * ih);
  return w;
}

VerificationReport verify_family(const PigeonFamily& f) {
  if (static_cast<int>(f.initial.size()) != f.p || static_cast<int>(f.parts.size()) != f.p) {
    fail(ErrorKind::InvalidFamily, "family does not have p pigeons");
  }
  VerificationReport rep;
  for (int i = 0; i < f.p; ++i) {
    if (static_cast<int>(f.parts[i].size()) != f.h) fail(ErrorKind::InvalidFamily, "pigeon without h parts");
    const Vec& v = f.initial[i];
    Scalar n = norm2(v);
    rep.check(n == Scalar(1), {"norm", "v_" + idx(i + 1), "", "1", n.str()});
    Scalar sa, sb;
    for (int j = 0; j < f.h; ++j) {
      sa += norm2(f.parts[i][j]);
      sb += inner(f.parts[i][j], v);
    }
    rep.check(sa == n, {"sum-a", "v_" + idx(i + 1), "", n.str(), sa.str()});
    rep.check(sb == n, {"sum-b", "v_" + idx(i + 1), "", n.str(), sb.str()});
    for (int j = 0; j < f.h; ++j) {
      for (int j2 = j + 1; j2 < f.h; ++j2) {
        Scalar o = inner(f.parts[i][j], f.parts[i][j2]);
        rep.check(o.is_zero(), {"orthogonality", "v_" + idx(i + 1) + " parts " + idx(j + 1, j2 + 1), "", "0",
                                o.str()});
      }
    }
  }
  return rep;
}

PigeonFamily classical_family(int p, int h, const std::vector<int>& assignment) {
  if (static_cast<int>(assignment.size()) != p) fail(ErrorKind::InvalidFamily, "assignment needs p entries");
  PigeonFamily f{p, h, InnerProductSpace::create(), {}, {}};
  Vec lam = Vec::atom(f.space, f.space->add_unit("lambda"));
  for (int i = 0; i < p; ++i) {
    if (assignment[i] < 0 || assignment[i] >= h) fail(ErrorKind::InvalidFamily, "hole out of range");
    f.initial.push_back(lam);
    std::vector<Vec> parts(h, Vec(f.space));
    parts[assignment[i]] = lam;
    f.parts.push_back(std::move(parts));
  }
  return f;
}

Rational quantitative_bound(int p, int h, const Rational& beta) {
  return Rational(1, static_cast<std::int64_t>(h) * h) * (beta - Rational(h - 1, p - 1));
}

PigeonFamily tight_example(int p, int h, const Rational& beta) {
  if (h < 1 || p <= h) fail(ErrorKind::InvalidFamily, "tight example needs p > h >= 1");
  PigeonFamily f{p, h, InnerProductSpace::create(), {}, {}};
  auto v = f.space->add_flower("v", p, 1, beta);
  for (int i = 0; i < p; ++i) f.initial.push_back(Vec::atom(f.space, v.members[i]));
  if (h == 1) {
    for (int i = 0; i < p; ++i) f.parts.push_back({f.initial[i]});
    return f;
  }
  Rational hh(static_cast<std::int64_t>(h) * h);
  Rational a = Rational(1, h) - Rational(1) / hh;
  Rational alpha = quantitative_bound(p, h, beta);
  auto s = f.space->add_flower("s", h, a, Rational(-1) / hh);
  // t has squared norm a and overlaps alpha - beta/h^2; carrying it as t / sqrt(a) keeps the Gram rational
  Rational tb = alpha - beta / hh;
  {
    InnerProductSpace probe;
    probe.add_flower("t", p, a, tb);
  }
  auto t = f.space->add_flower("t", p, 1, tb / a);
  for (int i = 0; i < p; ++i) {
    std::vector<Vec> parts;
    for (int j = 0; j < h; ++j) {
      Vec part = Scalar(Rational(1, h)) * f.initial[i];
      part += tensor(Vec::atom(f.space, t.members[i]), Vec::atom(f.space, s.members[j]));
      parts.push_back(std::move(part));
    }
    f.parts.push_back(std::move(parts));
  }
  return f;
}

Overlap max_overlap(const PigeonFamily& f) {
  if (f.p < 2) fail(ErrorKind::InvalidFamily, "overlap needs two pigeons");
  std::optional<Overlap> best;
  for (int j = 0; j < f.h; ++j) {
    for (int i = 0; i < f.p; ++i) {
      for (int i2 = i + 1; i2 < f.p; ++i2) {
        Rational o = rat(inner(f.parts[i][j], f.parts[i2][j]), "overlap " + idx(i + 1, i2 + 1, j + 1));
        if (!best || o > best->value) best = Overlap{o, i, i2, j};
      }
    }
  }
  return *best;
}

BoundCheck check_quantitative_bound(const PigeonFamily& f) {
  BoundCheck c;
  Rational sum;
  for (int i = 0; i < f.p; ++i) {
    for (int i2 = 0; i2 < f.p; ++i2) {
      if (i != i2) sum += rat(inner(f.initial[i], f.initial[i2]), "initial overlap");
    }
  }
  c.beta = sum / Rational(static_cast<std::int64_t>(f.p) * (f.p - 1));
  c.bound = quantitative_bound(f.p, f.h, c.beta);
  c.overlap = max_overlap(f);
  c.holds = c.overlap.value >= c.bound;
  c.tight = c.overlap.value == c.bound;
  return c;
}

SymmetrizedSummary symmetrize(const PigeonFamily& f) {
  if (f.p < 2) fail(ErrorKind::InvalidFamily, "symmetrization needs two pigeons");
  SymmetrizedSummary s;
  const std::int64_t p = f.p, h = f.h;
  Rational beta, norm, alpha, ip, iop, same, cross;
  for (int i = 0; i < f.p; ++i) {
    for (int j = 0; j < f.h; ++j) {
      norm += rat(norm2(f.parts[i][j]), "part norm");
      ip += rat(inner(f.initial[i], f.parts[i][j]), "initial/part");
      for (int j2 = 0; j2 < f.h; ++j2) {
        if (j2 != j) same += rat(inner(f.parts[i][j], f.parts[i][j2]), "same pigeon");
      }
    }
    for (int i2 = 0; i2 < f.p; ++i2) {
      if (i2 == i) continue;
      beta += rat(inner(f.initial[i], f.initial[i2]), "initial overlap");
      for (int j = 0; j < f.h; ++j) {
        alpha += rat(inner(f.parts[i][j], f.parts[i2][j]), "overlap");
        iop += rat(inner(f.initial[i], f.parts[i2][j]), "initial/other part");
        for (int j2 = 0; j2 < f.h; ++j2) {
          if (j2 != j) cross += rat(inner(f.parts[i][j], f.parts[i2][j2]), "cross");
        }
      }
    }
  }
  s.beta = beta / Rational(p * (p - 1));
  s.part_norm = norm / Rational(p * h);
  s.alpha_sym = alpha / Rational(p * (p - 1) * h);
  s.initial_part = ip / Rational(p * h);
  s.initial_other_part = iop / Rational(p * (p - 1) * h);
  s.same_pigeon = h > 1 ? same / Rational(p * h * (h - 1)) : Rational();
  s.cross = h > 1 ? cross / Rational(p * (p - 1) * h * (h - 1)) : Rational();
  s.not_above_max = s.alpha_sym <= max_overlap(f).value;
  return s;
}

WeakCheck weak_qphp_check(const std::vector<Vec>& psi, const std::vector<std::pair<Vec, Vec>>& split,
                          bool assert_orthogonal) {
  if (psi.size() != split.size()) fail(ErrorKind::InvalidSplit, "split count differs from state count");
  Vec total, t0, t1;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    if (!same_vector(psi[i], split[i].first + split[i].second)) {
      fail(ErrorKind::InvalidSplit, "psi_" + idx(static_cast<int>(i) + 1) + " is not the sum of its two parts");
    }
    if (assert_orthogonal && !inner(split[i].first, split[i].second).is_zero()) {
      fail(ErrorKind::InvalidSplit, "parts of psi_" + idx(static_cast<int>(i) + 1) + " are not orthogonal");
    }
    total += psi[i];
    t0 += split[i].first;
    t1 += split[i].second;
  }
  WeakCheck c;
  c.lhs = rat(norm2(total), "|sum psi|^2");
  c.rhs = Rational(2) * (rat(norm2(t0), "|sum psi_0|^2") + rat(norm2(t1), "|sum psi_1|^2"));
  c.holds = c.lhs <= c.rhs;
  return c;
}

WeakTrace iterate_weak_qphp(const PigeonFamily& f) {
  for (int i = 1; i < f.p; ++i) {
    if (!same_vector(f.initial[i], f.initial[0])) fail(ErrorKind::InvalidFamily, "pigeons are not identical");
  }
  auto sum_over = [&](const std::vector<int>& holes) {
    Vec s;
    for (int i = 0; i < f.p; ++i) {
      for (int j : holes) s += f.parts[i][j];
    }
    return rat(norm2(s), "hole sum");
  };
  WeakTrace tr;
  std::vector<int> holes;
  for (int j = 0; j < f.h; ++j) holes.push_back(j);
  tr.start = sum_over(holes);
  while (holes.size() > 1) {
    std::size_t half = (holes.size() + 1) / 2;
    std::vector<int> a(holes.begin(), holes.begin() + static_cast<long>(half));
    std::vector<int> b(holes.begin() + static_cast<long>(half), holes.end());
    Rational va = sum_over(a), vb = sum_over(b);
    if (va >= vb) {
      holes = a;
      tr.steps.push_back({a, va});
    } else {
      holes = b;
      tr.steps.push_back({b, vb});
    }
  }
  tr.final_hole = holes[0];
  tr.final_value = tr.steps.empty() ? tr.start : tr.steps.back().value;
  tr.guaranteed = Rational(static_cast<std::int64_t>(f.p) * f.p) / pow(Rational(4), ceil_log2(f.h));
  // the diagonal contributes at most p, so a larger final sum forces an overlap inside final_hole
  if (f.p >= 2 && tr.final_value > Rational(f.p)) {
    const int j = tr.final_hole;
    for (int i = 0; i < f.p && !tr.witness; ++i) {
      for (int i2 = i + 1; i2 < f.p; ++i2) {
        Rational o = rat(inner(f.parts[i][j], f.parts[i2][j]), "overlap");
        if (o.sign() > 0) {
          tr.witness = Overlap{o, i, i2, j};
          tr.from_trace = true;
          break;
        }
      }
    }
  }
  if (!tr.witness && f.p >= 2) {
    Overlap o = max_overlap(f);
    if (o.value.sign() > 0) tr.witness = o;
  }
  return tr;
}

}  // namespace relaxforge
