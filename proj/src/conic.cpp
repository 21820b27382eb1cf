#include "relaxforge/conic.hpp"

#include <algorithm>

#include "relaxforge/error.hpp"

namespace relaxforge {

namespace {

std::pair<std::uint32_t, std::uint32_t> key(std::uint32_t i, std::uint32_t j) {
  return i <= j ? std::make_pair(i, j) : std::make_pair(j, i);
}

std::string label_of(const FeasibilityProblem& p, std::size_t i) {
  const auto& l = p.constraints[i].label;
  return l.empty() ? "constraint " + std::to_string(i) : l;
}

}  // namespace

void SparseSym::set(std::uint32_t i, std::uint32_t j, const Rational& v) {
  if (v.is_zero()) {
    e_.erase(key(i, j));
  } else {
    e_[key(i, j)] = v;
  }
}

void SparseSym::add(std::uint32_t i, std::uint32_t j, const Rational& v) {
  if (v.is_zero()) return;
  auto k = key(i, j);
  auto it = e_.find(k);
  if (it == e_.end()) {
    e_.emplace(k, v);
  } else {
    it->second += v;
    if (it->second.is_zero()) e_.erase(it);
  }
}

void SparseSym::add_product(std::uint32_t a, std::uint32_t b, const Rational& c) {
  add(a, b, a == b ? c : c / Rational(2));
}

Rational SparseSym::at(std::uint32_t i, std::uint32_t j) const {
  auto it = e_.find(key(i, j));
  return it == e_.end() ? Rational() : it->second;
}

std::uint32_t SparseSym::max_index() const {
  std::uint32_t m = 0;
  for (const auto& [k, v] : e_) m = std::max(m, k.second);
  return m;
}

Rational SparseSym::eval(const std::vector<Rational>& x) const {
  Rational s;
  for (const auto& [k, v] : e_) {
    Rational t = v * x[k.first] * x[k.second];
    s += k.first == k.second ? t : Rational(2) * t;
  }
  return s;
}

Rational SparseSym::frobenius(const SymMatrixQ& z) const {
  Rational s;
  for (const auto& [k, v] : e_) {
    Rational t = v * z(k.first, k.second);
    s += k.first == k.second ? t : Rational(2) * t;
  }
  return s;
}

Scalar SparseSym::frobenius(const std::vector<Vec>& vs) const {
  Scalar s;
  for (const auto& [k, v] : e_) {
    Rational c = k.first == k.second ? v : Rational(2) * v;
    s += Scalar(c) * inner(vs[k.first], vs[k.second]);
  }
  return s;
}

void validate(const FeasibilityProblem& p) {
  if (!p.variables.empty() && p.variables.size() != p.n) {
    fail(ErrorKind::DimensionMismatch, "variable names do not match n");
  }
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    const auto& A = p.constraints[i].A;
    if (!A.entries().empty() && A.max_index() >= p.n) {
      fail(ErrorKind::DimensionMismatch, label_of(p, i) + " refers to a variable beyond n");
    }
  }
}

FeasibilityProblem relax(const FeasibilityProblem& p) {
  FeasibilityProblem r = p;
  r.mode = Mode::SDFP;
  return r;
}

GramSolution lift(const Rank1& s) {
  SymMatrixQ z(s.x.size());
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    for (std::size_t j = i; j < s.x.size(); ++j) z.set(i, j, s.x[i] * s.x[j]);
  }
  return {z};
}

VerificationReport verify_primal(const FeasibilityProblem& p, const PrimalSolution& s) {
  validate(p);
  VerificationReport rep;
  if (const auto* r1 = std::get_if<Rank1>(&s)) {
    if (p.mode != Mode::HQFP) fail(ErrorKind::ModeMismatch, "a rank-1 point answers the quadratic problem only");
    if (r1->x.size() != p.n) fail(ErrorKind::DimensionMismatch, "solution length does not match n");
    for (std::size_t i = 0; i < p.constraints.size(); ++i) {
      Rational v = p.constraints[i].A.eval(r1->x);
      rep.check(v == p.constraints[i].b, {"constraint", label_of(p, i), "", p.constraints[i].b.str(), v.str()});
    }
    return rep;
  }
  if (p.mode != Mode::SDFP) fail(ErrorKind::ModeMismatch, "vector and Gram solutions answer the relaxation only");
  if (const auto* g = std::get_if<GramSolution>(&s)) {
    if (g->Z.size() != p.n) fail(ErrorKind::DimensionMismatch, "Gram size does not match n");
    auto cert = psd_certificate(g->Z);
    if (auto* w = std::get_if<NegWitness>(&cert)) {
      std::string vs;
      for (const auto& x : w->v) vs += (vs.empty() ? "" : ",") + x.str();
      rep.add({"psd", "Z", "", ">= 0", "v^T Z v = " + w->value.str() + " at v=[" + vs + "]"});
    } else {
      ++rep.checked;
    }
    for (std::size_t i = 0; i < p.constraints.size(); ++i) {
      Rational v = p.constraints[i].A.frobenius(g->Z);
      rep.check(v == p.constraints[i].b, {"constraint", label_of(p, i), "", p.constraints[i].b.str(), v.str()});
    }
    return rep;
  }
  const auto& vs = std::get<VectorSolution>(s);
  if (vs.v.size() != p.n) fail(ErrorKind::DimensionMismatch, "vector count does not match n");
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    Scalar v = p.constraints[i].A.frobenius(vs.v);
    rep.check(v == Scalar(p.constraints[i].b),
              {"constraint", label_of(p, i), "", p.constraints[i].b.str(), v.str()});
  }
  return rep;
}

SymMatrixQ dual_matrix(const FeasibilityProblem& p, const DualWitness& w) {
  if (w.w.size() != p.constraints.size()) {
    fail(ErrorKind::DimensionMismatch, "witness has " + std::to_string(w.w.size()) + " entries for " +
                                           std::to_string(p.constraints.size()) + " constraints");
  }
  SymMatrixQ m(p.n);
  for (std::size_t i = 0; i < w.w.size(); ++i) {
    if (w.w[i].is_zero()) continue;
    for (const auto& [k, v] : p.constraints[i].A.entries()) m.add(k.first, k.second, w.w[i] * v);
  }
  return m;
}

Rational dual_value(const FeasibilityProblem& p, const DualWitness& w) {
  Rational s;
  for (std::size_t i = 0; i < w.w.size(); ++i) s += w.w[i] * p.constraints[i].b;
  return s;
}

DualReport verify_dual(const FeasibilityProblem& p, const DualWitness& w) {
  validate(p);
  DualReport r;
  r.M = dual_matrix(p, w);
  r.value = dual_value(p, w);
  r.certificate = psd_certificate(r.M);
  if (const auto* f = std::get_if<LdlFactor>(&r.certificate)) r.rank = f->rank;
  if (!certifies_psd(r.certificate)) {
    r.reason = "sum of w_i A_i is not PSD";
  } else if (r.value.sign() >= 0) {
    r.reason = "<w,b> = " + r.value.str() + " is not negative";
  } else {
    r.accepted = true;
  }
  return r;
}

std::uint32_t sos_var(std::size_t dim, std::size_t copy, std::size_t j) {
  return static_cast<std::uint32_t>(copy * dim + j);
}

std::vector<Polynomial> constraint_polynomials(const FeasibilityProblem& p) {
  std::vector<Polynomial> out;
  for (const auto& c : p.constraints) {
    Polynomial poly(-c.b);
    for (const auto& [k, v] : c.A.entries()) {
      Rational coef = k.first == k.second ? v : Rational(2) * v;
      for (std::size_t copy = 0; copy < p.n; ++copy) {
        poly.add_term({sos_var(p.n, copy, k.first), sos_var(p.n, copy, k.second)}, coef);
      }
    }
    out.push_back(std::move(poly));
  }
  return out;
}

Degree2SoSCert sos_from_dual(const FeasibilityProblem& p, const DualWitness& w) {
  DualReport d = verify_dual(p, w);
  if (!d.accepted) fail(ErrorKind::DualNotVerified, "dual witness rejected: " + d.reason);
  const auto& f = std::get<LdlFactor>(d.certificate);
  Degree2SoSCert cert;
  cert.dim = p.n;
  for (const auto& x : w.w) cert.multipliers.push_back(-x);
  cert.constant = d.value;
  for (std::size_t k = 0; k < p.n; ++k) {
    if (f.D[k].is_zero()) continue;
    for (std::size_t copy = 0; copy < p.n; ++copy) {
      SosSquare sq{f.D[k], {}};
      for (std::size_t i = k; i < p.n; ++i) {
        if (!f.L[i][k].is_zero()) sq.form.emplace_back(sos_var(p.n, copy, f.perm[i]), f.L[i][k]);
      }
      cert.squares.push_back(std::move(sq));
    }
  }
  return cert;
}

SosReport verify_sos(const Degree2SoSCert& cert, const FeasibilityProblem& p) {
  validate(p);
  if (cert.dim != p.n) fail(ErrorKind::DimensionMismatch, "certificate dimension does not match n");
  if (cert.multipliers.size() != p.constraints.size()) {
    fail(ErrorKind::DimensionMismatch, "multiplier count does not match constraint count");
  }
  SosReport r;
  auto polys = constraint_polynomials(p);
  for (std::size_t i = 0; i < polys.size(); ++i) r.lhs += cert.multipliers[i] * polys[i];
  for (const auto& sq : cert.squares) {
    if (sq.weight.sign() < 0) {
      r.reason = "negative square weight";
      return r;
    }
    for (const auto& [a, ca] : sq.form) {
      for (const auto& [b, cb] : sq.form) r.lhs.add_term({a, b}, sq.weight * ca * cb);
    }
  }
  Polynomial rhs(cert.constant);
  r.first_mismatch = first_difference(r.lhs, rhs);
  r.constant_negative = cert.constant.sign() < 0;
  if (r.first_mismatch) {
    r.reason = "identity fails at monomial " + monomial_str(*r.first_mismatch);
  } else if (!r.constant_negative) {
    r.reason = "constant " + cert.constant.str() + " is not negative";
  } else {
    r.accepted = true;
  }
  return r;
}

}  // namespace relaxforge
