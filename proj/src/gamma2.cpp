#include "relaxforge/gamma2.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>

#include "relaxforge/error.hpp"

namespace relaxforge {

namespace {

std::string xs(int x) { return "x=" + std::to_string(x); }
std::string ys(int y) { return "y=" + std::to_string(y); }

void check_shape(const Gamma2Protocol& pi) {
  const std::size_t n = pi.structure.size();
  if (pi.alpha.size() != n || pi.beta.size() != n) {
    fail(ErrorKind::DomainMismatch, "vector tables do not cover every node of the structure");
  }
  if (pi.nx() < 1 || pi.ny() < 1) fail(ErrorKind::DomainMismatch, "protocol has an empty input set");
  for (std::size_t t = 0; t < n; ++t) {
    if (static_cast<int>(pi.alpha[t].size()) != pi.nx() || static_cast<int>(pi.beta[t].size()) != pi.ny()) {
      fail(ErrorKind::DomainMismatch, "node " + pi.structure.address(static_cast<int>(t)) +
                                          " has a vector table of the wrong size");
    }
  }
}

// Constraints of a speaker node: `own` decomposes, `other` is carried along.
void check_speaker(VerificationReport& rep, const std::string& who, const std::string& at,
                   const std::vector<int>& kids, const std::vector<std::vector<Vec>>& own,
                   const std::vector<std::vector<Vec>>& other, int t, const char* own_var, const char* other_var) {
  const auto& ot = own[static_cast<std::size_t>(t)];
  for (std::size_t x = 0; x < ot.size(); ++x) {
    const std::string in = std::string(own_var) + "=" + std::to_string(x);
    Scalar n2 = norm2(ot[x]);
    Scalar sn, si;
    for (int c : kids) {
      const Vec& v = own[static_cast<std::size_t>(c)][x];
      sn += norm2(v);
      si += inner(v, ot[x]);
    }
    rep.check(sn == n2, {who + "-norm", at, in, n2.str(), sn.str()});
    rep.check(si == n2, {who + "-sum", at, in, n2.str(), si.str()});
    for (std::size_t i = 0; i < kids.size(); ++i) {
      for (std::size_t j = i + 1; j < kids.size(); ++j) {
        Scalar v = inner(own[static_cast<std::size_t>(kids[i])][x], own[static_cast<std::size_t>(kids[j])][x]);
        rep.check(v.is_zero(), {who + "-orthogonal", at, in + " children " + std::to_string(i) + "," + std::to_string(j),
                                "0", v.str()});
      }
    }
  }
  const auto& pt = other[static_cast<std::size_t>(t)];
  for (std::size_t y = 0; y < pt.size(); ++y) {
    const std::string in = std::string(other_var) + "=" + std::to_string(y);
    Scalar n2 = norm2(pt[y]);
    for (int c : kids) {
      const Vec& v = other[static_cast<std::size_t>(c)][y];
      Scalar cn = norm2(v);
      Scalar ci = inner(v, pt[y]);
      std::string loc = at + " child " + std::to_string(c);
      rep.check(cn == n2, {who + "-carry-norm", loc, in, n2.str(), cn.str()});
      rep.check(ci == n2, {who + "-carry-inner", loc, in, n2.str(), ci.str()});
    }
  }
}

std::optional<std::uint64_t> leaf_output(const ProtocolStructure& s, int leaf, int k) {
  auto out = s.output(leaf, k);
  if (!out) return std::nullopt;
  if (static_cast<int>(out->size()) != k) {
    fail(ErrorKind::DomainMismatch, "leaf " + s.address(leaf) + " is labelled with " +
                                        std::to_string(out->size()) + " bits, the relation has " + std::to_string(k));
  }
  return bits_value(*out);
}

}  // namespace

VerificationReport verify_protocol_constraints(const Gamma2Protocol& pi) {
  check_shape(pi);
  VerificationReport rep;
  const auto& s = pi.structure;
  const auto& a0 = pi.alpha[0];
  const auto& b0 = pi.beta[0];
  const Scalar one(1);
  for (std::size_t x = 0; x < a0.size(); ++x) {
    for (std::size_t x2 = x; x2 < a0.size(); ++x2) {
      Scalar v = inner(a0[x], a0[x2]);
      rep.check(v == one, {"root", "λ", xs(static_cast<int>(x)) + " x'=" + std::to_string(x2), "1", v.str()});
    }
  }
  for (std::size_t y = 0; y < b0.size(); ++y) {
    for (std::size_t y2 = y; y2 < b0.size(); ++y2) {
      Scalar v = inner(b0[y], b0[y2]);
      rep.check(v == one, {"root", "λ", ys(static_cast<int>(y)) + " y'=" + std::to_string(y2), "1", v.str()});
    }
  }
  for (std::size_t x = 0; x < a0.size(); ++x) {
    for (std::size_t y = 0; y < b0.size(); ++y) {
      Scalar v = inner(a0[x], b0[y]);
      rep.check(v == one, {"root", "λ", xs(static_cast<int>(x)) + " " + ys(static_cast<int>(y)), "1", v.str()});
    }
  }
  for (int t : s.internal_nodes()) {
    const auto& n = s.node(t);
    if (n.owner == Owner::Alice) {
      check_speaker(rep, "alice", s.address(t), n.children, pi.alpha, pi.beta, t, "x", "y");
    } else {
      check_speaker(rep, "bob", s.address(t), n.children, pi.beta, pi.alpha, t, "y", "x");
    }
  }
  return rep;
}

VerificationReport verify_computation(const Gamma2Protocol& pi, const RelationSpec& r) {
  check_shape(pi);
  if (r.nx != pi.nx() || r.ny != pi.ny()) {
    fail(ErrorKind::DomainMismatch, "protocol inputs " + std::to_string(pi.nx()) + "x" + std::to_string(pi.ny()) +
                                        " do not match the relation's " + std::to_string(r.nx) + "x" +
                                        std::to_string(r.ny));
  }
  VerificationReport rep;
  const auto& s = pi.structure;
  for (int leaf : s.leaves()) {
    auto z = leaf_output(s, leaf, r.k);
    const auto& al = pi.alpha[static_cast<std::size_t>(leaf)];
    const auto& bl = pi.beta[static_cast<std::size_t>(leaf)];
    for (int x = 0; x < r.nx; ++x) {
      for (int y = 0; y < r.ny; ++y) {
        if (z && r.allows(x, y, *z)) continue;
        Scalar v = inner(al[static_cast<std::size_t>(x)], bl[static_cast<std::size_t>(y)]);
        rep.check(v.is_zero(), {z ? "computational" : "unreadable-leaf", s.address(leaf),
                                "x=" + r.x_name(x) + " y=" + r.y_name(y) +
                                    (z ? " z=" + bits_str(index_bits(*z, r.k)) : ""),
                                "0", v.str()});
      }
    }
  }
  return rep;
}

VerificationReport verify_gamma2(const Gamma2Protocol& pi, const RelationSpec& r) {
  VerificationReport rep = verify_protocol_constraints(pi);
  rep.merge(verify_computation(pi, r));
  return rep;
}

std::uint32_t protocol_var_a(int nx, int ny, int t, int x) { return static_cast<std::uint32_t>(t * (nx + ny) + x); }
std::uint32_t protocol_var_b(int nx, int ny, int t, int y) {
  return static_cast<std::uint32_t>(t * (nx + ny) + nx + y);
}

FeasibilityProblem protocol_hqfp(const RelationSpec& r, const ProtocolStructure& s) {
  const int nx = r.nx, ny = r.ny;
  FeasibilityProblem p;
  p.mode = Mode::HQFP;
  p.n = s.size() * static_cast<std::size_t>(nx + ny);
  for (std::size_t t = 0; t < s.size(); ++t) {
    const std::string at = s.address(static_cast<int>(t));
    for (int x = 0; x < nx; ++x) p.variables.push_back("A[" + at + "](" + r.x_name(x) + ")");
    for (int y = 0; y < ny; ++y) p.variables.push_back("B[" + at + "](" + r.y_name(y) + ")");
  }
  auto A = [&](int t, int x) { return protocol_var_a(nx, ny, t, x); };
  auto B = [&](int t, int y) { return protocol_var_b(nx, ny, t, y); };
  auto product = [&](std::uint32_t u, std::uint32_t v, const Rational& b, std::string label) {
    Constraint c;
    c.A.add_product(u, v, 1);
    c.b = b;
    c.label = std::move(label);
    p.constraints.push_back(std::move(c));
  };
  for (int x = 0; x < nx; ++x)
    for (int x2 = x; x2 < nx; ++x2) product(A(0, x), A(0, x2), 1, "root A(" + r.x_name(x) + ")A(" + r.x_name(x2) + ")");
  for (int y = 0; y < ny; ++y)
    for (int y2 = y; y2 < ny; ++y2) product(B(0, y), B(0, y2), 1, "root B(" + r.y_name(y) + ")B(" + r.y_name(y2) + ")");
  for (int x = 0; x < nx; ++x)
    for (int y = 0; y < ny; ++y) product(A(0, x), B(0, y), 1, "root A(" + r.x_name(x) + ")B(" + r.y_name(y) + ")");

  for (int t : s.internal_nodes()) {
    const auto& node = s.node(t);
    const bool alice = node.owner == Owner::Alice;
    const int own_n = alice ? nx : ny, other_n = alice ? ny : nx;
    auto own = [&](int u, int i) { return alice ? A(u, i) : B(u, i); };
    auto other = [&](int u, int i) { return alice ? B(u, i) : A(u, i); };
    const std::string at = s.address(t) + (alice ? " alice" : " bob");
    for (int i = 0; i < own_n; ++i) {
      Constraint norm, sum;
      for (int c : node.children) {
        norm.A.add_product(own(c, i), own(c, i), 1);
        sum.A.add_product(own(c, i), own(t, i), 1);
      }
      norm.A.add_product(own(t, i), own(t, i), -1);
      sum.A.add_product(own(t, i), own(t, i), -1);
      norm.label = at + " norm " + std::to_string(i);
      sum.label = at + " sum " + std::to_string(i);
      p.constraints.push_back(std::move(norm));
      p.constraints.push_back(std::move(sum));
      for (std::size_t a = 0; a < node.children.size(); ++a) {
        for (std::size_t b = a + 1; b < node.children.size(); ++b) {
          product(own(node.children[a], i), own(node.children[b], i), 0,
                  at + " orthogonal " + std::to_string(i) + " " + std::to_string(a) + "," + std::to_string(b));
        }
      }
    }
    for (int c : node.children) {
      for (int j = 0; j < other_n; ++j) {
        Constraint norm, in;
        norm.A.add_product(other(c, j), other(c, j), 1);
        norm.A.add_product(other(t, j), other(t, j), -1);
        in.A.add_product(other(c, j), other(t, j), 1);
        in.A.add_product(other(t, j), other(t, j), -1);
        norm.label = at + " carry-norm " + s.address(c) + " " + std::to_string(j);
        in.label = at + " carry-inner " + s.address(c) + " " + std::to_string(j);
        p.constraints.push_back(std::move(norm));
        p.constraints.push_back(std::move(in));
      }
    }
  }
  for (int leaf : s.leaves()) {
    auto z = leaf_output(s, leaf, r.k);
    for (int x = 0; x < nx; ++x) {
      for (int y = 0; y < ny; ++y) {
        if (z && r.allows(x, y, *z)) continue;
        product(A(leaf, x), B(leaf, y), 0,
                "computational " + s.address(leaf) + " x=" + r.x_name(x) + " y=" + r.y_name(y));
      }
    }
  }
  return p;
}

VectorSolution protocol_vectors(const Gamma2Protocol& pi) {
  check_shape(pi);
  VectorSolution v;
  for (std::size_t t = 0; t < pi.structure.size(); ++t) {
    for (const auto& a : pi.alpha[t]) v.v.push_back(a);
    for (const auto& b : pi.beta[t]) v.v.push_back(b);
  }
  return v;
}

NodeMatrix node_matrix(const Gamma2Protocol& pi, int t) {
  check_shape(pi);
  NodeMatrix m(static_cast<std::size_t>(pi.nx()), std::vector<Scalar>(static_cast<std::size_t>(pi.ny())));
  const auto& a = pi.alpha.at(static_cast<std::size_t>(t));
  const auto& b = pi.beta.at(static_cast<std::size_t>(t));
  for (std::size_t x = 0; x < a.size(); ++x) {
    for (std::size_t y = 0; y < b.size(); ++y) m[x][y] = inner(a[x], b[y]);
  }
  return m;
}

VerificationReport structure_check(const Gamma2Protocol& pi) {
  auto base = verify_protocol_constraints(pi);
  if (!base.accepted) fail(ErrorKind::UnverifiedProtocol, "protocol fails its node constraints: " + base.summary());
  VerificationReport rep;
  const auto& s = pi.structure;
  std::vector<NodeMatrix> m;
  for (std::size_t t = 0; t < s.size(); ++t) m.push_back(node_matrix(pi, static_cast<int>(t)));
  for (int x = 0; x < pi.nx(); ++x) {
    for (int y = 0; y < pi.ny(); ++y) {
      const Scalar& v = m[0][static_cast<std::size_t>(x)][static_cast<std::size_t>(y)];
      rep.check(v == Scalar(1), {"root-matrix", "λ", xs(x) + " " + ys(y), "1", v.str()});
    }
  }
  for (int t : s.internal_nodes()) {
    for (int x = 0; x < pi.nx(); ++x) {
      for (int y = 0; y < pi.ny(); ++y) {
        Scalar sum;
        for (int c : s.node(t).children) sum += m[static_cast<std::size_t>(c)][static_cast<std::size_t>(x)][static_cast<std::size_t>(y)];
        const Scalar& v = m[static_cast<std::size_t>(t)][static_cast<std::size_t>(x)][static_cast<std::size_t>(y)];
        rep.check(sum == v, {"node-sum", s.address(t), xs(x) + " " + ys(y), v.str(), sum.str()});
      }
    }
  }
  for (std::size_t t = 0; t < s.size(); ++t) {
    for (std::size_t x = 0; x < pi.alpha[t].size(); ++x) {
      Scalar n2 = norm2(pi.alpha[t][x]);
      rep.check((Scalar(1) - n2).sign() >= 0,
                {"row-norm", s.address(static_cast<int>(t)), xs(static_cast<int>(x)), "<= 1", n2.str()});
    }
    for (std::size_t y = 0; y < pi.beta[t].size(); ++y) {
      Scalar n2 = norm2(pi.beta[t][y]);
      rep.check((Scalar(1) - n2).sign() >= 0,
                {"row-norm", s.address(static_cast<int>(t)), ys(static_cast<int>(y)), "<= 1", n2.str()});
    }
  }
  return rep;
}

void require_maximal_antichain(const ProtocolStructure& s, const std::vector<int>& ac) {
  std::set<int> seen;
  for (int t : ac) {
    if (t < 0 || static_cast<std::size_t>(t) >= s.size()) fail(ErrorKind::NonMaximalAntichain, "unknown node in antichain");
    if (!seen.insert(t).second) fail(ErrorKind::NonMaximalAntichain, "node " + s.address(t) + " listed twice");
  }
  for (int a : ac) {
    for (int b : ac) {
      if (a != b && s.is_ancestor(a, b)) {
        fail(ErrorKind::NonMaximalAntichain, s.address(a) + " lies above " + s.address(b));
      }
    }
  }
  for (int leaf : s.leaves()) {
    bool covered = std::any_of(ac.begin(), ac.end(), [&](int a) { return s.is_ancestor(a, leaf); });
    if (!covered) fail(ErrorKind::NonMaximalAntichain, "leaf " + s.address(leaf) + " is not covered");
  }
}

bool leaf_sum_check(const Gamma2Protocol& pi, const std::vector<int>& antichain) {
  check_shape(pi);
  require_maximal_antichain(pi.structure, antichain);
  for (int x = 0; x < pi.nx(); ++x) {
    for (int y = 0; y < pi.ny(); ++y) {
      Scalar sum;
      for (int t : antichain) {
        sum += inner(pi.alpha[static_cast<std::size_t>(t)][static_cast<std::size_t>(x)],
                     pi.beta[static_cast<std::size_t>(t)][static_cast<std::size_t>(y)]);
      }
      if (sum != Scalar(1)) return false;
    }
  }
  return true;
}

DecompositionCheck mf_decomposition_check(const Gamma2Protocol& pi, const RelationSpec& f) {
  if (!f.function_mode) fail(ErrorKind::Unsupported, "the decomposition identity needs a Boolean function");
  auto rep = verify_gamma2(pi, f);
  if (!rep.accepted) fail(ErrorKind::UnverifiedProtocol, "protocol does not compute f: " + rep.summary());
  DecompositionCheck d;
  for (int leaf : pi.structure.leaves()) {
    auto z = leaf_output(pi.structure, leaf, 1);
    if (z && *z == 1) d.leaves.push_back(leaf);
  }
  d.one_leaves = d.leaves.size();
  d.holds = true;
  for (int x = 0; x < f.nx && d.holds; ++x) {
    for (int y = 0; y < f.ny; ++y) {
      Scalar sum;
      for (int leaf : d.leaves) {
        sum += inner(pi.alpha[static_cast<std::size_t>(leaf)][static_cast<std::size_t>(x)],
                     pi.beta[static_cast<std::size_t>(leaf)][static_cast<std::size_t>(y)]);
      }
      if (sum != Scalar(f.value(x, y) ? 1 : 0)) {
        d.holds = false;
        break;
      }
    }
  }
  return d;
}

int discrepancy_cap() {
  if (const char* env = std::getenv("RELAXFORGE_CAP")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 30) return static_cast<int>(v);
  }
  return 8;
}

Rational discrepancy(const std::vector<std::vector<int>>& f, const std::vector<std::vector<Rational>>& mu) {
  const std::size_t nx = f.size();
  if (nx == 0 || f[0].empty()) fail(ErrorKind::DomainMismatch, "empty matrix");
  const std::size_t ny = f[0].size();
  if (mu.size() != nx) fail(ErrorKind::DimensionMismatch, "distribution shape differs from the matrix");
  for (std::size_t x = 0; x < nx; ++x) {
    if (f[x].size() != ny || mu[x].size() != ny) fail(ErrorKind::DimensionMismatch, "ragged matrix");
  }
  const int cap = discrepancy_cap();
  if (nx > static_cast<std::size_t>(cap) || ny > static_cast<std::size_t>(cap)) {
    fail(ErrorKind::TooLarge, std::to_string(nx) + "x" + std::to_string(ny) + " exceeds the brute-force cap of " +
                                  std::to_string(cap) + " per side; raise RELAXFORGE_CAP or use the numeric crosscheck");
  }
  // Signed mass: +mu where f = 0, -mu where f = 1.
  std::vector<std::vector<Rational>> w(nx, std::vector<Rational>(ny));
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t y = 0; y < ny; ++y) {
      if (mu[x][y].sign() < 0) fail(ErrorKind::NotPositive, "distribution has a negative entry");
      w[x][y] = f[x][y] ? -mu[x][y] : mu[x][y];
    }
  }
  // For a fixed row set the best column set takes all positive or all negative column sums.
  Rational best;
  std::vector<Rational> col(ny);
  for (std::uint64_t rows = 1; rows < (std::uint64_t{1} << nx); ++rows) {
    std::fill(col.begin(), col.end(), Rational());
    for (std::size_t x = 0; x < nx; ++x) {
      if (!((rows >> x) & 1U)) continue;
      for (std::size_t y = 0; y < ny; ++y) col[y] += w[x][y];
    }
    Rational pos, neg;
    for (const auto& c : col) {
      if (c.sign() > 0) pos += c;
      else neg -= c;
    }
    best = std::max(best, std::max(pos, neg));
  }
  return best;
}

Rational disc_uniform(const std::vector<std::vector<int>>& f) {
  if (f.empty() || f[0].empty()) fail(ErrorKind::DomainMismatch, "empty matrix");
  Rational m(1, static_cast<std::int64_t>(f.size() * f[0].size()));
  std::vector<std::vector<Rational>> mu(f.size(), std::vector<Rational>(f[0].size(), m));
  return discrepancy(f, mu);
}

EqualityCoefficients equality_coefficients(int l, int d) {
  if (l < 11) {
    fail(ErrorKind::CoefficientBound, "l = " + std::to_string(l) +
                                          " is below 11, where 0 <= q^2 <= 1/4 - p^2 is no longer guaranteed");
  }
  if (d < 2) fail(ErrorKind::Unsupported, "equality needs d >= 2");
  EqualityCoefficients k;
  const Rational il(1, l), id(1, d), half(1, 2);
  k.c = Scalar::sqrt(Rational(l - 1, 2)) * Scalar(il);
  k.cp = il * (half - id);
  k.cq = il * (Rational(1) - id);
  k.p2 = Rational(2, l - 1) * (half - id) * (half - id);
  k.q2 = Rational(2, l - 1) * (Rational(1) - id) * (Rational(1) - id);
  k.r2 = Rational(1, 4) - k.p2 - k.q2;
  if (k.r2.sign() < 0) fail(ErrorKind::CoefficientBound, "q^2 <= 1/4 - p^2 fails, r^2 = " + k.r2.str());
  k.p = Scalar::sqrt(k.p2);
  k.q = Scalar::sqrt(k.q2);
  k.r = Scalar::sqrt(k.r2);
  return k;
}

EqualityAtoms::EqualityAtoms(SpacePtr space) : space_(std::move(space)) { psi_ = space_->add_unit("psi"); }

const FlowerFamily& EqualityAtoms::phi(int l) {
  auto it = phi_.find(l);
  if (it == phi_.end()) it = phi_.emplace(l, flower_space(*space_, "phi", l, 1, Rational(-1, l - 1))).first;
  return it->second;
}

const FlowerFamily& EqualityAtoms::rho(int l) {
  auto it = rho_.find(l);
  if (it == rho_.end()) it = rho_.emplace(l, flower_space(*space_, "rho", l, 1, Rational(-1, l - 1))).first;
  return it->second;
}

const FlowerFamily& EqualityAtoms::eta(int d) {
  auto it = eta_.find(d);
  if (it == eta_.end()) {
    it = eta_.emplace(d, flower_space(*space_, "eta" + std::to_string(d), d, 1, Rational(-1, d - 1))).first;
  }
  return it->second;
}

const std::vector<AtomId>& EqualityAtoms::chi(int d) {
  auto it = chi_.find(d);
  if (it == chi_.end()) {
    std::vector<AtomId> c;
    for (int y = 0; y < d; ++y) c.push_back(space_->add_unit("chi" + std::to_string(d) + "_" + std::to_string(y)));
    it = chi_.emplace(d, std::move(c)).first;
  }
  return it->second;
}

Gamma2Protocol equality_protocol_with(int l, int d, const EqualityCoefficients& k, EqualityAtoms& atoms) {
  if (l < 2 || d < 2) fail(ErrorKind::Unsupported, "equality protocol needs l >= 2 and d >= 2");
  const SpacePtr& sp = atoms.space();
  Gamma2Protocol pi;
  pi.space = sp;
  auto& s = pi.structure;
  std::vector<int> msgs = s.expand(s.root(), Owner::Alice, l);
  for (int m : msgs) s.expand(m, Owner::Bob, 2);
  pi.alpha.assign(s.size(), std::vector<Vec>(static_cast<std::size_t>(d)));
  pi.beta.assign(s.size(), std::vector<Vec>(static_cast<std::size_t>(d)));

  const Vec psi = Vec::atom(sp, atoms.psi());
  const auto& phi = atoms.phi(l).members;
  const auto& rho = atoms.rho(l).members;
  const auto& eta = atoms.eta(d).members;
  const auto& chi = atoms.chi(d);
  for (int x = 0; x < d; ++x) {
    pi.alpha[0][static_cast<std::size_t>(x)] = psi;
    pi.beta[0][static_cast<std::size_t>(x)] = psi;
  }
  const Scalar il(Rational(1, l)), half(Rational(1, 2));
  for (int mi = 0; mi < l; ++mi) {
    const int m = msgs[static_cast<std::size_t>(mi)];
    const AtomId ph = phi[static_cast<std::size_t>(mi)];
    const AtomId rh = rho[static_cast<std::size_t>(mi)];
    for (int x = 0; x < d; ++x) {
      Vec a = il * psi;
      a.add_term(ph, k.c);
      a.add_term(sp->tensor(rh, eta[static_cast<std::size_t>(x)]), k.c);
      pi.alpha[static_cast<std::size_t>(m)][static_cast<std::size_t>(x)] = a;
      pi.beta[static_cast<std::size_t>(m)][static_cast<std::size_t>(x)] = psi;
    }
    const auto& kids = s.node(m).children;
    for (int b = 0; b < 2; ++b) {
      const int t = kids[static_cast<std::size_t>(b)];
      const Scalar sg(b == 0 ? 1 : -1);
      for (int y = 0; y < d; ++y) {
        pi.alpha[static_cast<std::size_t>(t)][static_cast<std::size_t>(y)] =
            pi.alpha[static_cast<std::size_t>(m)][static_cast<std::size_t>(y)];
        Vec v = half * psi;
        v.add_term(ph, sg * k.p);
        v.add_term(sp->tensor(rh, eta[static_cast<std::size_t>(y)]), -(sg * k.q));
        v.add_term(chi[static_cast<std::size_t>(y)], sg * k.r);
        pi.beta[static_cast<std::size_t>(t)][static_cast<std::size_t>(y)] = v;
      }
    }
  }
  return pi;
}

Gamma2Protocol equality_protocol(int l, int d, EqualityAtoms& atoms) {
  return equality_protocol_with(l, d, equality_coefficients(l, d), atoms);
}

Gamma2Protocol equality_protocol(int l, int d) {
  EqualityAtoms atoms(InnerProductSpace::create());
  return equality_protocol(l, d, atoms);
}

Gamma2Protocol reindex(const Gamma2Protocol& pi, const std::vector<int>& a, const std::vector<int>& b) {
  check_shape(pi);
  for (int v : a) {
    if (v < 0 || v >= pi.nx()) fail(ErrorKind::DomainMismatch, "Alice reindexing leaves the input set");
  }
  for (int v : b) {
    if (v < 0 || v >= pi.ny()) fail(ErrorKind::DomainMismatch, "Bob reindexing leaves the input set");
  }
  Gamma2Protocol out;
  out.structure = pi.structure;
  out.space = pi.space;
  out.alpha.resize(pi.alpha.size());
  out.beta.resize(pi.beta.size());
  for (std::size_t t = 0; t < pi.alpha.size(); ++t) {
    for (int v : a) out.alpha[t].push_back(pi.alpha[t][static_cast<std::size_t>(v)]);
    for (int v : b) out.beta[t].push_back(pi.beta[t][static_cast<std::size_t>(v)]);
  }
  return out;
}

namespace {

struct Prepared {
  Gamma2Protocol base;
  std::vector<Gamma2Protocol> grafts;
  Vec omega;
};

std::optional<AtomId> unit_root(const Gamma2Protocol& g) {
  const Vec& r = g.alpha[0][0];
  if (r.entries().size() != 1) return std::nullopt;
  const auto& e = r.entries()[0];
  if (e.coef != Scalar(1) || g.space->atom(e.atom).kind != AtomKind::Unit) return std::nullopt;
  return e.atom;
}

Gamma2Protocol import_protocol(const SpacePtr& dst, const Gamma2Protocol& src,
                               std::unordered_map<AtomId, AtomId>& amap,
                               std::unordered_map<std::uint32_t, std::uint32_t>& fmap) {
  Gamma2Protocol out;
  out.structure = src.structure;
  out.space = dst;
  out.alpha.resize(src.alpha.size());
  out.beta.resize(src.beta.size());
  for (std::size_t t = 0; t < src.alpha.size(); ++t) {
    for (const auto& v : src.alpha[t]) out.alpha[t].push_back(import_vec(dst, v, amap, fmap));
    for (const auto& v : src.beta[t]) out.beta[t].push_back(import_vec(dst, v, amap, fmap));
  }
  return out;
}

Prepared prepare(const Gamma2Protocol& base, const std::vector<Graft>& grafts) {
  Prepared p;
  bool shared = true;
  for (const auto& g : grafts) shared = shared && g.protocol.space == base.space;
  const Vec& w0 = grafts.front().protocol.alpha[0][0];
  for (const auto& g : grafts) shared = shared && same_vector(g.protocol.alpha[0][0], w0);
  if (shared) {
    p.base = base;
    for (const auto& g : grafts) p.grafts.push_back(g.protocol);
    p.omega = w0;
    return p;
  }
  // Different spaces: copy everything into a fresh space and identify the grafts' root atoms.
  SpacePtr dst = InnerProductSpace::create();
  AtomId om = dst->add_unit("omega");
  p.omega = Vec::atom(dst, om);
  {
    std::unordered_map<AtomId, AtomId> amap;
    std::unordered_map<std::uint32_t, std::uint32_t> fmap;
    p.base = import_protocol(dst, base, amap, fmap);
  }
  for (const auto& g : grafts) {
    auto u = unit_root(g.protocol);
    if (!u) {
      fail(ErrorKind::Composition, "graft at leaf " + base.structure.address(g.leaf) +
                                       " does not start from a single unit atom, so its root cannot be shared");
    }
    std::unordered_map<AtomId, AtomId> amap{{*u, om}};
    std::unordered_map<std::uint32_t, std::uint32_t> fmap;
    p.grafts.push_back(import_protocol(dst, g.protocol, amap, fmap));
  }
  return p;
}

void copy_subtree(ProtocolStructure& dst, int at, const ProtocolStructure& src, int from, std::vector<int>& map) {
  map[static_cast<std::size_t>(from)] = at;
  const auto& n = src.node(from);
  if (n.children.empty()) {
    if (n.label) dst.set_label(at, *n.label);
    return;
  }
  auto kids = dst.expand(at, n.owner, static_cast<int>(n.children.size()));
  for (std::size_t i = 0; i < kids.size(); ++i) copy_subtree(dst, kids[i], src, n.children[i], map);
}

}  // namespace

Gamma2Protocol compose_sequential(const Gamma2Protocol& base, const std::vector<Graft>& grafts,
                                  const RelationSpec* r) {
  check_shape(base);
  if (grafts.empty()) {
    if (r) {
      auto rep = verify_gamma2(base, *r);
      if (!rep.accepted) fail(ErrorKind::Composition, "composite fails verification: " + rep.summary());
    }
    return base;
  }
  std::set<int> used;
  for (const auto& g : grafts) {
    if (g.leaf < 0 || static_cast<std::size_t>(g.leaf) >= base.structure.size() || !base.structure.is_leaf(g.leaf)) {
      fail(ErrorKind::NonLeafGraft, "graft target " + std::to_string(g.leaf) + " is not a leaf");
    }
    if (!used.insert(g.leaf).second) fail(ErrorKind::NonLeafGraft, "two grafts at leaf " + base.structure.address(g.leaf));
    auto rep = verify_protocol_constraints(g.protocol);
    if (!rep.accepted) {
      fail(ErrorKind::UnverifiedProtocol, "graft at leaf " + base.structure.address(g.leaf) + " fails: " + rep.summary());
    }
    if (!g.x_map.empty() && static_cast<int>(g.x_map.size()) != base.nx()) {
      fail(ErrorKind::DomainMismatch, "Alice input map must cover the base inputs");
    }
    if (!g.y_map.empty() && static_cast<int>(g.y_map.size()) != base.ny()) {
      fail(ErrorKind::DomainMismatch, "Bob input map must cover the base inputs");
    }
    for (int v : g.x_map) {
      if (v < 0 || v >= g.protocol.nx()) fail(ErrorKind::DomainMismatch, "Alice input map leaves the graft inputs");
    }
    for (int v : g.y_map) {
      if (v < 0 || v >= g.protocol.ny()) fail(ErrorKind::DomainMismatch, "Bob input map leaves the graft inputs");
    }
    if ((g.x_map.empty() && g.protocol.nx() != base.nx()) || (g.y_map.empty() && g.protocol.ny() != base.ny())) {
      fail(ErrorKind::DomainMismatch, "graft domain differs from the base and no input map was given");
    }
  }
  Prepared p = prepare(base, grafts);

  std::vector<int> graft_at(base.structure.size(), -1);
  for (std::size_t i = 0; i < grafts.size(); ++i) graft_at[static_cast<std::size_t>(grafts[i].leaf)] = static_cast<int>(i);

  Gamma2Protocol out;
  out.space = p.omega.space();
  const std::size_t nx = static_cast<std::size_t>(base.nx()), ny = static_cast<std::size_t>(base.ny());
  auto push = [&](int node) {
    if (out.alpha.size() <= static_cast<std::size_t>(node)) {
      out.alpha.resize(static_cast<std::size_t>(node) + 1, std::vector<Vec>(nx));
      out.beta.resize(static_cast<std::size_t>(node) + 1, std::vector<Vec>(ny));
    }
  };
  // Walk the base tree, copying structure and vectors.
  std::vector<std::pair<int, int>> stack{{base.structure.root(), out.structure.root()}};
  while (!stack.empty()) {
    auto [b, o] = stack.back();
    stack.pop_back();
    const auto& bn = base.structure.node(b);
    const int gi = graft_at[static_cast<std::size_t>(b)];
    if (gi < 0) {
      push(o);
      for (std::size_t x = 0; x < nx; ++x) out.alpha[static_cast<std::size_t>(o)][x] = tensor(p.base.alpha[static_cast<std::size_t>(b)][x], p.omega);
      for (std::size_t y = 0; y < ny; ++y) out.beta[static_cast<std::size_t>(o)][y] = tensor(p.base.beta[static_cast<std::size_t>(b)][y], p.omega);
      if (bn.children.empty()) {
        if (bn.label) out.structure.set_label(o, *bn.label);
        continue;
      }
      auto kids = out.structure.expand(o, bn.owner, static_cast<int>(bn.children.size()));
      for (std::size_t i = kids.size(); i-- > 0;) stack.emplace_back(bn.children[i], kids[i]);
      continue;
    }
    const Graft& g = grafts[static_cast<std::size_t>(gi)];
    const Gamma2Protocol& gp = p.grafts[static_cast<std::size_t>(gi)];
    std::vector<int> map(gp.structure.size(), -1);
    if (gp.structure.size() == 1 && !gp.structure.node(0).label && bn.label) out.structure.set_label(o, *bn.label);
    copy_subtree(out.structure, o, gp.structure, gp.structure.root(), map);
    const auto& la = p.base.alpha[static_cast<std::size_t>(b)];
    const auto& lb = p.base.beta[static_cast<std::size_t>(b)];
    for (std::size_t t = 0; t < gp.structure.size(); ++t) {
      const int nt = map[t];
      push(nt);
      for (std::size_t x = 0; x < nx; ++x) {
        std::size_t gx = g.x_map.empty() ? x : static_cast<std::size_t>(g.x_map[x]);
        out.alpha[static_cast<std::size_t>(nt)][x] = tensor(la[x], gp.alpha[t][gx]);
      }
      for (std::size_t y = 0; y < ny; ++y) {
        std::size_t gy = g.y_map.empty() ? y : static_cast<std::size_t>(g.y_map[y]);
        out.beta[static_cast<std::size_t>(nt)][y] = tensor(lb[y], gp.beta[t][gy]);
      }
    }
  }
  out.alpha.resize(out.structure.size(), std::vector<Vec>(nx));
  out.beta.resize(out.structure.size(), std::vector<Vec>(ny));

  auto rep = r ? verify_gamma2(out, *r) : verify_protocol_constraints(out);
  if (!rep.accepted) fail(ErrorKind::Composition, "composite fails verification: " + rep.summary());
  return out;
}

}  // namespace relaxforge
