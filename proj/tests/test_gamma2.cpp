#include <cstdlib>
#include <set>

#include "support.hpp"

#include "relaxforge/gamma2.hpp"
#include "relaxforge/kw.hpp"

using namespace relaxforge;
using testsupport::kind_of;
using testsupport::q;

namespace {

std::set<std::string> families(const VerificationReport& r) {
  std::set<std::string> f;
  for (const auto& v : r.violations) f.insert(v.family);
  return f;
}

// Every maximal antichain of the subtree at t that stays within `depth` edges of the root.
std::vector<std::vector<int>> cuts(const ProtocolStructure& s, int t, int depth) {
  std::vector<std::vector<int>> out{{t}};
  if (s.is_leaf(t) || depth == 0) return out;
  std::vector<std::vector<int>> acc{{}};
  for (int c : s.node(t).children) {
    std::vector<std::vector<int>> next;
    for (const auto& a : acc) {
      for (const auto& b : cuts(s, c, depth - 1)) {
        auto u = a;
        u.insert(u.end(), b.begin(), b.end());
        next.push_back(std::move(u));
      }
    }
    acc = std::move(next);
  }
  out.insert(out.end(), acc.begin(), acc.end());
  return out;
}

// Random maximal antichain: stop at each node with probability 1/3.
std::vector<int> random_cut(const ProtocolStructure& s, std::mt19937& rng) {
  std::vector<int> out, stack{s.root()};
  std::uniform_int_distribution<int> coin(0, 2);
  while (!stack.empty()) {
    int t = stack.back();
    stack.pop_back();
    if (s.is_leaf(t) || coin(rng) == 0) {
      out.push_back(t);
    } else {
      for (int c : s.node(t).children) stack.push_back(c);
    }
  }
  return out;
}

// Brute force over every pair of row and column subsets.
Rational disc_oracle(const std::vector<std::vector<int>>& f, const std::vector<std::vector<Rational>>& mu) {
  const std::size_t nx = f.size(), ny = f[0].size();
  Rational best;
  for (std::uint32_t rs = 0; rs < (1U << nx); ++rs) {
    for (std::uint32_t cs = 0; cs < (1U << ny); ++cs) {
      Rational s;
      for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t y = 0; y < ny; ++y)
          if (((rs >> x) & 1U) && ((cs >> y) & 1U)) s += f[x][y] ? -mu[x][y] : mu[x][y];
      best = std::max(best, s.abs());
    }
  }
  return best;
}

int message(const Gamma2Protocol& pi, int m) { return pi.structure.node(0).children[static_cast<std::size_t>(m)]; }

}  // namespace

TEST_CASE("equality protocol coefficients") {
  auto k = equality_coefficients(11, 2);
  CHECK(k.cp.is_zero());
  CHECK(k.cq == q("1/22"));
  CHECK(k.c * k.p == Scalar(k.cp));
  CHECK(k.c * k.q == Scalar(k.cq));
  CHECK(Rational(1, 22) - k.cp - k.cq / Rational(1) == 0);
  for (int d = 2; d <= 60; ++d) {
    auto kd = equality_coefficients(11, d);
    CHECK(kd.r2.sign() >= 0);
    CHECK(kd.p2 <= q("1/20"));
    CHECK(kd.q2 <= q("1/5"));
    CHECK(kd.c * kd.p == Scalar(kd.cp));
    CHECK(kd.c * kd.q == Scalar(kd.cq));
    // the two leaf equations
    CHECK(Rational(1, 22) - kd.cp - kd.cq / Rational(d - 1) == 0);
    CHECK(Rational(1, 22) + kd.cp - kd.cq == 0);
  }
  CHECK(kind_of([] { equality_coefficients(10, 3); }) == ErrorKind::CoefficientBound);
  CHECK(kind_of([] { equality_protocol(5, 3); }) == ErrorKind::CoefficientBound);
}

TEST_CASE("equality protocol verifies") {
  for (int d : {2, 5, 17}) {
    auto pi = equality_protocol(11, d);
    auto rep = verify_gamma2(pi, equality_relation(d));
    CHECK_MESSAGE(rep.accepted, rep.summary());
    CHECK(pi.structure.max_edge_depth() == 2);
    CHECK(pi.structure.max_bit_depth() == 5);
  }
  CHECK(verify_gamma2(equality_protocol(12, 5), equality_relation(5)).accepted);

  auto pi = equality_protocol(11, 2);
  std::vector<Vec> alphas;
  for (int m = 0; m < 11; ++m) alphas.push_back(pi.alpha[static_cast<std::size_t>(message(pi, m))][0]);
  auto g = gram_of(alphas);
  CHECK(g(0, 0) == q("1/11"));
  CHECK(g(0, 1).is_zero());
  CHECK(certifies_psd(psd_certificate(g)));

  CHECK(kind_of([&] { verify_gamma2(pi, equality_relation(3)); }) == ErrorKind::DomainMismatch);
}

TEST_CASE("equality perturbation is caught at a depth-2 leaf") {
  EqualityAtoms atoms(InnerProductSpace::create());
  auto k = equality_coefficients(11, 5);
  k.q = k.q + Scalar(q("1/100"));
  auto pi = equality_protocol_with(11, 5, k, atoms);
  auto rep = verify_gamma2(pi, equality_relation(5));
  CHECK(!rep.accepted);
  bool leaf_hit = false;
  for (const auto& v : rep.violations) {
    if (v.family == "computational") {
      auto t = pi.structure.find(v.location);
      REQUIRE(t.has_value());
      leaf_hit = leaf_hit || pi.structure.edge_depth(*t) == 2;
    }
  }
  CHECK(leaf_hit);
}

TEST_CASE("node matrices, leaf sums and the decomposition identity") {
  auto pi = equality_protocol(11, 2);
  auto root = node_matrix(pi, 0);
  for (auto& row : root)
    for (auto& v : row) CHECK(v == Scalar(1));
  const int m = message(pi, 0);
  auto mm = node_matrix(pi, m);
  for (auto& row : mm)
    for (auto& v : row) CHECK(v == Scalar(q("1/11")));
  auto m1 = node_matrix(pi, pi.structure.node(m).children[1]);
  CHECK(m1[0][0] == Scalar(q("1/11")));
  CHECK(m1[0][1].is_zero());
  auto sc = structure_check(pi);
  CHECK_MESSAGE(sc.accepted, sc.summary());

  auto pi5 = equality_protocol(11, 5);
  CHECK(leaf_sum_check(pi5, pi5.structure.leaves()));
  CHECK(leaf_sum_check(pi5, {0}));
  CHECK(leaf_sum_check(pi5, pi5.structure.node(0).children));
  CHECK(kind_of([&] { leaf_sum_check(pi5, {message(pi5, 0)}); }) == ErrorKind::NonMaximalAntichain);
  CHECK(kind_of([&] { leaf_sum_check(pi5, {0, message(pi5, 0)}); }) == ErrorKind::NonMaximalAntichain);

  auto d3 = mf_decomposition_check(equality_protocol(11, 3), equality_relation(3));
  CHECK(d3.holds);
  CHECK(d3.one_leaves == 11);

  // constant 1 with the trivial protocol
  Gamma2Protocol triv;
  triv.space = InnerProductSpace::create();
  Vec e = Vec::atom(triv.space, triv.space->add_unit("e"));
  triv.structure.set_label(0, {1});
  triv.alpha = {{e, e}};
  triv.beta = {{e, e, e}};
  auto one = RelationSpec::function(2, 3, [](int, int) { return true; });
  auto dt = mf_decomposition_check(triv, one);
  CHECK(dt.holds);
  CHECK(dt.one_leaves == 1);

  // AND on one bit each: Alice says x, Bob says y
  Gamma2Protocol andp;
  andp.space = InnerProductSpace::create();
  Vec u = Vec::atom(andp.space, andp.space->add_unit("u"));
  Vec z(andp.space);
  auto kids = andp.structure.expand(0, Owner::Alice, 2);
  andp.structure.set_label(kids[0], {0});
  auto bk = andp.structure.expand(kids[1], Owner::Bob, 2);
  andp.alpha = {{u, u}, {u, z}, {z, u}, {z, u}, {z, u}};
  andp.beta = {{u, u}, {u, u}, {u, u}, {u, z}, {z, u}};
  auto AND = RelationSpec::function(2, 2, [](int x, int y) { return x && y; });
  auto ar = verify_gamma2(andp, AND);
  CHECK_MESSAGE(ar.accepted, ar.summary());
  auto da = mf_decomposition_check(andp, AND);
  CHECK(da.holds);
  CHECK(da.one_leaves == 1);
  CHECK(da.leaves == std::vector<int>{bk[1]});

  auto rel = kw_relation(TruthTable::from_hex(2, "8"));
  CHECK(kind_of([&] { mf_decomposition_check(protocol_from_formula(parse_formula("x1 & x2"), 2), rel); }) ==
        ErrorKind::Unsupported);
}

TEST_CASE("leaf sums hold on every shallow antichain and on random deep ones") {
  auto pi = equality_protocol(11, 3);
  auto all = cuts(pi.structure, 0, 3);
  CHECK(all.size() == 2049);
  for (const auto& c : all) CHECK(leaf_sum_check(pi, c));

  auto fp = protocol_from_formula(parse_formula("(x1 & x2) | (x3 & !x4) | (x2 & x4)"), 4);
  for (const auto& c : cuts(fp.structure, 0, 3)) CHECK(leaf_sum_check(fp, c));

  auto kw = kw_via_equality(TruthTable::from_hex(4, "8000"));
  std::mt19937 rng(5);
  for (int i = 0; i < 40; ++i) CHECK(leaf_sum_check(kw.protocol, random_cut(kw.protocol.structure, rng)));
}

TEST_CASE("directed mutations are rejected") {
  auto base = equality_protocol(11, 3);
  auto r = equality_relation(3);
  REQUIRE(verify_gamma2(base, r).accepted);
  const Vec psi = base.alpha[0][0];
  const int m = message(base, 0);
  const int m0 = base.structure.node(m).children[0];

  auto expect = [&](Gamma2Protocol pi, const std::string& fam) {
    auto rep = verify_gamma2(pi, r);
    CHECK(!rep.accepted);
    CHECK_MESSAGE(families(rep).count(fam) == 1, fam);
  };
  {
    auto pi = base;
    pi.alpha[0][1] = Scalar(2) * psi;
    expect(pi, "root");
  }
  {
    auto pi = base;
    pi.alpha[static_cast<std::size_t>(m)][0] += Scalar(q("1/5")) * psi;
    expect(pi, "alice-norm");
    expect(pi, "alice-sum");
  }
  {
    auto pi = base;
    int m2 = message(base, 1);
    pi.alpha[static_cast<std::size_t>(m)][0] += Scalar(q("1/7")) * pi.alpha[static_cast<std::size_t>(m2)][0];
    expect(pi, "alice-orthogonal");
  }
  {
    auto pi = base;
    pi.beta[static_cast<std::size_t>(m)][2] = Scalar(2) * psi;
    expect(pi, "alice-carry-norm");
  }
  {
    auto pi = base;
    pi.beta[static_cast<std::size_t>(m0)][1] = Scalar(q("3/2")) * pi.beta[static_cast<std::size_t>(m0)][1];
    expect(pi, "bob-norm");
  }
  {
    auto pi = base;
    pi.alpha[static_cast<std::size_t>(m0)][1] = Vec(pi.space);
    expect(pi, "bob-carry-norm");
  }
  {
    auto pi = base;
    std::swap(pi.beta[static_cast<std::size_t>(m0)], pi.beta[static_cast<std::size_t>(base.structure.node(m).children[1])]);
    expect(pi, "computational");
  }
  {
    auto pi = protocol_from_formula(parse_formula("x1 & x2"), 2);
    auto rel = kw_relation(truth_table(parse_formula("x1 & x2"), 2));
    REQUIRE(verify_gamma2(pi, rel).accepted);
    auto bad = pi;
    bad.structure = ProtocolStructure();
    auto kids = bad.structure.expand(0, Owner::Bob, 2);
    bad.structure.set_label(kids[0], {1});
    bad.structure.set_label(kids[1], {0});
    auto rep = verify_gamma2(bad, rel);
    CHECK(!rep.accepted);
    CHECK(families(rep).count("computational") == 1);
  }
}

TEST_CASE("discrepancy by exhaustive rectangles") {
  CHECK(disc_uniform({{0, 0}, {0, 1}}) == q("1/2"));
  std::vector<std::vector<int>> eq2(4, std::vector<int>(4));
  for (int i = 0; i < 4; ++i) eq2[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1;
  CHECK(disc_uniform(eq2) == q("1/2"));
  CHECK(disc_uniform({{1, 0}, {0, 1}}) == q("1/4"));
  CHECK(disc_uniform({{1, 1, 1}, {1, 1, 1}}) == 1);
  CHECK(disc_uniform({{0, 0}, {0, 0}}) == 1);

  std::mt19937 rng(11);
  std::uniform_int_distribution<int> bit(0, 1), w(0, 6), sz(1, 4);
  for (int t = 0; t < 150; ++t) {
    std::size_t nx = static_cast<std::size_t>(sz(rng)), ny = static_cast<std::size_t>(sz(rng));
    std::vector<std::vector<int>> f(nx, std::vector<int>(ny));
    std::vector<std::vector<Rational>> mu(nx, std::vector<Rational>(ny));
    Rational total;
    for (auto& row : f)
      for (auto& v : row) v = bit(rng);
    for (auto& row : mu)
      for (auto& v : row) total += (v = w(rng));
    if (total.is_zero()) continue;
    for (auto& row : mu)
      for (auto& v : row) v /= total;
    CHECK(discrepancy(f, mu) == disc_oracle(f, mu));
  }

  std::vector<std::vector<int>> big(9, std::vector<int>(2));
  CHECK(kind_of([&] { disc_uniform(big); }) == ErrorKind::TooLarge);
  setenv("RELAXFORGE_CAP", "9", 1);
  CHECK(disc_uniform(big) == 1);
  unsetenv("RELAXFORGE_CAP");
  CHECK(kind_of([] { discrepancy({{0, 1}}, {{q("1/2")}}); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("protocol HQFP round trip") {
  auto pi = equality_protocol(11, 2);
  auto r = equality_relation(2);
  auto prob = relax(protocol_hqfp(r, pi.structure));
  auto rep = verify_primal(prob, protocol_vectors(pi));
  CHECK_MESSAGE(rep.accepted, rep.summary());

  auto phi = parse_formula("(x1 & x2) | (x1 & x3)");
  auto ca = circuit_assignment(phi, 3);
  auto rel = kw_relation(truth_table(phi, 3));
  auto hq = protocol_hqfp(rel, ca.shape);
  CHECK(verify_primal(hq, hqfp_embedding(phi, 3)).accepted);
  auto fp = protocol_from_formula(phi, 3);
  CHECK(verify_primal(relax(hq), protocol_vectors(fp)).accepted);

  // A single leaf has no output bits, so it must vanish, which the root forbids.
  ProtocolStructure single;
  auto one_leaf = protocol_hqfp(equality_relation(2), single);
  for (int a = -1; a <= 1; ++a)
    for (int b = -1; b <= 1; ++b)
      for (int c = -1; c <= 1; ++c)
        for (int d = -1; d <= 1; ++d) CHECK(!verify_primal(one_leaf, Rank1{{a, b, c, d}}).accepted);
}

TEST_CASE("rank-1 solutions of the EQ_2 protocol problem are the classical protocols") {
  auto s = layered_structure({Owner::Alice, Owner::Bob});
  auto r = equality_relation(2);
  auto prob = protocol_hqfp(r, s);
  const int T = static_cast<int>(s.size());
  // Constraints touching a single input's variables only.
  auto local = [&](bool alice, int i, const std::vector<Rational>& x) {
    std::set<std::uint32_t> own;
    for (int t = 0; t < T; ++t) own.insert(alice ? protocol_var_a(2, 2, t, i) : protocol_var_b(2, 2, t, i));
    for (const auto& c : prob.constraints) {
      bool inside = true;
      for (const auto& [k, v] : c.A.entries()) inside = inside && own.count(k.first) && own.count(k.second);
      if (inside && c.A.eval(x) != c.b) return false;
    }
    return true;
  };
  std::vector<std::vector<int>> cand[2][2];
  for (int side = 0; side < 2; ++side) {
    for (int i = 0; i < 2; ++i) {
      for (int code = 0; code < 2187; ++code) {
        std::vector<int> vals(7);
        int c = code;
        for (int t = 0; t < 7; ++t, c /= 3) vals[static_cast<std::size_t>(t)] = c % 3 - 1;
        std::vector<Rational> x(prob.n);
        for (int t = 0; t < T; ++t) {
          x[side == 0 ? protocol_var_a(2, 2, t, i) : protocol_var_b(2, 2, t, i)] = vals[static_cast<std::size_t>(t)];
        }
        if (local(side == 0, i, x)) cand[side][i].push_back(vals);
      }
    }
  }
  std::set<std::vector<int>> hqfp_solutions;
  for (auto& a0 : cand[0][0])
    for (auto& a1 : cand[0][1])
      for (auto& b0 : cand[1][0])
        for (auto& b1 : cand[1][1]) {
          Rank1 x{std::vector<Rational>(prob.n)};
          std::vector<int> flat(prob.n);
          for (int t = 0; t < T; ++t) {
            flat[protocol_var_a(2, 2, t, 0)] = a0[static_cast<std::size_t>(t)];
            flat[protocol_var_a(2, 2, t, 1)] = a1[static_cast<std::size_t>(t)];
            flat[protocol_var_b(2, 2, t, 0)] = b0[static_cast<std::size_t>(t)];
            flat[protocol_var_b(2, 2, t, 1)] = b1[static_cast<std::size_t>(t)];
          }
          for (std::size_t v = 0; v < prob.n; ++v) x.x[v] = flat[v];
          if (verify_primal(prob, x).accepted) hqfp_solutions.insert(flat);
        }

  // Classical protocols: Alice sends a(x), Bob at node a sends b_a(y), the leaf outputs Bob's bit.
  std::set<std::vector<int>> classical;
  for (int a = 0; a < 4; ++a)
    for (int b0 = 0; b0 < 4; ++b0)
      for (int b1 = 0; b1 < 4; ++b1) {
        auto af = [&](int x) { return (a >> x) & 1; };
        auto bf = [&](int node, int y) { return ((node ? b1 : b0) >> y) & 1; };
        bool ok = true;
        for (int x = 0; x < 2; ++x)
          for (int y = 0; y < 2; ++y) ok = ok && (bf(af(x), y) == (x == y ? 1 : 0));
        if (!ok) continue;
        for (int sign : {1, -1}) {
          std::vector<int> flat(prob.n);
          for (int x = 0; x < 2; ++x) {
            flat[protocol_var_a(2, 2, 0, x)] = sign;
            for (int m = 0; m < 2; ++m) {
              int tm = s.node(0).children[static_cast<std::size_t>(m)];
              int on = af(x) == m ? sign : 0;
              flat[protocol_var_a(2, 2, tm, x)] = on;
              for (int c : s.node(tm).children) flat[protocol_var_a(2, 2, c, x)] = on;
            }
          }
          for (int y = 0; y < 2; ++y) {
            flat[protocol_var_b(2, 2, 0, y)] = sign;
            for (int m = 0; m < 2; ++m) {
              int tm = s.node(0).children[static_cast<std::size_t>(m)];
              flat[protocol_var_b(2, 2, tm, y)] = sign;
              for (int bit = 0; bit < 2; ++bit) {
                int c = s.node(tm).children[static_cast<std::size_t>(bit)];
                flat[protocol_var_b(2, 2, c, y)] = bf(m, y) == bit ? sign : 0;
              }
            }
          }
          classical.insert(flat);
        }
      }
  CHECK(classical.size() == 4);
  CHECK(hqfp_solutions == classical);
}

TEST_CASE("sequential composition") {
  auto r4 = equality_relation(4);
  EqualityAtoms atoms(InnerProductSpace::create());
  // equality on the high bit, then on the low bit below every "equal" leaf
  auto hi = reindex(equality_protocol(11, 2, atoms), {0, 0, 1, 1}, {0, 0, 1, 1});
  std::vector<Graft> grafts;
  for (int leaf : hi.structure.leaves()) {
    if (hi.structure.node(leaf).edge != 1) continue;
    grafts.push_back({leaf, equality_protocol(11, 2, atoms), {0, 1, 0, 1}, {0, 1, 0, 1}});
  }
  auto comp = compose_sequential(hi, grafts, &r4);
  CHECK(verify_gamma2(comp, r4).accepted);
  CHECK(comp.structure.max_edge_depth() == 4);
  CHECK(mf_decomposition_check(comp, r4).one_leaves == 121);

  // a single-leaf graft changes nothing but the tensor factor
  auto eq = equality_protocol(11, 3, atoms);
  Gamma2Protocol leaf;
  leaf.space = eq.space;
  leaf.alpha = {std::vector<Vec>(3, eq.alpha[0][0])};
  leaf.beta = {std::vector<Vec>(3, eq.alpha[0][0])};
  int target = eq.structure.leaves()[0];
  auto same = compose_sequential(eq, {{target, leaf, {}, {}}});
  CHECK(same.structure == eq.structure);
  for (std::size_t t = 0; t < eq.structure.size(); ++t) {
    CHECK(node_matrix(same, static_cast<int>(t)) == node_matrix(eq, static_cast<int>(t)));
  }

  // grafting under a leaf where the pair is already separated keeps it at zero
  int m1 = eq.structure.node(message(eq, 0)).children[1];
  auto z = compose_sequential(eq, {{m1, equality_protocol(11, 3, atoms), {}, {}}});
  for (int l : z.structure.leaves()) {
    if (!z.structure.is_ancestor(m1, l)) continue;
    auto m = node_matrix(z, l);
    CHECK(m[0][1].is_zero());
    CHECK(m[2][0].is_zero());
  }

  // grafts living in other spaces are copied into a fresh one
  auto a = equality_protocol(11, 2);
  auto b = equality_protocol(11, 2);
  std::vector<Graft> gs;
  for (int l : a.structure.leaves()) gs.push_back({l, b, {}, {}});
  auto r2 = equality_relation(2);
  auto mixed = compose_sequential(a, gs, &r2);
  CHECK(mixed.space != a.space);
  CHECK(verify_gamma2(mixed, equality_relation(2)).accepted);

  CHECK(kind_of([&] { compose_sequential(eq, {{0, leaf, {}, {}}}); }) == ErrorKind::NonLeafGraft);
  auto broken = leaf;
  broken.alpha[0][0] = Scalar(2) * broken.alpha[0][0];
  CHECK(kind_of([&] { compose_sequential(eq, {{target, broken, {}, {}}}); }) == ErrorKind::UnverifiedProtocol);
  // a graft that answers the wrong question is caught by the final verification
  auto wrong = reindex(equality_protocol(11, 2, atoms), {0, 1, 0, 1}, {1, 0, 1, 0});
  std::vector<Graft> wg;
  for (int l : hi.structure.leaves()) {
    if (hi.structure.node(l).edge == 1) wg.push_back({l, wrong, {}, {}});
  }
  CHECK(kind_of([&] { compose_sequential(hi, wg, &r4); }) == ErrorKind::Composition);
}

TEST_CASE("Karchmer-Wigderson relations") {
  auto x1 = kw_relation(TruthTable::from_hex(1, "2"));
  CHECK(x1.nx == 1);
  CHECK(x1.ny == 1);
  CHECK(x1.x_names == std::vector<std::string>{"1"});
  CHECK(x1.allows(0, 0, 0));
  CHECK(!x1.allows(0, 0, 1));

  auto and2 = kw_relation(TruthTable::from_hex(2, "8"));
  CHECK(and2.x_names == std::vector<std::string>{"11"});
  CHECK(and2.y_names == std::vector<std::string>{"00", "10", "01"});

  auto par = kw_relation(TruthTable::from_hex(3, "96"));
  CHECK(par.nx == 4);
  CHECK(par.ny == 4);
  CHECK(par.k == 2);

  CHECK(kind_of([] { kw_relation(TruthTable::from_hex(2, "0")); }) == ErrorKind::EmptySide);
  CHECK(kind_of([] { kw_relation(TruthTable::from_hex(2, "f")); }) == ErrorKind::EmptySide);
  CHECK(kind_of([] { TruthTable::from_hex(2, "1f"); }) == ErrorKind::Parse);
  CHECK(TruthTable::from_hex(3, "96").hex() == "96");
}

TEST_CASE("formulas and their protocols") {
  auto f = parse_formula("(x1 & x2) | (x1 & x3)");
  CHECK(f.str() == "((x1 & x2) | (x1 & x3))");
  CHECK(kind_of([] { parse_formula("x1 & (x2"); }) == ErrorKind::Parse);
  CHECK(kind_of([] { parse_formula("x0"); }) == ErrorKind::Parse);
  CHECK(nnf(parse_formula("!(x1 & !x2)")) == Formula::disj({Formula::lit(0, true), Formula::lit(1)}));
  CHECK(nnf(parse_formula("x1 & 1")) == Formula::lit(0));
  CHECK(nnf(parse_formula("x1 & 0")) == Formula::constant(false));

  auto n = normalize(parse_formula("x1 & x2 & x3 & x4"));
  CHECK(is_alternating(n));
  CHECK(truth_table(n, 4).f == truth_table(parse_formula("x1 & x2 & x3 & x4"), 4).f);

  // x1 alone: a single labelled leaf
  auto p1 = protocol_from_formula(parse_formula("x1"), 1);
  CHECK(p1.structure.size() == 1);
  CHECK(verify_gamma2(p1, kw_relation(TruthTable::from_hex(1, "2"))).accepted);

  // x1 & x2: Bob speaks once; leaf 0 is where x1 fails on y
  auto p2 = protocol_from_formula(parse_formula("x1 & x2"), 2);
  CHECK(p2.structure.node(0).owner == Owner::Bob);
  CHECK(p2.structure.max_edge_depth() == 1);
  auto rel2 = kw_relation(TruthTable::from_hex(2, "8"));
  CHECK(verify_gamma2(p2, rel2).accepted);
  int t0 = p2.structure.node(0).children[0];
  CHECK(*p2.structure.node(t0).label == std::vector<int>{0});
  for (int y = 0; y < rel2.ny; ++y) {
    bool x1_false = rel2.y_names[static_cast<std::size_t>(y)][0] == '0';
    CHECK(is_zero_vector(p2.beta[static_cast<std::size_t>(t0)][static_cast<std::size_t>(y)]) == !x1_false);
  }

  auto p3 = protocol_from_formula(f, 3);
  CHECK(p3.structure.max_edge_depth() == 2);
  CHECK(verify_gamma2(p3, kw_relation(truth_table(f, 3))).accepted);

  CHECK(kind_of([] { protocol_from_formula(parse_formula("x1 | !x1"), 1); }) == ErrorKind::EmptySide);
  CHECK(kind_of([] { protocol_from_formula(parse_formula("x3"), 2); }) == ErrorKind::InvalidFormula);
}

TEST_CASE("random formulas give verified rank-1 protocols") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> var(0, 3), coin(0, 1), arity(2, 3);
  std::function<Formula(int)> gen = [&](int depth) -> Formula {
    if (depth == 0 || coin(rng) == 0) {
      Formula l = Formula::lit(var(rng), coin(rng) == 1);
      return coin(rng) && depth > 0 ? Formula::negate(l) : l;
    }
    std::vector<Formula> k;
    int a = arity(rng);
    for (int i = 0; i < a; ++i) k.push_back(gen(depth - 1));
    return coin(rng) ? Formula::conj(k) : Formula::disj(k);
  };
  int tested = 0;
  for (int i = 0; i < 120; ++i) {
    Formula f = gen(3);
    auto tt = truth_table(f, 4);
    if (tt.is_constant()) continue;
    ++tested;
    auto pi = protocol_from_formula(f, 4);
    auto rel = kw_relation(tt);
    auto rep = verify_gamma2(pi, rel);
    CHECK_MESSAGE(rep.accepted, std::string(f.str() + "\n" + rep.summary()));
    CHECK(structure_check(pi).accepted);
    CHECK(verify_primal(protocol_hqfp(rel, pi.structure), hqfp_embedding(f, 4)).accepted);
    // classical semantics: 0/1 node matrices, children partition the speaker's side
    for (std::size_t t = 0; t < pi.structure.size(); ++t) {
      auto m = node_matrix(pi, static_cast<int>(t));
      for (auto& row : m)
        for (auto& v : row) CHECK((v.is_zero() || v == Scalar(1)));
      const auto& node = pi.structure.node(static_cast<int>(t));
      if (node.children.empty()) continue;
      const auto& side = node.owner == Owner::Alice ? pi.alpha : pi.beta;
      for (std::size_t i2 = 0; i2 < side[t].size(); ++i2) {
        int live = 0;
        for (int c : node.children) live += is_zero_vector(side[static_cast<std::size_t>(c)][i2]) ? 0 : 1;
        CHECK(live == (is_zero_vector(side[t][i2]) ? 0 : 1));
      }
    }
  }
  CHECK(tested > 60);
}

TEST_CASE("KW via equality") {
  auto one = kw_via_equality(TruthTable::from_hex(1, "2"));
  CHECK(one.equality_calls == 0);
  CHECK(one.edge_depth == 0);

  auto x = kw_via_equality(TruthTable::from_hex(2, "6"));
  CHECK(x.equality_calls == 1);
  CHECK(verify_gamma2(x.protocol, x.relation).accepted);

  auto a4 = kw_via_equality(TruthTable::from_hex(4, "8000"));
  CHECK(verify_gamma2(a4.protocol, a4.relation).accepted);
  CHECK(a4.speaker_rounds <= 4);
  CHECK(a4.edge_depth <= 5);
  CHECK(a4.bit_depth <= 2 * 5 + 2);
  CHECK(structure_check(a4.protocol).accepted);

  auto three = kw_via_equality(TruthTable::from_hex(3, "e8"));
  CHECK(verify_gamma2(three.protocol, three.relation).accepted);

  CHECK(kind_of([] { kw_via_equality(TruthTable::from_hex(3, "0")); }) == ErrorKind::EmptySide);
}
