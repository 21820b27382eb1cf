// Acceptance gate: one PASS/FAIL line per criterion. With no arguments every
// criterion runs; otherwise only the named ones. Exit status 1 on any FAIL.
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "relaxforge/cli.hpp"
#include "relaxforge/conic.hpp"
#include "relaxforge/gamma2.hpp"
#include "relaxforge/io.hpp"
#include "relaxforge/kw.hpp"
#include "relaxforge/qphp.hpp"
#include "relaxforge/quantum_lab.hpp"
#include "relaxforge/sym_matrix.hpp"

using namespace relaxforge;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

struct Criterion {
  std::string name;
  double budget_ms;
  std::function<Outcome()> run;
};

// Budgets.
constexpr double kDualSweepMs = 1000;
constexpr double kTightnessMs = 5000;
constexpr double kEqualityD50Ms = 30000;
constexpr double kUniversalExhaustiveMs = 600000;
constexpr double kUniversalSampledMs = 10000;
constexpr double kSosMs = 30000;
constexpr double kKwMs = 120000;
constexpr double kDiscMs = 1000;

// Sizes.
constexpr int kEqualityL = 11;
constexpr int kEqualityMaxD = 50;
constexpr std::size_t kUniversalSamples = 500;
constexpr std::size_t kKwSamples = 200;
constexpr std::size_t kPsdMatrices = 200;
constexpr std::size_t kPsdVectors = 10000;

// Discrepancy values worked out by hand over every rectangle before the build.
const Rational kDiscIP1(1, 2);
const Rational kDiscEQ2(1, 2);

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

std::string str(const Rational& q) { return q.str(); }

// Nodes at edge depth k plus the leaves above it.
std::vector<int> level_cut(const ProtocolStructure& s, int k) {
  std::vector<int> cut;
  for (std::size_t t = 0; t < s.size(); ++t) {
    int d = s.edge_depth(static_cast<int>(t));
    if (d == k || (d < k && s.is_leaf(static_cast<int>(t)))) cut.push_back(static_cast<int>(t));
  }
  return cut;
}

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

// Leaf sums on the root, every depth level, the leaves and random cuts.
bool leaf_sums_hold(const Gamma2Protocol& pi, std::mt19937& rng, int random_cuts) {
  const auto& s = pi.structure;
  for (int k = 0; k <= s.max_edge_depth(); ++k) {
    if (!leaf_sum_check(pi, level_cut(s, k))) return false;
  }
  for (int i = 0; i < random_cuts; ++i) {
    if (!leaf_sum_check(pi, random_cut(s, rng))) return false;
  }
  return true;
}

TruthTable random_nonconstant(int n, std::mt19937_64& rng) {
  TruthTable t;
  t.n = n;
  t.f.resize(std::size_t{1} << n);
  do {
    for (auto& b : t.f) b = static_cast<std::uint8_t>(rng() & 1U);
  } while (t.is_constant());
  return t;
}

std::vector<std::vector<int>> hex_matrix(const std::string& hex, int rows, int cols) {
  auto bits = parse_hex_bits(hex, static_cast<std::size_t>(rows * cols));
  std::vector<std::vector<int>> m(rows, std::vector<int>(cols));
  for (int x = 0; x < rows; ++x)
    for (int y = 0; y < cols; ++y) m[x][y] = bits[static_cast<std::size_t>(x * cols + y)];
  return m;
}

// Brute force over all row and column subsets with uniform weights.
Rational disc_brute(const std::vector<std::vector<int>>& f) {
  const std::size_t nx = f.size(), ny = f[0].size();
  const Rational w(1, static_cast<std::int64_t>(nx * ny));
  Rational best;
  for (std::uint32_t rs = 0; rs < (1U << nx); ++rs) {
    for (std::uint32_t cs = 0; cs < (1U << ny); ++cs) {
      Rational s;
      for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t y = 0; y < ny; ++y)
          if ((rs >> x & 1U) && (cs >> y & 1U)) s += f[x][y] ? w : -w;
      if (s.abs() > best) best = s.abs();
    }
  }
  return best;
}

Outcome dual_sweep() {
  Outcome o;
  int pairs = 0, rank_one = 0;
  std::string rank_detail;
  for (int p = 2; p <= 10; ++p) {
    for (int h = 1; h < p; ++h) {
      std::ostringstream out, err;
      int code = cli_dispatch({"--json", "qphp", "dual", "--pigeons", std::to_string(p), "--holes", std::to_string(h)},
                              out, err);
      const std::string at = "(" + std::to_string(p) + "," + std::to_string(h) + ")";
      o.require(code == 0, "qphp dual rejected " + at + ": " + err.str());
      if (code != 0) continue;
      auto j = io::parse(out.str());
      Rational expected = Rational(1) - Rational(p, h);
      o.require(j["outcome"] == "accept", "outcome at " + at);
      o.require(io::rational_from(j["values"]["value"]["exact"]) == expected, "value at " + at);
      o.require(j["values"]["psd"] == true, "PSD at " + at);
      std::size_t rank = j["values"]["rank"];
      ++pairs;
      if (rank == 1) {
        ++rank_one;
      } else if (rank_detail.empty()) {
        rank_detail = "rank " + std::to_string(rank) + " at " + at;
      }
    }
  }
  o.require(rank_one == pairs, "value 1 - p/h and PSD hold on all " + std::to_string(pairs) +
                                   " pairs; W has rank 1 on only " + std::to_string(rank_one) + " (first: " +
                                   rank_detail + ", rank equals h)");
  if (o.pass) o.detail = std::to_string(pairs) + " pairs";
  return o;
}

Outcome tightness() {
  Outcome o;
  int cases = 0;
  for (int p = 3; p <= 8; ++p) {
    for (int h = 2; h < p; ++h) {
      Rational crit(h - 1, p - 1);
      std::set<Rational> betas{Rational(0), Rational(1, 2), Rational(1), crit};
      for (const auto& beta : betas) {
        const std::string at = "(" + std::to_string(p) + "," + std::to_string(h) + ",beta=" + str(beta) + ")";
        auto f = tight_example(p, h, beta);
        o.require(verify_family(f).accepted, "invalid family " + at);
        Rational expected = (beta - crit) / Rational(h * h);
        Rational got = max_overlap(f).value;
        o.require(got == expected, "max_overlap " + str(got) + " != " + str(expected) + " at " + at);
        ++cases;
      }
    }
  }
  if (o.pass) o.detail = std::to_string(cases) + " families";
  return o;
}

Outcome equality() {
  Outcome o;
  std::mt19937 rng(11);
  double d50_ms = 0;
  for (int d = 2; d <= kEqualityMaxD; ++d) {
    auto t0 = std::chrono::steady_clock::now();
    auto pi = equality_protocol(kEqualityL, d);
    auto r = equality_relation(d);
    const std::string at = "d=" + std::to_string(d);
    o.require(verify_gamma2(pi, r).accepted, "verify_gamma2 rejected " + at);
    o.require(leaf_sums_hold(pi, rng, 20), "leaf sum failed " + at);
    auto mf = mf_decomposition_check(pi, r);
    o.require(mf.holds && mf.one_leaves <= static_cast<std::size_t>(kEqualityL),
              "decomposition gave " + std::to_string(mf.one_leaves) + " one-leaves " + at);
    if (d == kEqualityMaxD) d50_ms = ms_since(t0);
  }
  o.require(d50_ms < kEqualityD50Ms, "d=50 took " + std::to_string(d50_ms) + " ms");
  if (o.pass) o.detail = "d=2..50, d=50 in " + std::to_string(static_cast<long>(d50_ms)) + " ms";
  return o;
}

Outcome universal(bool exhaustive) {
  Outcome o;
  auto res = universal_sweep(4, 4, exhaustive, kUniversalSamples, 20261014);
  o.require(res.accepted == res.tables, std::to_string(res.tables - res.accepted) + " tables rejected");
  o.require(res.outputs_match == res.tables, std::to_string(res.tables - res.outputs_match) + " output mismatches");
  o.require(res.tables == (exhaustive ? std::size_t{1} << 16 : kUniversalSamples), "wrong table count");
  if (o.pass) o.detail = std::to_string(res.tables) + " tables";
  return o;
}

Outcome sos_round_trip() {
  Outcome o;
  struct Case {
    int p, h;
    Rational constant;
  };
  for (const auto& c : {Case{3, 2, Rational(-1, 2)}, Case{4, 3, Rational(-1, 3)}, Case{5, 2, Rational(-3, 2)}}) {
    const std::string at = "(" + std::to_string(c.p) + "," + std::to_string(c.h) + ")";
    auto prob = relax(php_negation_hqfp(c.p, c.h));
    auto cert = sos_from_dual(prob, qphp_dual_witness(c.p, c.h));
    auto rep = verify_sos(cert, prob);
    o.require(rep.accepted, "verify_sos rejected " + at + ": " + rep.reason);
    o.require(cert.constant == c.constant, "constant " + str(cert.constant) + " at " + at);
    o.require(cert.dim == static_cast<std::size_t>(1 + c.p * c.h), "dimension at " + at);
  }
  return o;
}

Outcome kw() {
  Outcome o;
  const int n = 4;
  const int bound = 2 * ceil_log2(n) + 1;
  std::mt19937_64 rng(4);
  std::set<std::vector<std::uint8_t>> seen;
  int max_edge = 0, max_rounds = 0;
  while (seen.size() < kKwSamples) {
    auto f = random_nonconstant(n, rng);
    if (!seen.insert(f.f).second) continue;
    auto k = kw_via_equality(f);
    auto rep = verify_gamma2(k.protocol, kw_relation(f));
    o.require(rep.accepted, "verify_gamma2 rejected f=" + f.hex());
    max_edge = std::max(max_edge, k.edge_depth);
    max_rounds = std::max(max_rounds, k.speaker_rounds);
    o.require(k.edge_depth <= bound, "edge depth " + std::to_string(k.edge_depth) + " > " + std::to_string(bound) +
                                         " for f=" + f.hex());
  }
  if (o.pass) {
    o.detail = std::to_string(seen.size()) + " tables, max edge depth " + std::to_string(max_edge) +
               ", max speaker rounds " + std::to_string(max_rounds) + ", bound " + std::to_string(bound);
  }
  return o;
}

Outcome discrepancy_values() {
  Outcome o;
  auto ip1 = hex_matrix("8", 2, 2);
  auto eq2 = hex_matrix("8421", 4, 4);
  Rational a = disc_uniform(ip1), b = disc_uniform(eq2);
  o.require(a == kDiscIP1, "IP1 gave " + str(a));
  o.require(b == kDiscEQ2, "EQ2 gave " + str(b));
  o.require(disc_brute(ip1) == kDiscIP1 && disc_brute(eq2) == kDiscEQ2, "brute force disagrees with pinned values");
  return o;
}

Rational determinant(std::vector<std::vector<Rational>> a) {
  const std::size_t n = a.size();
  Rational det(1);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    while (piv < n && a[piv][c].is_zero()) ++piv;
    if (piv == n) return Rational(0);
    if (piv != c) {
      std::swap(a[piv], a[c]);
      det = -det;
    }
    det *= a[c][c];
    for (std::size_t r = c + 1; r < n; ++r) {
      Rational f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
    }
  }
  return det;
}

// PSD iff every principal minor is nonnegative.
bool psd_by_minors(const SymMatrixQ& m) {
  const std::size_t n = m.size();
  for (std::uint32_t s = 1; s < (1U << n); ++s) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i)
      if (s >> i & 1U) idx.push_back(i);
    std::vector<std::vector<Rational>> sub(idx.size(), std::vector<Rational>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < idx.size(); ++j) sub[i][j] = m(idx[i], idx[j]);
    if (determinant(sub).sign() < 0) return false;
  }
  return true;
}

// A PSD verdict must survive every sampled v; a refusal must carry a verified
// witness. Both verdicts are also compared with the principal-minor oracle.
Outcome psd_oracle() {
  Outcome o;
  std::mt19937 rng(200);
  std::uniform_int_distribution<int> size(2, 6), entry(-5, 5), den(1, 4), kind(0, 2);
  std::size_t psd = 0, refuted = 0, sampled_refutations = 0;
  for (std::size_t m = 0; m < kPsdMatrices; ++m) {
    const std::size_t n = static_cast<std::size_t>(size(rng));
    SymMatrixQ M(n);
    if (kind(rng) == 0) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) M.set(i, j, Rational(entry(rng), den(rng)));
    } else {
      // Sum of r rational rank-one squares, possibly rank deficient, sometimes nudged off the cone.
      std::uniform_int_distribution<std::size_t> rank(1, n);
      std::size_t r = rank(rng);
      for (std::size_t k = 0; k < r; ++k) {
        std::vector<Rational> u(n);
        for (auto& x : u) x = Rational(entry(rng), den(rng));
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = i; j < n; ++j) M.add(i, j, u[i] * u[j]);
      }
      if (kind(rng) == 0) M.add(0, 0, Rational(-1, 10));
    }
    const std::string at = "matrix " + std::to_string(m);
    auto cert = psd_certificate(M);
    o.require(verify_certificate(M, cert), "certificate does not verify for " + at);
    bool verdict = certifies_psd(cert);
    o.require(verdict == psd_by_minors(M), "LDL verdict disagrees with principal minors on " + at);
    if (!verdict) o.require(M.quad_form(std::get<NegWitness>(cert).v).sign() < 0, "witness not negative on " + at);
    bool negative_seen = false;
    std::vector<Rational> v(n);
    for (std::size_t s = 0; s < kPsdVectors; ++s) {
      for (auto& x : v) x = Rational(entry(rng), den(rng));
      if (M.quad_form(v).sign() < 0) negative_seen = true;
    }
    o.require(!(verdict && negative_seen), "PSD verdict contradicted by a sampled v on " + at);
    psd += verdict ? 1 : 0;
    refuted += verdict ? 0 : 1;
    sampled_refutations += !verdict && negative_seen ? 1 : 0;
  }
  if (o.pass) {
    o.detail = std::to_string(psd) + " PSD, " + std::to_string(refuted) + " refuted (" +
               std::to_string(sampled_refutations) + " also by sampling)";
  }
  return o;
}

// Each mutation doubles or negates one nonzero vector of a verified construction.
Outcome mutation_rejection() {
  Outcome o;
  std::mt19937 rng(7);
  std::size_t mutants = 0;

  auto gamma2_mutants = [&](const Gamma2Protocol& base, const RelationSpec& r, const std::string& name, int per) {
    o.require(verify_gamma2(base, r).accepted, name + " does not verify");
    std::uniform_int_distribution<int> node(0, static_cast<int>(base.structure.size()) - 1);
    for (int i = 0; i < per; ++i) {
      int t = node(rng);
      bool alice = i % 2 == 0;
      auto& side = alice ? base.alpha : base.beta;
      std::uniform_int_distribution<int> in(0, static_cast<int>(side[0].size()) - 1);
      int x = in(rng);
      if (is_zero_vector(side[t][x])) continue;
      for (const Scalar& c : {Scalar(2), Scalar(-1)}) {
        Gamma2Protocol m = base;
        auto& v = alice ? m.alpha[t][x] : m.beta[t][x];
        v = c * v;
        o.require(!verify_gamma2(m, r).accepted,
                  name + " mutant accepted at " + base.structure.address(t) + (alice ? " alpha" : " beta"));
        ++mutants;
      }
    }
  };
  for (int d : {2, 3, 5}) gamma2_mutants(equality_protocol(kEqualityL, d), equality_relation(d), "EQ", 40);
  for (const char* text : {"(x1 & x2) | !x3", "(x1 | x2) & (x3 | x4)", "x1 & x2 & x3"}) {
    auto f = parse_formula(text);
    int n = f.max_var() + 1;
    gamma2_mutants(protocol_from_formula(f, n), kw_relation(truth_table(f, n)), text, 40);
  }
  for (const char* hex : {"8000", "6996", "e8e8"}) {
    auto t = TruthTable::from_hex(4, hex);
    auto k = kw_via_equality(t);
    gamma2_mutants(k.protocol, k.relation, std::string("KW ") + hex, 40);
  }

  for (const char* hex : {"a1b2", "0001", "ffff"}) {
    auto f = function_table(4, 4, parse_hex_bits(hex, 16));
    auto base = universal_protocol(f);
    o.require(verify_qlab(base, f).accepted, std::string("universal ") + hex + " does not verify");
    std::uniform_int_distribution<int> node(0, static_cast<int>(base.structure.size()) - 1), in(0, 3);
    for (int i = 0; i < 30; ++i) {
      int t = node(rng), x = in(rng), y = in(rng);
      if (is_zero_vector(base.state(t, x, y))) continue;
      for (const Scalar& c : {Scalar(2), Scalar(-1)}) {
        QLabProtocol m = base;
        m.state(t, x, y) = c * m.state(t, x, y);
        o.require(!verify_qlab(m, f).accepted, std::string("universal ") + hex + " mutant accepted at " +
                                                   base.structure.address(t));
        ++mutants;
      }
    }
  }

  for (int p = 3; p <= 6; ++p) {
    for (int h = 2; h < p; ++h) {
      for (const Rational& beta : {Rational(0), Rational(1)}) {
        auto fam = tight_example(p, h, beta);
        for (int i = 0; i < p; ++i) {
          for (int j = 0; j < h; ++j) {
            if (is_zero_vector(fam.parts[i][j])) continue;
            PigeonFamily m = fam;
            m.parts[i][j] = Scalar(2) * m.parts[i][j];
            o.require(!verify_family(m).accepted, "pigeon mutant accepted");
            ++mutants;
          }
        }
      }
    }
  }

  for (auto [p, h] : {std::pair{3, 2}, std::pair{5, 3}}) {
    auto prob = relax(php_negation_hqfp(p, h));
    auto w = qphp_dual_witness(p, h);
    DualWitness neg = w, zero{std::vector<Rational>(w.w.size())};
    for (auto& x : neg.w) x = -x;
    o.require(!verify_dual(prob, neg).accepted && !verify_dual(prob, zero).accepted, "dual mutant accepted");
    mutants += 2;
    auto cert = sos_from_dual(prob, w);
    for (std::size_t i = 0; i < cert.multipliers.size(); ++i) {
      auto m = cert;
      m.multipliers[i] += Rational(1, 7);
      o.require(!verify_sos(m, prob).accepted, "SoS multiplier mutant accepted");
      ++mutants;
    }
    for (std::size_t k = 0; k < cert.squares.size(); ++k) {
      if (cert.squares[k].form.empty()) continue;
      auto m = cert;
      m.squares[k].weight += Rational(1, 3);
      o.require(!verify_sos(m, prob).accepted, "SoS square mutant accepted");
      ++mutants;
    }
    auto m = cert;
    m.constant += Rational(1, 5);
    o.require(!verify_sos(m, prob).accepted, "SoS constant mutant accepted");
    ++mutants;
  }
  if (o.pass) o.detail = std::to_string(mutants) + " mutants rejected";
  return o;
}

Outcome invariants() {
  Outcome o;
  std::mt19937 rng(3);
  std::size_t protocols = 0;
  for (int d = 2; d <= 12; ++d) {
    o.require(leaf_sums_hold(equality_protocol(kEqualityL, d), rng, 50), "EQ leaf sums, d=" + std::to_string(d));
    ++protocols;
  }
  std::mt19937_64 rng64(9);
  for (int i = 0; i < 10; ++i) {
    auto t = random_nonconstant(3 + i % 2, rng64);
    auto k = kw_via_equality(t);
    o.require(leaf_sums_hold(k.protocol, rng, 30), "KW leaf sums, f=" + t.hex());
    ++protocols;
  }
  for (const char* text : {"(x1 & x2) | (x3 & !x4) | (x2 & x4)", "!(x1 | x2)", "x1"}) {
    auto f = parse_formula(text);
    int n = f.max_var() + 1;
    auto g = protocol_from_formula(f, n);
    o.require(leaf_sums_hold(g, rng, 30), std::string("formula leaf sums, ") + text);
    o.require(level_normalized(qlab_from_gamma2(g)), std::string("embedded formula level norms, ") + text);
    protocols += 2;
  }
  for (auto [nx, ny] : {std::pair{1, 1}, std::pair{2, 3}, std::pair{4, 4}, std::pair{3, 5}}) {
    for (int i = 0; i < 5; ++i) {
      std::vector<std::uint8_t> bits(static_cast<std::size_t>(nx * ny));
      for (auto& b : bits) b = static_cast<std::uint8_t>(rng64() & 1U);
      o.require(level_normalized(universal_protocol(function_table(nx, ny, bits))), "universal level norms");
      ++protocols;
    }
  }
  if (o.pass) o.detail = std::to_string(protocols) + " protocols";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<Criterion> all{
      {"qphp-dual-sweep", kDualSweepMs, dual_sweep},
      {"quantitative-tightness", kTightnessMs, tightness},
      {"equality-protocol", 0, equality},
      {"universal-qlab-exhaustive", kUniversalExhaustiveMs, [] { return universal(true); }},
      {"universal-qlab-sampled", kUniversalSampledMs, [] { return universal(false); }},
      {"sos-round-trip", kSosMs, sos_round_trip},
      {"kw-via-equality", kKwMs, kw},
      {"discrepancy", kDiscMs, discrepancy_values},
      {"property-psd-oracle", 0, psd_oracle},
      {"property-mutation-rejection", 0, mutation_rejection},
      {"property-invariants", 0, invariants},
  };
  std::set<std::string> wanted(argv + 1, argv + argc);
  for (const auto& w : wanted) {
    bool known = false;
    for (const auto& c : all) known = known || c.name == w;
    if (!known) {
      std::cerr << "unknown criterion " << w << "\n";
      return 2;
    }
  }
  bool ok = true;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.name)) continue;
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    double ms = ms_since(t0);
    if (c.budget_ms > 0 && ms > c.budget_ms) {
      o.pass = false;
      o.detail += " (over budget)";
    }
    char timing[96];
    if (c.budget_ms > 0) {
      std::snprintf(timing, sizeof timing, "%.1f ms / %.0f ms", ms, c.budget_ms);
    } else {
      std::snprintf(timing, sizeof timing, "%.1f ms", ms);
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << c.name << " [" << timing << "] " << o.detail << std::endl;
    ok = ok && o.pass;
  }
  return ok ? 0 : 1;
}
