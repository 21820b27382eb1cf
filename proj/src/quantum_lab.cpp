#include "relaxforge/quantum_lab.hpp"

#include <algorithm>
#include <random>

#include "relaxforge/error.hpp"

namespace relaxforge {

namespace {

std::string pair_str(int x, int y) { return "x=" + std::to_string(x) + " y=" + std::to_string(y); }

void check_shape(const QLabProtocol& pi) {
  if (pi.nx < 1 || pi.ny < 1) fail(ErrorKind::DomainMismatch, "protocol has an empty input set");
  if (pi.psi.size() != pi.structure.size()) {
    fail(ErrorKind::DomainMismatch, "state table does not cover every node of the structure");
  }
  const std::size_t pairs = static_cast<std::size_t>(pi.nx) * static_cast<std::size_t>(pi.ny);
  for (std::size_t t = 0; t < pi.psi.size(); ++t) {
    if (pi.psi[t].size() != pairs) {
      fail(ErrorKind::DomainMismatch, "node " + pi.structure.address(static_cast<int>(t)) +
                                          " has a state table of the wrong size");
    }
  }
}

// Node constraints with the speaker's input held fixed: `at(i, j)` is the state on
// speaker input i and listener input j.
template <class At>
void check_node(VerificationReport& rep, const QLabProtocol& pi, int t, int own_n, int other_n, const std::string& who,
                const char* own_var, const char* other_var, At at) {
  const auto& s = pi.structure;
  const auto& kids = s.node(t).children;
  const std::string where = s.address(t);
  for (int i = 0; i < own_n; ++i) {
    for (int j = 0; j < other_n; ++j) {
      const std::string in = std::string(own_var) + "=" + std::to_string(i) + " " + other_var + "=" + std::to_string(j);
      const Vec& v = at(t, i, j);
      Scalar n2 = norm2(v);
      Scalar sn, si;
      for (int c : kids) {
        const Vec& w = at(c, i, j);
        sn += norm2(w);
        si += inner(w, v);
      }
      rep.check(sn == n2, {who + "-norm", where, in, n2.str(), sn.str()});
      rep.check(si == n2, {who + "-sum", where, in, n2.str(), si.str()});
    }
    // every outcome-a state is orthogonal to every outcome-b state, for all listener inputs
    for (std::size_t a = 0; a < kids.size(); ++a) {
      for (std::size_t b = a + 1; b < kids.size(); ++b) {
        for (int j = 0; j < other_n; ++j) {
          for (int j2 = 0; j2 < other_n; ++j2) {
            Scalar v = inner(at(kids[a], i, j), at(kids[b], i, j2));
            rep.check(v.is_zero(), {who + "-orthogonal", where,
                                    std::string(own_var) + "=" + std::to_string(i) + " " + other_var + "=" +
                                        std::to_string(j) + " " + other_var + "'=" + std::to_string(j2),
                                    "0", v.str()});
          }
        }
      }
    }
  }
}

Vec make_vec(const SpacePtr& space, std::vector<std::pair<AtomId, Scalar>> terms) {
  Vec v(space);
  for (auto& [a, c] : terms) v.add_term(a, c);
  return v;
}

// Keeps nonzero vectors that enlarge the span; falls back to deduplication when Gram entries are irrational.
std::vector<Vec> span_basis(const std::vector<Vec>& vs, bool& independent) {
  std::vector<Vec> out;
  std::vector<Vec> nonzero;
  for (const auto& v : vs) {
    if (!is_zero_vector(v)) nonzero.push_back(v);
  }
  bool rational = true;
  for (std::size_t i = 0; i < nonzero.size() && rational; ++i) {
    for (std::size_t j = i; j < nonzero.size() && rational; ++j) rational = inner(nonzero[i], nonzero[j]).is_rational();
  }
  if (!rational) {
    independent = false;
    for (const auto& v : nonzero) {
      bool dup = std::any_of(out.begin(), out.end(), [&](const Vec& u) { return same_vector(u, v); });
      if (!dup) out.push_back(v);
    }
    return out;
  }
  for (const auto& v : nonzero) {
    out.push_back(v);
    if (matrix_rank(gram_of(out)) < out.size()) out.pop_back();
  }
  return out;
}

}  // namespace

VerificationReport verify_qlab_constraints(const QLabProtocol& pi) {
  check_shape(pi);
  VerificationReport rep;
  const auto& s = pi.structure;
  const int nx = pi.nx, ny = pi.ny;
  const int pairs = nx * ny;
  const Scalar one(1);
  for (int p = 0; p < pairs; ++p) {
    for (int p2 = p; p2 < pairs; ++p2) {
      Scalar v = inner(pi.psi[0][static_cast<std::size_t>(p)], pi.psi[0][static_cast<std::size_t>(p2)]);
      rep.check(v == one, {"root", "λ", pair_str(p / ny, p % ny) + " " + "x'=" + std::to_string(p2 / ny) +
                                            " y'=" + std::to_string(p2 % ny),
                           "1", v.str()});
    }
  }
  for (int t : s.internal_nodes()) {
    if (s.node(t).owner == Owner::Alice) {
      check_node(rep, pi, t, nx, ny, "alice", "x", "y",
                 [&](int u, int x, int y) -> const Vec& { return pi.state(u, x, y); });
    } else {
      check_node(rep, pi, t, ny, nx, "bob", "y", "x",
                 [&](int u, int y, int x) -> const Vec& { return pi.state(u, x, y); });
    }
  }
  return rep;
}

VerificationReport verify_qlab_computation(const QLabProtocol& pi, const RelationSpec& r) {
  check_shape(pi);
  if (r.nx != pi.nx || r.ny != pi.ny) {
    fail(ErrorKind::DomainMismatch, "protocol inputs " + std::to_string(pi.nx) + "x" + std::to_string(pi.ny) +
                                        " do not match the relation's " + std::to_string(r.nx) + "x" +
                                        std::to_string(r.ny));
  }
  VerificationReport rep;
  const auto& s = pi.structure;
  for (int leaf : s.leaves()) {
    auto bits = s.output(leaf, r.k);
    if (bits && static_cast<int>(bits->size()) != r.k) {
      fail(ErrorKind::DomainMismatch, "leaf " + s.address(leaf) + " is labelled with " + std::to_string(bits->size()) +
                                          " bits, the relation has " + std::to_string(r.k));
    }
    for (int x = 0; x < r.nx; ++x) {
      for (int y = 0; y < r.ny; ++y) {
        if (bits && r.allows(x, y, bits_value(*bits))) continue;
        Scalar v = norm2(pi.state(leaf, x, y));
        rep.check(v.is_zero(), {bits ? "computational" : "unreadable-leaf", s.address(leaf),
                                "x=" + r.x_name(x) + " y=" + r.y_name(y) + (bits ? " z=" + bits_str(*bits) : ""), "0",
                                v.str()});
      }
    }
  }
  return rep;
}

VerificationReport verify_qlab(const QLabProtocol& pi, const RelationSpec& r) {
  VerificationReport rep = verify_qlab_constraints(pi);
  rep.merge(verify_qlab_computation(pi, r));
  return rep;
}

std::vector<std::vector<Scalar>> level_norms(const QLabProtocol& pi) {
  check_shape(pi);
  const auto& s = pi.structure;
  const int depth = s.max_edge_depth();
  const std::size_t pairs = static_cast<std::size_t>(pi.nx * pi.ny);
  std::vector<std::vector<Scalar>> out(static_cast<std::size_t>(depth + 1), std::vector<Scalar>(pairs));
  for (std::size_t t = 0; t < s.size(); ++t) {
    const int d = s.edge_depth(static_cast<int>(t));
    const int last = s.is_leaf(static_cast<int>(t)) ? depth : d;
    for (std::size_t p = 0; p < pairs; ++p) {
      Scalar n2 = norm2(pi.psi[t][p]);
      for (int l = d; l <= last; ++l) out[static_cast<std::size_t>(l)][p] += n2;
    }
  }
  return out;
}

bool level_normalized(const QLabProtocol& pi) {
  for (const auto& level : level_norms(pi)) {
    for (const auto& v : level) {
      if (v != Scalar(1)) return false;
    }
  }
  return true;
}

QLabBasis::QLabBasis(int nx, int ny) : nx_(nx), ny_(ny), dim_(nx + ny + 1), space_(InnerProductSpace::create()) {
  if (nx < 1 || ny < 1) fail(ErrorKind::EmptySide, "both input sets must be nonempty");
  auto reg = [&](int i) {
    if (i == 0) return std::string("⊥");
    if (i <= nx) return "x" + std::to_string(i - 1);
    return "y" + std::to_string(i - 1 - nx);
  };
  atoms_.reserve(static_cast<std::size_t>(2 * dim_ * dim_));
  for (int r3 = 0; r3 < 2; ++r3) {
    for (int r1 = 0; r1 < dim_; ++r1) {
      for (int r2 = 0; r2 < dim_; ++r2) {
        atoms_.push_back(space_->add_unit("|" + std::to_string(r3) + "," + reg(r1) + "," + reg(r2) + ">"));
      }
    }
  }
}

AtomId QLabBasis::atom(int r3, int r1, int r2) const {
  return atoms_.at(static_cast<std::size_t>((r3 * dim_ + r1) * dim_ + r2));
}

RelationSpec function_table(int nx, int ny, const std::vector<std::uint8_t>& bits) {
  if (bits.size() != static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny)) {
    fail(ErrorKind::DimensionMismatch, "truth table has " + std::to_string(bits.size()) + " entries, expected " +
                                           std::to_string(nx * ny));
  }
  return RelationSpec::function(nx, ny, [&](int x, int y) { return bits[static_cast<std::size_t>(x * ny + y)] != 0; });
}

QLabProtocol universal_protocol(const RelationSpec& f) { return universal_protocol(f, QLabBasis(f.nx, f.ny)); }

QLabProtocol universal_protocol(const RelationSpec& f, const QLabBasis& basis) {
  if (!f.function_mode) fail(ErrorKind::Unsupported, "the universal protocol computes Boolean functions");
  if (basis.nx() != f.nx || basis.ny() != f.ny) fail(ErrorKind::DomainMismatch, "basis built for other input sets");
  QLabProtocol pi;
  pi.space = basis.space();
  pi.nx = f.nx;
  pi.ny = f.ny;
  auto& s = pi.structure;
  // nodes by transcript; structure nodes are appended level by level
  std::vector<int> d1 = s.expand(0, Owner::Bob, 2);
  std::vector<int> d2, d3, d4;
  for (int t : d1)
    for (int c : s.expand(t, Owner::Alice, 2)) d2.push_back(c);
  for (int t : d2)
    for (int c : s.expand(t, Owner::Alice, 2)) d3.push_back(c);
  for (int t : d3)
    for (int c : s.expand(t, Owner::Bob, 2)) d4.push_back(c);
  const std::size_t pairs = static_cast<std::size_t>(f.nx * f.ny);
  pi.psi.assign(s.size(), std::vector<Vec>(pairs, Vec(pi.space)));

  const int bot = basis.bot();
  const Rational h(1, 2), qr(1, 4);
  const Scalar amp = Scalar::surd(Rational(1, 8), 2);  // (1/2) * 1/(2 sqrt 2)
  auto sg = [](int b) { return b ? -1 : 1; };
  for (int x = 0; x < f.nx; ++x) {
    for (int y = 0; y < f.ny; ++y) {
      const std::size_t p = static_cast<std::size_t>(x * f.ny + y);
      const int X = basis.xs(x), Y = basis.ys(y);
      const int fv = f.value(x, y) ? 1 : 0;
      pi.psi[0][p] = Vec::atom(pi.space, basis.atom(0, bot, bot));
      for (int b1 = 0; b1 < 2; ++b1) {
        const int s1 = sg(b1);
        pi.psi[static_cast<std::size_t>(d1[static_cast<std::size_t>(b1)])][p] =
            make_vec(pi.space, {{basis.atom(0, bot, bot), h}, {basis.atom(0, Y, bot), Rational(s1, 2)}});
        for (int b2 = 0; b2 < 2; ++b2) {
          const int s2 = sg(b2);
          const int t2 = d2[static_cast<std::size_t>(2 * b1 + b2)];
          pi.psi[static_cast<std::size_t>(t2)][p] = make_vec(pi.space, {{basis.atom(0, bot, bot), qr},
                                                                           {basis.atom(0, bot, X), Rational(s2, 4)},
                                                                           {basis.atom(0, Y, bot), Rational(s1, 4)},
                                                                           {basis.atom(0, Y, X), Rational(s1 * s2, 4)}});
          for (int b3 = 0; b3 < 2; ++b3) {
            const int s3 = sg(b3);
            const int t3 = d3[static_cast<std::size_t>(4 * b1 + 2 * b2 + b3)];
            Vec tail = make_vec(pi.space, {{basis.atom(1, X, bot), Scalar(s3) * amp},
                                           {basis.atom(1, Y, bot), Scalar(s3 * s1 * sg(fv)) * amp}});
            Vec st = Scalar(h) * pi.psi[static_cast<std::size_t>(t2)][p] + tail;
            // Bob's last measurement projects onto V^y_0 or its complement
            const auto& kids = s.node(t3).children;
            pi.psi[static_cast<std::size_t>(kids[static_cast<std::size_t>(fv)])][p] = st;
            pi.psi[static_cast<std::size_t>(t3)][p] = std::move(st);
          }
        }
      }
    }
  }
  return pi;
}

std::optional<std::vector<std::uint8_t>> output_column(const QLabProtocol& pi) {
  check_shape(pi);
  const auto& s = pi.structure;
  std::vector<std::uint8_t> out;
  for (int x = 0; x < pi.nx; ++x) {
    for (int y = 0; y < pi.ny; ++y) {
      std::optional<int> bit;
      for (int leaf : s.leaves()) {
        if (is_zero_vector(pi.state(leaf, x, y))) continue;
        auto z = s.output(leaf, 1);
        if (!z) return std::nullopt;
        if (bit && *bit != z->back()) return std::nullopt;
        bit = z->back();
      }
      if (!bit) return std::nullopt;
      out.push_back(static_cast<std::uint8_t>(*bit));
    }
  }
  return out;
}

SweepResult universal_sweep(int nx, int ny, bool exhaustive, std::size_t samples, std::uint64_t seed) {
  const std::size_t entries = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  if (exhaustive && entries > 20) {
    fail(ErrorKind::TooLarge, "exhaustive sweep over 2^" + std::to_string(entries) + " tables refused");
  }
  QLabBasis basis(nx, ny);
  SweepResult res;
  std::mt19937_64 rng(seed);
  const std::size_t count = exhaustive ? (std::size_t{1} << entries) : samples;
  std::vector<std::uint8_t> bits(entries);
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t e = 0; e < entries; ++e) {
      bits[e] = static_cast<std::uint8_t>(exhaustive ? (i >> e) & 1U : rng() & 1U);
    }
    auto f = function_table(nx, ny, bits);
    auto pi = universal_protocol(f, basis);
    ++res.tables;
    bool ok = verify_qlab(pi, f).accepted;
    auto col = output_column(pi);
    bool match = col && *col == bits;
    res.accepted += ok ? 1 : 0;
    res.outputs_match += match ? 1 : 0;
    if ((!ok || !match) && !res.first_failure) res.first_failure = bits;
  }
  return res;
}

QLabProtocol qlab_from_gamma2(const Gamma2Protocol& g) {
  QLabProtocol pi;
  pi.structure = g.structure;
  pi.space = g.space;
  pi.nx = g.nx();
  pi.ny = g.ny();
  pi.psi.resize(g.structure.size());
  for (std::size_t t = 0; t < g.structure.size(); ++t) {
    pi.psi[t].reserve(static_cast<std::size_t>(pi.nx * pi.ny));
    for (int x = 0; x < pi.nx; ++x) {
      for (int y = 0; y < pi.ny; ++y) {
        Vec v = tensor(g.alpha[t][static_cast<std::size_t>(x)], g.beta[t][static_cast<std::size_t>(y)]);
        pi.psi[t].push_back(v.empty() ? Vec(g.space) : std::move(v));
      }
    }
  }
  return pi;
}

MeasurementPair extract_measurement(const QLabProtocol& pi, int t, int input) {
  const auto& s = pi.structure;
  if (t < 0 || static_cast<std::size_t>(t) >= s.size() || s.is_leaf(t)) {
    fail(ErrorKind::InvalidStructure, "measurements live at internal nodes");
  }
  const auto& node = s.node(t);
  if (node.children.size() != 2) fail(ErrorKind::Unsupported, "two-outcome measurements need binary nodes");
  const bool alice = node.owner == Owner::Alice;
  const int own_n = alice ? pi.nx : pi.ny, other_n = alice ? pi.ny : pi.nx;
  if (input < 0 || input >= own_n) fail(ErrorKind::DomainMismatch, "input out of range for the speaker");
  auto rep = verify_qlab_constraints(pi);
  if (!rep.accepted) fail(ErrorKind::UnverifiedProtocol, "protocol constraints fail:\n" + rep.summary());

  MeasurementPair m;
  m.node = t;
  m.owner = node.owner;
  m.input = input;
  std::vector<Vec> branch[2];
  for (int b = 0; b < 2; ++b) {
    for (int j = 0; j < other_n; ++j) {
      branch[b].push_back(alice ? pi.state(node.children[static_cast<std::size_t>(b)], input, j)
                                : pi.state(node.children[static_cast<std::size_t>(b)], j, input));
    }
  }
  m.zero = span_basis(branch[0], m.independent);
  m.one = span_basis(branch[1], m.independent);
  for (const auto& u : m.zero) {
    for (const auto& v : m.one) {
      if (!inner(u, v).is_zero()) fail(ErrorKind::UnverifiedProtocol, "outcome spans are not orthogonal");
    }
  }
  return m;
}

TwoRoundWitness two_round_violation(const std::vector<std::vector<Vec>>& parts) {
  return two_round_violation(parts, equality_relation(static_cast<int>(parts.size())));
}

TwoRoundWitness two_round_violation(const std::vector<std::vector<Vec>>& parts, const RelationSpec& r) {
  const int nx = static_cast<int>(parts.size());
  if (nx < 1) fail(ErrorKind::EmptySide, "no Alice inputs");
  if (r.nx != nx) fail(ErrorKind::DomainMismatch, "decomposition and relation disagree on Alice's inputs");
  const std::size_t m = parts[0].size();
  for (const auto& p : parts) {
    if (p.size() != m) fail(ErrorKind::DimensionMismatch, "every input needs the same number of messages");
  }
  if (m >= static_cast<std::size_t>(nx)) {
    fail(ErrorKind::NoGuarantee, std::to_string(m) + " messages for " + std::to_string(nx) +
                                     " inputs: a violation is only guaranteed with fewer messages than inputs");
  }
  Vec root;
  for (int x = 0; x < nx; ++x) {
    Vec sum;
    for (std::size_t t = 0; t < m; ++t) {
      sum = sum.empty() ? parts[static_cast<std::size_t>(x)][t] : sum + parts[static_cast<std::size_t>(x)][t];
      for (std::size_t t2 = t + 1; t2 < m; ++t2) {
        if (!inner(parts[static_cast<std::size_t>(x)][t], parts[static_cast<std::size_t>(x)][t2]).is_zero()) {
          fail(ErrorKind::InvalidFamily, "messages " + std::to_string(t) + " and " + std::to_string(t2) +
                                             " are not orthogonal on input " + std::to_string(x));
        }
      }
    }
    if (x == 0) {
      if (norm2(sum) != Scalar(1)) fail(ErrorKind::InvalidFamily, "initial state is not a unit vector");
      root = sum;
    } else if (!same_vector(sum, root)) {
      fail(ErrorKind::InvalidFamily, "input " + std::to_string(x) + " decomposes a different initial state");
    }
  }

  std::optional<TwoRoundWitness> best;
  bool overlapping = false;
  for (std::size_t t = 0; t < m; ++t) {
    for (int x = 0; x < nx; ++x) {
      for (int x2 = x + 1; x2 < nx; ++x2) {
        Scalar ov = inner(parts[static_cast<std::size_t>(x)][t], parts[static_cast<std::size_t>(x2)][t]);
        if (ov.is_zero()) continue;
        overlapping = true;
        // a Bob input where no single answer suits both x and x2
        int sep = -1;
        for (int y = 0; y < r.ny && sep < 0; ++y) {
          bool common = false;
          for (std::uint64_t z = 0; z < (std::uint64_t{1} << r.k) && !common; ++z) {
            common = r.allows(x, y, z) && r.allows(x2, y, z);
          }
          if (!common) sep = y;
        }
        if (sep < 0) continue;
        if (!best || (ov - best->overlap).sign() > 0) {
          best = TwoRoundWitness{static_cast<int>(t), x, x2, ov, sep, ""};
        }
      }
    }
  }
  if (!best) {
    fail(ErrorKind::NoGuarantee, overlapping ? "every overlapping pair of inputs agrees on some answer for all y"
                                             : "all messages are orthogonal across inputs");
  }
  best->conclusion = "message " + std::to_string(best->message) + ": <psi(x=" + std::to_string(best->x) +
                     "), psi(x=" + std::to_string(best->x2) + ")> = " + best->overlap.str() + "; on y=" +
                     std::to_string(best->y) +
                     " any two-outcome measurement by Bob splits this overlap between its outcomes, so some "
                     "outcome keeps both states nonzero and that leaf is not monochromatic";
  return *best;
}

std::vector<std::vector<Vec>> alice_decomposition(const PigeonFamily& f) { return f.parts; }

}  // namespace relaxforge
