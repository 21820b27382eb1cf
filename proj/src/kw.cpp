#include "relaxforge/kw.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

#include "relaxforge/error.hpp"

namespace relaxforge {

TruthTable TruthTable::from_hex(int n, const std::string& hex) {
  if (n < 1 || n > 20) fail(ErrorKind::Usage, "truth tables need 1 <= n <= 20");
  TruthTable t;
  t.n = n;
  t.f = parse_hex_bits(hex, std::size_t{1} << n);
  return t;
}

std::string TruthTable::hex() const { return hex_bits(f); }

bool TruthTable::is_constant() const {
  return std::all_of(f.begin(), f.end(), [&](std::uint8_t v) { return v == f.front(); });
}

std::string input_name(std::uint64_t x, int n) {
  std::string s;
  for (int i = 0; i < n; ++i) s += ((x >> i) & 1U) ? '1' : '0';
  return s;
}

std::vector<std::uint64_t> kw_side(const TruthTable& f, bool value) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t x = 0; x < f.f.size(); ++x) {
    if ((f.f[x] != 0) == value) out.push_back(x);
  }
  return out;
}

RelationSpec kw_relation(const TruthTable& f) {
  if (f.f.size() != (std::size_t{1} << f.n)) fail(ErrorKind::DomainMismatch, "truth table size is not 2^n");
  auto X = kw_side(f, true);
  auto Y = kw_side(f, false);
  if (X.empty() || Y.empty()) fail(ErrorKind::EmptySide, "f is constant, so one side of the game is empty");
  const int k = std::max(1, ceil_log2(static_cast<std::uint64_t>(f.n)));
  const int n = f.n;
  RelationSpec r = RelationSpec::relation(static_cast<int>(X.size()), static_cast<int>(Y.size()), k,
                                          [&](int x, int y, std::uint64_t z) {
                                            if (z >= static_cast<std::uint64_t>(n)) return false;
                                            return ((X[static_cast<std::size_t>(x)] >> z) & 1U) !=
                                                   ((Y[static_cast<std::size_t>(y)] >> z) & 1U);
                                          });
  for (auto x : X) r.x_names.push_back(input_name(x, n));
  for (auto y : Y) r.y_names.push_back(input_name(y, n));
  return r;
}

Formula Formula::constant(bool v) {
  Formula f;
  f.kind = Kind::Const;
  f.value = v;
  return f;
}

Formula Formula::lit(int var, bool negated) {
  if (var < 0) fail(ErrorKind::InvalidFormula, "variable index must be nonnegative");
  Formula f;
  f.kind = Kind::Lit;
  f.var = var;
  f.value = negated;
  return f;
}

Formula Formula::negate(Formula g) {
  Formula f;
  f.kind = Kind::Not;
  f.kids.push_back(std::move(g));
  return f;
}

Formula Formula::conj(std::vector<Formula> k) {
  if (k.empty()) fail(ErrorKind::InvalidFormula, "empty conjunction");
  Formula f;
  f.kind = Kind::And;
  f.kids = std::move(k);
  return f;
}

Formula Formula::disj(std::vector<Formula> k) {
  if (k.empty()) fail(ErrorKind::InvalidFormula, "empty disjunction");
  Formula f;
  f.kind = Kind::Or;
  f.kids = std::move(k);
  return f;
}

bool Formula::eval(std::uint64_t x) const {
  switch (kind) {
    case Kind::Const:
      return value;
    case Kind::Lit:
      return (((x >> var) & 1U) != 0) != value;
    case Kind::Not:
      return !kids[0].eval(x);
    case Kind::And:
      return std::all_of(kids.begin(), kids.end(), [&](const Formula& k) { return k.eval(x); });
    case Kind::Or:
      return std::any_of(kids.begin(), kids.end(), [&](const Formula& k) { return k.eval(x); });
  }
  return false;
}

int Formula::max_var() const {
  int m = kind == Kind::Lit ? var : -1;
  for (const auto& k : kids) m = std::max(m, k.max_var());
  return m;
}

int Formula::depth() const {
  int d = 0;
  for (const auto& k : kids) d = std::max(d, k.depth() + 1);
  return d;
}

std::string Formula::str() const {
  switch (kind) {
    case Kind::Const:
      return value ? "1" : "0";
    case Kind::Lit:
      return (value ? "!x" : "x") + std::to_string(var + 1);
    case Kind::Not:
      return "!(" + kids[0].str() + ")";
    case Kind::And:
    case Kind::Or: {
      std::string s = "(";
      for (std::size_t i = 0; i < kids.size(); ++i) {
        if (i) s += kind == Kind::And ? " & " : " | ";
        s += kids[i].str();
      }
      return s + ")";
    }
  }
  return "";
}

namespace {

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  Formula run() {
    Formula f = disj();
    skip();
    if (i_ != s_.size()) error("unexpected '" + std::string(1, s_[i_]) + "'");
    return f;
  }

 private:
  [[noreturn]] void error(const std::string& what) {
    fail(ErrorKind::Parse, "formula: " + what + " at position " + std::to_string(i_));
  }
  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  bool eat(char c) {
    skip();
    if (i_ < s_.size() && s_[i_] == c) {
      ++i_;
      return true;
    }
    return false;
  }
  Formula disj() {
    std::vector<Formula> k{conj()};
    while (eat('|')) k.push_back(conj());
    return k.size() == 1 ? k[0] : Formula::disj(std::move(k));
  }
  Formula conj() {
    std::vector<Formula> k{unary()};
    while (eat('&')) k.push_back(unary());
    return k.size() == 1 ? k[0] : Formula::conj(std::move(k));
  }
  Formula unary() {
    skip();
    if (eat('!') || eat('~')) return Formula::negate(unary());
    if (eat('(')) {
      Formula f = disj();
      if (!eat(')')) error("expected ')'");
      return f;
    }
    if (i_ < s_.size() && (s_[i_] == '0' || s_[i_] == '1')) return Formula::constant(s_[i_++] == '1');
    if (i_ < s_.size() && s_[i_] == 'x') {
      ++i_;
      std::size_t start = i_;
      while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
      if (start == i_) error("expected a variable number");
      int v = std::stoi(s_.substr(start, i_ - start));
      if (v < 1) error("variables are numbered from 1");
      return Formula::lit(v - 1);
    }
    error(i_ < s_.size() ? "unexpected '" + std::string(1, s_[i_]) + "'" : "unexpected end of input");
  }

  const std::string& s_;
  std::size_t i_ = 0;
};

Formula nnf_rec(const Formula& f, bool neg) {
  using K = Formula::Kind;
  switch (f.kind) {
    case K::Const:
      return Formula::constant(f.value != neg);
    case K::Lit:
      return Formula::lit(f.var, f.value != neg);
    case K::Not:
      return nnf_rec(f.kids[0], !neg);
    case K::And:
    case K::Or:
      break;
  }
  const K kind = (f.kind == K::And) != neg ? K::And : K::Or;
  const bool absorbing = kind == K::Or;  // the constant that decides the gate
  std::vector<Formula> kids;
  for (const auto& k : f.kids) {
    Formula g = nnf_rec(k, neg);
    if (g.kind == K::Const) {
      if (g.value == absorbing) return Formula::constant(absorbing);
      continue;
    }
    if (g.kind == kind) {
      for (auto& gg : g.kids) kids.push_back(std::move(gg));
    } else {
      kids.push_back(std::move(g));
    }
  }
  if (kids.empty()) return Formula::constant(!absorbing);
  if (kids.size() == 1) return kids[0];
  Formula out;
  out.kind = kind;
  out.kids = std::move(kids);
  return out;
}

Formula binarize(const Formula& f) {
  if (f.kids.empty()) return f;
  std::vector<Formula> kids;
  for (const auto& k : f.kids) kids.push_back(binarize(k));
  // Balanced split keeps the duplication depth low.
  std::function<Formula(std::size_t, std::size_t)> build = [&](std::size_t lo, std::size_t hi) -> Formula {
    if (hi - lo == 1) return kids[lo];
    std::size_t mid = lo + (hi - lo) / 2;
    Formula g;
    g.kind = f.kind;
    g.kids = {build(lo, mid), build(mid, hi)};
    return g;
  };
  return build(0, kids.size());
}

Formula alternate(const Formula& f) {
  if (f.kids.empty()) return f;
  Formula out;
  out.kind = f.kind;
  for (const auto& k : f.kids) {
    Formula g = alternate(k);
    if (g.kind == f.kind) {
      Formula wrap;
      wrap.kind = f.kind == Formula::Kind::And ? Formula::Kind::Or : Formula::Kind::And;
      wrap.kids = {g, g};
      out.kids.push_back(std::move(wrap));
    } else {
      out.kids.push_back(std::move(g));
    }
  }
  return out;
}

void layout(CircuitAssignment& ca, int t, const Formula& g) {
  if (ca.gates.size() <= static_cast<std::size_t>(t)) ca.gates.resize(static_cast<std::size_t>(t) + 1);
  ca.gates[static_cast<std::size_t>(t)] = g;
  using K = Formula::Kind;
  if (g.kind == K::Lit) {
    ca.shape.set_label(t, index_bits(static_cast<std::uint64_t>(g.var), ca.k));
    return;
  }
  if (g.kind == K::Const) return;
  auto kids = ca.shape.expand(t, g.kind == K::Or ? Owner::Alice : Owner::Bob, 2);
  for (std::size_t i = 0; i < 2; ++i) layout(ca, kids[i], g.kids[i]);
}

}  // namespace

Formula parse_formula(const std::string& text) { return Parser(text).run(); }

Formula nnf(const Formula& f) { return nnf_rec(f, false); }

Formula normalize(const Formula& f) { return alternate(binarize(nnf(f))); }

bool is_alternating(const Formula& f) {
  using K = Formula::Kind;
  if (f.kind == K::Not) return false;
  if (f.kids.empty()) return true;
  if (f.kids.size() != 2) return false;
  for (const auto& k : f.kids) {
    if (k.kind == f.kind || !is_alternating(k)) return false;
  }
  return true;
}

TruthTable truth_table(const Formula& f, int n) {
  if (n < 1 || n > 20) fail(ErrorKind::Usage, "truth tables need 1 <= n <= 20");
  if (f.max_var() >= n) fail(ErrorKind::InvalidFormula, "formula mentions x" + std::to_string(f.max_var() + 1) +
                                                            " but n = " + std::to_string(n));
  TruthTable t;
  t.n = n;
  t.f.resize(std::size_t{1} << n);
  for (std::uint64_t x = 0; x < t.f.size(); ++x) t.f[x] = f.eval(x) ? 1 : 0;
  return t;
}

CircuitAssignment circuit_assignment(const Formula& f, int n) {
  if (f.max_var() >= n) {
    fail(ErrorKind::InvalidFormula, "formula mentions x" + std::to_string(f.max_var() + 1) + " but n = " + std::to_string(n));
  }
  CircuitAssignment ca;
  ca.n = n;
  ca.k = std::max(1, ceil_log2(static_cast<std::uint64_t>(n)));
  ca.formula = normalize(f);
  layout(ca, ca.shape.root(), ca.formula);
  const std::uint64_t size = std::uint64_t{1} << n;
  ca.out.assign(size, std::vector<std::uint8_t>(ca.shape.size()));
  for (std::uint64_t x = 0; x < size; ++x) {
    for (std::size_t t = 0; t < ca.shape.size(); ++t) ca.out[x][t] = ca.gates[t].eval(x) ? 1 : 0;
  }
  return ca;
}

namespace {

struct Classical {
  CircuitAssignment ca;
  RelationSpec r;
  std::vector<std::vector<std::uint8_t>> A, B;  // A[t][x], B[t][y]
};

Classical classical_protocol(const Formula& f, int n) {
  Classical c;
  c.ca = circuit_assignment(f, n);
  TruthTable tt = truth_table(c.ca.formula, n);
  c.r = kw_relation(tt);
  auto X = kw_side(tt, true);
  auto Y = kw_side(tt, false);
  const auto& s = c.ca.shape;
  c.A.assign(s.size(), std::vector<std::uint8_t>(X.size()));
  c.B.assign(s.size(), std::vector<std::uint8_t>(Y.size()));
  std::fill(c.A[0].begin(), c.A[0].end(), 1);
  std::fill(c.B[0].begin(), c.B[0].end(), 1);
  // Nodes are appended after their parent, so index order is top-down.
  for (std::size_t t = 0; t < s.size(); ++t) {
    const auto& node = s.node(static_cast<int>(t));
    if (node.children.empty()) continue;
    const auto t0 = static_cast<std::size_t>(node.children[0]);
    const auto t1 = static_cast<std::size_t>(node.children[1]);
    for (std::size_t x = 0; x < X.size(); ++x) {
      if (node.owner == Owner::Alice) {
        const std::uint8_t o = c.ca.out[X[x]][t0];
        c.A[t0][x] = c.A[t][x] & o;
        c.A[t1][x] = c.A[t][x] & (1 - o);
      } else {
        c.A[t0][x] = c.A[t1][x] = c.A[t][x];
      }
    }
    for (std::size_t y = 0; y < Y.size(); ++y) {
      if (node.owner == Owner::Bob) {
        const std::uint8_t o = c.ca.out[Y[y]][t0];
        c.B[t0][y] = c.B[t][y] & (1 - o);
        c.B[t1][y] = c.B[t][y] & o;
      } else {
        c.B[t0][y] = c.B[t1][y] = c.B[t][y];
      }
    }
  }
  return c;
}

}  // namespace

Gamma2Protocol protocol_from_formula(const Formula& f, int n) {
  Classical c = classical_protocol(f, n);
  Gamma2Protocol pi;
  pi.structure = c.ca.shape;
  pi.space = InnerProductSpace::create();
  const Vec e = Vec::atom(pi.space, pi.space->add_unit("e"));
  const Vec zero(pi.space);
  for (std::size_t t = 0; t < c.A.size(); ++t) {
    std::vector<Vec> a, b;
    for (auto v : c.A[t]) a.push_back(v ? e : zero);
    for (auto v : c.B[t]) b.push_back(v ? e : zero);
    pi.alpha.push_back(std::move(a));
    pi.beta.push_back(std::move(b));
  }
  return pi;
}

Rank1 hqfp_embedding(const Formula& f, int n) {
  Classical c = classical_protocol(f, n);
  const int nx = c.r.nx, ny = c.r.ny;
  Rank1 x{std::vector<Rational>(c.A.size() * static_cast<std::size_t>(nx + ny))};
  for (std::size_t t = 0; t < c.A.size(); ++t) {
    for (int i = 0; i < nx; ++i) x.x[protocol_var_a(nx, ny, static_cast<int>(t), i)] = c.A[t][static_cast<std::size_t>(i)];
    for (int j = 0; j < ny; ++j) x.x[protocol_var_b(nx, ny, static_cast<int>(t), j)] = c.B[t][static_cast<std::size_t>(j)];
  }
  return x;
}

namespace {

// Bob repeats `bits` before giving his answer, so the answer edge is preceded by them.
Gamma2Protocol insert_echo(const Gamma2Protocol& eq, const std::vector<int>& bits) {
  if (bits.empty()) return eq;
  Gamma2Protocol out;
  out.space = eq.space;
  const auto& s = eq.structure;
  const auto& root = s.node(s.root());
  auto& o = out.structure;
  const Vec zero(eq.space);
  auto put = [&](int node, const std::vector<Vec>& a, const std::vector<Vec>& b) {
    if (out.alpha.size() <= static_cast<std::size_t>(node)) {
      out.alpha.resize(static_cast<std::size_t>(node) + 1);
      out.beta.resize(static_cast<std::size_t>(node) + 1);
    }
    out.alpha[static_cast<std::size_t>(node)] = a;
    out.beta[static_cast<std::size_t>(node)] = b;
  };
  put(o.root(), eq.alpha[0], eq.beta[0]);
  auto msgs = o.expand(o.root(), root.owner, static_cast<int>(root.children.size()));
  for (std::size_t i = 0; i < msgs.size(); ++i) {
    const int m = root.children[i];
    const auto& am = eq.alpha[static_cast<std::size_t>(m)];
    const auto& bm = eq.beta[static_cast<std::size_t>(m)];
    int cur = msgs[i];
    put(cur, am, bm);
    for (int b : bits) {
      auto kids = o.expand(cur, Owner::Bob, 2);
      put(kids[static_cast<std::size_t>(b)], am, bm);
      put(kids[static_cast<std::size_t>(1 - b)], am, std::vector<Vec>(bm.size(), zero));
      cur = kids[static_cast<std::size_t>(b)];
    }
    const auto& mn = s.node(m);
    auto kids = o.expand(cur, mn.owner, static_cast<int>(mn.children.size()));
    for (std::size_t c = 0; c < kids.size(); ++c) {
      put(kids[c], eq.alpha[static_cast<std::size_t>(mn.children[c])], eq.beta[static_cast<std::size_t>(mn.children[c])]);
    }
  }
  return out;
}

std::vector<int> bob_bits(const ProtocolStructure& s, int leaf) {
  std::vector<int> z;
  auto p = s.path(leaf);
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (s.node(p[i - 1]).owner == Owner::Bob) z.push_back(s.node(p[i]).edge);
  }
  return z;
}

}  // namespace

KwProtocol kw_via_equality(const TruthTable& f) {
  if (f.n > 8) fail(ErrorKind::TooLarge, "kw_via_equality is limited to n <= 8");
  KwProtocol kp;
  kp.relation = kw_relation(f);
  const auto X = kw_side(f, true);
  const auto Y = kw_side(f, false);
  const int levels = ceil_log2(static_cast<std::uint64_t>(f.n));
  const std::uint64_t N = std::uint64_t{1} << levels;
  SpacePtr sp = InnerProductSpace::create();
  EqualityAtoms atoms(sp);

  if (N == 1) {
    Gamma2Protocol pi;
    pi.space = sp;
    pi.structure.set_label(0, {0});
    const Vec psi = Vec::atom(sp, atoms.psi());
    pi.alpha = {std::vector<Vec>(X.size(), psi)};
    pi.beta = {std::vector<Vec>(Y.size(), psi)};
    kp.protocol = std::move(pi);
  } else {
    auto restrict_to = [](std::uint64_t v, std::uint64_t lo, std::uint64_t len) {
      return static_cast<int>((v >> lo) & ((std::uint64_t{1} << len) - 1));
    };
    // Equality on the left half of [lo, lo + size), followed by an echo of `prefix` in the last round.
    auto round = [&](std::uint64_t lo, std::uint64_t size, const std::vector<int>& prefix, Graft& g) {
      const std::uint64_t half = size / 2;
      Gamma2Protocol eq = equality_protocol(11, 1 << half, atoms);
      ++kp.equality_calls;
      g.protocol = size == 2 ? insert_echo(eq, prefix) : std::move(eq);
      g.x_map.clear();
      g.y_map.clear();
      for (auto x : X) g.x_map.push_back(restrict_to(x, lo, half));
      for (auto y : Y) g.y_map.push_back(restrict_to(y, lo, half));
    };
    Graft first;
    round(0, N, {}, first);
    Gamma2Protocol c = reindex(first.protocol, first.x_map, first.y_map);
    for (std::uint64_t size = N / 2; size > 1; size /= 2) {
      std::vector<Graft> grafts;
      for (int leaf : c.structure.leaves()) {
        auto z = bob_bits(c.structure, leaf);
        Graft g;
        g.leaf = leaf;
        round(bits_value(z) * size, size, z, g);
        grafts.push_back(std::move(g));
      }
      c = compose_sequential(c, grafts);
    }
    kp.protocol = std::move(c);
  }
  auto rep = verify_gamma2(kp.protocol, kp.relation);
  if (!rep.accepted) fail(ErrorKind::Composition, "binary-search composite fails verification: " + rep.summary());
  kp.edge_depth = kp.protocol.structure.max_edge_depth();
  kp.speaker_rounds = kp.protocol.structure.max_speaker_rounds();
  kp.bit_depth = kp.protocol.structure.max_bit_depth();
  return kp;
}

}  // namespace relaxforge
