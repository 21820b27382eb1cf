#include "relaxforge/io.hpp"

#include <fstream>
#include <sstream>

#include "relaxforge/error.hpp"

namespace relaxforge::io {

namespace {

const json& field(const json& j, const char* key) {
  if (!j.is_object()) fail(ErrorKind::Parse, std::string("expected an object holding '") + key + "'");
  auto it = j.find(key);
  if (it == j.end()) fail(ErrorKind::Parse, std::string("missing field '") + key + "'");
  return *it;
}

template <class T>
T get(const json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, std::string("field '") + key + "': " + e.what());
  }
}

json artifact(const std::string& kind) { return json{{"schema", kSchema}, {"kind", kind}}; }

const char* mode_name(Mode m) { return m == Mode::HQFP ? "hqfp" : "sdfp"; }

Mode mode_from(const std::string& s) {
  if (s == "hqfp") return Mode::HQFP;
  if (s == "sdfp") return Mode::SDFP;
  fail(ErrorKind::Parse, "unknown mode '" + s + "'");
}

Owner owner_from(const std::string& s) {
  if (s == "alice") return Owner::Alice;
  if (s == "bob") return Owner::Bob;
  if (s == "leaf") return Owner::Leaf;
  fail(ErrorKind::Parse, "unknown owner '" + s + "'");
}

json vec_table(const std::vector<std::vector<Vec>>& t) {
  json out = json::array();
  for (const auto& row : t) {
    json r = json::array();
    for (const auto& v : row) r.push_back(vec(v));
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<std::vector<Vec>> vec_table_from(const json& j, const SpacePtr& sp) {
  if (!j.is_array()) fail(ErrorKind::Parse, "expected a table of vectors");
  std::vector<std::vector<Vec>> out;
  for (const auto& row : j) {
    if (!row.is_array()) fail(ErrorKind::Parse, "expected a row of vectors");
    std::vector<Vec> r;
    for (const auto& v : row) r.push_back(vec_from(v, sp));
    out.push_back(std::move(r));
  }
  return out;
}

json sym_rows(const SymMatrixQ& m) {
  json out = json::array();
  for (const auto& row : m.rows()) {
    json r = json::array();
    for (const auto& v : row) r.push_back(rational(v));
    out.push_back(std::move(r));
  }
  return out;
}

SymMatrixQ sym_rows_from(const json& j) {
  if (!j.is_array()) fail(ErrorKind::Parse, "expected matrix rows");
  std::vector<std::vector<Rational>> rows;
  for (const auto& row : j) {
    if (!row.is_array()) fail(ErrorKind::Parse, "expected a matrix row");
    std::vector<Rational> r;
    for (const auto& v : row) r.push_back(rational_from(v));
    rows.push_back(std::move(r));
  }
  return SymMatrixQ::from_rows(rows);
}

}  // namespace

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Parse, "malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Usage, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void expect_kind(const json& j, const std::string& kind) {
  int schema = get<int>(j, "schema");
  if (schema != kSchema) fail(ErrorKind::Parse, "unsupported schema " + std::to_string(schema));
  auto k = get<std::string>(j, "kind");
  if (k != kind) fail(ErrorKind::Parse, "expected a '" + kind + "' artifact, got '" + k + "'");
}

json rational(const Rational& q) { return q.str(); }

Rational rational_from(const json& j) {
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  if (!j.is_string()) fail(ErrorKind::Parse, "rationals are written as \"p/q\" strings");
  return Rational::parse(j.get<std::string>());
}

json scalar(const Scalar& s) {
  if (s.is_rational()) return rational(s.to_rational());
  json terms = json::array();
  for (const auto& t : s.terms()) terms.push_back(json::array({rational(t.coef), t.radicand}));
  return json{{"terms", terms}};
}

Scalar scalar_from(const json& j) {
  if (!j.is_object()) return Scalar(rational_from(j));
  Scalar out;
  for (const auto& t : field(j, "terms")) {
    if (!t.is_array() || t.size() != 2 || !t[1].is_number_unsigned()) {
      fail(ErrorKind::Parse, "surd terms are [coefficient, radicand] pairs");
    }
    out += Scalar::surd(rational_from(t[0]), t[1].get<std::uint64_t>());
  }
  return out;
}

json scalar_report(const Scalar& s) { return json{{"exact", s.str()}, {"decimal", s.to_double()}, {"approx", true}}; }

json space(const InnerProductSpace& sp) {
  json flowers = json::array();
  for (const auto& f : sp.flowers()) {
    flowers.push_back({{"name", f.name}, {"d", f.d}, {"a", rational(f.a)}, {"b", rational(f.b)}});
  }
  json atoms = json::array();
  for (AtomId a = 0; a < sp.atom_count(); ++a) {
    const auto& info = sp.atom(a);
    switch (info.kind) {
      case AtomKind::Unit:
        atoms.push_back({{"kind", "unit"}, {"name", info.name}});
        break;
      case AtomKind::Flower:
        atoms.push_back({{"kind", "flower"}, {"family", info.family}, {"index", info.index}});
        break;
      case AtomKind::Tensor:
        atoms.push_back({{"kind", "tensor"}, {"left", info.left}, {"right", info.right}});
        break;
      case AtomKind::Slot:
        atoms.push_back({{"kind", "slot"}, {"tag", info.family}, {"of", info.left}});
        break;
    }
  }
  return json{{"atoms", atoms}, {"flowers", flowers}};
}

// Replays atom creation in order, which reproduces ids and blocks.
SpacePtr space_from(const json& j) {
  auto sp = InnerProductSpace::create();
  const auto& flowers = field(j, "flowers");
  const auto& atoms = field(j, "atoms");
  if (!flowers.is_array() || !atoms.is_array()) fail(ErrorKind::Parse, "space needs atom and flower arrays");
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const auto& a = atoms[i];
    const auto kind = get<std::string>(a, "kind");
    AtomId expect = static_cast<AtomId>(i);
    if (sp->atom_count() > i) {
      if (kind != "flower") fail(ErrorKind::Parse, "atom " + std::to_string(i) + " should be a flower member");
      continue;
    }
    AtomId got;
    if (kind == "unit") {
      got = sp->add_unit(get<std::string>(a, "name"));
    } else if (kind == "flower") {
      auto fam = get<std::size_t>(a, "family");
      if (get<int>(a, "index") != 0 || fam >= flowers.size()) {
        fail(ErrorKind::Parse, "flower members must follow their family's first atom");
      }
      const auto& f = flowers[fam];
      got = sp->add_flower(get<std::string>(f, "name"), get<int>(f, "d"), rational_from(field(f, "a")),
                           rational_from(field(f, "b")))
                .members.front();
    } else if (kind == "tensor") {
      got = sp->tensor(get<AtomId>(a, "left"), get<AtomId>(a, "right"));
    } else if (kind == "slot") {
      got = sp->slot(get<std::uint32_t>(a, "tag"), get<AtomId>(a, "of"));
    } else {
      fail(ErrorKind::Parse, "unknown atom kind '" + kind + "'");
    }
    if (got != expect) fail(ErrorKind::Parse, "atom " + std::to_string(i) + " repeats an earlier atom");
  }
  if (sp->atom_count() != atoms.size()) fail(ErrorKind::Parse, "flower family runs past the atom list");
  return sp;
}

json vec(const Vec& v) {
  json out = json::array();
  for (const auto& e : v.entries()) out.push_back(json::array({e.atom, scalar(e.coef)}));
  return out;
}

Vec vec_from(const json& j, const SpacePtr& sp) {
  if (!j.is_array()) fail(ErrorKind::Parse, "vectors are arrays of [atom, coefficient]");
  Vec v(sp);
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_unsigned()) {
      fail(ErrorKind::Parse, "vectors are arrays of [atom, coefficient]");
    }
    auto a = e[0].get<AtomId>();
    sp->atom(a);
    v.add_term(a, scalar_from(e[1]));
  }
  return v;
}

json structure(const ProtocolStructure& s) {
  json nodes = json::array();
  for (std::size_t t = 0; t < s.size(); ++t) {
    const auto& n = s.node(static_cast<int>(t));
    json jn{{"owner", owner_name(n.owner)}, {"parent", n.parent}, {"children", n.children}};
    if (n.label) jn["label"] = *n.label;
    nodes.push_back(std::move(jn));
  }
  return json{{"nodes", nodes}};
}

// Children are appended together when their parent is expanded, so expanding
// parents in order of their first child reproduces the indices.
ProtocolStructure structure_from(const json& j) {
  const auto& nodes = field(j, "nodes");
  if (!nodes.is_array() || nodes.empty()) fail(ErrorKind::Parse, "structure needs a nonempty node list");
  std::vector<std::pair<int, int>> order;  // (first child, parent)
  for (std::size_t t = 0; t < nodes.size(); ++t) {
    auto kids = get<std::vector<int>>(nodes[t], "children");
    if (!kids.empty()) order.emplace_back(kids.front(), static_cast<int>(t));
  }
  std::sort(order.begin(), order.end());
  ProtocolStructure s;
  for (auto [first, t] : order) {
    if (static_cast<std::size_t>(t) >= s.size()) fail(ErrorKind::Parse, "node " + std::to_string(t) + " out of order");
    const auto& jn = nodes[static_cast<std::size_t>(t)];
    auto kids = get<std::vector<int>>(jn, "children");
    auto made = s.expand(t, owner_from(get<std::string>(jn, "owner")), static_cast<int>(kids.size()));
    if (made != kids) fail(ErrorKind::Parse, "children of node " + std::to_string(t) + " are not contiguous");
  }
  if (s.size() != nodes.size()) fail(ErrorKind::Parse, "structure has unreachable nodes");
  for (std::size_t t = 0; t < nodes.size(); ++t) {
    const auto& jn = nodes[t];
    if (get<int>(jn, "parent") != s.node(static_cast<int>(t)).parent) {
      fail(ErrorKind::Parse, "node " + std::to_string(t) + " names the wrong parent");
    }
    if (s.is_leaf(static_cast<int>(t)) && get<std::string>(jn, "owner") != "leaf") {
      fail(ErrorKind::Parse, "node " + std::to_string(t) + " has an owner but no children");
    }
    if (jn.contains("label")) s.set_label(static_cast<int>(t), get<std::vector<int>>(jn, "label"));
  }
  return s;
}

json relation(const RelationSpec& r) {
  json out{{"nx", r.nx}, {"ny", r.ny}, {"k", r.k}, {"function", r.function_mode}, {"table", hex_bits(r.table)}};
  if (!r.x_names.empty()) out["x_names"] = r.x_names;
  if (!r.y_names.empty()) out["y_names"] = r.y_names;
  return out;
}

RelationSpec relation_from(const json& j) {
  const int nx = get<int>(j, "nx"), ny = get<int>(j, "ny"), k = get<int>(j, "k");
  if (nx < 1 || ny < 1 || k < 1 || k > 20) fail(ErrorKind::Parse, "relation sizes out of range");
  const std::size_t entries = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * (std::size_t{1} << k);
  auto bits = parse_hex_bits(get<std::string>(j, "table"), entries);
  RelationSpec r = RelationSpec::relation(nx, ny, k, [&](int x, int y, std::uint64_t z) {
    return bits[(static_cast<std::size_t>(x) * static_cast<std::size_t>(ny) + static_cast<std::size_t>(y)) *
                    (std::size_t{1} << k) +
                z] != 0;
  });
  r.function_mode = get<bool>(j, "function");
  if (j.contains("x_names")) r.x_names = get<std::vector<std::string>>(j, "x_names");
  if (j.contains("y_names")) r.y_names = get<std::vector<std::string>>(j, "y_names");
  return r;
}

json problem(const FeasibilityProblem& p) {
  json out = artifact("problem");
  out["n"] = p.n;
  out["mode"] = mode_name(p.mode);
  if (!p.variables.empty()) out["variables"] = p.variables;
  json cs = json::array();
  for (const auto& c : p.constraints) {
    json entries = json::array();
    for (const auto& [ij, v] : c.A.entries()) entries.push_back(json::array({ij.first, ij.second, rational(v)}));
    cs.push_back({{"label", c.label}, {"b", rational(c.b)}, {"A", entries}});
  }
  out["constraints"] = cs;
  return out;
}

FeasibilityProblem problem_from(const json& j) {
  expect_kind(j, "problem");
  FeasibilityProblem p;
  p.n = get<std::size_t>(j, "n");
  p.mode = mode_from(get<std::string>(j, "mode"));
  if (j.contains("variables")) p.variables = get<std::vector<std::string>>(j, "variables");
  for (const auto& jc : field(j, "constraints")) {
    Constraint c;
    c.b = rational_from(field(jc, "b"));
    if (jc.contains("label")) c.label = get<std::string>(jc, "label");
    for (const auto& e : field(jc, "A")) {
      if (!e.is_array() || e.size() != 3) fail(ErrorKind::Parse, "matrix entries are [i, j, value]");
      c.A.set(e[0].get<std::uint32_t>(), e[1].get<std::uint32_t>(), rational_from(e[2]));
    }
    p.constraints.push_back(std::move(c));
  }
  validate(p);
  return p;
}

json dual(const DualWitness& w) {
  json out = artifact("dual");
  json ws = json::array();
  for (const auto& v : w.w) ws.push_back(rational(v));
  out["w"] = ws;
  return out;
}

DualWitness dual_from(const json& j) {
  expect_kind(j, "dual");
  DualWitness w;
  for (const auto& v : field(j, "w")) w.w.push_back(rational_from(v));
  return w;
}

json primal(const PrimalSolution& s) {
  json out = artifact("primal");
  if (const auto* r = std::get_if<Rank1>(&s)) {
    out["form"] = "rank1";
    json x = json::array();
    for (const auto& v : r->x) x.push_back(rational(v));
    out["x"] = x;
  } else if (const auto* g = std::get_if<GramSolution>(&s)) {
    out["form"] = "gram";
    out["Z"] = sym_rows(g->Z);
  } else {
    const auto& vs = std::get<VectorSolution>(s);
    out["form"] = "vectors";
    SpacePtr sp;
    for (const auto& v : vs.v)
      if (v.space()) sp = v.space();
    out["space"] = sp ? space(*sp) : space(InnerProductSpace());
    json arr = json::array();
    for (const auto& v : vs.v) arr.push_back(vec(v));
    out["vectors"] = arr;
  }
  return out;
}

PrimalSolution primal_from(const json& j) {
  expect_kind(j, "primal");
  auto form = get<std::string>(j, "form");
  if (form == "rank1") {
    Rank1 r;
    for (const auto& v : field(j, "x")) r.x.push_back(rational_from(v));
    return r;
  }
  if (form == "gram") return GramSolution{sym_rows_from(field(j, "Z"))};
  if (form == "vectors") {
    auto sp = space_from(field(j, "space"));
    VectorSolution vs;
    for (const auto& v : field(j, "vectors")) vs.v.push_back(vec_from(v, sp));
    return vs;
  }
  fail(ErrorKind::Parse, "unknown primal form '" + form + "'");
}

json sos(const Degree2SoSCert& c) {
  json out = artifact("sos");
  out["dim"] = c.dim;
  json m = json::array();
  for (const auto& v : c.multipliers) m.push_back(rational(v));
  out["multipliers"] = m;
  json sq = json::array();
  for (const auto& s : c.squares) {
    json form = json::array();
    for (const auto& [var, coef] : s.form) form.push_back(json::array({var, rational(coef)}));
    sq.push_back({{"weight", rational(s.weight)}, {"form", form}});
  }
  out["squares"] = sq;
  out["constant"] = rational(c.constant);
  return out;
}

Degree2SoSCert sos_from(const json& j) {
  expect_kind(j, "sos");
  Degree2SoSCert c;
  c.dim = get<std::size_t>(j, "dim");
  for (const auto& v : field(j, "multipliers")) c.multipliers.push_back(rational_from(v));
  for (const auto& s : field(j, "squares")) {
    SosSquare sq;
    sq.weight = rational_from(field(s, "weight"));
    for (const auto& e : field(s, "form")) {
      if (!e.is_array() || e.size() != 2) fail(ErrorKind::Parse, "linear forms are [variable, coefficient] pairs");
      sq.form.emplace_back(e[0].get<std::uint32_t>(), rational_from(e[1]));
    }
    c.squares.push_back(std::move(sq));
  }
  c.constant = rational_from(field(j, "constant"));
  return c;
}

json family(const PigeonFamily& f) {
  json out = artifact("pigeon-family");
  out["p"] = f.p;
  out["h"] = f.h;
  out["space"] = space(*f.space);
  json init = json::array();
  for (const auto& v : f.initial) init.push_back(vec(v));
  out["initial"] = init;
  out["parts"] = vec_table(f.parts);
  return out;
}

PigeonFamily family_from(const json& j) {
  expect_kind(j, "pigeon-family");
  PigeonFamily f;
  f.p = get<int>(j, "p");
  f.h = get<int>(j, "h");
  f.space = space_from(field(j, "space"));
  for (const auto& v : field(j, "initial")) f.initial.push_back(vec_from(v, f.space));
  f.parts = vec_table_from(field(j, "parts"), f.space);
  return f;
}

json gamma2(const Gamma2Protocol& pi) {
  json out = artifact("gamma2-protocol");
  out["structure"] = structure(pi.structure);
  out["space"] = space(*pi.space);
  out["alpha"] = vec_table(pi.alpha);
  out["beta"] = vec_table(pi.beta);
  return out;
}

Gamma2Protocol gamma2_from(const json& j) {
  expect_kind(j, "gamma2-protocol");
  Gamma2Protocol pi;
  pi.structure = structure_from(field(j, "structure"));
  pi.space = space_from(field(j, "space"));
  pi.alpha = vec_table_from(field(j, "alpha"), pi.space);
  pi.beta = vec_table_from(field(j, "beta"), pi.space);
  return pi;
}

json qlab(const QLabProtocol& pi) {
  json out = artifact("qlab-protocol");
  out["nx"] = pi.nx;
  out["ny"] = pi.ny;
  out["structure"] = structure(pi.structure);
  out["space"] = space(*pi.space);
  out["psi"] = vec_table(pi.psi);
  return out;
}

QLabProtocol qlab_from(const json& j) {
  expect_kind(j, "qlab-protocol");
  QLabProtocol pi;
  pi.nx = get<int>(j, "nx");
  pi.ny = get<int>(j, "ny");
  pi.structure = structure_from(field(j, "structure"));
  pi.space = space_from(field(j, "space"));
  pi.psi = vec_table_from(field(j, "psi"), pi.space);
  return pi;
}

json report(const VerificationReport& r) {
  json out = artifact("report");
  out["accepted"] = r.accepted;
  out["checked"] = r.checked;
  json vs = json::array();
  for (const auto& v : r.violations) {
    vs.push_back({{"family", v.family}, {"location", v.location}, {"input", v.input}, {"expected", v.expected},
                  {"actual", v.actual}});
  }
  out["violations"] = vs;
  return out;
}

VerificationReport report_from(const json& j) {
  expect_kind(j, "report");
  VerificationReport r;
  r.checked = get<std::size_t>(j, "checked");
  for (const auto& v : field(j, "violations")) {
    r.add({get<std::string>(v, "family"), get<std::string>(v, "location"), get<std::string>(v, "input"),
           get<std::string>(v, "expected"), get<std::string>(v, "actual")});
  }
  if (get<bool>(j, "accepted") != r.violations.empty()) fail(ErrorKind::Parse, "report verdict contradicts its violations");
  return r;
}

}  // namespace relaxforge::io
