#include "relaxforge/protocol.hpp"

#include <algorithm>

#include "relaxforge/error.hpp"

namespace relaxforge {

const char* owner_name(Owner o) {
  switch (o) {
    case Owner::Alice:
      return "alice";
    case Owner::Bob:
      return "bob";
    case Owner::Leaf:
      return "leaf";
  }
  return "leaf";
}

ProtocolStructure::ProtocolStructure() { nodes_.emplace_back(); }

std::vector<int> ProtocolStructure::leaves() const {
  std::vector<int> out;
  for (std::size_t t = 0; t < nodes_.size(); ++t) {
    if (nodes_[t].children.empty()) out.push_back(static_cast<int>(t));
  }
  return out;
}

std::vector<int> ProtocolStructure::internal_nodes() const {
  std::vector<int> out;
  for (std::size_t t = 0; t < nodes_.size(); ++t) {
    if (!nodes_[t].children.empty()) out.push_back(static_cast<int>(t));
  }
  return out;
}

std::vector<int> ProtocolStructure::expand(int t, Owner owner, int arity) {
  if (owner == Owner::Leaf) fail(ErrorKind::InvalidStructure, "an internal node needs an owner");
  if (arity < 2) fail(ErrorKind::InvalidStructure, "an internal node needs at least 2 children");
  if (!is_leaf(t)) fail(ErrorKind::InvalidStructure, "node " + address(t) + " is already internal");
  std::vector<int> kids;
  for (int c = 0; c < arity; ++c) {
    ProtocolNode n;
    n.parent = t;
    n.edge = arity == 2 ? c : c + 1;
    n.depth = nodes_[static_cast<std::size_t>(t)].depth + 1;
    kids.push_back(static_cast<int>(nodes_.size()));
    nodes_.push_back(std::move(n));
  }
  auto& p = nodes_[static_cast<std::size_t>(t)];
  p.owner = owner;
  p.children = kids;
  p.label.reset();
  return kids;
}

void ProtocolStructure::set_label(int leaf, std::vector<int> bits) {
  if (!is_leaf(leaf)) fail(ErrorKind::InvalidStructure, "only leaves carry output labels");
  for (int b : bits) {
    if (b != 0 && b != 1) fail(ErrorKind::InvalidStructure, "output labels are bit strings");
  }
  nodes_[static_cast<std::size_t>(leaf)].label = std::move(bits);
}

std::string ProtocolStructure::address(int t) const {
  if (t == 0) return "λ";
  std::vector<int> p = path(t);
  bool binary = true;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) binary = binary && node(p[i]).children.size() == 2;
  std::string s;
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (!binary && !s.empty()) s += '.';
    s += std::to_string(node(p[i]).edge);
  }
  return s;
}

std::optional<int> ProtocolStructure::find(const std::string& a) const {
  for (std::size_t t = 0; t < nodes_.size(); ++t) {
    if (address(static_cast<int>(t)) == a) return static_cast<int>(t);
  }
  return std::nullopt;
}

std::vector<int> ProtocolStructure::path(int t) const {
  std::vector<int> p;
  for (int u = t; u >= 0; u = node(u).parent) p.push_back(u);
  std::reverse(p.begin(), p.end());
  return p;
}

bool ProtocolStructure::is_ancestor(int a, int t) const {
  for (int u = t; u >= 0; u = node(u).parent) {
    if (u == a) return true;
  }
  return false;
}

std::optional<std::vector<int>> ProtocolStructure::output(int leaf, int k) const {
  const auto& n = node(leaf);
  if (n.label) return n.label;
  if (n.depth < k) return std::nullopt;
  std::vector<int> bits;
  int u = leaf;
  for (int i = 0; i < k; ++i) {
    const auto& un = node(u);
    if (node(un.parent).children.size() != 2) return std::nullopt;
    bits.push_back(un.edge);
    u = un.parent;
  }
  std::reverse(bits.begin(), bits.end());
  return bits;
}

int ProtocolStructure::bit_depth(int t) const {
  int b = 0;
  for (int u = t; node(u).parent >= 0; u = node(u).parent) {
    b += ceil_log2(node(node(u).parent).children.size());
  }
  return b;
}

int ProtocolStructure::speaker_rounds(int t) const {
  int rounds = 0;
  Owner last = Owner::Leaf;
  for (int u : path(t)) {
    Owner o = node(u).owner;
    if (o == Owner::Leaf) continue;
    if (o != last) ++rounds;
    last = o;
  }
  return rounds;
}

int ProtocolStructure::max_edge_depth() const {
  int m = 0;
  for (int l : leaves()) m = std::max(m, edge_depth(l));
  return m;
}

int ProtocolStructure::max_bit_depth() const {
  int m = 0;
  for (int l : leaves()) m = std::max(m, bit_depth(l));
  return m;
}

int ProtocolStructure::max_speaker_rounds() const {
  int m = 0;
  for (int l : leaves()) m = std::max(m, speaker_rounds(l));
  return m;
}

bool ProtocolStructure::is_binary() const {
  return std::all_of(nodes_.begin(), nodes_.end(),
                     [](const ProtocolNode& n) { return n.children.empty() || n.children.size() == 2; });
}

bool ProtocolStructure::operator==(const ProtocolStructure& o) const {
  if (nodes_.size() != o.nodes_.size()) return false;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& a = nodes_[i];
    const auto& b = o.nodes_[i];
    if (a.owner != b.owner || a.parent != b.parent || a.edge != b.edge || a.children != b.children ||
        a.label != b.label) {
      return false;
    }
  }
  return true;
}

ProtocolStructure layered_structure(const std::vector<Owner>& levels) {
  ProtocolStructure s;
  std::vector<int> frontier{s.root()};
  for (Owner o : levels) {
    std::vector<int> next;
    for (int t : frontier) {
      for (int c : s.expand(t, o, 2)) next.push_back(c);
    }
    frontier = std::move(next);
  }
  return s;
}

int ceil_log2(std::uint64_t n) {
  int k = 0;
  while ((std::uint64_t{1} << k) < n) ++k;
  return k;
}

std::vector<int> index_bits(std::uint64_t v, int k) {
  std::vector<int> bits(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) bits[static_cast<std::size_t>(k - 1 - i)] = static_cast<int>((v >> i) & 1U);
  return bits;
}

std::uint64_t bits_value(const std::vector<int>& bits) {
  std::uint64_t v = 0;
  for (int b : bits) v = (v << 1) | static_cast<std::uint64_t>(b);
  return v;
}

std::string bits_str(const std::vector<int>& bits) {
  std::string s;
  for (int b : bits) s += static_cast<char>('0' + b);
  return s;
}

RelationSpec RelationSpec::function(int nx, int ny, const std::function<bool(int, int)>& f) {
  RelationSpec r = relation(nx, ny, 1, [&](int x, int y, std::uint64_t z) { return (z == 1) == f(x, y); });
  r.function_mode = true;
  return r;
}

RelationSpec RelationSpec::relation(int nx, int ny, int k,
                                    const std::function<bool(int, int, std::uint64_t)>& allows) {
  if (nx < 1 || ny < 1) fail(ErrorKind::EmptySide, "both input sets must be nonempty");
  if (k < 1 || k > 20) fail(ErrorKind::DomainMismatch, "output width must be between 1 and 20 bits");
  RelationSpec r;
  r.nx = nx;
  r.ny = ny;
  r.k = k;
  const std::uint64_t zc = std::uint64_t{1} << k;
  r.table.resize(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * zc);
  for (int x = 0; x < nx; ++x) {
    for (int y = 0; y < ny; ++y) {
      for (std::uint64_t z = 0; z < zc; ++z) {
        r.table[(static_cast<std::size_t>(x) * static_cast<std::size_t>(ny) + static_cast<std::size_t>(y)) * zc + z] =
            allows(x, y, z) ? 1 : 0;
      }
    }
  }
  return r;
}

bool RelationSpec::allows(int x, int y, std::uint64_t z) const {
  const std::uint64_t zc = std::uint64_t{1} << k;
  if (z >= zc) return false;
  return table[(static_cast<std::size_t>(x) * static_cast<std::size_t>(ny) + static_cast<std::size_t>(y)) * zc + z] != 0;
}

bool RelationSpec::value(int x, int y) const {
  if (!function_mode) fail(ErrorKind::Unsupported, "relation is not a Boolean function");
  return allows(x, y, 1);
}

std::string RelationSpec::x_name(int x) const {
  return static_cast<std::size_t>(x) < x_names.size() ? x_names[static_cast<std::size_t>(x)] : std::to_string(x);
}

std::string RelationSpec::y_name(int y) const {
  return static_cast<std::size_t>(y) < y_names.size() ? y_names[static_cast<std::size_t>(y)] : std::to_string(y);
}

RelationSpec equality_relation(int d) { return RelationSpec::function(d, d, [](int x, int y) { return x == y; }); }

std::vector<std::uint8_t> parse_hex_bits(const std::string& hex, std::size_t nbits) {
  std::string h = hex;
  if (h.size() > 2 && h[0] == '0' && (h[1] == 'x' || h[1] == 'X')) h = h.substr(2);
  if (h.empty()) fail(ErrorKind::Parse, "empty hex truth table");
  std::vector<std::uint8_t> bits(nbits, 0);
  for (std::size_t i = 0; i < h.size(); ++i) {
    char c = h[h.size() - 1 - i];
    int v;
    if (c >= '0' && c <= '9') v = c - '0';
    else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') v = c - 'A' + 10;
    else fail(ErrorKind::Parse, "bad hex digit '" + std::string(1, c) + "' at position " + std::to_string(h.size() - 1 - i));
    for (int b = 0; b < 4; ++b) {
      std::size_t at = 4 * i + static_cast<std::size_t>(b);
      if (!((v >> b) & 1)) continue;
      if (at >= nbits) fail(ErrorKind::Parse, "hex value has bits beyond the " + std::to_string(nbits) + " table entries");
      bits[at] = 1;
    }
  }
  return bits;
}

std::string hex_bits(const std::vector<std::uint8_t>& bits) {
  std::size_t digits = std::max<std::size_t>(1, (bits.size() + 3) / 4);
  std::string s(digits, '0');
  for (std::size_t i = 0; i < digits; ++i) {
    int v = 0;
    for (int b = 0; b < 4; ++b) {
      std::size_t at = 4 * i + static_cast<std::size_t>(b);
      if (at < bits.size() && bits[at]) v |= 1 << b;
    }
    s[digits - 1 - i] = "0123456789abcdef"[v];
  }
  return s;
}

}  // namespace relaxforge
