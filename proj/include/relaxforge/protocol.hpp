#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace relaxforge {

enum class Owner { Alice, Bob, Leaf };

const char* owner_name(Owner o);

struct ProtocolNode {
  Owner owner = Owner::Leaf;
  int parent = -1;
  int edge = 0;  // child index under the parent: 0/1 below binary nodes, 1..l below wider ones
  int depth = 0;
  std::vector<int> children;
  std::optional<std::vector<int>> label;  // explicit output bits of a leaf
};

// Rooted ordered tree of speakers. Node 0 is the root; nodes are only appended.
class ProtocolStructure {
 public:
  ProtocolStructure();

  int root() const { return 0; }
  std::size_t size() const { return nodes_.size(); }
  const ProtocolNode& node(int t) const { return nodes_.at(static_cast<std::size_t>(t)); }
  bool is_leaf(int t) const { return node(t).children.empty(); }
  std::vector<int> leaves() const;
  std::vector<int> internal_nodes() const;

  // Turns leaf t into an internal node with `arity` >= 2 children.
  std::vector<int> expand(int t, Owner owner, int arity);
  void set_label(int leaf, std::vector<int> bits);

  // Child-index string from the root, "λ" for the root itself.
  std::string address(int t) const;
  std::optional<int> find(const std::string& address) const;
  std::vector<int> path(int t) const;  // root .. t
  bool is_ancestor(int a, int t) const;  // a is t or above it

  // Output of a leaf: the explicit label when present, otherwise the last k
  // edges provided they all leave binary nodes.
  std::optional<std::vector<int>> output(int leaf, int k) const;

  int edge_depth(int t) const { return node(t).depth; }
  int bit_depth(int t) const;       // sum of ceil(log2 arity) along the path
  int speaker_rounds(int t) const;  // maximal runs of one speaker along the path
  int max_edge_depth() const;
  int max_bit_depth() const;
  int max_speaker_rounds() const;

  bool is_binary() const;
  bool operator==(const ProtocolStructure& o) const;

 private:
  std::vector<ProtocolNode> nodes_;
};

// Complete tree with one owner per level, all nodes binary.
ProtocolStructure layered_structure(const std::vector<Owner>& levels);

int ceil_log2(std::uint64_t n);
std::vector<int> index_bits(std::uint64_t v, int k);  // most significant first
std::uint64_t bits_value(const std::vector<int>& bits);
std::string bits_str(const std::vector<int>& bits);

// f ⊆ X × Y × Z with Z ⊆ {0,1}^k, inputs indexed 0..nx-1 and 0..ny-1.
struct RelationSpec {
  int nx = 0;
  int ny = 0;
  int k = 1;
  bool function_mode = false;
  std::vector<std::string> x_names;
  std::vector<std::string> y_names;
  std::vector<std::uint8_t> table;  // ((x * ny) + y) * 2^k + z

  static RelationSpec function(int nx, int ny, const std::function<bool(int, int)>& f);
  static RelationSpec relation(int nx, int ny, int k, const std::function<bool(int, int, std::uint64_t)>& allows);

  bool allows(int x, int y, std::uint64_t z) const;
  bool value(int x, int y) const;  // function mode only
  std::string x_name(int x) const;
  std::string y_name(int y) const;
};

RelationSpec equality_relation(int d);

// Bit i of the returned table is bit i of the big-endian hex value; nbits bits are read.
std::vector<std::uint8_t> parse_hex_bits(const std::string& hex, std::size_t nbits);
std::string hex_bits(const std::vector<std::uint8_t>& bits);

}  // namespace relaxforge
