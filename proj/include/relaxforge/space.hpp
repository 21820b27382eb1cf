#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "relaxforge/rational.hpp"
#include "relaxforge/scalar.hpp"
#include "relaxforge/sym_matrix.hpp"

namespace relaxforge {

using AtomId = std::uint32_t;

enum class AtomKind { Unit, Flower, Tensor, Slot };

struct AtomInfo {
  AtomKind kind;
  std::string name;
  std::uint32_t family = 0;  // flower family, or slot tag
  std::uint32_t index = 0;   // member index inside a flower family
  AtomId left = 0;           // tensor factors, or the inner atom of a slot
  AtomId right = 0;
  std::uint32_t block = 0;   // atoms with different blocks are orthogonal
};

struct FlowerInfo {
  std::string name;
  int d;
  Rational a;  // squared norm of each member
  Rational b;  // inner product of distinct members
  bool sums_to_zero;
  std::uint32_t block;
  AtomId first;
};

struct FlowerFamily {
  std::uint32_t family;
  std::vector<AtomId> members;
  bool sums_to_zero;
};

// A declared family of atoms with a known rational Gram matrix. Atoms are only
// ever appended, so a Gram entry once computed never changes.
class InnerProductSpace {
 public:
  static std::shared_ptr<InnerProductSpace> create() { return std::make_shared<InnerProductSpace>(); }

  AtomId add_unit(const std::string& name);
  // d atoms with squared norm a and pairwise inner product b.
  FlowerFamily add_flower(const std::string& name, int d, const Rational& a, const Rational& b);
  AtomId tensor(AtomId l, AtomId r);
  // Copy of atom a inside the summand with the given tag.
  AtomId slot(std::uint32_t tag, AtomId a);

  Rational gram(AtomId a, AtomId b) const;
  std::size_t atom_count() const { return atoms_.size(); }
  const AtomInfo& atom(AtomId a) const;
  const std::vector<FlowerInfo>& flowers() const { return flowers_; }
  std::optional<AtomId> find(const std::string& name) const;
  std::string atom_name(AtomId a) const;

  // Copies atom a of src (and whatever it is built from) into this space.
  AtomId import_atom(const InnerProductSpace& src, AtomId a,
                     std::unordered_map<AtomId, AtomId>& amap,
                     std::unordered_map<std::uint32_t, std::uint32_t>& fmap);

 private:
  std::uint32_t new_block() { return next_block_++; }
  std::uint32_t composite_block(int tag, std::uint64_t x, std::uint64_t y);

  std::vector<AtomInfo> atoms_;
  std::vector<FlowerInfo> flowers_;
  std::unordered_map<std::string, AtomId> by_name_;
  std::map<std::pair<AtomId, AtomId>, AtomId> tensors_;
  std::map<std::pair<std::uint32_t, AtomId>, AtomId> slots_;
  std::map<std::tuple<int, std::uint64_t, std::uint64_t>, std::uint32_t> blocks_;
  std::uint32_t next_block_ = 0;
};

using SpacePtr = std::shared_ptr<InnerProductSpace>;

FlowerFamily flower_space(InnerProductSpace& space, const std::string& name, int d, const Rational& a,
                          const Rational& b);

// Finite linear combination of atoms with Scalar coefficients. A default
// constructed Vec has no space and acts as zero against any space.
class Vec {
 public:
  struct Entry {
    std::uint32_t block;
    AtomId atom;
    Scalar coef;
  };

  Vec() = default;
  explicit Vec(SpacePtr space) : space_(std::move(space)) {}
  static Vec atom(const SpacePtr& space, AtomId a, const Scalar& coef = Scalar(1));

  const SpacePtr& space() const { return space_; }
  const std::vector<Entry>& entries() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  Vec operator-() const;
  friend Vec operator+(const Vec& a, const Vec& b);
  friend Vec operator-(const Vec& a, const Vec& b);
  friend Vec operator*(const Scalar& s, const Vec& v);
  Vec& operator+=(const Vec& o) { return *this = *this + o; }

  void add_term(AtomId a, const Scalar& coef);

 private:
  SpacePtr space_;
  std::vector<Entry> terms_;  // sorted by (block, atom), no zero coefficients
};

Vec tensor(const Vec& u, const Vec& v);
Scalar inner(const Vec& u, const Vec& v);
inline Scalar norm2(const Vec& u) { return inner(u, u); }
// Exact vector equality; atoms may be linearly dependent, so this goes through the norm.
bool same_vector(const Vec& u, const Vec& v);
bool is_zero_vector(const Vec& u);
SymMatrixQ gram_of(const std::vector<Vec>& vs);
Vec import_vec(const SpacePtr& dst, const Vec& v, std::unordered_map<AtomId, AtomId>& amap,
               std::unordered_map<std::uint32_t, std::uint32_t>& fmap);
std::string vec_str(const Vec& v);

}  // namespace relaxforge
