#include "relaxforge/space.hpp"

#include <algorithm>

#include "relaxforge/error.hpp"

namespace relaxforge {

AtomId InnerProductSpace::add_unit(const std::string& name) {
  AtomId id = static_cast<AtomId>(atoms_.size());
  AtomInfo info{AtomKind::Unit, name};
  info.block = new_block();
  atoms_.push_back(std::move(info));
  by_name_.emplace(name, id);
  return id;
}

FlowerFamily InnerProductSpace::add_flower(const std::string& name, int d, const Rational& a,
                                           const Rational& b) {
  if (d < 1) fail(ErrorKind::InfeasibleFlower, "flower needs at least one member");
  // Gram (a-b)I + bJ has eigenvalues a-b and a+(d-1)b
  bool ok = a.sign() >= 0 && (d == 1 || (a >= b && (a + Rational(d - 1) * b).sign() >= 0));
  if (!ok) {
    fail(ErrorKind::InfeasibleFlower,
         "flower " + name + " with d=" + std::to_string(d) + " a=" + a.str() + " b=" + b.str() +
             " is not realizable");
  }
  FlowerInfo fi{name, d, a, b, (a + Rational(d - 1) * b).is_zero(), new_block(),
                static_cast<AtomId>(atoms_.size())};
  std::uint32_t fam = static_cast<std::uint32_t>(flowers_.size());
  FlowerFamily out{fam, {}, fi.sums_to_zero};
  for (int i = 0; i < d; ++i) {
    AtomId id = static_cast<AtomId>(atoms_.size());
    AtomInfo info{AtomKind::Flower, name + "[" + std::to_string(i) + "]", fam,
                  static_cast<std::uint32_t>(i)};
    info.block = fi.block;
    atoms_.push_back(info);
    by_name_.emplace(info.name, id);
    out.members.push_back(id);
  }
  flowers_.push_back(std::move(fi));
  return out;
}

std::uint32_t InnerProductSpace::composite_block(int tag, std::uint64_t x, std::uint64_t y) {
  auto key = std::make_tuple(tag, x, y);
  auto it = blocks_.find(key);
  if (it != blocks_.end()) return it->second;
  std::uint32_t b = new_block();
  blocks_.emplace(key, b);
  return b;
}

AtomId InnerProductSpace::tensor(AtomId l, AtomId r) {
  atom(l);
  atom(r);
  auto key = std::make_pair(l, r);
  auto it = tensors_.find(key);
  if (it != tensors_.end()) return it->second;
  AtomId id = static_cast<AtomId>(atoms_.size());
  AtomInfo info{AtomKind::Tensor, "(" + atoms_[l].name + ")x(" + atoms_[r].name + ")"};
  info.left = l;
  info.right = r;
  info.block = composite_block(0, atoms_[l].block, atoms_[r].block);
  atoms_.push_back(std::move(info));
  tensors_.emplace(key, id);
  return id;
}

AtomId InnerProductSpace::slot(std::uint32_t tag, AtomId a) {
  atom(a);
  auto key = std::make_pair(tag, a);
  auto it = slots_.find(key);
  if (it != slots_.end()) return it->second;
  AtomId id = static_cast<AtomId>(atoms_.size());
  AtomInfo info{AtomKind::Slot, std::to_string(tag) + ":" + atoms_[a].name, tag};
  info.left = a;
  info.block = composite_block(1, tag, atoms_[a].block);
  atoms_.push_back(std::move(info));
  slots_.emplace(key, id);
  return id;
}

const AtomInfo& InnerProductSpace::atom(AtomId a) const {
  if (a >= atoms_.size()) fail(ErrorKind::UnknownAtom, "unknown atom " + std::to_string(a));
  return atoms_[a];
}

Rational InnerProductSpace::gram(AtomId a, AtomId b) const {
  const AtomInfo& x = atom(a);
  const AtomInfo& y = atom(b);
  if (x.block != y.block) return Rational();
  switch (x.kind) {
    case AtomKind::Unit:
      return a == b ? Rational(1) : Rational();
    case AtomKind::Flower: {
      const FlowerInfo& f = flowers_[x.family];
      return a == b ? f.a : f.b;
    }
    case AtomKind::Tensor: {
      Rational l = gram(x.left, y.left);
      if (l.is_zero()) return l;
      return l * gram(x.right, y.right);
    }
    case AtomKind::Slot:
      return gram(x.left, y.left);
  }
  return Rational();
}

std::optional<AtomId> InnerProductSpace::find(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::string InnerProductSpace::atom_name(AtomId a) const { return atom(a).name; }

AtomId InnerProductSpace::import_atom(const InnerProductSpace& src, AtomId a,
                                      std::unordered_map<AtomId, AtomId>& amap,
                                      std::unordered_map<std::uint32_t, std::uint32_t>& fmap) {
  auto it = amap.find(a);
  if (it != amap.end()) return it->second;
  const AtomInfo& info = src.atom(a);
  AtomId out = 0;
  switch (info.kind) {
    case AtomKind::Unit:
      out = add_unit(info.name);
      break;
    case AtomKind::Flower: {
      auto fit = fmap.find(info.family);
      if (fit == fmap.end()) {
        const FlowerInfo& f = src.flowers_[info.family];
        FlowerFamily fam = add_flower(f.name, f.d, f.a, f.b);
        fit = fmap.emplace(info.family, fam.family).first;
        for (int i = 0; i < f.d; ++i) amap.emplace(f.first + static_cast<AtomId>(i), fam.members[i]);
      }
      out = flowers_[fit->second].first + info.index;
      break;
    }
    case AtomKind::Tensor: {
      AtomId l = import_atom(src, info.left, amap, fmap);
      AtomId r = import_atom(src, info.right, amap, fmap);
      out = tensor(l, r);
      break;
    }
    case AtomKind::Slot:
      out = slot(info.family, import_atom(src, info.left, amap, fmap));
      break;
  }
  amap[a] = out;
  return out;
}

FlowerFamily flower_space(InnerProductSpace& space, const std::string& name, int d, const Rational& a,
                          const Rational& b) {
  return space.add_flower(name, d, a, b);
}

namespace {

const SpacePtr& common_space(const Vec& a, const Vec& b) {
  if (!a.space()) return b.space();
  if (!b.space()) return a.space();
  if (a.space() != b.space()) fail(ErrorKind::SpaceMismatch, "vectors belong to different spaces");
  return a.space();
}

bool entry_less(std::uint32_t b1, AtomId a1, std::uint32_t b2, AtomId a2) {
  return b1 < b2 || (b1 == b2 && a1 < a2);
}

}  // namespace

Vec Vec::atom(const SpacePtr& space, AtomId a, const Scalar& coef) {
  Vec v(space);
  v.add_term(a, coef);
  return v;
}

void Vec::add_term(AtomId a, const Scalar& coef) {
  if (coef.is_zero()) return;
  if (!space_) fail(ErrorKind::SpaceMismatch, "vector has no space");
  std::uint32_t blk = space_->atom(a).block;
  auto it = std::lower_bound(terms_.begin(), terms_.end(), std::make_pair(blk, a),
                             [](const Entry& e, const std::pair<std::uint32_t, AtomId>& k) {
                               return entry_less(e.block, e.atom, k.first, k.second);
                             });
  if (it != terms_.end() && it->atom == a) {
    it->coef += coef;
    if (it->coef.is_zero()) terms_.erase(it);
  } else {
    terms_.insert(it, Entry{blk, a, coef});
  }
}

Vec Vec::operator-() const {
  Vec out = *this;
  for (auto& e : out.terms_) e.coef = -e.coef;
  return out;
}

Vec operator+(const Vec& a, const Vec& b) {
  Vec out(common_space(a, b));
  if (a.terms_.empty()) {
    out.terms_ = b.terms_;
    return out;
  }
  if (b.terms_.empty()) {
    out.terms_ = a.terms_;
    return out;
  }
  out.terms_.reserve(a.terms_.size() + b.terms_.size());
  std::size_t i = 0, j = 0;
  while (i < a.terms_.size() || j < b.terms_.size()) {
    if (j == b.terms_.size() ||
        (i < a.terms_.size() &&
         entry_less(a.terms_[i].block, a.terms_[i].atom, b.terms_[j].block, b.terms_[j].atom))) {
      out.terms_.push_back(a.terms_[i++]);
    } else if (i == a.terms_.size() ||
               entry_less(b.terms_[j].block, b.terms_[j].atom, a.terms_[i].block, a.terms_[i].atom)) {
      out.terms_.push_back(b.terms_[j++]);
    } else {
      Scalar c = a.terms_[i].coef + b.terms_[j].coef;
      if (!c.is_zero()) out.terms_.push_back(Vec::Entry{a.terms_[i].block, a.terms_[i].atom, std::move(c)});
      ++i;
      ++j;
    }
  }
  return out;
}

Vec operator-(const Vec& a, const Vec& b) { return a + (-b); }

Vec operator*(const Scalar& s, const Vec& v) {
  Vec out(v.space_);
  if (s.is_zero()) return out;
  out.terms_ = v.terms_;
  for (auto& e : out.terms_) e.coef = s * e.coef;
  return out;
}

Vec tensor(const Vec& u, const Vec& v) {
  const SpacePtr& sp = common_space(u, v);
  Vec out(sp);
  for (const auto& x : u.entries()) {
    for (const auto& y : v.entries()) out.add_term(sp->tensor(x.atom, y.atom), x.coef * y.coef);
  }
  return out;
}

Scalar inner(const Vec& u, const Vec& v) {
  Scalar acc;
  if (u.empty() || v.empty()) return acc;
  const InnerProductSpace& sp = *common_space(u, v);
  const auto& a = u.entries();
  const auto& b = v.entries();
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].block < b[j].block) {
      ++i;
    } else if (b[j].block < a[i].block) {
      ++j;
    } else {
      std::uint32_t blk = a[i].block;
      std::size_t i2 = i, j2 = j;
      while (i2 < a.size() && a[i2].block == blk) ++i2;
      while (j2 < b.size() && b[j2].block == blk) ++j2;
      for (std::size_t x = i; x < i2; ++x) {
        for (std::size_t y = j; y < j2; ++y) {
          Rational g = sp.gram(a[x].atom, b[y].atom);
          if (g.is_zero()) continue;
          Scalar p = a[x].coef * b[y].coef;
          if (!g.is_one()) p *= Scalar(g);
          acc += p;
        }
      }
      i = i2;
      j = j2;
    }
  }
  return acc;
}

bool same_vector(const Vec& u, const Vec& v) { return is_zero_vector(u - v); }

bool is_zero_vector(const Vec& u) { return u.empty() || norm2(u).is_zero(); }

SymMatrixQ gram_of(const std::vector<Vec>& vs) {
  SymMatrixQ g(vs.size());
  for (std::size_t i = 0; i < vs.size(); ++i) {
    for (std::size_t j = i; j < vs.size(); ++j) {
      Scalar s = inner(vs[i], vs[j]);
      auto q = s.as_rational();
      if (!q) {
        fail(ErrorKind::IrrationalGram, "Gram entry (" + std::to_string(i) + "," + std::to_string(j) +
                                            ") = " + s.str() + " is irrational");
      }
      g.set(i, j, *q);
    }
  }
  return g;
}

Vec import_vec(const SpacePtr& dst, const Vec& v, std::unordered_map<AtomId, AtomId>& amap,
               std::unordered_map<std::uint32_t, std::uint32_t>& fmap) {
  Vec out(dst);
  if (v.empty()) return out;
  for (const auto& e : v.entries()) out.add_term(dst->import_atom(*v.space(), e.atom, amap, fmap), e.coef);
  return out;
}

std::string vec_str(const Vec& v) {
  if (v.empty()) return "0";
  std::string out;
  for (const auto& e : v.entries()) {
    if (!out.empty()) out += " + ";
    out += "(" + e.coef.str() + ")*" + v.space()->atom_name(e.atom);
  }
  return out;
}

}  // namespace relaxforge
