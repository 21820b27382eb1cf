#pragma once

#include <random>
#include <vector>

#include "doctest.h"
#include "relaxforge/error.hpp"
#include "relaxforge/qphp.hpp"
#include "relaxforge/space.hpp"

namespace testsupport {

using namespace relaxforge;

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::Usage;
}

inline Rational q(const char* s) { return Rational::parse(s); }

inline Vec coords(const SpacePtr& sp, const std::vector<AtomId>& basis, const std::vector<Rational>& c) {
  Vec v(sp);
  for (std::size_t k = 0; k < c.size(); ++k) v.add_term(basis[k], Scalar(c[k]));
  return v;
}

inline Rational dot(const std::vector<Rational>& a, const std::vector<Rational>& b) {
  Rational s;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Rational point on the unit sphere via inverse stereographic projection.
inline std::vector<Rational> unit_vector(std::mt19937& rng, std::size_t dim) {
  std::uniform_int_distribution<int> e(-4, 4), d(1, 3);
  std::vector<Rational> t(dim - 1);
  Rational n2;
  for (auto& x : t) {
    x = Rational(e(rng), d(rng));
    n2 += x * x;
  }
  std::vector<Rational> v;
  for (auto& x : t) v.push_back(Rational(2) * x / (Rational(1) + n2));
  v.push_back((Rational(1) - n2) / (Rational(1) + n2));
  return v;
}

// Random pigeon family: rational unit initial states in an orthonormal basis,
// each split by projecting onto groups of a random rational orthogonal basis.
inline PigeonFamily random_family(std::mt19937& rng, int p, int h, bool identical) {
  const std::size_t dim = static_cast<std::size_t>(h) + 2;
  PigeonFamily f{p, h, InnerProductSpace::create(), {}, {}};
  std::vector<AtomId> basis;
  for (std::size_t k = 0; k < dim; ++k) basis.push_back(f.space->add_unit("e" + std::to_string(k)));
  std::vector<Rational> shared = unit_vector(rng, dim);
  std::uniform_int_distribution<int> e(-3, 3);
  std::uniform_int_distribution<int> hole(0, h - 1);
  for (int i = 0; i < p; ++i) {
    std::vector<Rational> v = identical ? shared : unit_vector(rng, dim);
    std::vector<std::vector<Rational>> ortho;
    while (ortho.size() < dim) {
      std::vector<Rational> w(dim);
      for (auto& x : w) x = e(rng);
      for (const auto& u : ortho) {
        Rational c = dot(w, u) / dot(u, u);
        for (std::size_t k = 0; k < dim; ++k) w[k] -= c * u[k];
      }
      if (!dot(w, w).is_zero()) ortho.push_back(w);
    }
    std::vector<std::vector<Rational>> parts(h, std::vector<Rational>(dim));
    for (std::size_t b = 0; b < dim; ++b) {
      int j = b < static_cast<std::size_t>(h) ? static_cast<int>(b) : hole(rng);
      Rational c = dot(v, ortho[b]) / dot(ortho[b], ortho[b]);
      for (std::size_t k = 0; k < dim; ++k) parts[j][k] += c * ortho[b][k];
    }
    f.initial.push_back(coords(f.space, basis, v));
    std::vector<Vec> pv;
    for (auto& part : parts) pv.push_back(coords(f.space, basis, part));
    f.parts.push_back(std::move(pv));
  }
  return f;
}

}  // namespace testsupport
