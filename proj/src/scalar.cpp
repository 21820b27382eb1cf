#include "relaxforge/scalar.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "relaxforge/error.hpp"

namespace relaxforge {

namespace {

std::uint64_t isqrt(std::uint64_t n) {
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<long double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

std::uint64_t mul_checked(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  if (__builtin_mul_overflow(a, b, &r) || r > (1ull << 62)) {
    fail(ErrorKind::Overflow, "radicand exceeds the supported range");
  }
  return r;
}

}  // namespace

void squarefree_split(std::uint64_t n, std::uint64_t& s, std::uint64_t& r) {
  s = 1;
  r = 1;
  if (n == 0) {
    s = 0;
    return;
  }
  std::uint64_t m = n;
  const std::uint64_t limit = 1000000;
  for (std::uint64_t p = 2; p <= limit && p * p <= m; p += (p == 2 ? 1 : 2)) {
    if (m % p) continue;
    int e = 0;
    while (m % p == 0) {
      m /= p;
      ++e;
    }
    for (int i = 0; i < e / 2; ++i) s *= p;
    if (e % 2) r *= p;
  }
  if (m > 1) {
    std::uint64_t q = isqrt(m);
    if (q * q == m) {
      s *= q;
    } else if (m < 1000000000000000000ull || m <= limit * limit) {
      // every prime factor left exceeds the trial bound, so m is squarefree here
      r *= m;
    } else {
      fail(ErrorKind::Unsupported, "cannot factor radicand " + std::to_string(n));
    }
  }
}

Scalar::Scalar(const Rational& q) {
  if (!q.is_zero()) terms_.push_back({q, 1});
}

Scalar Scalar::surd(const Rational& c, std::uint64_t r) {
  Scalar out;
  if (c.is_zero() || r == 0) return out;
  std::uint64_t s, f;
  squarefree_split(r, s, f);
  out.terms_.push_back({c * Rational(static_cast<std::int64_t>(s)), f});
  return out;
}

Scalar Scalar::sqrt(const Rational& q) {
  if (q.sign() < 0) fail(ErrorKind::NotPositive, "square root of negative rational " + q.str());
  if (q.is_zero()) return Scalar();
  mpz_class prod = q.numerator() * q.denominator();
  if (!mpz_fits_ulong_p(prod.get_mpz_t())) fail(ErrorKind::Overflow, "square root argument too large");
  return surd(Rational(mpq_class(mpz_class(1), q.denominator())), prod.get_ui());
}

Scalar Scalar::from_terms(Terms terms) {
  Scalar out;
  for (const auto& t : terms) out.add_term(t.coef, t.radicand);
  return out;
}

void Scalar::add_term(const Rational& c, std::uint64_t r) {
  if (c.is_zero()) return;
  auto it = std::lower_bound(terms_.begin(), terms_.end(), r,
                             [](const Term& t, std::uint64_t v) { return t.radicand < v; });
  if (it != terms_.end() && it->radicand == r) {
    it->coef += c;
    if (it->coef.is_zero()) terms_.erase(it);
  } else {
    terms_.insert(it, Term{c, r});
  }
}

std::optional<Rational> Scalar::as_rational() const {
  if (terms_.empty()) return Rational();
  if (terms_.size() == 1 && terms_[0].radicand == 1) return terms_[0].coef;
  return std::nullopt;
}

Rational Scalar::to_rational() const {
  auto q = as_rational();
  if (!q) fail(ErrorKind::NotRational, "value " + str() + " is irrational");
  return *q;
}

int Scalar::sign() const {
  if (terms_.empty()) return 0;
  if (terms_.size() == 1) return terms_[0].coef.sign();
  if (terms_.size() == 2) {
    const auto& a = terms_[0];
    const auto& b = terms_[1];
    if (a.coef.sign() == b.coef.sign()) return a.coef.sign();
    Rational la = a.coef * a.coef * Rational(static_cast<std::int64_t>(a.radicand));
    Rational lb = b.coef * b.coef * Rational(static_cast<std::int64_t>(b.radicand));
    return la > lb ? a.coef.sign() : b.coef.sign();
  }
  fail(ErrorKind::Unsupported, "exact sign needs at most two surd terms: " + str());
}

double Scalar::to_double() const {
  double v = 0;
  for (const auto& t : terms_) v += t.coef.to_double() * std::sqrt(static_cast<double>(t.radicand));
  return v;
}

std::string Scalar::str() const {
  if (terms_.empty()) return "0";
  std::string out;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (i) out += " + ";
    out += terms_[i].coef.str();
    if (terms_[i].radicand != 1) out += "*sqrt(" + std::to_string(terms_[i].radicand) + ")";
  }
  return out;
}

Scalar Scalar::operator-() const {
  Scalar out = *this;
  for (auto& t : out.terms_) t.coef = -t.coef;
  return out;
}

Scalar& Scalar::operator+=(const Scalar& o) {
  if (o.terms_.size() == 1) {
    add_term(o.terms_[0].coef, o.terms_[0].radicand);
    return *this;
  }
  return *this = *this + o;
}

Scalar operator+(const Scalar& a, const Scalar& b) {
  if (a.terms_.empty()) return b;
  if (b.terms_.empty()) return a;
  Scalar out;
  std::size_t i = 0, j = 0;
  while (i < a.terms_.size() || j < b.terms_.size()) {
    if (j == b.terms_.size() || (i < a.terms_.size() && a.terms_[i].radicand < b.terms_[j].radicand)) {
      out.terms_.push_back(a.terms_[i++]);
    } else if (i == a.terms_.size() || b.terms_[j].radicand < a.terms_[i].radicand) {
      out.terms_.push_back(b.terms_[j++]);
    } else {
      Rational c = a.terms_[i].coef + b.terms_[j].coef;
      if (!c.is_zero()) out.terms_.push_back({std::move(c), a.terms_[i].radicand});
      ++i;
      ++j;
    }
  }
  return out;
}

Scalar operator-(const Scalar& a, const Scalar& b) { return a + (-b); }

Scalar operator*(const Scalar& a, const Scalar& b) {
  Scalar out;
  if (a.terms_.empty() || b.terms_.empty()) return out;
  if (a.terms_.size() == 1 && b.terms_.size() == 1) {
    const auto& x = a.terms_[0];
    const auto& y = b.terms_[0];
    if (x.radicand == 1 || y.radicand == 1) {
      out.terms_.push_back({x.coef * y.coef, x.radicand * y.radicand});
      return out;
    }
  }
  for (const auto& x : a.terms_) {
    for (const auto& y : b.terms_) {
      std::uint64_t g = std::gcd(x.radicand, y.radicand);
      std::uint64_t r = mul_checked(x.radicand / g, y.radicand / g);
      Rational c = x.coef * y.coef;
      if (g != 1) c *= Rational(static_cast<std::int64_t>(g));
      out.add_term(c, r);
    }
  }
  return out;
}

Scalar operator/(const Scalar& a, const Scalar& b) {
  if (b.terms_.empty()) fail(ErrorKind::DivisionByZero, "division by zero scalar");
  if (b.terms_.size() != 1) {
    fail(ErrorKind::UnsupportedDivision, "division by multi-term scalar " + b.str());
  }
  const auto& d = b.terms_[0];
  // 1 / (c sqrt r) = sqrt(r) / (c r)
  Scalar inv;
  inv.terms_.push_back({(d.coef * Rational(static_cast<std::int64_t>(d.radicand))).inverse(), d.radicand});
  return a * inv;
}

std::ostream& operator<<(std::ostream& os, const Scalar& s) { return os << s.str(); }

}  // namespace relaxforge
