#include "relaxforge/sym_matrix.hpp"

#include <numeric>
#include <utility>

#include <gmpxx.h>

#include "relaxforge/error.hpp"

namespace relaxforge {

SymMatrixQ SymMatrixQ::from_rows(const std::vector<std::vector<Rational>>& rows) {
  SymMatrixQ m(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.size()) fail(ErrorKind::DimensionMismatch, "matrix is not square");
    for (std::size_t j = 0; j < rows.size(); ++j) m.a_[i * m.n_ + j] = rows[i][j];
  }
  for (std::size_t i = 0; i < m.n_; ++i) {
    for (std::size_t j = i + 1; j < m.n_; ++j) {
      if (m(i, j) != m(j, i)) {
        fail(ErrorKind::NotSymmetric,
             "matrix is not symmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
  }
  return m;
}

SymMatrixQ SymMatrixQ::identity(std::size_t n) {
  SymMatrixQ m(n);
  for (std::size_t i = 0; i < n; ++i) m.a_[i * n + i] = 1;
  return m;
}

void SymMatrixQ::set(std::size_t i, std::size_t j, const Rational& v) {
  a_[i * n_ + j] = v;
  a_[j * n_ + i] = v;
}

void SymMatrixQ::add(std::size_t i, std::size_t j, const Rational& v) {
  a_[i * n_ + j] += v;
  if (i != j) a_[j * n_ + i] += v;
}

Rational SymMatrixQ::quad_form(const std::vector<Rational>& v) const {
  if (v.size() != n_) fail(ErrorKind::DimensionMismatch, "vector length does not match matrix");
  Rational s;
  for (std::size_t i = 0; i < n_; ++i) {
    if (v[i].is_zero()) continue;
    Rational row;
    for (std::size_t j = 0; j < n_; ++j) {
      if (!v[j].is_zero() && !a_[i * n_ + j].is_zero()) row += a_[i * n_ + j] * v[j];
    }
    s += v[i] * row;
  }
  return s;
}

std::vector<std::vector<Rational>> SymMatrixQ::rows() const {
  std::vector<std::vector<Rational>> out(n_, std::vector<Rational>(n_));
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) out[i][j] = a_[i * n_ + j];
  }
  return out;
}

namespace {

// Lifts z on positions >= k of the partially eliminated matrix back to the original coordinates.
NegWitness lift_witness(const SymMatrixQ& m, const std::vector<std::size_t>& perm,
                        const std::vector<std::vector<Rational>>& L, std::size_t k,
                        std::vector<Rational> y) {
  const std::size_t n = m.size();
  for (std::size_t jj = k; jj-- > 0;) {
    Rational s;
    for (std::size_t i = jj + 1; i < n; ++i) {
      if (!L[i][jj].is_zero() && !y[i].is_zero()) s += L[i][jj] * y[i];
    }
    y[jj] = -s;
  }
  NegWitness w;
  w.v.assign(n, Rational());
  for (std::size_t i = 0; i < n; ++i) w.v[perm[i]] = y[i];
  w.value = m.quad_form(w.v);
  return w;
}

}  // namespace

PsdCertificate psd_certificate(const SymMatrixQ& m) {
  const std::size_t n = m.size();
  std::vector<std::vector<Rational>> A = m.rows();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::vector<Rational>> L(n, std::vector<Rational>(n));
  std::vector<Rational> D(n);

  auto swap_pos = [&](std::size_t a, std::size_t b) {
    if (a == b) return;
    std::swap(A[a], A[b]);
    for (auto& row : A) std::swap(row[a], row[b]);
    std::swap(L[a], L[b]);
    for (auto& row : L) std::swap(row[a], row[b]);
    std::swap(perm[a], perm[b]);
  };

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = n;
    for (std::size_t i = k; i < n; ++i) {
      int s = A[i][i].sign();
      if (s < 0) {
        std::vector<Rational> y(n);
        y[i] = 1;
        return lift_witness(m, perm, L, k, std::move(y));
      }
      if (s > 0 && pivot == n) pivot = i;
    }
    if (pivot == n) {
      // zero diagonal: any nonzero off-diagonal entry gives an indefinite 2x2 block
      for (std::size_t i = k; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          if (!A[i][j].is_zero()) {
            std::vector<Rational> y(n);
            y[i] = 1;
            y[j] = A[i][j].sign() > 0 ? -1 : 1;
            return lift_witness(m, perm, L, k, std::move(y));
          }
        }
      }
      for (std::size_t i = k; i < n; ++i) L[i][i] = 1;
      break;
    }
    swap_pos(k, pivot);
    L[k][k] = 1;
    D[k] = A[k][k];
    Rational inv = D[k].inverse();
    for (std::size_t i = k + 1; i < n; ++i) {
      if (!A[i][k].is_zero()) L[i][k] = A[i][k] * inv;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      if (L[i][k].is_zero()) continue;
      for (std::size_t j = k + 1; j <= i; ++j) {
        if (A[k][j].is_zero()) continue;
        A[i][j] -= L[i][k] * A[k][j];
        if (i != j) A[j][i] = A[i][j];
      }
    }
    for (std::size_t i = k; i < n; ++i) {
      A[i][k] = 0;
      A[k][i] = 0;
    }
  }
  LdlFactor f{std::move(perm), std::move(L), std::move(D), 0};
  for (const auto& d : f.D) f.rank += d.is_zero() ? 0 : 1;
  return f;
}

bool verify_certificate(const SymMatrixQ& m, const PsdCertificate& cert) {
  const std::size_t n = m.size();
  if (const auto* w = std::get_if<NegWitness>(&cert)) {
    if (w->v.size() != n) return false;
    Rational val = m.quad_form(w->v);
    return val.sign() < 0 && val == w->value;
  }
  const auto& f = std::get<LdlFactor>(cert);
  if (f.perm.size() != n || f.L.size() != n || f.D.size() != n) return false;
  std::vector<bool> seen(n, false);
  for (auto p : f.perm) {
    if (p >= n || seen[p]) return false;
    seen[p] = true;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (f.D[i].sign() < 0 || f.L[i].size() != n || !f.L[i][i].is_one()) return false;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!f.L[i][j].is_zero()) return false;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      Rational s;
      for (std::size_t k = 0; k <= j; ++k) {
        if (f.D[k].is_zero() || f.L[i][k].is_zero() || f.L[j][k].is_zero()) continue;
        s += f.L[i][k] * f.D[k] * f.L[j][k];
      }
      if (s != m(f.perm[i], f.perm[j])) return false;
    }
  }
  return true;
}

std::size_t matrix_rank(const SymMatrixQ& m) {
  // Gaussian elimination over Q; independent of definiteness.
  std::vector<std::vector<Rational>> a = m.rows();
  const std::size_t n = m.size();
  std::size_t rank = 0;
  for (std::size_t c = 0; c < n && rank < n; ++c) {
    std::size_t p = rank;
    while (p < n && a[p][c].is_zero()) ++p;
    if (p == n) continue;
    std::swap(a[p], a[rank]);
    Rational inv = a[rank][c].inverse();
    for (std::size_t r = rank + 1; r < n; ++r) {
      if (a[r][c].is_zero()) continue;
      Rational f = a[r][c] * inv;
      for (std::size_t j = c; j < n; ++j) {
        if (!a[rank][j].is_zero()) a[r][j] -= f * a[rank][j];
      }
    }
    ++rank;
  }
  return rank;
}

}  // namespace relaxforge
