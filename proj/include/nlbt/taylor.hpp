#pragma once

#include <nlbt/kron.hpp>

#include <cmath>
#include <map>
#include <memory>

namespace nlbt {

// Monomials of total degree <= degree in nvars variables, with a product table.
class JetSpace {
 public:
  JetSpace(int nvars, int degree) : nvars_(nvars), degree_(degree) {
    std::vector<int> e(nvars, 0);
    enumerate(e, 0, 0);
    for (std::size_t i = 0; i < monos_.size(); ++i) index_[monos_[i]] = static_cast<int>(i);
    const std::size_t M = monos_.size();
    product_.resize(M);
    for (std::size_t a = 0; a < M; ++a)
      for (std::size_t b = 0; b < M; ++b) {
        if (total(a) + total(b) > degree_) continue;
        std::vector<int> s(nvars);
        for (int v = 0; v < nvars; ++v) s[v] = monos_[a][v] + monos_[b][v];
        product_[a].push_back({static_cast<int>(b), index_.at(s)});
      }
  }

  int nvars() const { return nvars_; }
  int degree() const { return degree_; }
  std::size_t size() const { return monos_.size(); }
  const std::vector<int>& mono(std::size_t i) const { return monos_[i]; }
  int total(std::size_t i) const {
    int t = 0;
    for (int e : monos_[i]) t += e;
    return t;
  }
  int var_index(int v) const {
    std::vector<int> e(nvars_, 0);
    e[v] = 1;
    return index_.at(e);
  }
  const std::vector<std::pair<int, int>>& products(std::size_t a) const { return product_[a]; }

 private:
  void enumerate(std::vector<int>& e, int var, int used) {
    if (var == nvars_) {
      monos_.push_back(e);
      return;
    }
    for (int p = 0; p + used <= degree_; ++p) {
      e[var] = p;
      enumerate(e, var + 1, used + p);
    }
    e[var] = 0;
  }

  int nvars_, degree_;
  std::vector<std::vector<int>> monos_;
  std::map<std::vector<int>, int> index_;
  std::vector<std::vector<std::pair<int, int>>> product_;
};

// Truncated multivariate Taylor polynomial.
struct Jet {
  std::shared_ptr<const JetSpace> sp;
  Vector c;

  Jet() = default;
  Jet(std::shared_ptr<const JetSpace> s, double v = 0.0) : sp(std::move(s)), c(Vector::Zero(sp->size())) {
    c(0) = v;  // the zero monomial is enumerated first
  }
  static Jet variable(std::shared_ptr<const JetSpace> s, int v) {
    Jet j(s);
    j.c(s->var_index(v)) = 1.0;
    return j;
  }
  double constant() const { return c(0); }
};

inline Jet operator+(const Jet& a, const Jet& b) { Jet r = a; r.c += b.c; return r; }
inline Jet operator-(const Jet& a, const Jet& b) { Jet r = a; r.c -= b.c; return r; }
inline Jet operator-(const Jet& a) { Jet r = a; r.c = -r.c; return r; }
inline Jet operator*(double s, const Jet& a) { Jet r = a; r.c *= s; return r; }
inline Jet operator*(const Jet& a, double s) { return s * a; }
inline Jet operator+(const Jet& a, double s) { Jet r = a; r.c(0) += s; return r; }
inline Jet operator+(double s, const Jet& a) { return a + s; }
inline Jet operator-(const Jet& a, double s) { return a + (-s); }
inline Jet operator-(double s, const Jet& a) { return (-a) + s; }
inline Jet operator*(const Jet& a, const Jet& b) {
  Jet r(a.sp);
  for (std::size_t i = 0; i < a.sp->size(); ++i) {
    if (a.c(i) == 0.0) continue;
    for (const auto& [j, k] : a.sp->products(i)) r.c(k) += a.c(i) * b.c(j);
  }
  return r;
}

// Sum_k coef[k] u^k for u without constant term.
inline Jet jet_series(const Jet& u, const std::vector<double>& coef) {
  Jet r(u.sp, coef.empty() ? 0.0 : coef[0]);
  Jet pw(u.sp, 1.0);
  for (std::size_t k = 1; k < coef.size(); ++k) {
    pw = pw * u;
    r = r + coef[k] * pw;
  }
  return r;
}

inline Jet sin(const Jet& a) {
  const double a0 = a.constant();
  const Jet u = a - a0;
  const int d = a.sp->degree();
  std::vector<double> cs(d + 1, 0.0), sn(d + 1, 0.0);
  double fact = 1.0;
  for (int k = 0; k <= d; ++k) {
    if (k > 0) fact *= k;
    if (k % 2 == 0) cs[k] = ((k / 2) % 2 ? -1.0 : 1.0) / fact;
    else sn[k] = (((k - 1) / 2) % 2 ? -1.0 : 1.0) / fact;
  }
  return std::sin(a0) * jet_series(u, cs) + std::cos(a0) * jet_series(u, sn);
}

inline Jet cos(const Jet& a) {
  const double a0 = a.constant();
  const Jet u = a - a0;
  const int d = a.sp->degree();
  std::vector<double> cs(d + 1, 0.0), sn(d + 1, 0.0);
  double fact = 1.0;
  for (int k = 0; k <= d; ++k) {
    if (k > 0) fact *= k;
    if (k % 2 == 0) cs[k] = ((k / 2) % 2 ? -1.0 : 1.0) / fact;
    else sn[k] = (((k - 1) / 2) % 2 ? -1.0 : 1.0) / fact;
  }
  return std::cos(a0) * jet_series(u, cs) - std::sin(a0) * jet_series(u, sn);
}

inline Jet reciprocal(const Jet& a) {
  const double a0 = a.constant();
  if (a0 == 0.0) throw std::domain_error("reciprocal of a jet with zero constant term");
  const Jet u = (1.0 / a0) * (a - a0);
  std::vector<double> geo(a.sp->degree() + 1);
  for (std::size_t k = 0; k < geo.size(); ++k) geo[k] = (k % 2 ? -1.0 : 1.0) / a0;
  return jet_series(u, geo);
}

inline Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }
inline Jet operator/(const Jet& a, double s) { return (1.0 / s) * a; }
inline Jet operator/(double s, const Jet& a) { return s * reciprocal(a); }

// Kronecker coefficients of scalar jets (one per output row), symmetrized.
inline PolyVectorField jets_to_poly(const std::vector<Jet>& rows, int min_degree = 0) {
  const auto& sp = *rows.at(0).sp;
  const Index n = sp.nvars();
  PolyVectorField P(static_cast<Index>(rows.size()), n, sp.degree());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t i = 0; i < sp.size(); ++i) {
      const int k = sp.total(i);
      if (k < min_degree || rows[r].c(i) == 0.0) continue;
      std::vector<int> idx;
      for (int v = 0; v < n; ++v)
        for (int e = 0; e < sp.mono(i)[v]; ++e) idx.push_back(v);
      P.coeffs[k](static_cast<Index>(r), multi_to_col(idx, n)) = rows[r].c(i);
    }
  return symmetrize(P);
}

}  // namespace nlbt
