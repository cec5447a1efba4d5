#pragma once

#include <nlbt/inod.hpp>

#include <cmath>

namespace nlbt {

// Coefficients indexed by degree from 0.
using ScalarSeries = std::vector<double>;

inline ScalarSeries series_mul(const ScalarSeries& a, const ScalarSeries& b, int d) {
  ScalarSeries c(d + 1, 0.0);
  for (int i = 0; i <= d && i < static_cast<int>(a.size()); ++i)
    for (int j = 0; i + j <= d && j < static_cast<int>(b.size()); ++j) c[i + j] += a[i] * b[j];
  return c;
}

// log(s) for s(0) = 1, via s L' = s'.
inline ScalarSeries series_log1(const ScalarSeries& s, int d) {
  ScalarSeries L(d + 1, 0.0);
  auto at = [&](int j) { return j < static_cast<int>(s.size()) ? s[j] : 0.0; };
  for (int j = 1; j <= d; ++j) {
    double acc = j * at(j);
    for (int i = 1; i < j; ++i) acc -= i * L[i] * at(j - i);
    L[j] = acc / j;
  }
  return L;
}

// exp(L) for L(0) = 0, via E' = L' E.
inline ScalarSeries series_exp0(const ScalarSeries& L, int d) {
  ScalarSeries E(d + 1, 0.0);
  E[0] = 1.0;
  for (int j = 1; j <= d; ++j) {
    double acc = 0;
    for (int i = 1; i <= j && i < static_cast<int>(L.size()); ++i) acc += i * L[i] * E[j - i];
    E[j] = acc / j;
  }
  return E;
}

// Taylor coefficients a_1..a_d of z c(z)^{1/4}; a[0] = 0.
inline ScalarSeries inverse_scaling_series(const ScalarSeries& c, int d) {
  if (c.empty() || !(c[0] > 0.0)) throw hypothesis_error("squared singular value function has nonpositive constant term");
  ScalarSeries s(c.size());
  for (std::size_t j = 0; j < c.size(); ++j) s[j] = c[j] / c[0];
  ScalarSeries L = series_log1(s, d - 1);
  for (double& v : L) v *= 0.25;
  const ScalarSeries root = series_exp0(L, d - 1);
  ScalarSeries a(d + 1, 0.0);
  const double c4 = std::pow(c[0], 0.25);
  for (int k = 1; k <= d; ++k) a[k] = c4 * root[k - 1];
  return a;
}

// A with A(a(z)) = z + O(z^{d+1}); a[0] must vanish.
inline ScalarSeries series_reversion(const ScalarSeries& a, int d) {
  if (a.size() < 2 || a[1] == 0.0) throw std::invalid_argument("series_reversion: zero leading coefficient");
  if (a[0] != 0.0) throw std::invalid_argument("series_reversion: series has a constant term");
  ScalarSeries A(d + 1, 0.0);
  // powers[j] = a(z)^j truncated to degree d
  std::vector<ScalarSeries> powers(d + 1);
  powers[1] = ScalarSeries(d + 1, 0.0);
  for (int i = 0; i <= d && i < static_cast<int>(a.size()); ++i) powers[1][i] = a[i];
  for (int j = 2; j <= d; ++j) powers[j] = series_mul(powers[j - 1], powers[1], d);
  for (int m = 1; m <= d; ++m) {
    double acc = (m == 1) ? 1.0 : 0.0;
    for (int j = 1; j < m; ++j) acc -= A[j] * powers[j][m];
    A[m] = acc / powers[m][m];
  }
  return A;
}

inline double eval_series(const ScalarSeries& s, double z) {
  double r = 0;
  for (int j = static_cast<int>(s.size()) - 1; j >= 0; --j) r = r * z + s[j];
  return r;
}

// Diagonal polynomial map phi with A_k(i, column of z_i^{(k)}) = As[i][k].
inline PolyVectorField assemble_scaling_coeffs(const std::vector<ScalarSeries>& As, Index n, int d) {
  if (static_cast<Index>(As.size()) != n) throw std::invalid_argument("assemble_scaling_coeffs: need n series");
  PolyVectorField P(n, n, d);
  for (int k = 1; k <= d; ++k) {
    const Index stride = (n == 1) ? 0 : (ipow(n, k) - 1) / (n - 1);
    for (Index i = 0; i < n; ++i)
      if (k < static_cast<int>(As[i].size())) P.coeffs[k](i, i * stride) = As[i][k];
  }
  return P;
}

struct ScalingResult {
  std::vector<ScalarSeries> a;  // phi^{-1} components
  std::vector<ScalarSeries> A;  // phi components
  PolyVectorField phi;
};

inline ScalingResult compute_scaling(const SqSingularValueFns& sq, int d) {
  ScalingResult r;
  const Index n = sq.size();
  for (Index i = 0; i < n; ++i) {
    ScalarSeries c(sq.c[i].data(), sq.c[i].data() + sq.c[i].size());
    r.a.push_back(inverse_scaling_series(c, d));
    r.A.push_back(series_reversion(r.a.back(), d));
  }
  r.phi = assemble_scaling_coeffs(r.A, n, d);
  return r;
}

// Tbar = T o phi, symmetrized.
inline PolyVectorField compose_balancing(const PolyVectorField& T, const PolyVectorField& phi, int d) {
  return symmetrize(compose(T, phi, d));
}

}  // namespace nlbt
