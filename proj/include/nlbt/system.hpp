#pragma once

#include <nlbt/kron.hpp>

namespace nlbt {

// xdot = f(x) + sum_l g_l(x) u_l,  y = h(x).
struct ControlAffineSystem {
  Index n = 0, m = 0, p = 0;
  PolyVectorField f;
  std::vector<PolyVectorField> g;  // one field per input column, degree-0 term included
  PolyVectorField h;

  ControlAffineSystem() = default;
  ControlAffineSystem(Index n_, Index m_, Index p_, int df, int dg, int dh)
      : n(n_), m(m_), p(p_), f(n_, n_, df), g(m_, PolyVectorField(n_, n_, dg)), h(p_, n_, dh) {}

  int degree() const {
    int d = std::max(f.degree(), h.degree());
    for (const auto& gi : g) d = std::max(d, gi.degree());
    return d;
  }

  Matrix A() const { return f.coeff_or_zero(1); }
  Matrix C() const { return h.coeff_or_zero(1); }
  Matrix B() const {
    Matrix Bm(n, m);
    for (Index l = 0; l < m; ++l) Bm.col(l) = g[l].coeff_or_zero(0);
    return Bm;
  }

  // Stacked G_k = [G_k^(1) ... G_k^(m)].
  Matrix G_stacked(int k) const {
    const Index c = ipow(n, k);
    Matrix Gk(n, m * c);
    for (Index l = 0; l < m; ++l) Gk.middleCols(l * c, c) = g[l].coeff_or_zero(k);
    return Gk;
  }

  Vector drift(const Vector& x) const { return eval_poly(f, x); }
  Matrix input_matrix(const Vector& x) const {
    Matrix Gx(n, m);
    for (Index l = 0; l < m; ++l) Gx.col(l) = eval_poly(g[l], x);
    return Gx;
  }
  Vector output(const Vector& x) const { return eval_poly(h, x); }
  Vector rhs(const Vector& x, const Vector& u) const {
    Vector dx = drift(x);
    for (Index l = 0; l < m; ++l)
      if (u(l) != 0.0) dx += eval_poly(g[l], x) * u(l);
    return dx;
  }

  void check() const {
    f.check();
    h.check();
    if (f.rows != n || f.base != n || h.base != n || h.rows != p || static_cast<Index>(g.size()) != m)
      throw std::invalid_argument("ControlAffineSystem: inconsistent dimensions");
    for (const auto& gi : g) {
      gi.check();
      if (gi.rows != n || gi.base != n)
        throw std::invalid_argument("ControlAffineSystem: inconsistent input column");
    }
    if (f.has_constant()) throw std::invalid_argument("ControlAffineSystem: drift has a constant term");
  }
};

}  // namespace nlbt
