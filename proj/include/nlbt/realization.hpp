#pragma once

#include <nlbt/system.hpp>

namespace nlbt {

// Coefficients V̄ with  dTbar/dz̄ V̄(z̄) = V(Tbar(z̄))  through degree d.
// Handles a degree-0 term (input columns); Tbar must be symmetrized.
inline PolyVectorField balanced_field(const PolyVectorField& V, const PolyVectorField& Tbar, const Matrix& T1_inv,
                                      int d) {
  if (V.base != Tbar.rows || T1_inv.rows() != Tbar.base)
    throw std::invalid_argument("balanced_field: dimension mismatch");
  const Index r = Tbar.base;
  PolyVectorField out(r, r, d);
  if (V.degree() >= 0) out.coeffs[0] = T1_inv * V.coeffs[0];
  for (int k = 1; k <= d; ++k) {
    Matrix acc = Matrix::Zero(V.rows, ipow(r, k));
    for (int j = 1; j <= std::min(k, V.degree()); ++j) acc += tensor_sum_left(V.coeffs[j], Tbar, j, k);
    for (int i = 2; i <= std::min(k + 1, Tbar.degree()); ++i) {
      const Matrix& Vi = out.coeffs[k - i + 1];
      if (Vi.isZero(0.0)) continue;
      acc -= kway_lyap_left<double>(Tbar.coeffs[i], Vi, i);
    }
    out.coeffs[k] = T1_inv * acc;
  }
  return out;
}

inline PolyVectorField balanced_drift(const PolyVectorField& F, const PolyVectorField& Tbar, const Matrix& T1_inv,
                                      int d) {
  return balanced_field(F, Tbar, T1_inv, d);
}

inline std::vector<PolyVectorField> balanced_input(const std::vector<PolyVectorField>& G, const PolyVectorField& Tbar,
                                                   const Matrix& T1_inv, int d) {
  std::vector<PolyVectorField> out;
  for (const auto& g : G) out.push_back(balanced_field(g, Tbar, T1_inv, d));
  return out;
}

inline PolyVectorField balanced_output(const PolyVectorField& H, const PolyVectorField& Tbar, int d) {
  return compose(H, Tbar, d);
}

// P with P(Tbar(z̄)) = z̄ + O(d+1).
inline PolyVectorField inverse_transform_coeffs(const PolyVectorField& Tbar, const Matrix& T1_inv, int d) {
  const Index n = Tbar.rows;
  PolyVectorField P(Tbar.base, n, d);
  if (d >= 1) P.coeffs[1] = T1_inv;
  for (int i = 2; i <= d; ++i) {
    Matrix acc = Matrix::Zero(Tbar.base, ipow(Tbar.base, i));
    for (int j = 1; j < i; ++j) acc -= tensor_sum_left(P.coeffs[j], Tbar, j, i);
    std::vector<const Matrix*> f(i, &T1_inv);
    P.coeffs[i] = kron_chain_left(acc, f);
  }
  return P;
}

struct BalancedRealization {
  ControlAffineSystem sys;
  PolyVectorField Tbar;
  Matrix Tbar1_inv;
  PolyVectorField P;
};

// F̄ and H̄ to degree d_rom, Ḡ to degree d_rom - 1.
inline BalancedRealization build_realization(const ControlAffineSystem& sys, const PolyVectorField& Tbar,
                                             const Matrix& Tbar1_inv, const PolyVectorField& P, int d_rom) {
  if (d_rom < 1) throw std::invalid_argument("ROM degree must be at least 1");
  BalancedRealization br;
  br.Tbar = Tbar;
  br.Tbar1_inv = Tbar1_inv;
  br.P = P;
  br.sys.n = sys.n;
  br.sys.m = sys.m;
  br.sys.p = sys.p;
  br.sys.f = balanced_drift(sys.f, Tbar, Tbar1_inv, d_rom);
  br.sys.g = balanced_input(sys.g, Tbar, Tbar1_inv, d_rom - 1);
  br.sys.h = balanced_output(sys.h, Tbar, d_rom);
  return br;
}

struct ReducedOrderModel {
  Index r = 0;
  ControlAffineSystem sys;
  PolyVectorField T;  // reduced transform x ~ T(x_r)
  PolyVectorField P;  // reduced initial-condition map x_r0 = P(x0)
  Vector x0;

  Vector reduce_state(const Vector& x) const { return eval_poly(P, x); }
};

inline PolyVectorField slice_field(const PolyVectorField& V, Index rows, Index r) {
  PolyVectorField out(rows, r, V.degree());
  for (int k = 0; k <= V.degree(); ++k)
    out.coeffs[k] = restrict_columns(V.coeffs[k].topRows(rows), V.base, k, r);
  return out;
}

inline ReducedOrderModel build_rom(const BalancedRealization& br, Index r, const Vector& x0 = Vector()) {
  const Index n = br.sys.n;
  if (r < 1 || r > n) throw std::invalid_argument("build_rom: r out of range");
  ReducedOrderModel rom;
  rom.r = r;
  rom.sys.n = r;
  rom.sys.m = br.sys.m;
  rom.sys.p = br.sys.p;
  rom.sys.f = slice_field(br.sys.f, r, r);
  for (const auto& g : br.sys.g) rom.sys.g.push_back(slice_field(g, r, r));
  rom.sys.h = slice_field(br.sys.h, br.sys.p, r);
  rom.T = truncate_transform(br.Tbar, r);
  rom.P = PolyVectorField(r, br.P.base, br.P.degree());
  for (int k = 0; k <= br.P.degree(); ++k) rom.P.coeffs[k] = br.P.coeffs[k].topRows(r);
  if (x0.size() == n) rom.x0 = rom.reduce_state(x0);
  return rom;
}

// The same system in coordinates x' = diag(s) x, s_i = +-1.
inline ControlAffineSystem flip_state_signs(const ControlAffineSystem& sys, const Vector& s) {
  ControlAffineSystem out = sys;
  out.f = flip_inputs(sys.f, s);
  for (auto& c : out.f.coeffs) c = s.asDiagonal() * c;
  for (auto& g : out.g) {
    g = flip_inputs(g, s);
    for (auto& c : g.coeffs) c = s.asDiagonal() * c;
  }
  out.h = flip_inputs(sys.h, s);
  return out;
}

}  // namespace nlbt
