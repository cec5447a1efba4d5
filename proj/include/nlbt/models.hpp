#pragma once

#include <nlbt/energy.hpp>
#include <nlbt/inod.hpp>
#include <nlbt/system.hpp>
#include <nlbt/taylor.hpp>

#include <cmath>
#include <random>

namespace nlbt {

inline ControlAffineSystem two_dim_illustrative() {
  const double a = (std::sqrt(3.0) + std::sqrt(2.0)) * (std::sqrt(3.0) + 2.0);
  const double r2 = std::sqrt(2.0), r3 = std::sqrt(3.0);
  ControlAffineSystem s(2, 1, 1, 2, 1, 2);
  s.f[1] << -a * a, -2 * a, 0, -1;
  s.f[2](0, 3) = -(a * a - 2);  // x2^2
  s.g[0][0] << r2 * a, r2;
  s.g[0][1](0, 1) = -2 * r2;  // x2 in the first component
  s.h[1] << 3 * a / r3, (a - 2 * r2) / r3;
  s.h[2](0, 3) = 3 * a / r3;
  return s;
}

struct PendulumParams {
  double G = 10, L = 20, m = 1.0 / 40, b = 2, k = 1;
  double input_gain() const { return 1.0 / (m * L * L); }  // torque enters as u / (m L^2)
};

template <class S>
std::vector<S> pendulum_rhs(const S& x1, const S& x2, const PendulumParams& p = {}) {
  const double mL2 = p.m * p.L * p.L;
  using std::sin;
  return {x2, -(p.G / p.L) * sin(x1) - (p.k / mL2) * x1 - (p.b / mL2) * x2};
}

inline ControlAffineSystem pendulum(int d) {
  if (d < 1) throw std::invalid_argument("pendulum: Taylor degree must be positive");
  auto sp = std::make_shared<JetSpace>(2, d);
  const Jet x1 = Jet::variable(sp, 0), x2 = Jet::variable(sp, 1);
  const PendulumParams p;
  ControlAffineSystem s(2, 1, 1, d, 0, 1);
  s.f = jets_to_poly(pendulum_rhs(x1, x2, p), 1);
  s.g[0][0] << 0, p.input_gain();
  s.h[1] << 1, 0;
  return s;
}

// Linear model with a non-normal state matrix, balanced and then warped by
// Psi(x) = (x1, x2, x3 + x1^2 + x2^2 + x1^3).
inline ControlAffineSystem three_dim_illustrative() {
  Matrix A(3, 3);
  A << -1, 0, 100, 0, -2, 100, 0, 0, -5;
  const Matrix B = Matrix::Ones(3, 1), C = Matrix::Ones(1, 3);
  const Matrix BBt = B * B.transpose(), CtC = C.transpose() * C;
  const Vector wc = solve_kway_lyapunov(A, 2, -Eigen::Map<const Vector>(BBt.data(), 9));
  const Vector wo = solve_kway_lyapunov(A.transpose(), 2, -Eigen::Map<const Vector>(CtC.data(), 9));
  const LinearBalancing lb = square_root_balancing(Eigen::Map<const Matrix>(wc.data(), 3, 3),
                                                   Eigen::Map<const Matrix>(wo.data(), 3, 3));
  const Vector rs = lb.hankel.cwiseSqrt();
  Matrix Tb = lb.T1 * rs.cwiseInverse().asDiagonal();
  Matrix Tb_inv = rs.asDiagonal() * lb.T1_inv;
  Matrix Ab = Tb_inv * A * Tb, Bb = Tb_inv * B, Cb = C * Tb;
  for (Index i = 0; i < 3; ++i)
    if (Bb(i, 0) < 0) {
      Ab.row(i) *= -1;
      Ab.col(i) *= -1;
      Bb.row(i) *= -1;
      Cb.col(i) *= -1;
    }

  auto sp = std::make_shared<JetSpace>(3, 5);
  const Jet x1 = Jet::variable(sp, 0), x2 = Jet::variable(sp, 1), x3 = Jet::variable(sp, 2);
  const std::vector<Jet> z = {x1, x2, x3 + x1 * x1 + x2 * x2 + x1 * x1 * x1};
  auto lin = [&](const Matrix& M, Index row) {
    Jet r(sp);
    for (Index j = 0; j < 3; ++j) r = r + M(row, j) * z[j];
    return r;
  };
  const Jet dz1 = lin(Ab, 0), dz2 = lin(Ab, 1), dz3 = lin(Ab, 2);
  const Jet w1 = 2.0 * x1 + 3.0 * x1 * x1, w2 = 2.0 * x2;
  ControlAffineSystem s(3, 1, 1, 5, 2, 3);
  s.f = jets_to_poly({dz1, dz2, dz3 - w1 * dz1 - w2 * dz2}, 1);
  const Jet g3 = Bb(2, 0) - w1 * Bb(0, 0) - w2 * Bb(1, 0);
  PolyVectorField g = jets_to_poly({Jet(sp, Bb(0, 0)), Jet(sp, Bb(1, 0)), g3}, 0);
  g.resize_degree(2);
  s.g[0] = g;
  PolyVectorField h = jets_to_poly({lin(Cb, 0)}, 1);
  h.resize_degree(3);
  s.h = h;
  return s;
}

struct DoublePendulumParams {
  double g = 9.8, m1 = 1, m2 = 1, l1 = 1, l2 = 1, mu1 = 1, mu2 = 1;
};

// Returns (xdot drift (4), input column (4), output (2)).
template <class S>
std::array<std::vector<S>, 3> double_pendulum_parts(const std::vector<S>& x, const DoublePendulumParams& p = {}) {
  using std::cos;
  using std::sin;
  const S c2 = cos(x[1]), s2 = sin(x[1]);
  const S s1 = sin(x[0]), s12 = sin(x[0] + x[1]);
  const S M11 = (p.m1 * p.l1 * p.l1 + p.m2 * p.l1 * p.l1 + p.m2 * p.l2 * p.l2) + (2 * p.m2 * p.l1 * p.l2) * c2;
  const S M12 = p.m2 * p.l2 * p.l2 + (p.m2 * p.l1 * p.l2) * c2;
  const double M22 = p.m2 * p.l2 * p.l2;
  const S dM11 = (-2 * p.m2 * p.l1 * p.l2) * s2;
  const S dM12 = (-p.m2 * p.l1 * p.l2) * s2;
  const S& w1 = x[2];
  const S& w2 = x[3];
  // dL/dq with V = -(m1 + m2) g l1 cos x1 - m2 g l2 cos(x1 + x2)
  const S dL1 = (-(p.m1 + p.m2) * p.g * p.l1) * s1 - (p.m2 * p.g * p.l2) * s12;
  const S dL2 = 0.5 * (dM11 * w1 * w1 + 2.0 * dM12 * w1 * w2) - (p.m2 * p.g * p.l2) * s12;
  // Mdot qdot = x4 dM/dx2 qdot
  const S r1 = dL1 - w2 * (dM11 * w1 + dM12 * w2) - p.mu1 * w1;
  const S r2 = dL2 - w2 * (dM12 * w1) - p.mu2 * w2;
  const S det = M11 * M22 - M12 * M12;
  const S inv_det = 1.0 / det;
  const S a1 = (M22 * r1 - M12 * r2) * inv_det;
  const S a2 = (M11 * r2 - M12 * r1) * inv_det;
  const S b1 = M22 * inv_det;
  const S b2 = -M12 * inv_det;
  const S zero = 0.0 * w1;
  const S y1 = p.l1 * s1 + p.l2 * s12;
  const S y2 = p.l1 * (1.0 - cos(x[0])) + p.l2 * (1.0 - cos(x[0] + x[1]));
  return {std::vector<S>{w1, w2, a1, a2}, std::vector<S>{zero, zero, b1, b2}, std::vector<S>{y1, y2}};
}

inline ControlAffineSystem double_pendulum(int d) {
  if (d < 1 || d > 7) throw std::invalid_argument("double_pendulum: degree must be in 1..7");
  auto sp = std::make_shared<JetSpace>(4, d);
  std::vector<Jet> x;
  for (int v = 0; v < 4; ++v) x.push_back(Jet::variable(sp, v));
  const auto parts = double_pendulum_parts(x);
  ControlAffineSystem s;
  s.n = 4;
  s.m = 1;
  s.p = 2;
  s.f = jets_to_poly(parts[0], 1);
  s.g = {jets_to_poly(parts[1], 0)};
  s.h = jets_to_poly(parts[2], 1);
  return s;
}

inline ControlAffineSystem beam_single_element() {
  ControlAffineSystem s(6, 6, 6, 3, 0, 1);
  auto c2 = [](int i, int j) { return multi_to_col({i, j}, 6); };
  auto c3 = [](int i, int j, int k) { return multi_to_col({i, j, k}, 6); };
  Matrix& F1 = s.f[1];
  Matrix& F2 = s.f[2];
  Matrix& F3 = s.f[3];
  F1(0, 3) = 1;
  F1(1, 4) = 1;
  F1(2, 5) = 1;
  // x4
  F1(3, 0) = -7.88e7;
  F1(3, 3) = -7880;
  F2(3, c2(1, 1)) = -4.72e7;
  F2(3, c2(1, 2)) = 7.88e6;
  F2(3, c2(2, 2)) = -5.25e6;
  // x5
  F1(4, 1) = 1.32e7;
  F1(4, 2) = -1.01e7;
  F1(4, 4) = 1320;
  F1(4, 5) = -1010;
  F2(4, c2(0, 1)) = -2.05e8;
  F2(4, c2(0, 2)) = -2e8;
  F3(4, c3(1, 2, 2)) = -5.91e7;
  F3(4, c3(1, 1, 2)) = -1.01e8;
  F3(4, c3(1, 1, 1)) = -1.01e8;
  F3(4, c3(2, 2, 2)) = -5.06e7;
  // x6
  F1(5, 1) = 1.06e8;
  F1(5, 2) = -7.75e7;
  F1(5, 4) = 1.06e4;
  F1(5, 5) = -7750;
  F2(5, c2(0, 1)) = -8.5e8;
  F2(5, c2(0, 2)) = -1.46e9;
  F3(5, c3(1, 2, 2)) = -3.54e8;
  F3(5, c3(1, 1, 2)) = -9.11e8;
  F3(5, c3(1, 1, 1)) = -2.02e8;
  F3(5, c3(2, 2, 2)) = -3.57e8;
  s.f = symmetrize(s.f);
  for (Index l = 0; l < 6; ++l) s.g[l][0](l, 0) = 1.0;
  s.h[1] = Matrix::Identity(6, 6);
  return s;
}

inline Vector linear_hankel_values(const ControlAffineSystem& s) {
  const Matrix A = s.A(), B = s.B(), C = s.C();
  const Index n = s.n;
  const Matrix BBt = B * B.transpose(), CtC = C.transpose() * C;
  const Vector wc = solve_kway_lyapunov(A, 2, -Eigen::Map<const Vector>(BBt.data(), n * n));
  const Vector wo = solve_kway_lyapunov(A.transpose(), 2, -Eigen::Map<const Vector>(CtC.data(), n * n));
  const Matrix Wc = Eigen::Map<const Matrix>(wc.data(), n, n), Wo = Eigen::Map<const Matrix>(wo.data(), n, n);
  Eigen::EigenSolver<Matrix> es(Wc * Wo);
  Vector s2 = es.eigenvalues().real().cwiseMax(0.0);
  std::sort(s2.data(), s2.data() + n, std::greater<double>());
  return s2.cwiseSqrt();
}

// Hurwitz A (spectral abscissa <= -0.5), small random drift terms of degrees 2..d, B = C = I.
inline ControlAffineSystem random_stable_poly(Index n, int d, std::uint64_t seed, int budget = 100) {
  if (n < 2) throw std::invalid_argument("random_stable_poly: n must be at least 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0.0, 1.0);
  for (int attempt = 0; attempt < budget; ++attempt) {
    ControlAffineSystem s(n, n, n, std::max(d, 1), 0, 1);
    Matrix A(n, n);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i) A(i, j) = N(rng) / std::sqrt(double(n));
    const double abscissa = A.eigenvalues().real().maxCoeff();
    A -= (abscissa + 0.5 + 0.5 * std::abs(N(rng))) * Matrix::Identity(n, n);
    s.f[1] = A;
    for (int k = 2; k <= d; ++k) {
      Matrix& Fk = s.f[k];
      const double scale = 0.5 / std::sqrt(double(n));
      for (Index j = 0; j < Fk.cols(); ++j)
        for (Index i = 0; i < n; ++i) Fk(i, j) = scale * N(rng);
    }
    for (Index l = 0; l < n; ++l) s.g[l][0](l, 0) = 1.0;
    s.h[1] = Matrix::Identity(n, n);
    const Vector hs = linear_hankel_values(s);
    bool distinct = hs(n - 1) > 1e-6 * hs(0);
    for (Index i = 0; i + 1 < n; ++i) distinct = distinct && (hs(i) - hs(i + 1) >= 1e-6 * hs(0));
    if (distinct) return s;
  }
  throw resource_error("random_stable_poly: resampling budget exhausted");
}

}  // namespace nlbt
