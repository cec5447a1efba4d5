#pragma once

#include <nlbt/errors.hpp>
#include <nlbt/kway_solve.hpp>
#include <nlbt/system.hpp>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace nlbt {

// E(x) = 1/2 sum_k v_k . x^{(k)}, k = 2..degree.
struct EnergyFunction {
  Index n = 0;
  std::vector<Vector> v;

  EnergyFunction() = default;
  EnergyFunction(Index n_, int d) : n(n_) {
    for (int k = 0; k <= d; ++k) v.push_back(Vector::Zero(ipow(n, k)));
  }

  int degree() const { return static_cast<int>(v.size()) - 1; }

  PolyVectorField as_poly() const {
    PolyVectorField P(1, n, degree());
    for (int k = 2; k <= degree(); ++k) P.coeffs[k] = 0.5 * v[k].transpose();
    return P;
  }

  double eval(const Vector& x) const { return eval_poly(as_poly(), x)(0); }
  Vector gradient(const Vector& x) const { return eval_jacobian(symmetrize(as_poly()), x).transpose(); }

  // v_2 reshaped to the n x n Hessian.
  Matrix quadratic() const {
    Matrix Q = Eigen::Map<const Matrix>(v.at(2).data(), n, n).transpose();
    return 0.5 * (Q + Q.transpose());
  }
};

enum class EnergyKind { controllability, observability };

struct EnergyOptions {
  KwaySolveOptions kway;
};

namespace detail {

inline Vector symmetrize_vector(const Vector& v, Index n, int k) {
  return symmetrize_block(v.transpose(), n, k).transpose();
}

// sum_i 1/2 v_i^T L_i(F_{k-i+1}) over the available v_i.
inline Vector drift_terms(const ControlAffineSystem& sys, const std::vector<Vector>& v, int k) {
  Vector out = Vector::Zero(ipow(sys.n, k));
  for (int i = 2; i <= k && i < static_cast<int>(v.size()); ++i) {
    const int j = k - i + 1;
    if (j < 1 || j > sys.f.degree() || v[i].isZero(0.0)) continue;
    const Matrix row = v[i].transpose();
    out += 0.5 * kway_lyap_left<double>(row, sys.f.coeffs[j], i).transpose();
  }
  return out;
}

// Degree-s part of g(x)^T grad E as an m x n^s matrix.
inline Matrix input_gradient_terms(const ControlAffineSystem& sys, const std::vector<Vector>& v, int s) {
  const Index n = sys.n;
  Matrix Q = Matrix::Zero(sys.m, ipow(n, s));
  for (int pdeg = 0; pdeg <= s - 1; ++pdeg) {
    const int i = s - pdeg + 1;
    if (i >= static_cast<int>(v.size()) || v[i].isZero(0.0)) continue;
    const Eigen::Map<const Matrix> ViT(v[i].data(), ipow(n, i - 1), n);
    for (Index l = 0; l < sys.m; ++l) {
      if (pdeg > sys.g[l].degree()) continue;
      const Matrix M = ViT * sys.g[l].coeffs[pdeg];
      Q.row(l) += (0.5 * i) * Eigen::Map<const Vector>(M.data(), M.size()).transpose();
    }
  }
  return Q;
}

inline Vector rowflat_product(const Matrix& Ma, const Matrix& Mb) {
  // row-major flatten of Ma^T Mb
  const Matrix P = Mb.transpose() * Ma;
  return Eigen::Map<const Vector>(P.data(), P.size());
}

}  // namespace detail

// Degree-k coefficient of the left-hand side of the energy equation for the given v.
inline Vector energy_degree_coeff(const ControlAffineSystem& sys, const std::vector<Vector>& v, int k,
                                  EnergyKind kind) {
  Vector out = detail::drift_terms(sys, v, k);
  if (kind == EnergyKind::observability) {
    for (int a = 1; a < k; ++a) {
      const int b = k - a;
      if (a > sys.h.degree() || b > sys.h.degree()) continue;
      out += 0.5 * detail::rowflat_product(sys.h.coeffs[a], sys.h.coeffs[b]);
    }
  } else {
    std::vector<Matrix> Q(k);
    for (int s = 1; s < k; ++s) Q[s] = detail::input_gradient_terms(sys, v, s);
    for (int s = 1; s < k; ++s) out += 0.5 * detail::rowflat_product(Q[s], Q[k - s]);
  }
  return out;
}

inline void require_hurwitz(const Matrix& A) {
  const Eigen::VectorXcd ev = A.eigenvalues();
  const double abscissa = ev.real().maxCoeff();
  if (!(abscissa < 0.0))
    throw hypothesis_error("non-Hurwitz linearization: spectral abscissa " + std::to_string(abscissa));
}

inline EnergyFunction solve_observability_energy(const ControlAffineSystem& sys, int d,
                                                 const EnergyOptions& opt = {}) {
  if (d < 2) throw std::invalid_argument("energy degree must be at least 2");
  const Matrix A = sys.A();
  require_hurwitz(A);
  const Matrix At = A.transpose();
  EnergyFunction E(sys.n, d);
  for (int k = 2; k <= d; ++k) {
    const Vector R = detail::symmetrize_vector(energy_degree_coeff(sys, E.v, k, EnergyKind::observability),
                                               sys.n, k);
    E.v[k] = detail::symmetrize_vector(solve_kway_lyapunov(At, k, -2.0 * R, opt.kway), sys.n, k);
  }
  return E;
}

inline EnergyFunction solve_controllability_energy(const ControlAffineSystem& sys, int d,
                                                   const EnergyOptions& opt = {}) {
  if (d < 2) throw std::invalid_argument("energy degree must be at least 2");
  const Index n = sys.n;
  const Matrix A = sys.A();
  require_hurwitz(A);
  const Matrix B = sys.B();
  const Matrix BBt = B * B.transpose();
  const Vector rhs = -Eigen::Map<const Vector>(BBt.data(), BBt.size());
  const Vector wc = solve_kway_lyapunov(A, 2, rhs, opt.kway);
  Matrix Wc = Eigen::Map<const Matrix>(wc.data(), n, n);
  Wc = 0.5 * (Wc + Wc.transpose());
  Eigen::LDLT<Matrix> ldlt(Wc);
  const double wmax = Wc.diagonal().cwiseAbs().maxCoeff();
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || wmax == 0.0 ||
      ldlt.vectorD().minCoeff() <= 1e-14 * ldlt.vectorD().cwiseAbs().maxCoeff())
    throw hypothesis_error("controllability Gramian is singular (uncontrollable linearization)");
  Matrix V2 = ldlt.solve(Matrix::Identity(n, n));
  V2 = 0.5 * (V2 + V2.transpose());
  EnergyFunction E(n, d);
  E.v[2] = Eigen::Map<const Vector>(V2.data(), V2.size());

  const Matrix Acl = A + BBt * V2;
  if (d >= 3) {
    const Eigen::VectorXcd ev = Acl.eigenvalues();
    if (!(ev.real().minCoeff() > 0.0))
      throw hypothesis_error("A + B B^T V_2 is not anti-stable; controllability energy not unique");
  }
  const Matrix Mt = Acl.transpose();
  for (int k = 3; k <= d; ++k) {
    const Vector R = detail::symmetrize_vector(
        energy_degree_coeff(sys, E.v, k, EnergyKind::controllability), n, k);
    E.v[k] = detail::symmetrize_vector(solve_kway_lyapunov(Mt, k, -2.0 * R, opt.kway), n, k);
  }
  return E;
}

struct ResidualValue {
  double value = 0;
  double magnitude = 0;  // sum of absolute term sizes, for roundoff floors
};

// Pointwise left-hand side of the controllability or observability equation.
inline ResidualValue hjb_residual_terms(const EnergyFunction& E, const ControlAffineSystem& sys, const Vector& x,
                                        EnergyKind kind) {
  const Vector grad = E.gradient(x);
  const double drift = grad.dot(sys.drift(x));
  const double quad = kind == EnergyKind::observability ? 0.5 * sys.output(x).squaredNorm()
                                                        : 0.5 * (sys.input_matrix(x).transpose() * grad).squaredNorm();
  return {drift + quad, std::abs(drift) + std::abs(quad)};
}

inline double hjb_residual(const EnergyFunction& E, const ControlAffineSystem& sys, const Vector& x,
                           EnergyKind kind) {
  return hjb_residual_terms(E, sys, x, kind).value;
}

}  // namespace nlbt
