#pragma once

#include <nlbt/errors.hpp>
#include <nlbt/kron.hpp>

#include <Eigen/Eigenvalues>

#include <complex>

namespace nlbt {

struct KwaySolveOptions {
  // Systems with n^k at or below this size are materialized and solved by LU.
  Index materialize_threshold = 0;
  double resonance_tol = 1e-13;
};

namespace detail {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Solve (L_k(U) + shift I) v = b with U upper triangular.
inline void kway_triangular_solve(const CMatrix& U, int k, std::complex<double> shift,
                                  const std::complex<double>* b, std::complex<double>* v,
                                  double scale, double tol) {
  const Index n = U.rows();
  if (k == 1) {
    for (Index i = n - 1; i >= 0; --i) {
      std::complex<double> s = b[i];
      for (Index j = i + 1; j < n; ++j) s -= U(i, j) * v[j];
      const std::complex<double> d = U(i, i) + shift;
      if (std::abs(d) <= tol * scale)
        throw hypothesis_error("resonance: eigenvalue sum " + std::to_string(std::abs(d)) +
                               " is numerically zero in k-way Lyapunov solve");
      v[i] = s / d;
    }
    return;
  }
  const Index blk = ipow(n, k - 1);
  CVector rhs(blk);
  for (Index i = n - 1; i >= 0; --i) {
    Eigen::Map<const CVector> bi(b + i * blk, blk);
    rhs = bi;
    for (Index j = i + 1; j < n; ++j) {
      if (U(i, j) == 0.0) continue;
      rhs -= U(i, j) * Eigen::Map<const CVector>(v + j * blk, blk);
    }
    kway_triangular_solve(U, k - 1, shift + U(i, i), rhs.data(), v + i * blk, scale, tol);
  }
}

}  // namespace detail

// Solve L_k(M) v = b for square M.
inline Vector solve_kway_lyapunov(const Matrix& M, int k, const Vector& b,
                                  const KwaySolveOptions& opt = {}) {
  const Index n = M.rows();
  if (M.cols() != n || b.size() != ipow(n, k))
    throw std::invalid_argument("solve_kway_lyapunov: dimension mismatch");
  if (b.size() <= opt.materialize_threshold) {
    Eigen::PartialPivLU<Matrix> lu(kway_lyap_matrix(M, k));
    const Vector v = lu.solve(b);
    if (!v.allFinite()) throw hypothesis_error("resonance: singular k-way Lyapunov system");
    return v;
  }
  Eigen::ComplexSchur<detail::CMatrix> schur(M.cast<std::complex<double>>());
  const detail::CMatrix& Q = schur.matrixU();
  const detail::CMatrix& U = schur.matrixT();
  const detail::CMatrix Qc = Q.conjugate();
  const detail::CMatrix Qt = Q.transpose();
  std::vector<KronFactor<std::complex<double>>> fc(k, {&Qc, 0}), ft(k, {&Qt, 0});
  // b' = (Q^H)^{(k)} b, computed as a row product b^T conj(Q)^{(k)}.
  const detail::CMatrix bt = b.transpose().cast<std::complex<double>>();
  const detail::CMatrix bp = kron_chain_left<std::complex<double>>(bt, fc);
  detail::CMatrix vp(1, bp.cols());
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff()) * k;
  detail::kway_triangular_solve(U, k, 0.0, bp.data(), vp.data(), scale, opt.resonance_tol);
  const detail::CMatrix v = kron_chain_left<std::complex<double>>(vp, ft);
  return v.real().transpose();
}

}  // namespace nlbt
