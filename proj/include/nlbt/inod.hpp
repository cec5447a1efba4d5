#pragma once

#include <nlbt/energy.hpp>
#include <nlbt/errors.hpp>

#include <Eigen/SVD>

#include <cmath>
#include <string>

namespace nlbt {

struct LinearBalancing {
  Matrix T1;      // input-normal: T1^T Wc^{-1} T1 = I, T1^T Wo T1 = Sigma^2
  Matrix T1_inv;  // Sigma^{-1} U^T Lo^T
  Vector hankel;  // strictly decreasing
};

// Flip each state so the largest-magnitude entry of its column of T1 is positive.
inline void canonicalize_signs(Matrix& T1, Matrix& T1_inv) {
  for (Index j = 0; j < T1.cols(); ++j) {
    Index imax = 0;
    T1.col(j).cwiseAbs().maxCoeff(&imax);
    if (T1(imax, j) < 0) {
      T1.col(j) *= -1.0;
      T1_inv.row(j) *= -1.0;
    }
  }
}

inline Matrix cholesky_factor(const Matrix& W, const char* what) {
  Eigen::LLT<Matrix> llt(0.5 * (W + W.transpose()));
  if (llt.info() != Eigen::Success)
    throw hypothesis_error(std::string(what) + " is not positive definite");
  return llt.matrixL();
}

inline LinearBalancing square_root_balancing(const Matrix& Wc, const Matrix& Wo, double tol = 1e-10) {
  const Matrix Lc = cholesky_factor(Wc, "controllability Gramian");
  const Matrix Lo = cholesky_factor(Wo, "observability Gramian");
  Eigen::JacobiSVD<Matrix> svd(Lo.transpose() * Lc, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector s = svd.singularValues();
  const Index n = s.size();
  for (Index i = 0; i < n; ++i) {
    if (s(i) <= tol * s(0))
      throw hypothesis_error("zero Hankel singular value (sigma_" + std::to_string(i + 1) + ")");
    if (i + 1 < n && s(i) - s(i + 1) <= tol * s(0))
      throw hypothesis_error("repeated Hankel singular values (sigma_" + std::to_string(i + 1) +
                             " and sigma_" + std::to_string(i + 2) + ")");
  }
  LinearBalancing lb;
  lb.hankel = s;
  lb.T1 = Lc * svd.matrixV();
  lb.T1_inv = s.cwiseInverse().asDiagonal() * svd.matrixU().transpose() * Lo.transpose();
  canonicalize_signs(lb.T1, lb.T1_inv);
  return lb;
}

inline LinearBalancing linear_balancing(const EnergyFunction& Ec, const EnergyFunction& Eo) {
  const Matrix V2 = Ec.quadratic();
  Eigen::LLT<Matrix> llt(V2);
  if (llt.info() != Eigen::Success) throw hypothesis_error("controllability energy Hessian is not positive definite");
  const Matrix Wc = llt.solve(Matrix::Identity(V2.rows(), V2.cols()));
  return square_root_balancing(Wc, Eo.quadratic());
}

// sigma_i^2(z) = c[i](0) + c[i](1) z + ...
struct SqSingularValueFns {
  std::vector<Vector> c;

  Index size() const { return static_cast<Index>(c.size()); }
  double eval(Index i, double z) const {
    double r = 0;
    for (Index j = c[i].size() - 1; j >= 0; --j) r = r * z + c[i](j);
    return r;
  }
  double deriv(Index i, double z) const {
    double r = 0;
    for (Index j = c[i].size() - 1; j >= 1; --j) r = r * z + j * c[i](j);
    return r;
  }
};

struct InodResult {
  PolyVectorField T;
  SqSingularValueFns sq_sv;
  Matrix T1_inv;
  Vector hankel;
};

struct InodOptions {
  bool verify = true;
  double verify_tol = 1e-8;
};

namespace detail {

// Coefficient row of E(T(z)) at degree q, skipping E terms above the energy degree.
inline Vector composed_energy_coeff(const EnergyFunction& E, const PolyVectorField& T, int q) {
  Vector out = Vector::Zero(ipow(T.base, q));
  for (int i = 2; i <= std::min(q, E.degree()); ++i) {
    const Matrix row = 0.5 * E.v[i].transpose();
    out += tensor_sum_left(row, T, i, q).transpose();
  }
  return out;
}

// Sum Kronecker coefficients onto their sorted (canonical) columns.
inline Vector monomial_sums(const Vector& coeff, const std::vector<Index>& canon) {
  Vector out = Vector::Zero(coeff.size());
  for (Index c = 0; c < coeff.size(); ++c) out(canon[c]) += coeff(c);
  return out;
}

inline double multinomial_count(const std::vector<int>& sorted_idx) {
  // k! / prod(mult!)
  double r = 1;
  int run = 0;
  for (std::size_t j = 0; j < sorted_idx.size(); ++j) {
    run = (j > 0 && sorted_idx[j] == sorted_idx[j - 1]) ? run + 1 : 1;
    r *= double(j + 1) / run;
  }
  return r;
}

inline bool is_sorted_col(Index c, Index n, int k, std::vector<int>& idx) {
  idx = col_to_multi(c, n, k);
  return std::is_sorted(idx.begin(), idx.end());
}

}  // namespace detail

// Residual of the in/od conditions at degree q: (max |E_c(T) - |z|^2/2| monomial, max mixed E_o monomial).
inline std::pair<double, double> inod_residual(const EnergyFunction& Ec, const EnergyFunction& Eo,
                                               const PolyVectorField& T, int q) {
  const Index n = T.base;
  const auto canon = canonical_columns(n, q);
  Vector a = detail::monomial_sums(detail::composed_energy_coeff(Ec, T, q), canon);
  const Vector b = detail::monomial_sums(detail::composed_energy_coeff(Eo, T, q), canon);
  if (q == 2)
    for (Index i = 0; i < n; ++i) a(i * n + i) -= 0.5;
  double ra = 0, rb = 0;
  std::vector<int> idx;
  for (Index c = 0; c < a.size(); ++c) {
    if (canon[c] != c) continue;
    ra = std::max(ra, std::abs(a(c)));
    idx = col_to_multi(c, n, q);
    if (idx.front() != idx.back()) rb = std::max(rb, std::abs(b(c)));
  }
  return {ra, rb};
}

inline InodResult compute_inod_transform(const EnergyFunction& Ec, const EnergyFunction& Eo, int d_transf,
                                         const InodOptions& opt = {}) {
  if (d_transf < 1) throw std::invalid_argument("transformation degree must be at least 1");
  if (Ec.degree() < d_transf + 1 || Eo.degree() < d_transf + 1)
    throw std::invalid_argument("energies must be available to degree d_transf + 1");
  const Index n = Ec.n;
  const LinearBalancing lb = linear_balancing(Ec, Eo);
  InodResult res;
  res.hankel = lb.hankel;
  res.T1_inv = lb.T1_inv;
  res.T = PolyVectorField(n, n, d_transf);
  res.T.coeffs[1] = lb.T1;
  const Vector sig2 = lb.hankel.cwiseAbs2();
  res.sq_sv.c.assign(n, Vector::Zero(d_transf));
  for (Index i = 0; i < n; ++i) res.sq_sv.c[i](0) = sig2(i);

  std::vector<int> alpha, beta;
  for (int k = 2; k <= d_transf; ++k) {
    const int q = k + 1;
    const Index nk = ipow(n, k);
    const auto canon_q = canonical_columns(n, q);
    const auto canon_k = canonical_columns(n, k);
    const Vector a = detail::monomial_sums(detail::composed_energy_coeff(Ec, res.T, q), canon_q);
    const Vector b = detail::monomial_sums(detail::composed_energy_coeff(Eo, res.T, q), canon_q);

    // s[i * n^k + beta] is the coefficient of monomial beta in component i of Y_k = T1^{-1} T_k.
    Vector s = Vector::Zero(n * nk);
    std::vector<Index> support;
    std::vector<double> weight;
    for (Index c = 0; c < a.size(); ++c) {
      if (canon_q[c] != c) continue;
      alpha = col_to_multi(c, n, q);
      support.clear();
      for (int i : alpha)
        if (support.empty() || support.back() != i) support.push_back(i);
      if (support.size() == 1) {
        const Index i = support[0];
        beta.assign(k, static_cast<int>(i));
        const double si = -a(c);
        s(i * nk + multi_to_col(beta, n)) = si;
        res.sq_sv.c[i](k - 1) = 2.0 * (sig2(i) * si + b(c));
        continue;
      }
      weight.clear();
      double m00 = 0, m01 = 0, m11 = 0;
      for (Index i : support) {
        beta = alpha;
        beta.erase(std::find(beta.begin(), beta.end(), static_cast<int>(i)));
        const double w = detail::multinomial_count(beta);
        weight.push_back(w);
        m00 += w;
        m01 += w * sig2(i);
        m11 += w * sig2(i) * sig2(i);
      }
      Eigen::Matrix2d M;
      M << m00, m01, m01, m11;
      const Eigen::Vector2d lam = M.fullPivLu().solve(Eigen::Vector2d(-a(c), -b(c)));
      for (std::size_t j = 0; j < support.size(); ++j) {
        const Index i = support[j];
        beta = alpha;
        beta.erase(std::find(beta.begin(), beta.end(), static_cast<int>(i)));
        s(i * nk + multi_to_col(beta, n)) = weight[j] * (lam(0) + lam(1) * sig2(i));
      }
    }
    Matrix Y(n, nk);
    for (Index col = 0; col < nk; ++col) {
      const Index cb = canon_k[col];
      const double N = detail::multinomial_count(col_to_multi(cb, n, k));
      for (Index i = 0; i < n; ++i) Y(i, col) = s(i * nk + cb) / N;
    }
    res.T.coeffs[k] = lb.T1 * Y;

    if (opt.verify) {
      const auto [ra, rb] = inod_residual(Ec, Eo, res.T, q);
      const double scale = std::max({1.0, a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()});
      if (ra > opt.verify_tol * scale || rb > opt.verify_tol * scale)
        throw std::logic_error("input-normal/output-diagonal residual contract violated at degree " +
                               std::to_string(q));
    }
  }
  return res;
}

}  // namespace nlbt
