#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlbt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline Index ipow(Index base, int e) {
  Index r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

// Column of the multi-index (0-based digits, leftmost most significant).
inline Index multi_to_col(const std::vector<int>& idx, Index base) {
  Index c = 0;
  for (int i : idx) c = c * base + i;
  return c;
}

inline std::vector<int> col_to_multi(Index col, Index base, int k) {
  std::vector<int> idx(k);
  for (int j = k - 1; j >= 0; --j) {
    idx[j] = static_cast<int>(col % base);
    col /= base;
  }
  return idx;
}

// For every column of a degree-k block, the column of its sorted multi-index.
inline std::vector<Index> canonical_columns(Index base, int k) {
  const Index N = ipow(base, k);
  std::vector<Index> canon(N);
  std::vector<int> idx(k);
  for (Index c = 0; c < N; ++c) {
    Index r = c;
    for (int j = k - 1; j >= 0; --j) {
      idx[j] = static_cast<int>(r % base);
      r /= base;
    }
    std::sort(idx.begin(), idx.end());
    canon[c] = multi_to_col(idx, base);
  }
  return canon;
}

// Polynomial map x -> sum_k W_k x^{(k)}; coeffs[k] is rows x base^k, k = 0..degree.
struct PolyVectorField {
  Index rows = 0;
  Index base = 0;
  std::vector<Matrix> coeffs;

  PolyVectorField() = default;
  PolyVectorField(Index rows_, Index base_, int degree) : rows(rows_), base(base_) {
    coeffs.reserve(degree + 1);
    for (int k = 0; k <= degree; ++k) coeffs.push_back(Matrix::Zero(rows, ipow(base, k)));
  }

  static PolyVectorField linear(const Matrix& W1) {
    PolyVectorField p(W1.rows(), W1.cols(), 1);
    p.coeffs[1] = W1;
    return p;
  }

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
  Matrix& operator[](int k) { return coeffs.at(k); }
  const Matrix& operator[](int k) const { return coeffs.at(k); }

  // Zero matrix when k exceeds the stored degree.
  Matrix coeff_or_zero(int k) const {
    if (k <= degree()) return coeffs[k];
    return Matrix::Zero(rows, ipow(base, k));
  }

  void resize_degree(int d) {
    while (degree() > d) coeffs.pop_back();
    while (degree() < d) coeffs.push_back(Matrix::Zero(rows, ipow(base, degree() + 1)));
  }

  bool has_constant() const { return !coeffs.empty() && !coeffs[0].isZero(0.0); }

  void check() const {
    for (int k = 0; k <= degree(); ++k)
      if (coeffs[k].rows() != rows || coeffs[k].cols() != ipow(base, k))
        throw std::invalid_argument("PolyVectorField: coefficient " + std::to_string(k) +
                                    " has wrong shape");
  }
};

// x^{(k)} from x^{(k-1)}.
inline Vector kron_next(const Vector& xk, const Vector& x) {
  Vector next(xk.size() * x.size());
  for (Index a = 0; a < xk.size(); ++a) next.segment(a * x.size(), x.size()) = xk(a) * x;
  return next;
}

inline Vector kron_power(const Vector& x, int k) {
  if (k < 0) throw std::invalid_argument("kron_power: negative degree");
  Vector out = Vector::Ones(1);
  for (int j = 0; j < k; ++j) out = kron_next(out, x);
  return out;
}

inline Vector eval_poly(const PolyVectorField& P, const Vector& x) {
  if (x.size() != P.base) throw std::invalid_argument("eval_poly: dimension mismatch");
  Vector y = Vector::Zero(P.rows);
  Vector xk = Vector::Ones(1);
  for (int k = 0; k <= P.degree(); ++k) {
    if (k > 0) xk = kron_next(xk, x);
    y.noalias() += P.coeffs[k] * xk;
  }
  return y;
}

inline Matrix symmetrize_block(const Matrix& W, Index base, int k) {
  if (k < 2) return W;
  const std::vector<Index> canon = canonical_columns(base, k);
  Matrix sum = Matrix::Zero(W.rows(), W.cols());
  std::vector<int> count(W.cols(), 0);
  for (Index c = 0; c < W.cols(); ++c) {
    sum.col(canon[c]) += W.col(c);
    ++count[canon[c]];
  }
  Matrix out(W.rows(), W.cols());
  for (Index c = 0; c < W.cols(); ++c) out.col(c) = sum.col(canon[c]) / count[canon[c]];
  return out;
}

inline PolyVectorField symmetrize(const PolyVectorField& P) {
  PolyVectorField S = P;
  for (int k = 2; k <= P.degree(); ++k) S.coeffs[k] = symmetrize_block(P.coeffs[k], P.base, k);
  return S;
}

// Requires symmetric coefficients.
inline Matrix eval_jacobian(const PolyVectorField& P, const Vector& x) {
  if (x.size() != P.base) throw std::invalid_argument("eval_jacobian: dimension mismatch");
  const Index n = P.base;
  Matrix J = Matrix::Zero(P.rows, n);
  Vector xk = Vector::Ones(1);
  for (int k = 1; k <= P.degree(); ++k) {
    const Matrix& W = P.coeffs[k];
    const Index blk = xk.size();
    for (Index j = 0; j < n; ++j) J.col(j).noalias() += k * (W.middleCols(j * blk, blk) * xk);
    if (k < P.degree()) xk = kron_next(xk, x);
  }
  return J;
}

// Factor of a Kronecker chain: either a dense matrix or an identity of given size.
template <class Scalar>
struct KronFactor {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Mat* mat = nullptr;
  Index identity = 0;
  Index rows() const { return mat ? mat->rows() : identity; }
  Index cols() const { return mat ? mat->cols() : identity; }
};

// W * (M_1 kron M_2 kron ... kron M_p) without forming the Kronecker product.
// Each step contracts the trailing mode with one GEMM and rotates it to the front.
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> kron_chain_left(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& W,
    const std::vector<KronFactor<Scalar>>& factors) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Index in_cols = 1, out_cols = 1;
  for (const auto& f : factors) {
    in_cols *= f.rows();
    out_cols *= f.cols();
  }
  if (W.cols() != in_cols) throw std::invalid_argument("kron_chain_left: dimension mismatch");
  const Index rows = W.rows();
  if (rows == 0 || out_cols == 0) return Mat::Zero(rows, out_cols);
  Mat buf = W.transpose();
  Index size = buf.size();
  for (auto it = factors.rbegin(); it != factors.rend(); ++it) {
    const Index ns = it->rows();
    const Index L = size / ns;
    Eigen::Map<const Mat> X(buf.data(), ns, L);
    Mat Y;
    if (it->mat)
      Y.noalias() = X.transpose() * (*it->mat);
    else
      Y = X.transpose();
    buf.swap(Y);
    size = buf.size();
  }
  return Eigen::Map<const Mat>(buf.data(), rows, out_cols);
}

inline Matrix kron_chain_left(const Matrix& W, const std::vector<const Matrix*>& mats) {
  std::vector<KronFactor<double>> f;
  f.reserve(mats.size());
  for (const Matrix* m : mats) f.push_back({m, 0});
  return kron_chain_left<double>(W, f);
}

// W * L_k(A), L_k(A) = sum over slots of I (x) ... (x) A (x) ... (x) I, A is p x q.
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> kway_lyap_left(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& W,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& A, int k) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (k < 1) throw std::invalid_argument("kway_lyap_left: k must be positive");
  const Index p = A.rows(), q = A.cols();
  if (W.cols() != ipow(p, k)) throw std::invalid_argument("kway_lyap_left: dimension mismatch");
  Mat out = Mat::Zero(W.rows(), ipow(p, k - 1) * q);
  std::vector<KronFactor<Scalar>> f(k, KronFactor<Scalar>{nullptr, p});
  for (int s = 0; s < k; ++s) {
    f[s] = KronFactor<Scalar>{&A, 0};
    out += kron_chain_left<Scalar>(W, f);
    f[s] = KronFactor<Scalar>{nullptr, p};
  }
  return out;
}

// L_k(A) * V.
inline Matrix kway_lyap_apply(const Matrix& A, int k, const Matrix& V) {
  if (k < 1) throw std::invalid_argument("kway_lyap_apply: k must be positive");
  const Index p = A.rows(), q = A.cols();
  if (V.rows() != ipow(p, k - 1) * q) throw std::invalid_argument("kway_lyap_apply: dimension mismatch");
  const Matrix At = A.transpose();
  const Matrix Vt = V.transpose();
  Matrix out = Matrix::Zero(V.cols(), ipow(p, k));
  std::vector<KronFactor<double>> f;
  for (int s = 0; s < k; ++s) {
    f.assign(k, KronFactor<double>{nullptr, p});
    f[s] = KronFactor<double>{&At, 0};
    // slots before s and after s carry p-dimensional identities; slot s maps q -> p
    out += kron_chain_left<double>(Vt, f);
  }
  return out.transpose();
}

inline Matrix kway_lyap_matrix(const Matrix& A, int k) {
  const Index p = A.rows(), q = A.cols();
  Matrix out = Matrix::Zero(ipow(p, k), ipow(p, k - 1) * q);
  for (int s = 0; s < k; ++s) {
    Matrix term = Matrix::Identity(1, 1);
    for (int j = 0; j < k; ++j) {
      const Matrix F = (j == s) ? A : Matrix::Identity(p, p);
      Matrix next(term.rows() * F.rows(), term.cols() * F.cols());
      for (Index a = 0; a < term.rows(); ++a)
        for (Index b = 0; b < term.cols(); ++b)
          next.block(a * F.rows(), b * F.cols(), F.rows(), F.cols()) = term(a, b) * F;
      term.swap(next);
    }
    out += term;
  }
  return out;
}

// All compositions of q into p positive parts.
inline void for_each_composition(int p, int q, const std::function<void(const std::vector<int>&)>& fn) {
  if (p < 1 || q < p) return;
  std::vector<int> parts(p, 1);
  std::function<void(int, int)> rec = [&](int slot, int remaining) {
    if (slot == p - 1) {
      parts[slot] = remaining;
      fn(parts);
      return;
    }
    for (int v = 1; v <= remaining - (p - 1 - slot); ++v) {
      parts[slot] = v;
      rec(slot + 1, remaining - v);
    }
  };
  rec(0, q);
}

// W * T_{p,q}; coefficients of T beyond its degree are treated as zero.
inline Matrix tensor_sum_left(const Matrix& W, const PolyVectorField& T, int p, int q) {
  const Index b = T.base;
  Matrix out = Matrix::Zero(W.rows(), ipow(b, q));
  if (W.cols() != ipow(T.rows, p)) throw std::invalid_argument("tensor_sum_left: dimension mismatch");
  for_each_composition(p, q, [&](const std::vector<int>& parts) {
    std::vector<const Matrix*> mats;
    for (int i : parts) {
      if (i > T.degree()) return;
      mats.push_back(&T.coeffs[i]);
    }
    out += kron_chain_left(W, mats);
  });
  return out;
}

// Materialized T_{p,q} (n^p x b^q); requires T_i for i <= q-p+1.
inline Matrix tensor_sum(const PolyVectorField& T, int p, int q) {
  if (p > q) throw std::invalid_argument("tensor_sum: p > q");
  if (T.degree() < q - p + 1) throw std::invalid_argument("tensor_sum: missing coefficient T_" +
                                                         std::to_string(q - p + 1));
  return tensor_sum_left(Matrix::Identity(ipow(T.rows, p), ipow(T.rows, p)), T, p, q);
}

// P(T(z)) truncated to degree d_out.
inline PolyVectorField compose(const PolyVectorField& P, const PolyVectorField& T, int d_out) {
  if (P.base != T.rows) throw std::invalid_argument("compose: dimension mismatch");
  if (T.has_constant()) throw std::invalid_argument("compose: inner map has a constant term");
  PolyVectorField R(P.rows, T.base, d_out);
  if (P.degree() >= 0) R.coeffs[0] = P.coeffs[0];
  for (int i = 1; i <= d_out; ++i)
    for (int j = 1; j <= std::min(i, P.degree()); ++j)
      R.coeffs[i] += tensor_sum_left(P.coeffs[j], T, j, i);
  return R;
}

// Keep the columns whose indices are all < r.
inline Matrix restrict_columns(const Matrix& W, Index base, int k, Index r) {
  Matrix out(W.rows(), ipow(r, k));
  std::vector<int> idx;
  for (Index c = 0; c < out.cols(); ++c) {
    idx = col_to_multi(c, r, k);
    out.col(c) = W.col(multi_to_col(idx, base));
  }
  return out;
}

inline PolyVectorField truncate_transform(const PolyVectorField& T, Index r) {
  if (r < 1 || r > T.base) throw std::invalid_argument("truncate_transform: r out of range");
  PolyVectorField R(T.rows, r, T.degree());
  for (int k = 0; k <= T.degree(); ++k) R.coeffs[k] = restrict_columns(T.coeffs[k], T.base, k, r);
  return R;
}

// P(diag(s) z) for a sign vector s.
inline PolyVectorField flip_inputs(const PolyVectorField& P, const Vector& s) {
  if (s.size() != P.base) throw std::invalid_argument("flip_inputs: sign vector size mismatch");
  PolyVectorField R = P;
  for (int k = 1; k <= P.degree(); ++k)
    for (Index c = 0; c < ipow(P.base, k); ++c) {
      double f = 1.0;
      for (int i : col_to_multi(c, P.base, k)) f *= s(i);
      R.coeffs[k].col(c) *= f;
    }
  return R;
}

}  // namespace nlbt
