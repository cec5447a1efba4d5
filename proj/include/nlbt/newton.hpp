#pragma once

#include <nlbt/inod.hpp>
#include <nlbt/system.hpp>

#include <Eigen/LU>

namespace nlbt {

struct NewtonOptions {
  double tol = 1e-10;
  int max_iter = 50;
};

struct NewtonStatus {
  Vector z;
  bool converged = false;
  int iterations = 0;
  double residual = 0;
};

// z̄_i = z_i (sigma_i^2(z_i))^{1/4}
inline Vector eval_inverse_scaling(const SqSingularValueFns& sq, const Vector& z) {
  Vector zb(z.size());
  for (Index i = 0; i < z.size(); ++i) {
    const double s2 = sq.eval(i, z(i));
    if (!(s2 > 0.0)) throw hypothesis_error("squared singular value function is nonpositive at the evaluation point");
    zb(i) = z(i) * std::pow(s2, 0.25);
  }
  return zb;
}

// Diagonal of d z̄ / d z.
inline Vector inverse_scaling_jacobian(const SqSingularValueFns& sq, const Vector& z) {
  Vector J(z.size());
  for (Index i = 0; i < z.size(); ++i) {
    const double s2 = sq.eval(i, z(i));
    if (!(s2 > 0.0)) throw hypothesis_error("squared singular value function is nonpositive at the evaluation point");
    const double sigma = std::sqrt(s2);
    const double dsigma = sq.deriv(i, z(i)) / (2.0 * sigma);
    J(i) = std::sqrt(sigma) + z(i) * dsigma / (2.0 * std::sqrt(sigma));
  }
  return J;
}

// Solves eval_inverse_scaling(z) = z̄ componentwise.
inline Vector newton_scaling(const SqSingularValueFns& sq, const Vector& zbar, const NewtonOptions& opt = {}) {
  Vector z(zbar.size());
  for (Index i = 0; i < zbar.size(); ++i) {
    const double s2 = sq.eval(i, zbar(i));
    if (!(s2 > 0.0)) throw hypothesis_error("squared singular value function is nonpositive at the evaluation point");
    z(i) = zbar(i) / std::pow(s2, 0.25);
  }
  for (int it = 0; it <= opt.max_iter; ++it) {
    const Vector res = eval_inverse_scaling(sq, z) - zbar;
    if (res.lpNorm<Eigen::Infinity>() <= opt.tol) return z;
    if (it == opt.max_iter) break;
    const Vector J = inverse_scaling_jacobian(sq, z);
    if ((J.array() == 0.0).any() || !J.allFinite()) throw convergence_error("singular inverse-scaling Jacobian");
    z -= res.cwiseQuotient(J);
  }
  throw convergence_error("inverse scaling Newton iteration did not converge");
}

inline Vector eval_forward_balancing_newton(const InodResult& inod, const Vector& zbar,
                                            const NewtonOptions& opt = {}) {
  return eval_poly(inod.T, newton_scaling(inod.sq_sv, zbar, opt));
}

// dx/dz̄ = dPhi/dz (z) * (dz̄/dz)^{-1} at z = phi(z̄).
inline Matrix balancing_jacobian_newton(const InodResult& inod, const Vector& zbar, const NewtonOptions& opt = {}) {
  const Vector z = newton_scaling(inod.sq_sv, zbar, opt);
  const Vector D = inverse_scaling_jacobian(inod.sq_sv, z);
  if ((D.array() == 0.0).any()) throw convergence_error("singular inverse-scaling Jacobian");
  return eval_jacobian(inod.T, z) * D.cwiseInverse().asDiagonal();
}

// T̄_1^{-1} = diag(sigma_i(0)^{1/2}) T_1^{-1}.
inline Matrix balanced_linear_inverse(const InodResult& inod) {
  Vector s(inod.sq_sv.size());
  for (Index i = 0; i < s.size(); ++i) s(i) = std::pow(inod.sq_sv.c[i](0), 0.25);
  return s.asDiagonal() * inod.T1_inv;
}

// Solves eval_forward_balancing_newton(z̄) = x. Failure is reported, not thrown.
inline NewtonStatus newton_inverse_balancing(const InodResult& inod, const Vector& x, const NewtonOptions& opt = {}) {
  NewtonStatus st;
  st.z = balanced_linear_inverse(inod) * x;
  try {
    for (st.iterations = 0; st.iterations <= opt.max_iter; ++st.iterations) {
      const Vector res = eval_forward_balancing_newton(inod, st.z, opt) - x;
      st.residual = res.lpNorm<Eigen::Infinity>();
      if (!std::isfinite(st.residual)) return st;
      if (st.residual <= opt.tol) {
        st.converged = true;
        return st;
      }
      if (st.iterations == opt.max_iter) break;
      Eigen::PartialPivLU<Matrix> lu(balancing_jacobian_newton(inod, st.z, opt));
      st.z -= lu.solve(res);
    }
  } catch (const hypothesis_error&) {
  } catch (const convergence_error&) {
  }
  return st;
}

struct BalancedEval {
  Vector zdot;
  Vector y;
  Vector x;
};

// Balanced right-hand side and output at z̄ without forming the balanced polynomials.
inline BalancedEval eval_balanced_rhs_newton(const ControlAffineSystem& sys, const InodResult& inod, const Vector& zbar,
                                             const Vector& u, const NewtonOptions& opt = {}) {
  BalancedEval out;
  const Vector z = newton_scaling(inod.sq_sv, zbar, opt);
  out.x = eval_poly(inod.T, z);
  const Vector D = inverse_scaling_jacobian(inod.sq_sv, z);
  Eigen::PartialPivLU<Matrix> lu(eval_jacobian(inod.T, z));
  if (std::abs(lu.determinant()) == 0.0) throw convergence_error("singular balancing Jacobian");
  // (J_Phi D^{-1})^{-1} = D J_Phi^{-1}
  out.zdot = D.asDiagonal() * lu.solve(sys.rhs(out.x, u));
  out.y = sys.output(out.x);
  return out;
}

}  // namespace nlbt
