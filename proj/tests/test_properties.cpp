#include <gtest/gtest.h>

#include <nlbt/models.hpp>
#include <nlbt/newton.hpp>
#include <nlbt/pipeline.hpp>

#include "test_util.hpp"

using namespace nlbt;
using namespace testutil;

namespace {

struct ZooEntry {
  std::string name;
  ControlAffineSystem sys;
  double ray_hi = 1e-1;  // outer end of the ray-scaling window
};

const std::vector<ZooEntry>& zoo() {
  static const std::vector<ZooEntry> z = {
      {"2d", two_dim_illustrative()},
      {"pendulum", pendulum(7)},
      {"3d", three_dim_illustrative()},
      {"double-pendulum", double_pendulum(5)},
      {"beam", beam_single_element()},
      {"random", random_stable_poly(4, 3, 90)},
  };
  return z;
}

PipelineResult pipeline(const ControlAffineSystem& s, int d, bool realization = true) {
  PipelineOptions o;
  o.d_transf = d;
  o.realization = realization;
  return run_pipeline(s, o);
}

// Polynomial degree bound of v(t) = J_T(t dir) V̄(t dir) and of v composed with T.
int composed_degree(const ControlAffineSystem& s, int d) {
  return std::max({2 * d - 1, s.degree() * d, 2 * d});
}

}  // namespace

// (a) controllability and observability equations hold to O(|x|^{d+1})
TEST(Properties, EnergyResidualRayScaling) {
  for (const auto& z : zoo()) {
    std::mt19937_64 rng(100);
    for (int d : {2, 3, 4}) {
      const EnergyFunction Ec = solve_controllability_energy(z.sys, d);
      const EnergyFunction Eo = solve_observability_energy(z.sys, d);
      const Vector x = unit_dir(z.sys.n, rng);
      for (const auto& [E, kind] : {std::pair{&Ec, EnergyKind::controllability}, std::pair{&Eo, EnergyKind::observability}}) {
        const double sl = ray_slope_floored([&](double e) {
          const auto r = hjb_residual_terms(*E, z.sys, e * x, kind);
          return std::make_pair(r.value, r.magnitude);
        }, 9, z.ray_hi * 1e-2, z.ray_hi);
        EXPECT_GE(sl, d + 0.5) << z.name << " d=" << d << (kind == EnergyKind::observability ? " Eo" : " Ec");
      }
    }
  }
}

// (b) input-normal / output-diagonal contracts
TEST(Properties, InodContracts) {
  for (const auto& z : zoo()) {
    std::mt19937_64 rng(101);
    for (int d : {2, 3, 4}) {
      const auto Ec = solve_controllability_energy(z.sys, d + 1);
      const auto Eo = solve_observability_energy(z.sys, d + 1);
      const InodResult r = compute_inod_transform(Ec, Eo, d);
      for (int q = 2; q <= d + 1; ++q) {
        const auto [ra, rb] = inod_residual(Ec, Eo, r.T, q);
        EXPECT_LT(ra, 1e-9) << z.name << " d=" << d << " q=" << q;
        EXPECT_LT(rb, 1e-9) << z.name << " d=" << d << " q=" << q;
      }
      const Index n = z.sys.n;
      const Vector dir = unit_dir(n, rng);
      const double sc = ray_slope_floored([&](double e) {
        const Vector ze = e * dir;
        const double a = Ec.eval(eval_poly(r.T, ze)), b = 0.5 * ze.squaredNorm();
        return std::make_pair(a - b, std::abs(a) + std::abs(b));
      }, 9, 1e-3, 1e-1);
      const double so = ray_slope_floored([&](double e) {
        const Vector ze = e * dir;
        double b = 0;
        for (Index i = 0; i < n; ++i) b += 0.5 * ze(i) * ze(i) * r.sq_sv.eval(i, ze(i));
        const double a = Eo.eval(eval_poly(r.T, ze));
        return std::make_pair(a - b, std::abs(a) + std::abs(b));
      }, 9, 1e-3, 1e-1);
      EXPECT_GE(sc, d + 1.5) << z.name << " d=" << d;
      EXPECT_GE(so, d + 1.5) << z.name << " d=" << d;
    }
  }
}

// (c) dT̄/dz̄ V̄ = V o T̄ degree by degree, and H̄ = h o T̄
TEST(Properties, RealizationJacobianIdentity) {
  for (const auto& z : zoo()) {
    std::mt19937_64 rng(102);
    for (int d : {2, 3}) {
      const auto& s = z.sys;
      const PipelineResult r = pipeline(s, d);
      const auto& b = r.realization.sys;
      const Vector dir = unit_dir(s.n, rng), u = randv(s.m, rng);
      const int D = composed_degree(s, d);
      auto parts = [&](const std::function<Vector(double)>& fn) { return homogeneous_parts(fn, D, 0.5); };
      const auto fl = parts([&](double t) { return Vector(eval_jacobian(r.Tbar, t * dir) * b.drift(t * dir)); });
      const auto fr = parts([&](double t) { return s.drift(eval_poly(r.Tbar, t * dir)); });
      const auto gl = parts([&](double t) { return Vector(eval_jacobian(r.Tbar, t * dir) * b.input_matrix(t * dir) * u); });
      const auto gr = parts([&](double t) { return Vector(s.input_matrix(eval_poly(r.Tbar, t * dir)) * u); });
      const auto hl = parts([&](double t) { return b.output(t * dir); });
      const auto hr = parts([&](double t) { return s.output(eval_poly(r.Tbar, t * dir)); });
      // relative to the largest homogeneous part of the same field
      auto agree = [d](const std::vector<Vector>& a, const std::vector<Vector>& c, int kmax) {
        double scale = 1e-300, worst = 0;
        for (int k = 0; k <= d; ++k) scale = std::max({scale, a[k].norm(), c[k].norm()});
        for (int k = 0; k <= kmax; ++k) worst = std::max(worst, (a[k] - c[k]).norm());
        return worst / scale;
      };
      EXPECT_LT(agree(fl, fr, d), 1e-9) << z.name << " d=" << d << " drift";
      EXPECT_LT(agree(gl, gr, d - 1), 1e-9) << z.name << " d=" << d << " input";
      EXPECT_LT(agree(hl, hr, d), 1e-9) << z.name << " d=" << d << " output";
    }
  }
}

// (d) P o T̄ = id + O(|z|^{d+1})
TEST(Properties, InverseRoundTrip) {
  for (const auto& z : zoo()) {
    std::mt19937_64 rng(103);
    for (int d : {2, 3, 4}) {
      const PipelineResult r = pipeline(z.sys, d, false);
      const Vector dir = unit_dir(z.sys.n, rng);
      const auto parts = homogeneous_parts([&](double t) { return eval_poly(r.P, eval_poly(r.Tbar, t * dir)); }, d * d, 0.5);
      EXPECT_LT(parts[0].norm(), 1e-12) << z.name;
      EXPECT_LT((parts[1] - dir).norm(), 1e-9) << z.name << " d=" << d;
      for (int k = 2; k <= d; ++k) EXPECT_LT(parts[k].norm(), 1e-9 * (1 + parts[1].norm())) << z.name << " d=" << d << " degree " << k;
    }
  }
}

// (e) on a linear system the pipeline is square-root balanced truncation
TEST(Properties, LinearSystemIsSquareRootBalancedTruncation) {
  for (std::uint64_t seed : {104, 105, 106}) {
    const auto s = random_stable_poly(5, 1, seed);
    const Matrix A = s.A(), B = s.B(), C = s.C();
    // independent oracle: Gramians by dense Kronecker solve, then Cholesky + SVD
    const Matrix Wc = dense_lyap(A, B * B.transpose()), Wo = dense_lyap(A.transpose(), C.transpose() * C);
    const Matrix Lc = Wc.llt().matrixL(), Lo = Wo.llt().matrixL();
    Eigen::JacobiSVD<Matrix> svd(Lo.transpose() * Lc, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vector sig = svd.singularValues();
    const Matrix T = Lc * svd.matrixV() * sig.cwiseSqrt().cwiseInverse().asDiagonal();
    const Matrix Ti = sig.cwiseSqrt().cwiseInverse().asDiagonal() * svd.matrixU().transpose() * Lo.transpose();
    const Matrix Ab = Ti * A * T, Bb = Ti * B, Cb = C * T;

    for (int d : {1, 3}) {
      const PipelineResult r = pipeline(s, d);
      const auto& b = r.realization.sys;
      EXPECT_LT(rel_diff(r.hankel, sig), 1e-10);
      // per-state sign alignment
      Vector sg(5);
      for (Index i = 0; i < 5; ++i) sg(i) = r.Tbar[1].col(i).dot(T.col(i)) >= 0 ? 1.0 : -1.0;
      const Matrix S = sg.asDiagonal();
      EXPECT_LT(rel_diff(r.Tbar[1], T * S), 1e-9) << "d=" << d;
      EXPECT_LT(rel_diff(b.A(), S * Ab * S), 1e-9) << "d=" << d;
      EXPECT_LT(rel_diff(b.B(), S * Bb), 1e-9) << "d=" << d;
      EXPECT_LT(rel_diff(b.C(), Cb * S), 1e-9) << "d=" << d;
      for (int k = 2; k <= r.Tbar.degree(); ++k) EXPECT_LT(r.Tbar[k].norm(), 1e-9) << "d=" << d;
      for (int k = 2; k <= b.f.degree(); ++k) EXPECT_LT(b.f[k].norm(), 1e-9 * Ab.norm()) << "d=" << d;
      for (Index rr : {1, 3}) {
        const ReducedOrderModel rom = build_rom(r.realization, rr);
        EXPECT_LT(rel_diff(rom.sys.A(), (S * Ab * S).topLeftCorner(rr, rr)), 1e-9);
        EXPECT_LT(rel_diff(rom.sys.C(), (Cb * S).leftCols(rr)), 1e-9);
      }
    }
  }
}

// (f) Newton-evaluated balanced dynamics agree with the polynomial realization to O(|z|^d)
TEST(Properties, NewtonVersusPolynomialRealization) {
  for (const auto& z : zoo()) {
    std::mt19937_64 rng(107);
    for (int d : {2, 3, 4}) {
      const auto& s = z.sys;
      const PipelineResult r = pipeline(s, d);
      const Vector dir = unit_dir(s.n, rng), u = randv(s.m, rng);
      const double sl = ray_slope_floored([&](double e) {
        const Vector zb = e * dir, ue = e * u;
        const Vector a = eval_balanced_rhs_newton(s, r.inod, zb, ue, {1e-15, 50}).zdot;
        const Vector c = r.realization.sys.rhs(zb, ue);
        return std::make_pair((a - c).norm(), a.norm() + c.norm());
      }, 7, 1e-2, 1e-1);
      EXPECT_GE(sl, d - 0.5) << z.name << " d=" << d;
    }
  }
}
