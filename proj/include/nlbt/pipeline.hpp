#pragma once

#include <nlbt/energy.hpp>
#include <nlbt/inod.hpp>
#include <nlbt/realization.hpp>
#include <nlbt/scaling.hpp>

#include <chrono>

namespace nlbt {

struct PipelineOptions {
  int d_transf = 3;
  int d_rom = -1;  // defaults to d_transf
  bool realization = true;
  EnergyOptions energy;
  InodOptions inod;
};

struct StageTimes {
  double energy = 0, inod = 0, balance = 0, realization = 0;
};

struct PipelineResult {
  EnergyFunction Ec, Eo;
  InodResult inod;
  ScalingResult scaling;
  PolyVectorField Tbar;
  Matrix Tbar1_inv;
  PolyVectorField P;
  Vector hankel;
  double sigma_condition = 0;  // sigma_1 / sigma_n
  BalancedRealization realization;
  StageTimes times;
};

inline PipelineResult run_pipeline(const ControlAffineSystem& sys, const PipelineOptions& opt = {}) {
  using clock = std::chrono::steady_clock;
  auto seconds = [](clock::time_point a, clock::time_point b) { return std::chrono::duration<double>(b - a).count(); };
  sys.check();
  const int dt = opt.d_transf;
  const int d_rom = opt.d_rom < 0 ? dt : opt.d_rom;
  PipelineResult r;

  auto t0 = clock::now();
  r.Ec = solve_controllability_energy(sys, dt + 1, opt.energy);
  r.Eo = solve_observability_energy(sys, dt + 1, opt.energy);
  auto t1 = clock::now();
  r.inod = compute_inod_transform(r.Ec, r.Eo, dt, opt.inod);
  auto t2 = clock::now();
  r.scaling = compute_scaling(r.inod.sq_sv, dt);
  r.Tbar = compose_balancing(r.inod.T, r.scaling.phi, dt);
  Vector a1(sys.n);
  for (Index i = 0; i < sys.n; ++i) a1(i) = r.scaling.a[i][1];
  r.Tbar1_inv = a1.asDiagonal() * r.inod.T1_inv;
  r.P = inverse_transform_coeffs(r.Tbar, r.Tbar1_inv, dt);
  r.hankel = r.inod.hankel;
  r.sigma_condition = r.hankel(0) / r.hankel(r.hankel.size() - 1);
  auto t3 = clock::now();
  if (opt.realization) r.realization = build_realization(sys, r.Tbar, r.Tbar1_inv, r.P, d_rom);
  auto t4 = clock::now();
  r.times = {seconds(t0, t1), seconds(t1, t2), seconds(t2, t3), seconds(t3, t4)};
  return r;
}

}  // namespace nlbt
