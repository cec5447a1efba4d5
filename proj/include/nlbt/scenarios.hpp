#pragma once

#include <nlbt/models.hpp>
#include <nlbt/pipeline.hpp>
#include <nlbt/sim.hpp>

namespace nlbt {

inline Model pendulum_exact_model(const PendulumParams& p = {}) {
  return {2, 1, 1,
          [p](const Vector& x, const Vector& u) {
            const auto v = pendulum_rhs(x(0), x(1), p);
            Vector dx(2);
            dx << v[0], v[1] + p.input_gain() * u(0);
            return dx;
          },
          [](const Vector& x) { return Vector(x.head(1)); }};
}

inline Model double_pendulum_exact_model(const DoublePendulumParams& p = {}) {
  return {4, 1, 2,
          [p](const Vector& x, const Vector& u) {
            const auto parts = double_pendulum_parts(std::vector<double>(x.data(), x.data() + 4), p);
            Vector dx(4);
            for (int i = 0; i < 4; ++i) dx(i) = parts[0][i] + parts[1][i] * u(0);
            return dx;
          },
          [p](const Vector& x) {
            const auto parts = double_pendulum_parts(std::vector<double>(x.data(), x.data() + 4), p);
            return Vector((Vector(2) << parts[2][0], parts[2][1]).finished());
          }};
}

// A simulation experiment: polynomial FOM for balancing, reference dynamics for errors.
struct Scenario {
  std::string name;
  ControlAffineSystem fom;
  Model reference;
  Vector x0;
  Signal input;
  double t1 = 1;
  int n_samples = 2000;
  ErrorNorm norm = ErrorNorm::trapezoid;

  SimOptions sim_options() const {
    SimOptions o;
    o.n_samples = n_samples;
    return o;
  }
};

inline Scenario two_dim_scenario() {
  Scenario s{"2d-illustrative", two_dim_illustrative(), {}, Vector::Constant(2, 0.1), Signal::sinusoid(0.5, 1 / M_PI), 10, 1001};
  s.reference = model_of(s.fom);
  return s;
}

// Unforced from x0 = (-1, -2, -4), output sampled every 0.1 s.
inline Scenario three_dim_scenario() {
  Scenario s{"3d-illustrative", three_dim_illustrative(), {}, (Vector(3) << -1, -2, -4).finished(), Signal::zero(),
             10, 101, ErrorNorm::discrete};
  s.reference = model_of(s.fom);
  return s;
}

inline Scenario double_pendulum_scenario() {
  return {"double-pendulum", double_pendulum(7), double_pendulum_exact_model(), Vector::Zero(4),
          Signal::sinusoid(1.0, 2.5), 20, 2001, ErrorNorm::discrete};
}

inline Scenario pendulum_scenario(double amp = 5, double x0 = 1) {
  return {"pendulum", pendulum(7), pendulum_exact_model(), Vector::Constant(2, x0), Signal::sinusoid(amp, 1 / M_PI),
          20, 2001, ErrorNorm::discrete};
}

inline std::vector<std::string> scenario_names() {
  return {"2d-illustrative", "3d-illustrative", "double-pendulum", "pendulum"};
}

inline Scenario scenario_by_name(const std::string& name) {
  if (name == "2d-illustrative") return two_dim_scenario();
  if (name == "3d-illustrative") return three_dim_scenario();
  if (name == "double-pendulum") return double_pendulum_scenario();
  if (name == "pendulum") return pendulum_scenario();
  throw std::invalid_argument("unknown scenario '" + name + "'");
}

// Balance, truncate to r states; the ROM initial state is the top rows of P(x0).
inline ReducedOrderModel reduce_model(const ControlAffineSystem& fom, int d_transf, int d_rom, Index r,
                                      const Vector& x0 = Vector()) {
  PipelineOptions o;
  o.d_transf = d_transf;
  o.d_rom = d_rom;
  return build_rom(run_pipeline(fom, o).realization, r, x0);
}

inline Trajectory simulate_reference(const Scenario& sc) {
  return integrate(sc.reference, sc.x0, sc.input, 0, sc.t1, sc.sim_options());
}

inline Trajectory simulate_rom(const ReducedOrderModel& rom, const Scenario& sc) {
  return integrate(model_of(rom.sys), rom.reduce_state(sc.x0), sc.input, 0, sc.t1, sc.sim_options());
}

// Per-channel output errors; infinity when either trajectory diverged.
inline Vector channel_errors(const Trajectory& ref, const Trajectory& y, ErrorNorm norm) {
  Vector e(ref.Y.cols());
  for (Index c = 0; c < e.size(); ++c)
    e(c) = (ref.diverged || y.diverged) ? std::numeric_limits<double>::infinity() : l2_error(ref, y, c, norm);
  return e;
}

}  // namespace nlbt
