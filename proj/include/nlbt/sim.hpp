#pragma once

#include <nlbt/system.hpp>

#include <boost/numeric/odeint.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <ostream>

namespace nlbt {

// State-derivative contract used by the integrator.
struct Model {
  Index n = 0, m = 0, p = 0;
  std::function<Vector(const Vector& x, const Vector& u)> rhs;
  std::function<Vector(const Vector& x)> output;
};

inline Model model_of(const ControlAffineSystem& sys) {
  return {sys.n, sys.m, sys.p, [sys](const Vector& x, const Vector& u) { return sys.rhs(x, u); },
          [sys](const Vector& x) { return sys.output(x); }};
}

struct Signal {
  enum class Kind { zero, sinusoid, white_noise };
  Kind kind = Kind::zero;
  double amp = 0, freq = 0;
  std::uint64_t seed = 0;
  double hold_dt = 0.01;
  Index channel = -1;  // -1 drives every input channel

  static Signal zero() { return {}; }
  static Signal sinusoid(double amp, double freq, Index channel = -1) {
    Signal s;
    s.kind = Kind::sinusoid;
    s.amp = amp;
    s.freq = freq;
    s.channel = channel;
    return s;
  }
  static Signal white_noise(double amp, std::uint64_t seed, double hold_dt = 0.01, Index channel = -1) {
    Signal s;
    s.kind = Kind::white_noise;
    s.amp = amp;
    s.seed = seed;
    s.hold_dt = hold_dt;
    s.channel = channel;
    return s;
  }

  Vector operator()(double t, Index m) const {
    Vector u = Vector::Zero(m);
    for (Index l = 0; l < m; ++l) {
      if (channel >= 0 && l != channel) continue;
      switch (kind) {
        case Kind::zero: break;
        case Kind::sinusoid: u(l) = amp * std::sin(freq * t); break;
        case Kind::white_noise: u(l) = amp * gaussian(static_cast<std::uint64_t>(std::floor(t / hold_dt)), l); break;
      }
    }
    return u;
  }

 private:
  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }
  // Standard normal sample indexed by (seed, hold interval, channel); stateless so dense output
  // and step rejection see the same held value.
  double gaussian(std::uint64_t k, Index l) const {
    const std::uint64_t h = splitmix(splitmix(seed ^ splitmix(k)) + static_cast<std::uint64_t>(l));
    const double u1 = ((h >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = ((splitmix(h) >> 11) + 0.5) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
};

struct Trajectory {
  std::vector<double> t;
  Matrix X, Y, U;  // one row per sample
  bool diverged = false;

  Index samples() const { return static_cast<Index>(t.size()); }
};

struct SimOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  int n_samples = 2000;
  double divergence_bound = 1e8;
};

namespace detail {
struct diverged_signal {};
}  // namespace detail

inline Trajectory integrate(const Model& model, const Vector& x0, const Signal& input, double t0, double t1,
                            const SimOptions& opt = {}) {
  namespace ode = boost::numeric::odeint;
  if (x0.size() != model.n || !x0.allFinite()) throw std::invalid_argument("integrate: bad initial state");
  if (!(opt.rel_tol > 0 && opt.abs_tol > 0) || opt.n_samples < 2 || !(t1 > t0))
    throw std::invalid_argument("integrate: bad solver options");
  using State = std::vector<double>;

  std::vector<double> grid(opt.n_samples);
  for (int i = 0; i < opt.n_samples; ++i) grid[i] = t0 + (t1 - t0) * i / (opt.n_samples - 1);
  grid.back() = t1;

  std::vector<double> ts;
  std::vector<State> xs;
  auto sys = [&](const State& x, State& dx, double t) {
    const Eigen::Map<const Vector> xv(x.data(), model.n);
    const Vector f = model.rhs(xv, input(t, model.m));
    if (!f.allFinite()) throw detail::diverged_signal{};
    dx.assign(f.data(), f.data() + f.size());
  };
  auto observe = [&](const State& x, double t) {
    const Eigen::Map<const Vector> xv(x.data(), model.n);
    if (!xv.allFinite() || xv.lpNorm<Eigen::Infinity>() > opt.divergence_bound) throw detail::diverged_signal{};
    ts.push_back(t);
    xs.push_back(x);
  };

  Trajectory tr;
  State x(x0.data(), x0.data() + x0.size());
  auto stepper = ode::make_dense_output(opt.abs_tol, opt.rel_tol, ode::runge_kutta_dopri5<State>());
  try {
    ode::integrate_times(stepper, sys, x, grid.begin(), grid.end(), (t1 - t0) / opt.n_samples, observe,
                         ode::max_step_checker(100000));
  } catch (const detail::diverged_signal&) {
    tr.diverged = true;
  } catch (const ode::step_adjustment_error&) {
    tr.diverged = true;
  } catch (const ode::no_progress_error&) {
    tr.diverged = true;
  }

  const Index N = static_cast<Index>(ts.size());
  tr.t = ts;
  tr.X.resize(N, model.n);
  tr.Y.resize(N, model.p);
  tr.U.resize(N, model.m);
  for (Index i = 0; i < N; ++i) {
    const Eigen::Map<const Vector> xv(xs[i].data(), model.n);
    tr.X.row(i) = xv.transpose();
    tr.Y.row(i) = model.output(xv).transpose();
    tr.U.row(i) = input(ts[i], model.m).transpose();
  }
  return tr;
}

enum class ErrorNorm {
  trapezoid,  // sqrt of the trapezoid integral of the squared difference
  discrete,   // Euclidean norm of the sampled difference vector
};

// Output error between trajectories on a shared grid; channel -1 uses all output channels.
inline double l2_error(const Trajectory& ref, const Trajectory& y, Index channel = -1,
                       ErrorNorm norm = ErrorNorm::trapezoid) {
  if (ref.t.size() != y.t.size() || ref.Y.cols() != y.Y.cols())
    throw std::invalid_argument("l2_error: grid mismatch");
  for (std::size_t i = 0; i < ref.t.size(); ++i)
    if (std::abs(ref.t[i] - y.t[i]) > 1e-12 * (1.0 + std::abs(ref.t[i])))
      throw std::invalid_argument("l2_error: grid mismatch");
  if (channel >= ref.Y.cols()) throw std::invalid_argument("l2_error: channel out of range");
  const Matrix D = y.Y - ref.Y;
  auto sq = [&](Index i) { return channel < 0 ? D.row(i).squaredNorm() : D(i, channel) * D(i, channel); };
  double acc = 0;
  if (norm == ErrorNorm::discrete) {
    for (Index i = 0; i < ref.samples(); ++i) acc += sq(i);
  } else {
    for (Index i = 0; i + 1 < ref.samples(); ++i) acc += 0.5 * (ref.t[i + 1] - ref.t[i]) * (sq(i) + sq(i + 1));
  }
  return std::sqrt(acc);
}

inline void write_csv(std::ostream& os, const Trajectory& tr) {
  os << "t";
  for (Index i = 0; i < tr.X.cols(); ++i) os << ",x" << i + 1;
  for (Index i = 0; i < tr.Y.cols(); ++i) os << ",y" << i + 1;
  for (Index i = 0; i < tr.U.cols(); ++i) os << ",u" << i + 1;
  os << "\n" << std::setprecision(17);
  for (Index k = 0; k < tr.samples(); ++k) {
    os << tr.t[k];
    for (Index i = 0; i < tr.X.cols(); ++i) os << "," << tr.X(k, i);
    for (Index i = 0; i < tr.Y.cols(); ++i) os << "," << tr.Y(k, i);
    for (Index i = 0; i < tr.U.cols(); ++i) os << "," << tr.U(k, i);
    os << "\n";
  }
}

}  // namespace nlbt
