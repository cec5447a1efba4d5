#include <gtest/gtest.h>

#include <nlbt/models.hpp>
#include <nlbt/pipeline.hpp>
#include <nlbt/sim.hpp>

#include <sstream>

#include "test_util.hpp"

using namespace nlbt;
using namespace testutil;

namespace {

Model scalar_model(std::function<double(double)> f) {
  return {1, 1, 1, [f](const Vector& x, const Vector&) { return Vector::Constant(1, f(x(0))); },
          [](const Vector& x) { return x; }};
}

Trajectory constant_output(const std::vector<double>& t, double v) {
  Trajectory tr;
  tr.t = t;
  tr.X = Matrix::Zero(t.size(), 1);
  tr.U = Matrix::Zero(t.size(), 1);
  tr.Y = Matrix::Constant(t.size(), 1, v);
  return tr;
}

}  // namespace

TEST(Sim, ExponentialDecay) {
  const Trajectory tr = integrate(scalar_model([](double x) { return -x; }), Vector::Ones(1), Signal::zero(), 0, 1);
  ASSERT_FALSE(tr.diverged);
  EXPECT_EQ(tr.samples(), 2000);
  EXPECT_EQ(tr.t.front(), 0.0);
  EXPECT_EQ(tr.t.back(), 1.0);
  EXPECT_NEAR(tr.X(tr.samples() - 1, 0), std::exp(-1.0), 1e-6);
  for (Index i = 0; i < tr.samples(); i += 97) EXPECT_NEAR(tr.X(i, 0), std::exp(-tr.t[i]), 1e-7);
}

TEST(Sim, ConstantTrajectory) {
  Vector x0(1);
  x0 << 2.5;
  const Trajectory tr = integrate(scalar_model([](double) { return 0.0; }), x0, Signal::zero(), 0, 3);
  EXPECT_TRUE((tr.X.array() == 2.5).all());
}

TEST(Sim, ToleranceScaling) {
  std::vector<double> tols, errs;
  for (double tol : {1e-5, 1e-6, 1e-7, 1e-8, 1e-9}) {
    SimOptions o;
    o.rel_tol = tol;
    o.abs_tol = tol * 1e-3;
    const Trajectory tr = integrate(scalar_model([](double x) { return -x; }), Vector::Ones(1), Signal::zero(), 0, 5, o);
    tols.push_back(tol);
    errs.push_back(std::abs(tr.X(tr.samples() - 1, 0) - std::exp(-5.0)));
  }
  const double s = loglog_slope(tols, errs);
  EXPECT_GT(s, 0.6);
  EXPECT_LT(s, 1.4);
}

TEST(Sim, DivergenceFlagged) {
  // xdot = x^2 blows up at t = 1
  const Trajectory tr = integrate(scalar_model([](double x) { return x * x; }), Vector::Ones(1), Signal::zero(), 0, 2);
  EXPECT_TRUE(tr.diverged);
  EXPECT_GT(tr.samples(), 0);
  EXPECT_LT(tr.samples(), 2000);
  EXPECT_LT(tr.t.back(), 1.0);
}

TEST(Sim, BadArguments) {
  const Model m = scalar_model([](double x) { return -x; });
  EXPECT_THROW(integrate(m, Vector::Ones(2), Signal::zero(), 0, 1), std::invalid_argument);
  SimOptions o;
  o.rel_tol = 0;
  EXPECT_THROW(integrate(m, Vector::Ones(1), Signal::zero(), 0, 1, o), std::invalid_argument);
  EXPECT_THROW(integrate(m, Vector::Ones(1), Signal::zero(), 1, 1), std::invalid_argument);
}

TEST(Sim, Signals) {
  EXPECT_EQ(Signal::zero()(1.3, 2), Vector::Zero(2));
  EXPECT_NEAR(Signal::sinusoid(0.5, 1 / M_PI)(M_PI * M_PI / 2, 1)(0), 0.5, 1e-15);
  const Vector u = Signal::sinusoid(1.0, 2.0, 1)(0.3, 3);
  EXPECT_EQ(u(0), 0.0);
  EXPECT_NEAR(u(1), std::sin(0.6), 1e-15);
  EXPECT_EQ(u(2), 0.0);
}

TEST(Sim, WhiteNoiseDeterministicAndHeld) {
  const Signal a = Signal::white_noise(2.0, 42, 0.01), b = Signal::white_noise(2.0, 42, 0.01);
  const Signal c = Signal::white_noise(2.0, 43, 0.01);
  double sum = 0, sq = 0;
  int differ = 0;
  const int N = 20000;
  for (int k = 0; k < N; ++k) {
    const double t = 0.01 * k + 0.003;
    const Vector ua = a(t, 2), ub = b(t, 2);
    EXPECT_EQ(ua, ub);
    EXPECT_EQ(ua, a(0.01 * k + 0.007, 2));  // held within the interval
    if (ua(0) != c(t, 2)(0)) ++differ;
    sum += ua(0);
    sq += ua(0) * ua(0);
  }
  EXPECT_EQ(differ, N);
  EXPECT_NEAR(sum / N, 0.0, 0.1);
  EXPECT_NEAR(std::sqrt(sq / N), 2.0, 0.1);
}

TEST(Sim, L2ErrorConventions) {
  std::vector<double> t;
  for (int i = 0; i <= 100; ++i) t.push_back(0.05 * i);
  const Trajectory a = constant_output(t, 1.0), b = constant_output(t, 1.25);
  EXPECT_EQ(l2_error(a, a), 0.0);
  EXPECT_NEAR(l2_error(a, b), 0.25 * std::sqrt(5.0), 1e-14);
  EXPECT_NEAR(l2_error(a, b, 0, ErrorNorm::discrete), 0.25 * std::sqrt(101.0), 1e-14);
  Trajectory c = b;
  c.t.pop_back();
  EXPECT_THROW(l2_error(a, c), std::invalid_argument);
  EXPECT_THROW(l2_error(a, b, 3), std::invalid_argument);
}

TEST(Sim, CsvFormat) {
  const auto s = two_dim_illustrative();
  SimOptions o;
  o.n_samples = 5;
  Vector x0(2);
  x0 << 0.1, 0.1;
  const Trajectory tr = integrate(model_of(s), x0, Signal::sinusoid(0.5, 1 / M_PI), 0, 1, o);
  std::ostringstream os;
  write_csv(os, tr);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "t,x1,x2,y1,u1");
  int rows = 0;
  while (std::getline(is, line)) {
    std::vector<double> vals;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) vals.push_back(std::stod(cell));
    ASSERT_EQ(vals.size(), 5u);
    EXPECT_EQ(vals[0], tr.t[rows]);
    EXPECT_EQ(vals[1], tr.X(rows, 0));
    EXPECT_EQ(vals[3], tr.Y(rows, 0));
    ++rows;
  }
  EXPECT_EQ(rows, 5);
}

// The FOM and its full balanced realization describe the same dynamics near the origin.
TEST(Sim, BalancedRealizationReproducesFom) {
  const auto s = two_dim_illustrative();
  PipelineOptions po;
  po.d_transf = 7;
  const PipelineResult r = run_pipeline(s, po);
  const Signal u = Signal::sinusoid(0.5, 1 / M_PI);
  for (const Vector& x0 : {Vector((Vector(2) << 0.1, 0.0).finished()), Vector((Vector(2) << 0.05, -0.05).finished())}) {
    const Trajectory fom = integrate(model_of(s), x0, u, 0, 1);
    const Trajectory bal = integrate(model_of(r.realization.sys), eval_poly(r.P, x0), u, 0, 1);
    ASSERT_FALSE(fom.diverged || bal.diverged);
    EXPECT_LE((fom.Y - bal.Y).cwiseAbs().maxCoeff(), 1e-4);
    double worst = 0;
    for (Index i = 0; i < fom.samples(); ++i)
      worst = std::max(worst, (eval_poly(r.Tbar, bal.X.row(i).transpose()) - fom.X.row(i).transpose())
                                  .lpNorm<Eigen::Infinity>());
    EXPECT_LE(worst, 1e-3);
  }
}

TEST(Sim, InitialConditionOnGrid) {
  const auto s = pendulum(3);
  Vector x0(2);
  x0 << 0.1, 0.1;
  const Trajectory tr = integrate(model_of(s), x0, Signal::zero(), 0, 2);
  EXPECT_EQ(tr.X.row(0).transpose(), x0);
  EXPECT_EQ(tr.Y.row(0).transpose(), s.output(x0));
}
