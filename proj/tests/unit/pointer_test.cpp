#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bohmctx/errors.hpp"
#include "bohmctx/pointer_model.hpp"

using namespace bohmctx;
using namespace bohmctx::pointer;

namespace {

const double kHalf = 1.0 / std::numbers::sqrt2;

// Apparatus ramps 0 -> a_max over [0, 1]; the system branches move at
// +/- recoil during the ramp, then (unless pre-separated) to +/- 4 by T = 2.
PointerModelConfig optical(std::size_t n, double recoil = 0.0, double presep = 0.0,
                           Complex c_plus = kHalf, Complex c_minus = kHalf) {
  PointerModelConfig c;
  c.total_time = 2.0;
  c.blocks.push_back({"apparatus", n, 1.0, Schedule::ramp(0, 1, 0, 4)});
  for (int s : {+1, -1}) {
    Branch b;
    b.label = s > 0 ? Outcome::plus : Outcome::minus;
    b.amplitude = s > 0 ? c_plus : c_minus;
    b.apparatus_sign = s;
    const double x0 = s * presep, x1 = x0 + s * recoil;
    const double x2 = presep > 0 ? x1 : x1 + s * 4.0;
    b.system_center = Schedule{{0, 1, 2}, {x0, x1, x2}};
    c.branches[s > 0 ? 0 : 1] = b;
  }
  return c;
}

ConfigPoint at(double x, std::vector<double> y) { return {x, std::move(y)}; }

struct Accuracy {
  double system = 0, apparatus = 0;
  std::size_t resolved = 0;
};

Accuracy ensemble(const PointerModel& m, std::size_t n, std::uint64_t seed) {
  const auto initial = m.sample(n, seed);
  const auto runs = integrate_pointer(m, initial, {.dt = 0.01});
  Accuracy a;
  for (const auto& r : runs) {
    if (!resolved(r.outcome)) continue;
    ++a.resolved;
    a.system += m.predict_system(r.initial.x) == r.outcome;
    a.apparatus += m.predict_block(r.initial) == r.outcome;
  }
  a.system /= static_cast<double>(a.resolved);
  a.apparatus /= static_cast<double>(a.resolved);
  return a;
}

// Gaussian factor with the plane-wave and chirp phases, written out directly.
Complex factor(double q, double c, double s, double v, double r) {
  const double u = q - c;
  const double amp = std::pow(2 * std::numbers::pi * s * s, -0.25) * std::exp(-u * u / (4 * s * s));
  return std::polar(amp, v * u + 0.5 * r * u * u);
}

template <class F>
Complex simpson(F f, double a, double b, int n = 40000) {
  const double h = (b - a) / n;
  Complex s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * (h / 3.0);
}

}  // namespace

TEST(Schedule, ValueAndLeftDerivative) {
  const Schedule s{{0, 1, 3}, {0, 2, 2}};
  EXPECT_DOUBLE_EQ(s.value(-1), 0.0);
  EXPECT_DOUBLE_EQ(s.value(0.5), 1.0);
  EXPECT_DOUBLE_EQ(s.value(5), 2.0);
  EXPECT_DOUBLE_EQ(s.rate(0.0), 0.0);
  EXPECT_DOUBLE_EQ(s.rate(0.5), 2.0);
  EXPECT_DOUBLE_EQ(s.rate(1.0), 2.0);
  EXPECT_DOUBLE_EQ(s.rate(1.5), 0.0);
  EXPECT_DOUBLE_EQ(s.rate(4.0), 0.0);
  EXPECT_THROW((Schedule{{0, 0}, {1, 2}}.validate("s")), InvalidInput);
}

TEST(PointerConfig, Validation) {
  auto c = optical(4);
  c.branches[1].amplitude = 0.9;
  EXPECT_THROW(PointerModel{c}, InvalidInput);
  c = optical(4);
  c.blocks[0].displacement = Schedule::constant(1.0);
  EXPECT_THROW(PointerModel{c}, InvalidInput);
  c = optical(4);
  c.branches[1].label = Outcome::plus;
  EXPECT_THROW(PointerModel{c}, InvalidInput);
  c = optical(4);
  c.branches[0].apparatus_sign = 2;
  EXPECT_THROW(PointerModel{c}, InvalidInput);
  EXPECT_NO_THROW(PointerModel{optical(0)});
}

TEST(BranchWeight, SymmetricAtOriginAndEmptyBranch) {
  const PointerModel m(optical(5));
  const auto w = m.branch_local_weight(at(0, std::vector<double>(5, 0.0)), 0.0);
  EXPECT_EQ(w[0], w[1]);
  const PointerModel one(optical(5, 0, 0, 1.0, 0.0));
  for (double x : {-1.0, 0.0, 2.0}) {
    EXPECT_EQ(one.branch_local_weight(at(x, {0.1, -0.3, 0.5, 1, 2}), 1.3)[1], 0.0);
  }
}

TEST(BranchWeight, MatchesDirectProductFormula) {
  const std::size_t n = 4;
  const PointerModel m(optical(n));
  const ConfigPoint p = at(0.7, {0.3, -0.2, 1.1, 0.4});
  const double t = 0.6, a = 4 * t;
  auto gauss = [](double q, double c) { return std::exp(-0.5 * (q - c) * (q - c)) / std::sqrt(2 * std::numbers::pi); };
  for (int s : {+1, -1}) {
    double w = 0.5 * gauss(p.x, 0.0);
    for (double y : p.y) w *= gauss(y, s * a);
    EXPECT_NEAR(m.branch_local_weight(p, t)[s > 0 ? 0 : 1] / w, 1.0, 1e-12);
  }
}

TEST(BranchWeight, LateDominanceBound) {
  for (std::size_t n : {1u, 4u, 16u}) {
    const PointerModel m(optical(n));
    const double t = 2.0, a = 4.0;
    const auto lw = m.log_weights(at(4.0, std::vector<double>(n, a)), t);
    EXPECT_GE(lw[0] - lw[1], static_cast<double>(n) * a * a);
  }
}

TEST(PointerVelocity, SingleBranchFollowsSchedulesExactly) {
  for (VelocityForm form : {VelocityForm::internal_state, VelocityForm::coherent}) {
    auto c = optical(3, 0.5, 0, 1.0, 0.0);
    c.form = form;
    const PointerModel m(c);
    for (double t : {0.25, 0.9, 1.5}) {
      const auto v = m.velocity(at(0.3, {-1.0, 0.2, 2.5}), t);
      EXPECT_FALSE(v.regularized);
      EXPECT_EQ(v.velocity.x, c.branches[0].system_center.rate(t));
      for (double vy : v.velocity.y) EXPECT_EQ(vy, c.blocks[0].displacement.rate(t));
    }
  }
}

TEST(PointerVelocity, AtRestAtSymmetricOrigin) {
  for (VelocityForm form : {VelocityForm::internal_state, VelocityForm::coherent}) {
    auto c = optical(6, 0.7);
    c.form = form;
    const PointerModel m(c);
    const auto v = m.velocity(at(0, std::vector<double>(6, 0.0)), 0.0);
    EXPECT_NEAR(v.velocity.x, 0.0, 1e-12);
    for (double vy : v.velocity.y) EXPECT_NEAR(vy, 0.0, 1e-12);
  }
}

TEST(PointerVelocity, DeepInBranchMatchesItsSchedule) {
  for (VelocityForm form : {VelocityForm::internal_state, VelocityForm::coherent}) {
    auto c = optical(8, 0.5);
    c.form = form;
    const PointerModel m(c);
    const double t = 2.0;
    const auto v = m.velocity(at(4.5, std::vector<double>(8, 4.0)), t);
    const double vx = c.branches[0].system_center.rate(t);
    EXPECT_NEAR(v.velocity.x, vx, 1e-6 * std::abs(vx));
    for (double vy : v.velocity.y) EXPECT_NEAR(vy, 0.0, 1e-12);
  }
}

TEST(PointerVelocity, CoherentFormMatchesFiniteDifferenceOfLogPsi) {
  auto c = optical(2, 0.8);
  c.form = VelocityForm::coherent;
  c.branches[1].amplitude = std::polar(kHalf, 0.9);
  const PointerModel m(c);
  const double t = 0.5;
  const double a = c.blocks[0].displacement.value(t), adot = c.blocks[0].displacement.rate(t);
  auto psi = [&](double x, double y1, double y2) {
    Complex total{};
    for (int b = 0; b < 2; ++b) {
      const int s = b == 0 ? 1 : -1;
      const auto& sc = c.branches[b].system_center;
      total += c.branches[b].amplitude * factor(x, sc.value(t), 1.0, sc.rate(t), 0.0) *
               factor(y1, s * a, 1.0, s * adot, 0.0) * factor(y2, s * a, 1.0, s * adot, 0.0);
    }
    return total;
  };
  const double h = 1e-6;
  for (const auto& p : {at(0.1, {0.2, -0.4}), at(-0.6, {1.1, 0.3}), at(0.9, {-0.5, -1.2})}) {
    const Complex base = psi(p.x, p.y[0], p.y[1]);
    auto im_dlog = [&](Complex plus, Complex minus) { return std::imag((plus - minus) / (2 * h) / base); };
    const double vx = im_dlog(psi(p.x + h, p.y[0], p.y[1]), psi(p.x - h, p.y[0], p.y[1]));
    const double vy1 = im_dlog(psi(p.x, p.y[0] + h, p.y[1]), psi(p.x, p.y[0] - h, p.y[1]));
    const double vy2 = im_dlog(psi(p.x, p.y[0], p.y[1] + h), psi(p.x, p.y[0], p.y[1] - h));
    const auto v = m.velocity(p, t);
    EXPECT_NEAR(v.velocity.x, vx, 1e-6);
    EXPECT_NEAR(v.velocity.y[0], vy1, 1e-6);
    EXPECT_NEAR(v.velocity.y[1], vy2, 1e-6);
  }
}

TEST(PointerVelocity, EmptyWaveInvariance) {
  for (VelocityForm form : {VelocityForm::internal_state, VelocityForm::coherent}) {
    auto both = optical(16, 0.5);
    auto alone = optical(16, 0.5, 0, 1.0, 0.0);
    both.form = alone.form = form;
    const PointerModel m2(both), m1(alone);
    for (double t : {1.0, 1.5, 2.0}) {
      const double a = both.blocks[0].displacement.value(t);
      ConfigPoint p = at(both.branches[0].system_center.value(t) - 0.3, std::vector<double>(16, a));
      for (std::size_t j = 0; j < 16; ++j) p.y[j] += 0.1 * static_cast<double>(j % 5) - 0.2;
      const auto lw = m2.log_weights(p, t);
      ASSERT_GE(lw[0] - lw[1], std::log(1e12));
      const auto v2 = m2.velocity(p, t), v1 = m1.velocity(p, t);
      auto close = [](double x, double y) { return std::abs(x - y) <= 1e-6 * std::max(std::abs(y), 1e-300); };
      EXPECT_TRUE(close(v2.velocity.x, v1.velocity.x)) << v2.velocity.x << " vs " << v1.velocity.x;
      for (std::size_t j = 0; j < 16; ++j) EXPECT_TRUE(close(v2.velocity.y[j], v1.velocity.y[j]) || v1.velocity.y[j] == 0.0);
    }
  }
}

TEST(Overlap, ClosedFormForEqualWidths) {
  const numerics::Units u;
  const double dc = 1.3, dv = 0.7, s = 0.9;
  const double expected = -dc * dc / (8 * s * s) - s * s * dv * dv / 2;
  EXPECT_NEAR(log_factor_overlap(0.2, s, 0.4, 0, 0.2 + dc, s, 0.4 + dv, 0, u), expected, 1e-12);
}

TEST(Overlap, InitialAndSingleCoordinate) {
  const PointerModel m8(optical(8)), m1(optical(1));
  EXPECT_EQ(m8.apparatus_overlap(0.0), 1.0);
  EXPECT_EQ(m8.system_overlap(0.0), 1.0);
  for (double t : {0.3, 1.0, 1.7}) EXPECT_EQ(m1.apparatus_overlap(t), std::exp(m1.log_omega(t)));
}

TEST(Overlap, ExponentLaw) {
  for (std::size_t n : {1u, 2u, 8u, 64u}) {
    const PointerModel m(optical(n));
    for (double t : {0.1, 0.5, 1.0, 2.0}) {
      const double lhs = m.log_apparatus_overlap(t);
      const double rhs = static_cast<double>(n) * m.log_omega(t);
      EXPECT_NEAR(lhs, rhs, 1e-12 * std::abs(rhs));
      EXPECT_EQ(m.apparatus_overlap(t), std::exp(lhs));
    }
  }
}

TEST(Overlap, EightFoldProductMatchesQuadrature) {
  // At t = 0.25 the ramp has a = sigma_M and a nonzero rate, so the branch
  // factors carry opposite plane-wave phases.
  const PointerModel m(optical(8));
  const double t = 0.25, a = 1.0, adot = 4.0;
  const Complex one = simpson(
      [&](double y) { return std::conj(factor(y, a, 1.0, adot, 0.0)) * factor(y, -a, 1.0, -adot, 0.0); },
      -20.0, 20.0);
  // Two coordinates integrated jointly on a tensor grid, the rest as powers.
  const int nq = 1200;
  const double lo = -12.0, h = 24.0 / nq;
  Complex two{};
  for (int i = 0; i <= nq; ++i) {
    for (int j = 0; j <= nq; ++j) {
      const double wi = (i == 0 || i == nq) ? 1 : (i % 2 ? 4 : 2);
      const double wj = (j == 0 || j == nq) ? 1 : (j % 2 ? 4 : 2);
      const double y1 = lo + i * h, y2 = lo + j * h;
      two += wi * wj * std::conj(factor(y1, a, 1, adot, 0) * factor(y2, a, 1, adot, 0)) *
             factor(y1, -a, 1, -adot, 0) * factor(y2, -a, 1, -adot, 0);
    }
  }
  two *= h * h / 9.0;
  const double quad = std::abs(two * two * two * two);
  EXPECT_NEAR(std::abs(std::pow(one, 8)), quad, 1e-8);
  EXPECT_NEAR(m.apparatus_overlap(t), quad, 1e-8);
}

TEST(Overlap, SpreadingFactorsMatchQuadrature) {
  auto c = optical(1, 0.6);
  c.spreading = true;
  const PointerModel m(c);
  const numerics::Units u;
  for (double t : {0.4, 1.2}) {
    const double s = m.system_sigma(t);
    const double tau = 0.5;  // hbar / (2 m sigma0^2)
    const double r = tau * tau * t / (1 + tau * tau * t * t);
    const auto& p = c.branches[0].system_center;
    const auto& q = c.branches[1].system_center;
    const Complex quad = simpson(
        [&](double x) {
          return std::conj(factor(x, p.value(t), s, p.rate(t), r)) * factor(x, q.value(t), s, q.rate(t), r);
        },
        -25.0, 25.0);
    EXPECT_NEAR(m.system_overlap(t), std::abs(quad), 1e-8);
    (void)u;
  }
}

TEST(Classify, EmptyBranchAndTie) {
  const PointerModel one(optical(4, 0, 0, 1.0, 0.0));
  const auto runs = integrate_pointer(one, one.sample(200, 3), {.dt = 0.02});
  for (const auto& r : runs) EXPECT_EQ(r.outcome, Outcome::plus);
  const PointerModel m(optical(4));
  EXPECT_EQ(m.classify(at(0, {0, 0, 0, 0}), 2.0), Outcome::unresolved);
}

TEST(Predictors, SignConventions) {
  const PointerModel m(optical(3));
  EXPECT_EQ(m.predict_block(at(0, {0.1, 0.2, 0.3})), Outcome::plus);
  EXPECT_EQ(m.predict_block(at(0, {-0.1, 0.2, -0.3})), Outcome::minus);
  EXPECT_EQ(m.predict_block(at(0, {0.5, -0.5, 0.0})), Outcome::unresolved);
  EXPECT_EQ(m.predict_system(0.0), Outcome::unresolved);
  EXPECT_EQ(m.predict_system(0.2), Outcome::plus);
  const PointerModel pre(optical(3, 0, 4));
  EXPECT_EQ(pre.predict_system(-0.1), Outcome::minus);
}

TEST(Ensemble, MonotoneApparatusDominance) {
  double previous = 0.0;
  for (std::size_t n : {1u, 4u, 16u, 64u}) {
    const auto acc = ensemble(PointerModel(optical(n)), 500, 2024);
    EXPECT_GE(acc.apparatus, previous) << "N = " << n;
    EXPECT_NEAR(acc.system, 0.5, 0.08) << "N = " << n;
    EXPECT_GE(acc.resolved, 495u);
    previous = acc.apparatus;
  }
  EXPECT_GE(previous, 0.99);
}

TEST(Ensemble, RecoilDuringRampMakesDominanceGrowWithN) {
  double previous = 0.0;
  for (std::size_t n : {1u, 4u, 16u, 64u}) {
    const auto acc = ensemble(PointerModel(optical(n, 1.0)), 2000, 77);
    EXPECT_GT(acc.apparatus, previous) << "N = " << n;
    previous = acc.apparatus;
  }
  EXPECT_GE(previous, 0.98);
}

TEST(Ensemble, PreSeparatedRegimeInverts) {
  for (std::size_t n : {1u, 4u, 16u, 64u}) {
    const auto acc = ensemble(PointerModel(optical(n, 0, 4)), 500, 99);
    EXPECT_EQ(acc.system, 1.0) << "N = " << n;
    EXPECT_NEAR(acc.apparatus, 0.5, 0.08) << "N = " << n;
  }
}

TEST(Ensemble, BornMarginalAtFinalTime) {
  for (bool spreading : {false, true}) {
    auto c = optical(8, 0.5, 0, std::sqrt(0.3), std::sqrt(0.7));
    c.spreading = spreading;
    const PointerModel m(c);
    const auto runs = integrate_pointer(m, m.sample(2000, 5), {.dt = 0.01});
    std::vector<double> xs;
    for (const auto& r : runs) xs.push_back(r.final.x);
    std::sort(xs.begin(), xs.end());
    double ks = 0.0;
    const double n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double f = m.system_marginal_cdf(xs[i], 2.0);
      ks = std::max({ks, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    EXPECT_LT(ks, 0.05) << "spreading = " << spreading;
  }
}

TEST(Ensemble, ReducedPathAndDeterminism) {
  const PointerModel m(optical(4, 0.3));
  const auto init = m.sample(64, 11);
  const auto a = integrate_pointer(m, init, {.dt = 0.05, .record_full = true, .threads = 1});
  const auto b = integrate_pointer(m, init, {.dt = 0.05, .threads = 3});
  ASSERT_EQ(a[0].path.size(), 41u);
  ASSERT_EQ(a[0].full.size(), 41u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i].path.points, b[i].path.points);
    const auto last = a[i].path.final();
    EXPECT_EQ(last[0], a[i].final.x);
    double sum = 0;
    for (double y : a[i].final.y) sum += y;
    EXPECT_NEAR(last[1], sum, 1e-12);
  }
  EXPECT_THROW(integrate_pointer(m, init, {.dt = 0.3}), InvalidInput);
}
