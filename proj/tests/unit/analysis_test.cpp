#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "bohmctx/analysis.hpp"
#include "bohmctx/errors.hpp"

using namespace bohmctx;
using namespace bohmctx::analysis;

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

guidance::Trajectory line(std::vector<double> xs, double dt = 0.1) {
  guidance::Trajectory t;
  for (std::size_t k = 0; k < xs.size(); ++k) t.times.push_back(static_cast<double>(k) * dt);
  t.points = std::move(xs);
  return t;
}

EnsembleReport outcomes(std::vector<Outcome> out, std::vector<Outcome> predicted) {
  EnsembleReport r;
  r.predictors = {"system"};
  for (std::size_t i = 0; i < out.size(); ++i) {
    RunRecord run;
    run.id = i;
    run.outcome = out[i];
    run.predictions["system"] = predicted[i];
    r.runs.push_back(run);
  }
  return r;
}

}  // namespace

TEST(BornKs, DirectSamplesPass) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  int passes = 0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> xs(2000);
    for (auto& x : xs) x = n01(rng);
    passes += born_rule_ks(xs, normal_cdf) < 0.05;
  }
  EXPECT_EQ(passes, 20);
}

TEST(BornKs, DegenerateAndIdentical) {
  std::vector<double> far(500, 10.0);
  EXPECT_GT(born_rule_ks(far, normal_cdf), 0.999);

  std::vector<double> xs;
  for (int i = 0; i < 400; ++i) xs.push_back(std::sin(i * 1.7));
  std::vector<double> sorted = xs;
  std::sort(sorted.begin(), sorted.end());
  auto empirical = [&](double x) {
    return static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin()) / 400.0;
  };
  EXPECT_LE(born_rule_ks(xs, empirical), 1.0 / 400.0 + 1e-15);
}

TEST(BornKs, RejectsTooFewSamples) {
  std::vector<double> xs(99, 0.0);
  EXPECT_THROW(born_rule_ks(xs, normal_cdf), InvalidInput);
}

TEST(Wilson, KnownInterval) {
  // Textbook value for 50 successes out of 100.
  const Accuracy a = wilson(50, 100);
  EXPECT_NEAR(a.lower, 0.4038, 1e-4);
  EXPECT_NEAR(a.upper, 0.5962, 1e-4);
  const Accuracy all = wilson(500, 500);
  EXPECT_EQ(all.fraction, 1.0);
  EXPECT_EQ(all.upper, 1.0);
  EXPECT_NEAR(all.lower, 0.99238, 1e-4);
  EXPECT_FALSE(wilson(0, 0).determined);
}

TEST(PredictorAccuracy, PerfectAndConstantPredictors) {
  std::vector<Outcome> out, same, constant;
  for (int i = 0; i < 500; ++i) {
    out.push_back(i % 2 ? Outcome::plus : Outcome::minus);
    constant.push_back(Outcome::plus);
  }
  EXPECT_EQ(predictor_accuracy(outcomes(out, out), "system").fraction, 1.0);
  const Accuracy half = predictor_accuracy(outcomes(out, constant), "system");
  EXPECT_EQ(half.fraction, 0.5);
  EXPECT_GT(half.radius, 0.03);
  EXPECT_LT(half.radius, 0.05);

  const std::vector<Outcome> none(10, Outcome::unresolved);
  EXPECT_FALSE(predictor_accuracy(outcomes(none, none), "system").determined);
  EXPECT_EQ(determinant_attribution(outcomes(none, none)).label, VerdictLabel::indeterminate);
}

TEST(Summarize, CountsAndFrequencies) {
  auto r = outcomes({Outcome::plus, Outcome::minus, Outcome::plus, Outcome::unresolved},
                    {Outcome::plus, Outcome::plus, Outcome::plus, Outcome::plus});
  summarize(r);
  EXPECT_EQ(r.resolved, 3u);
  EXPECT_EQ(r.unresolved, 1u);
  EXPECT_DOUBLE_EQ(r.plus_frequency, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.plus_frequency + r.minus_frequency, 1.0);
  EXPECT_TRUE(r.degraded);
  EXPECT_DOUBLE_EQ(r.accuracies.at("system").fraction, 2.0 / 3.0);
}

TEST(CrossingAudit, ParallelAndSwapped) {
  std::vector<guidance::Trajectory> parallel;
  for (double x0 : {-1.0, 0.0, 2.0}) parallel.push_back(line({x0, x0 + 0.1, x0 + 0.2, x0 + 0.3}));
  EXPECT_EQ(crossing_audit(parallel), 0u);

  std::vector<guidance::Trajectory> swapped = {line({0.0, 0.5, 1.0}), line({1.0, 0.5, 0.0}), line({5, 5, 5})};
  EXPECT_EQ(crossing_audit(swapped), 1u);

  std::vector<guidance::Trajectory> mismatched = {line({0, 1}, 0.1), line({0, 1}, 0.2)};
  EXPECT_THROW(crossing_audit(mismatched), InvalidInput);
}

TEST(Attribution, Labels) {
  EXPECT_EQ(determinant_attribution(1.0, {{"apparatus", 0.5}}).label, VerdictLabel::S_determined);
  EXPECT_EQ(determinant_attribution(0.52, {{"apparatus", 0.995}}).label, VerdictLabel::M_determined);
  const auto v = determinant_attribution(0.5, {{"apparatus", 0.5}, {"ancilla", 1.0}});
  EXPECT_EQ(v.label, VerdictLabel::M_determined);
  EXPECT_EQ(v.environment, "ancilla");
  EXPECT_EQ(determinant_attribution(0.7, {{"ancilla", 0.8}}).label, VerdictLabel::mixed);
  EXPECT_EQ(determinant_attribution(0.7, {{"ancilla", 0.5}}).label, VerdictLabel::indeterminate);
  EXPECT_EQ(determinant_attribution(0.7, {}).label, VerdictLabel::indeterminate);
  EXPECT_THROW(determinant_attribution(0.7, {{"a", 0.8}}, {.determined = 0.5, .chance = 0.6}), InvalidInput);
}

TEST(Attribution, PureAndMonotoneInThreshold) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const double s = u(rng), m = u(rng);
    const auto first = determinant_attribution(s, {{"apparatus", m}});
    EXPECT_EQ(first.label, determinant_attribution(s, {{"apparatus", m}}).label);
    bool left_s = first.label != VerdictLabel::S_determined;
    for (double hi = 0.99; hi <= 1.0; hi += 0.001) {
      const auto v = determinant_attribution(s, {{"apparatus", m}}, {.determined = hi, .chance = 0.6});
      if (left_s) EXPECT_NE(v.label, VerdictLabel::S_determined);
      left_s = left_s || v.label != VerdictLabel::S_determined;
    }
  }
}
