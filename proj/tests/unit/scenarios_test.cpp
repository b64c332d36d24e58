#include <gtest/gtest.h>

#include <cmath>

#include "bohmctx/errors.hpp"
#include "bohmctx/propagate.hpp"
#include "bohmctx/sampling.hpp"
#include "bohmctx/scenarios.hpp"
#include "bohmctx/trajectory.hpp"
#include "bohmctx/wavepacket.hpp"

using namespace bohmctx;
using namespace bohmctx::scenarios;

namespace {

const EnsembleReport& find(const ScenarioResult& r, const std::string& label) {
  for (const auto& e : r.ensembles) {
    if (e.label == label) return e;
  }
  throw std::runtime_error("no ensemble " + label);
}

double acc(const EnsembleReport& e, const std::string& name) { return e.accuracies.at(name).fraction; }

bool same_runs(const EnsembleReport& a, const EnsembleReport& b) {
  if (a.runs.size() != b.runs.size()) return false;
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    if (a.runs[i].system0 != b.runs[i].system0 || a.runs[i].system_final != b.runs[i].system_final ||
        a.runs[i].outcome != b.runs[i].outcome || a.runs[i].block_sums0 != b.runs[i].block_sums0) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST(BeamSplitter, SinglePacketAlwaysD1) {
  BeamSplitterConfig c;
  c.common.ensemble = 200;
  c.amplitude_right = 1.0;
  c.amplitude_left = 0.0;
  const auto e = run_beam_splitter(c).ensembles.at(0);
  EXPECT_EQ(e.resolved, 200u);
  EXPECT_EQ(e.plus_frequency, 1.0);
  EXPECT_EQ(e.parameters.at("separation_time"), 0.0);
}

TEST(BeamSplitter, SymmetricSplitFollowsInitialOrder) {
  BeamSplitterConfig c;
  c.common.ensemble = 400;
  const auto e = run_beam_splitter(c).ensembles.at(0);
  EXPECT_EQ(e.resolved, 400u);
  EXPECT_EQ(acc(e, "system"), 1.0);
  EXPECT_EQ(e.audits.at("crossing_violations"), 0.0);
  EXPECT_EQ(e.audits.at("no_jump_violations"), 0.0);
  EXPECT_EQ(e.audits.at("detector_branch_mismatches"), 0.0);
  EXPECT_NEAR(e.parameters.at("split_point"), 0.0, 1e-3);
  // Packets at +-k t separate by 8 sigma around t = 8/(2k) in free flight.
  EXPECT_GT(e.parameters.at("separation_time"), 0.8);
  EXPECT_LT(e.parameters.at("separation_time"), 1.6);
  ASSERT_TRUE(e.verdict.has_value());
  EXPECT_EQ(e.verdict->label, VerdictLabel::S_determined);
}

TEST(BeamSplitter, FailsWhenPacketsStayTogether) {
  BeamSplitterConfig c;
  c.common.ensemble = 10;
  c.total_time = 0.2;
  EXPECT_THROW(run_beam_splitter(c), SeparationFailure);
}

TEST(BeamSplitter, RejectsBadConfig) {
  BeamSplitterConfig c;
  c.amplitude_right = 0.9;
  EXPECT_THROW(run_beam_splitter(c), InvalidInput);
  BeamSplitterConfig zero;
  zero.common.ensemble = 0;
  EXPECT_THROW(run_beam_splitter(zero), InvalidInput);
  BeamSplitterConfig stride;
  stride.frame_stride = 3;
  stride.dt = 0.001;
  EXPECT_THROW(run_beam_splitter(stride), InvalidInput);
}

TEST(SternGerlach, UpStateAlwaysDeflectsUp) {
  SternGerlachConfig c;
  c.common.ensemble = 200;
  c.alpha = 1.0;
  c.beta = 0.0;
  const auto r = run_stern_gerlach(c);
  const auto& e = find(r, "gradient");
  EXPECT_EQ(e.resolved, 200u);
  EXPECT_EQ(e.plus_frequency, 1.0);
  for (const auto& run : e.runs) EXPECT_GT(run.system_final, 0.0);
}

TEST(SternGerlach, OutcomeFollowsInitialSideAndSwapsUnderInversion) {
  SternGerlachConfig c;
  c.common.ensemble = 500;
  const auto r = run_stern_gerlach(c);
  const auto& up = find(r, "gradient");
  const auto& down = find(r, "inverted");
  EXPECT_EQ(acc(up, "system"), 1.0);
  EXPECT_EQ(acc(down, "system"), 1.0);
  EXPECT_EQ(up.audits.at("inversion_pairing_violations"), 0.0);
  for (std::size_t i = 0; i < up.runs.size(); ++i) {
    ASSERT_EQ(up.runs[i].system0, down.runs[i].system0);
    EXPECT_EQ(up.runs[i].outcome, up.runs[i].system0 > 0 ? Outcome::plus : Outcome::minus);
    EXPECT_EQ(down.runs[i].outcome, opposite(up.runs[i].outcome));
  }
  EXPECT_NEAR(up.plus_frequency, 0.5, 0.067);
}

TEST(SternGerlach, WeakGradientIsASeparationFailure) {
  SternGerlachConfig c;
  c.common.ensemble = 10;
  c.gradient = 2.0;
  EXPECT_THROW(run_stern_gerlach(c), SeparationFailure);
}

TEST(SternGerlach, StreamingFramesMatchStoredFrames) {
  const numerics::Grid g(numerics::Axis{64, -40.0, 40.0}, numerics::Axis{256, -40.0, 40.0});
  const auto f = numerics::make_gaussian(g, {{0.0, 0.0}, {3.0, 3.0}, {0.0, 0.0}, 0.0});
  const numerics::Spinor s(f * std::sqrt(0.5), f * std::sqrt(0.5));
  const numerics::LinearSpinPotential pot{3.0, 0.0};
  const numerics::Units units;
  const auto sample = guidance::sample_equilibrium(s, 40, 5);
  const auto run = numerics::propagate(s, pot, 0.01, 100, units, {.frame_stride = 2});
  const auto stored = guidance::integrate_trajectories(run, guidance::VelocityModel::spinor_with_gordon,
                                                       sample.positions, 0.02, units);
  guidance::StreamingFrames frames(s, pot, 0.01, 100, 2, guidance::VelocityModel::spinor_with_gordon, units);
  const auto streamed = guidance::integrate_trajectories(frames, sample.positions, 0.02);
  ASSERT_EQ(stored.size(), streamed.size());
  for (std::size_t i = 0; i < stored.size(); ++i) {
    EXPECT_EQ(stored[i].points, streamed[i].points);
    EXPECT_EQ(stored[i].times, streamed[i].times);
  }
  EXPECT_THROW(guidance::StreamingFrames(s, pot, 0.01, 100, 3, guidance::VelocityModel::spinor_with_gordon, units),
               InvalidInput);
}

TEST(OpticalSg, FullAmplitudeBranchAlwaysWins) {
  OpticalSgConfig c;
  c.common.ensemble = 200;
  c.amplitude_plus = 1.0;
  c.amplitude_minus = 0.0;
  c.counts = {1, 16};
  for (const auto& e : run_optical_sg(c).ensembles) {
    EXPECT_EQ(e.resolved, 200u);
    EXPECT_EQ(e.plus_frequency, 1.0);
  }
}

TEST(OpticalSg, ApparatusDecidesWhenSystemBranchesOverlap) {
  const auto r = run_optical_sg(OpticalSgConfig{});
  ASSERT_EQ(r.ensembles.size(), 4u);
  double previous = 0.0;
  for (const auto& e : r.ensembles) {
    const double m = acc(e, "apparatus");
    EXPECT_GE(m, previous);
    previous = m;
    EXPECT_NEAR(acc(e, "system"), 0.5, 0.08);
    EXPECT_LE(e.audits.at("overlap_exponent_law_error"), 1e-12);
  }
  EXPECT_GE(previous, 0.99);
  EXPECT_EQ(r.ensembles.back().verdict->label, VerdictLabel::M_determined);
}

TEST(OpticalSg, PreSeparatedBranchesAreSystemDetermined) {
  OpticalSgConfig c;
  c.initial_half_separation = 4.0;
  c.counts = {64};
  const auto e = run_optical_sg(c).ensembles.at(0);
  EXPECT_EQ(acc(e, "system"), 1.0);
  EXPECT_EQ(e.verdict->label, VerdictLabel::S_determined);
}

TEST(OpticalSg, ReproducibleAcrossThreadCounts) {
  OpticalSgConfig c;
  c.common.ensemble = 100;
  c.counts = {4};
  c.common.threads = 1;
  const auto a = run_optical_sg(c);
  c.common.threads = 5;
  const auto b = run_optical_sg(c);
  EXPECT_TRUE(same_runs(a.ensembles[0], b.ensembles[0]));
}

TEST(AncillaChain, PreSeparatedSystemDecidesForAnyAncillaSize) {
  for (std::size_t np : {1u, 64u}) {
    AncillaConfig c;
    c.common.ensemble = 200;
    c.ancilla_count = np;
    c.separation = 8.0;
    const auto e = run_ancilla_ensemble(c);
    EXPECT_EQ(acc(e, "system"), 1.0) << "N' = " << np;
  }
}

TEST(AncillaChain, OverlappingSystemHandsTheOutcomeToTheAncilla) {
  const auto e = run_ancilla_ensemble(AncillaConfig{});
  EXPECT_GE(acc(e, "ancilla"), 0.95);
  EXPECT_NEAR(acc(e, "system"), 0.5, 0.08);
}

TEST(AncillaChain, NoCouplingMeansNoOutcome) {
  AncillaConfig c;
  c.common.ensemble = 100;
  c.ancilla_displacement = 0.0;
  c.apparatus_displacement = 0.0;
  const auto e = run_ancilla_ensemble(c);
  EXPECT_EQ(e.resolved, 0u);
  EXPECT_EQ(e.unresolved, 100u);
  EXPECT_TRUE(e.degraded);
}

TEST(AncillaChain, SweepShowsEveryVerdict) {
  AncillaConfig c;
  c.common.ensemble = 300;
  c.sweep_counts = {16};
  const auto r = run_ancilla_chain(c);
  ASSERT_EQ(r.regime_table.size(), c.sweep_separations.size());
  bool s = false, m = false, mixed = false;
  for (const auto& row : r.regime_table) {
    s = s || row.verdict.label == VerdictLabel::S_determined;
    m = m || row.verdict.label == VerdictLabel::M_determined;
    mixed = mixed || row.verdict.label == VerdictLabel::mixed;
  }
  EXPECT_TRUE(s && m && mixed);
}

TEST(AncillaChain, RejectsBadStages) {
  AncillaConfig c;
  c.stage2_end = 0.5;
  EXPECT_THROW(run_ancilla_ensemble(c), InvalidInput);
  AncillaConfig none;
  none.ancilla_count = 0;
  EXPECT_THROW(run_ancilla_ensemble(none), InvalidInput);
}
