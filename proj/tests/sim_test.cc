#include "footstep/sim.h"

#include <cmath>
#include <optional>
#include <random>

#include <gtest/gtest.h>

#include "footstep/errors.h"

namespace footstep::sim {
namespace {

using Eigen::Vector2d;
using Eigen::Vector3d;
using Eigen::Vector4d;

const Mode kOptGt{TimingMode::kOptT, TerrainSource::kGroundTruth};
const Mode kFixedGt{TimingMode::kFixedT, TerrainSource::kGroundTruth};
const Mode kOptPerceptive{TimingMode::kOptT, TerrainSource::kPerceptive};

Vector3d Nominal(const control::MpfcConfig& cfg, alip::Stance s) {
  const double T = cfg.alip.stride_duration();
  return Vector3d(cfg.v_des.x() * T, cfg.v_des.y() * T + alip::StanceSign(s) * cfg.step_width, 0);
}

// Walks open loop with nominal footsteps, u = 0 and nominal timing.
std::vector<Vector4d> OpenLoopTouchdowns(const control::MpfcConfig& cfg, int steps) {
  SimState s = PeriodicStart(cfg, alip::Stance::kLeft, Vector3d::Zero());
  std::vector<Vector4d> out;
  Controls ctl;
  ctl.footstep = s.stance_foot + Nominal(cfg, s.stance);
  ctl.touchdown_phase = cfg.alip.stride_duration();
  while (static_cast<int>(out.size()) < steps) {
    StepEvents ev;
    s = StepSim(s, ctl, 1e-3, cfg.alip, cfg.reset_mode, &ev);
    if (ev.touchdown) {
      out.push_back(ev.x_minus);
      ctl.footstep = s.stance_foot + Nominal(cfg, s.stance);
    }
  }
  return out;
}

TEST(StepSim, PeriodicOrbitIsInvariant) {
  control::MpfcConfig cfg;
  for (const Vector2d v : {Vector2d(0, 0), Vector2d(0.375, 0)}) {
    cfg.v_des = v;
    // Open loop the orbit is unstable, so rounding grows by roughly e^(wT)
    // per step; ten steps keep it well below the tolerance.
    const auto td = OpenLoopTouchdowns(cfg, 11);
    for (size_t k = 2; k < td.size(); k += 2) EXPECT_LT((td[k] - td[0]).norm(), 1e-6) << k;
    EXPECT_LT((td[0] - PeriodicEndOfStance(cfg, alip::Stance::kLeft)).norm(), 1e-9);
  }
}

TEST(StepSim, DoubleStanceEqualsReset) {
  const alip::AlipParams<double> params;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (auto mode : {alip::ResetMode::kLinearRamp, alip::ResetMode::kInstantaneous,
                    alip::ResetMode::kMixedCassie}) {
    const auto rm = alip::ComputeResetMatrices(params, mode);
    for (int trial = 0; trial < 20; ++trial) {
      SimState s;
      s.phase = params.T_ds;
      s.x = Vector4d(u(rng), u(rng), 10 * u(rng), 10 * u(rng));
      s.stance_foot = Vector3d(u(rng), u(rng), u(rng));
      Controls ctl;
      ctl.footstep = s.stance_foot + Vector3d(u(rng), u(rng), u(rng));
      ctl.touchdown_phase = s.phase + 0.0004;
      StepEvents ev;
      s = StepSim(s, ctl, 1e-3, params, mode, &ev);
      ASSERT_TRUE(ev.touchdown);
      ctl.touchdown_phase = 10.0;
      bool lifted = false;
      while (!lifted) {
        s = StepSim(s, ctl, 1e-3, params, mode, &ev);
        lifted = ev.liftoff;
      }
      // Undo the single-stance remainder of the step that crossed lift-off.
      const double over = s.phase - params.T_ds;
      const Vector4d at_liftoff = alip::Flow(params, s.x, 0.0, -over);
      const Vector4d reset = alip::ApplyReset(rm, s.x_touchdown, s.previous_foot, s.stance_foot);
      EXPECT_LT((at_liftoff - reset).norm(), 1e-9 * std::max(1.0, reset.norm()));
    }
  }
}

TEST(StepSim, OrbitalEnergyConservedInSingleStance) {
  const alip::AlipParams<double> params;
  const double mH = params.m * params.H, w2 = params.g / params.H;
  auto energy = [&](const Vector4d& x) {
    const double xd = x(3) / mH, yd = -x(2) / mH;
    return Vector2d(0.5 * xd * xd - 0.5 * w2 * x(0) * x(0), 0.5 * yd * yd - 0.5 * w2 * x(1) * x(1));
  };
  SimState s;
  s.phase = params.T_ds;
  s.x = Vector4d(-0.1, 0.08, -3.0, 8.0);
  Controls ctl;
  ctl.touchdown_phase = 1.0;
  const Vector2d e0 = energy(s.x);
  for (int k = 0; k < 300; ++k) {
    s = StepSim(s, ctl, 1e-3, params, alip::ResetMode::kLinearRamp);
    EXPECT_LT((energy(s.x) - e0).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(StepSim, MatchesStepToStepPrediction) {
  control::MpfcConfig cfg;
  const auto s2s = alip::ComputeS2SMatrices(cfg.alip, cfg.reset_mode);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  SimState s = PeriodicStart(cfg, alip::Stance::kLeft, Vector3d::Zero());
  Controls ctl;
  ctl.touchdown_phase = cfg.alip.stride_duration();
  ctl.footstep = s.stance_foot + Nominal(cfg, s.stance) + Vector3d(u(rng), u(rng), u(rng));
  std::optional<Vector4d> last;
  Vector3d last_step = Vector3d::Zero();
  int checked = 0;
  while (checked < 8) {
    StepEvents ev;
    s = StepSim(s, ctl, 1e-3, cfg.alip, cfg.reset_mode, &ev);
    if (!ev.touchdown) continue;
    if (last) {
      const Vector4d predicted = s2s.A_s2s * *last + s2s.B_s2s * last_step;
      EXPECT_LT((ev.x_minus - predicted).norm(), 1e-8);
      ++checked;
    }
    last = ev.x_minus;
    last_step = s.stance_foot - s.previous_foot;
    ctl.footstep = s.stance_foot + Nominal(cfg, s.stance) + Vector3d(u(rng), u(rng), u(rng));
  }
}

TEST(StepSim, RejectsLargeStep) {
  EXPECT_THROW(StepSim(SimState{}, Controls{}, 2e-3, alip::AlipParams<double>{},
                       alip::ResetMode::kLinearRamp),
               ParameterError);
}

TEST(Episode, FlatRegulatesToSubspaceAndSpeed) {
  for (const Vector2d v : {Vector2d(0, 0), Vector2d(0.375, 0)}) {
    SimConfig cfg;
    cfg.mpfc.v_des = v;
    cfg.initial_offset = Vector4d(0.03, -0.02, 1.0, -2.0);
    const SimResult r = RunEpisode({terrain::Flat{}, 0}, cfg, kOptGt, 1);
    ASSERT_EQ(r.outcome, Outcome::kSuccess);
    ASSERT_GE(r.footsteps.size(), 10u);
    EXPECT_GT(r.footsteps.front().subspace_error, 1e-2);
    EXPECT_LT(r.footsteps[9].subspace_error, 1e-3);
    for (size_t k = 10; k < r.footsteps.size(); ++k) EXPECT_LT(r.footsteps[k].subspace_error, 1e-3);
    if (v.x() > 0)
      EXPECT_NEAR(r.mean_speed, v.x(), 0.2 * v.x());
    else
      EXPECT_LT(std::abs(r.distance), 0.2);
  }
}

TEST(Episode, FixedTimingPinsStepDuration) {
  SimConfig cfg;
  cfg.initial_offset = Vector4d(0.03, 0.0, 0.0, 3.0);
  cfg.duration = 5.0;
  const SimResult fixed = RunEpisode({terrain::Flat{}, 0}, cfg, kFixedGt, 1);
  for (size_t k = 1; k < fixed.footsteps.size(); ++k)
    EXPECT_NEAR(fixed.footsteps[k].t - fixed.footsteps[k - 1].t, 0.4, 1.5e-3);
  // On flat ground the footstep absorbs everything; gaps make timing useful.
  const terrain::TerrainSpec stones{terrain::SteppingStones{0.5, true}, TrialSeed(3, 0)};
  auto spread = [](const SimResult& r) {
    double out = 0;
    for (size_t k = 1; k < r.footsteps.size(); ++k)
      out = std::max(out, std::abs(r.footsteps[k].t - r.footsteps[k - 1].t - 0.4));
    return out;
  };
  EXPECT_LT(spread(RunEpisode(stones, cfg, kFixedGt, 1)), 1.5e-3);
  EXPECT_GT(spread(RunEpisode(stones, cfg, kOptGt, 1)), 5e-3);
}

TEST(Episode, WideStonesMostlySucceed) {
  SimConfig cfg;
  int successes = 0;
  for (int seed = 0; seed < 50; ++seed) {
    const SimResult r = RunEpisode({terrain::SteppingStones{0.70, true}, TrialSeed(9, seed)}, cfg,
                                   kOptGt, seed);
    successes += r.outcome == Outcome::kSuccess;
  }
  EXPECT_GE(successes, 45);
}

TEST(Episode, DeterministicLog) {
  SimConfig cfg;
  cfg.touchdown_noise = 0.01;
  const terrain::TerrainSpec spec{terrain::SteppingStones{0.5, true}, 4};
  const auto a = EpisodeJsonl(RunEpisode(spec, cfg, kOptPerceptive, 3), "{}");
  const auto b = EpisodeJsonl(RunEpisode(spec, cfg, kOptPerceptive, 3), "{}");
  EXPECT_EQ(a, b);
  const auto c = EpisodeJsonl(RunEpisode(spec, cfg, kOptPerceptive, 4), "{}");
  EXPECT_NE(a, c);
}

TEST(Episode, PerceptivePlansStayOnDecomposedFootholds) {
  SimConfig cfg;
  const SimResult r = RunEpisode({terrain::SteppingStones{0.6, true}, 5}, cfg, kOptPerceptive, 0);
  EXPECT_GT(r.perception_frames, 0);
  int optimal = 0;
  for (const auto& s : r.samples) {
    if (!s.optimal) continue;
    ++optimal;
    EXPECT_TRUE(s.target_in_footholds) << s.t;
  }
  EXPECT_GT(optimal, 100);
}

TEST(Episode, OutcomesMatchEvents) {
  SimConfig stall;
  stall.s3.k_safe = 1.0;  // nothing is ever safe
  const SimResult a = RunEpisode({terrain::Flat{}, 0}, stall, kOptPerceptive, 0);
  EXPECT_EQ(a.outcome, Outcome::kPlannerStall);
  EXPECT_EQ(a.events.back().kind, "planner_stall");

  SimConfig push;
  push.initial_offset = Vector4d(0, 0, 0, 60.0);
  const SimResult b = RunEpisode({terrain::Flat{}, 0}, push, kOptGt, 0);
  EXPECT_EQ(b.outcome, Outcome::kFallWorkspace);
  EXPECT_EQ(b.events.back().kind, "fall_workspace");

  SimConfig noisy;
  noisy.touchdown_noise = 0.15;
  bool seen = false;
  for (int seed = 0; seed < 20 && !seen; ++seed) {
    const SimResult c = RunEpisode({terrain::SteppingStones{0.35, true}, 2}, noisy, kOptGt, seed);
    if (c.outcome != Outcome::kFallMissedFoothold) continue;
    seen = true;
    EXPECT_FALSE(c.footsteps.back().supported);
    EXPECT_EQ(c.events.back().kind, "fall_missed_foothold");
    for (size_t k = 0; k + 1 < c.footsteps.size(); ++k) EXPECT_TRUE(c.footsteps[k].supported);
  }
  EXPECT_TRUE(seen);

  SimConfig shortcfg;
  shortcfg.duration = 1.0;
  const SimResult d = RunEpisode({terrain::SteppingStones{0.5, true}, 1}, shortcfg, kOptGt, 0);
  EXPECT_EQ(d.outcome, Outcome::kTimeout);
}

TEST(Modes, ParseRoundTrip) {
  for (const Mode m : {kOptGt, kFixedGt, kOptPerceptive}) EXPECT_EQ(ParseMode(ToString(m)), m);
  EXPECT_THROW(ParseMode("fast"), ParameterError);
}

TEST(Experiment, SweepParsing) {
  const auto s = ParseSweep("0.5:0.7:0.1");
  ASSERT_EQ(s.size(), 3u);
  EXPECT_DOUBLE_EQ(s[2], 0.7);
  const auto d = ParseSweep("0.35:0.70:0.05");
  EXPECT_EQ(d.size(), 8u);
  EXPECT_EQ(d, ExperimentSpec{}.d_min);
  EXPECT_THROW(ParseSweep("0.5-0.7"), ParameterError);
  EXPECT_THROW(ParseSweep("0.7:0.5:0.1"), ParameterError);
}

TEST(Experiment, FlatOverrideAlwaysSucceeds) {
  ExperimentSpec spec;
  spec.trials = 1;
  spec.flat_override = true;
  spec.d_min = {0.5};
  spec.modes = {kOptGt};
  spec.sim.duration = 3.0;
  const auto r = RunExperiment(spec);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.rows[0].rate, 1.0);
}

TEST(Experiment, CsvIndependentOfJobs) {
  ExperimentSpec spec;
  spec.trials = 2;
  spec.d_min = {0.4, 0.6};
  spec.modes = {kOptGt, kFixedGt};
  spec.jobs = 1;
  const std::string one = SummaryCsv(RunExperiment(spec));
  spec.jobs = 3;
  const auto r = RunExperiment(spec);
  EXPECT_EQ(SummaryCsv(r), one);
  EXPECT_EQ(r.rows.size(), 4u);
  EXPECT_EQ(one.substr(0, one.find('\n')), "d_min,mode,successes,trials,rate,mean_speed");
}

}  // namespace
}  // namespace footstep::sim
