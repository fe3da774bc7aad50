#include "footstep/sim.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "footstep/errors.h"

namespace footstep::sim {

using Eigen::Vector2d;
using Eigen::Vector3d;
using Eigen::Vector4d;
using control::MpfcConfig;

std::string ToString(const Mode& mode) {
  std::string s = mode.timing == TimingMode::kOptT ? "opt-t" : "fixed-t";
  s += mode.terrain == TerrainSource::kGroundTruth ? "-gt" : "-perceptive";
  return s;
}

Mode ParseMode(const std::string& text) {
  for (TimingMode t : {TimingMode::kOptT, TimingMode::kFixedT})
    for (TerrainSource s : {TerrainSource::kGroundTruth, TerrainSource::kPerceptive})
      if (ToString(Mode{t, s}) == text) return Mode{t, s};
  throw ParameterError("unknown mode '" + text +
                       "' (expected opt-t-gt, fixed-t-gt, opt-t-perceptive or "
                       "fixed-t-perceptive)");
}

const char* ToString(Outcome outcome) {
  switch (outcome) {
    case Outcome::kSuccess: return "success";
    case Outcome::kFallWorkspace: return "fall_workspace";
    case Outcome::kFallMissedFoothold: return "fall_missed_foothold";
    case Outcome::kPlannerStall: return "planner_stall";
    case Outcome::kTimeout: return "timeout";
  }
  return "unknown";
}

void SimConfig::Validate() const {
  mpfc.Validate();
  s3.Validate();
  decomp.Validate();
  if (!(duration > 0)) throw ParameterError("duration must be positive");
  if (!(dt > 0 && dt <= 1e-3 + 1e-15)) throw ParameterError("dt must be in (0, 1 ms]");
  if (!(control_rate > 0 && control_rate * dt <= 1.0))
    throw ParameterError("control rate must be positive and at most the sim rate");
  if (!(perception_rate > 0)) throw ParameterError("perception rate must be positive");
  if (!(map_size > 0) || !(map_resolution > 0) || map_size < 4 * map_resolution)
    throw ParameterError("map window too small");
  if (!(map_noise >= 0) || !(touchdown_noise >= 0))
    throw ParameterError("noise levels must be non-negative");
  if (!(swing_clearance > 0)) throw ParameterError("swing clearance must be positive");
  if (!(fall_limit > 0)) throw ParameterError("fall limit must be positive");
  if (stall_limit < 0) throw ParameterError("stall limit must be non-negative");
}

namespace {

Vector3d NominalStep(const MpfcConfig& cfg, Stance stance) {
  const double T = cfg.alip.stride_duration();
  return Vector3d(cfg.v_des.x() * T,
                  cfg.v_des.y() * T + alip::StanceSign(stance) * cfg.step_width, 0.0);
}

// Weight transfer from the old foot to the new one, t seconds after
// touchdown, in the old foot's frame.
Vector4d TransferState(const alip::AlipParams<double>& params, alip::ResetMode mode,
                       const Vector4d& x_minus, const Vector3d& dp, double t) {
  const Vector4d ramp = alip::LinearRampTransferState(params, x_minus, dp, t);
  if (mode == alip::ResetMode::kLinearRamp) return ramp;
  const Eigen::Matrix4d E = alip::ExpmAlip(params, t);
  const Vector4d inst =
      E * x_minus + alip::AlipMatrixInverse(params) * (E - Eigen::Matrix4d::Identity()) *
                        alip::CopInputMatrix(params) * dp;
  if (mode == alip::ResetMode::kInstantaneous) return inst;
  Vector4d mixed = ramp;
  mixed.segment<2>(1) = inst.segment<2>(1);
  return mixed;
}

Vector4d ShiftFrame(const Vector4d& x, const Vector3d& dp) {
  Vector4d out = x;
  out.head<2>() -= dp.head<2>();
  return out;
}

}  // namespace

SimState StepSim(const SimState& state, const Controls& controls, double dt,
                 const alip::AlipParams<double>& params, alip::ResetMode mode,
                 StepEvents* events) {
  if (!(dt > 0 && dt <= 1e-3 + 1e-15)) throw ParameterError("step_sim needs dt in (0, 1 ms]");
  SimState s = state;
  StepEvents ev;
  double remaining = dt;
  bool touched = false;
  while (remaining > 0.0) {
    if (s.phase < params.T_ds) {
      const double advance = std::min(params.T_ds - s.phase, remaining);
      s.phase += advance;
      remaining -= advance;
      const Vector3d dp = s.stance_foot - s.previous_foot;
      if (s.phase >= params.T_ds) {
        s.phase = params.T_ds;
        ev.liftoff = true;
      }
      s.x = ShiftFrame(TransferState(params, mode, s.x_touchdown, dp, s.phase), dp);
      continue;
    }
    const double u = touched ? 0.0 : controls.ankle_torque;
    const double to_touchdown = controls.touchdown_phase - s.phase;
    if (touched || to_touchdown > remaining) {
      s.x = alip::Flow(params, Vector4d(s.x), u, remaining);
      s.phase += remaining;
      remaining = 0.0;
      break;
    }
    const double advance = std::max(to_touchdown, 0.0);
    s.x = alip::Flow(params, Vector4d(s.x), u, advance);
    remaining -= advance;
    // Touchdown: the swing foot becomes the stance foot.
    touched = true;
    ev.touchdown = true;
    ev.x_minus = s.x;
    const Vector3d dp = controls.footstep - s.stance_foot;
    s.x_touchdown = s.x;
    s.previous_foot = s.stance_foot;
    s.stance_foot = controls.footstep;
    s.stance = alip::Opposite(s.stance);
    s.x = ShiftFrame(s.x, dp);
    s.phase = 0.0;
    ++s.steps;
  }
  s.time = state.time + dt;
  if (events) *events = ev;
  return s;
}

Vector4d PeriodicEndOfStance(const MpfcConfig& cfg, Stance stance) {
  const auto s2s = alip::ComputeS2SMatrices(cfg.alip, cfg.reset_mode);
  const Eigen::Matrix4d& A = s2s.A_s2s;
  const Vector3d dp_a = NominalStep(cfg, stance);
  const Vector3d dp_b = NominalStep(cfg, alip::Opposite(stance));
  const Eigen::Matrix4d M = Eigen::Matrix4d::Identity() - A * A;
  return M.partialPivLu().solve(A * s2s.B_s2s * dp_a + s2s.B_s2s * dp_b);
}

SimState PeriodicStart(const MpfcConfig& cfg, Stance stance, const Vector3d& stance_foot) {
  const auto& params = cfg.alip;
  const Stance previous = alip::Opposite(stance);
  SimState s;
  s.stance = stance;
  s.stance_foot = stance_foot;
  const Vector3d dp = NominalStep(cfg, previous);
  s.previous_foot = stance_foot - dp;
  s.x_touchdown = PeriodicEndOfStance(cfg, previous);
  s.x = ShiftFrame(TransferState(params, cfg.reset_mode, s.x_touchdown, dp, params.T_ds), dp);
  s.phase = params.T_ds;
  return s;
}

namespace {

std::uint64_t Mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Perception state carried between frames.
struct Perception {
  std::optional<terrain::ElevationMap> inpainted;
  std::optional<s3::SteppabilityMask> mask;
  Vector2d origin{Vector2d::Zero()};
  std::vector<FootholdPolygon> footholds;
  // Decomposition input of the last frame; an identical frame reuses its output.
  std::optional<terrain::ElevationMap> decomposed_map;
  terrain::MaskGrid decomposed_mask;
  int frames{0};
};

void RunPerception(Perception& p, const terrain::TerrainModel& model, const SimConfig& cfg,
                   const Vector2d& com, std::uint64_t seed) {
  const double res = cfg.map_resolution;
  terrain::MapWindow window;
  window.center = (com / res).array().round().matrix() * res;
  window.size = Vector2d::Constant(cfg.map_size);
  window.resolution = res;
  terrain::ElevationMap raw = terrain::Sample(model, window);
  if (cfg.map_noise > 0)
    terrain::AddNoise(raw, cfg.map_noise, Mix(seed ^ Mix(static_cast<std::uint64_t>(p.frames))));
  ++p.frames;
  if (raw.num_valid() == 0) return;
  const terrain::ElevationMap map = terrain::InpaintLnv(raw);
  std::optional<s3::SteppabilityMask> prev;
  if (p.mask && p.mask->safe.rows() == map.width() && p.mask->safe.cols() == map.height()) {
    const Vector2d delta = (map.origin - p.origin) / res;
    const Eigen::Vector2i shift(static_cast<int>(std::lround(delta.x())),
                                static_cast<int>(std::lround(delta.y())));
    prev = s3::SteppabilityMask{terrain::ShiftMask(p.mask->safe, shift, false), p.mask->frame};
  }
  const s3::Segmentation seg = s3::Segment(map, prev ? &*prev : nullptr, cfg.s3, &raw.valid);
  p.mask = seg.mask;
  p.origin = map.origin;
  const bool unchanged = p.decomposed_map && p.decomposed_map->origin == map.origin &&
                         p.decomposed_mask.rows() == seg.mask.safe.rows() &&
                         p.decomposed_mask.cols() == seg.mask.safe.cols() &&
                         (p.decomposed_mask == seg.mask.safe).all() &&
                         (p.decomposed_map->heights == map.heights).all();
  if (!unchanged) {
    p.footholds = decomp::Decompose(seg.mask.safe, map, cfg.decomp);
    p.decomposed_map = map;
    p.decomposed_mask = seg.mask.safe;
  }
  p.inpainted = map;
}

bool InsideAny(const std::vector<FootholdPolygon>& footholds, const Vector3d& p) {
  for (const auto& f : footholds)
    if (f.Contains(p.head<2>(), 1e-6)) return true;
  return false;
}

}  // namespace

SimResult RunEpisode(const terrain::TerrainSpec& spec, const SimConfig& cfg, const Mode& mode,
                     std::uint64_t seed) {
  cfg.Validate();
  spec.Validate();
  const terrain::TerrainModel model(spec);
  MpfcConfig mcfg = cfg.mpfc;
  mcfg.optimize_timing = mode.timing == TimingMode::kOptT;
  control::MpfcController controller(mcfg);
  const auto& params = mcfg.alip;
  const bool perceptive = mode.terrain == TerrainSource::kPerceptive;

  std::mt19937_64 rng(Mix(seed));
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw_offset = [&]() {
    if (cfg.touchdown_noise <= 0) return Vector3d::Zero().eval();
    const double dx = normal(rng), dy = normal(rng);
    return Vector3d(cfg.touchdown_noise * dx, cfg.touchdown_noise * dy, 0.0);
  };

  const Stance first = Stance::kLeft;
  Vector3d foot(cfg.start_x, -alip::StanceSign(first) * 0.5 * mcfg.step_width, 0.0);
  foot.z() = model.Height(foot.head<2>()).value_or(0.0);
  SimState s = PeriodicStart(mcfg, first, foot);
  s.x += cfg.initial_offset;

  const std::vector<FootholdPolygon> truth = model.Footholds();
  Perception perception;
  const std::map<Stance, alip::VelocitySubspace<double>> subspace{
      {Stance::kLeft, alip::ComputeVelocitySubspace(params, mcfg.reset_mode, mcfg.v_des,
                                                    Stance::kLeft)},
      {Stance::kRight, alip::ComputeVelocitySubspace(params, mcfg.reset_mode, mcfg.v_des,
                                                     Stance::kRight)}};

  SimResult result;
  std::optional<Outcome> outcome;
  auto finish = [&](Outcome o, const std::string& detail) {
    outcome = o;
    result.events.push_back({s.time, ToString(o), detail});
  };

  Controls ctl;
  ctl.footstep = s.stance_foot + NominalStep(mcfg, s.stance);
  ctl.touchdown_phase = params.stride_duration();
  std::optional<control::FootstepCommand> prev_cmd;
  Vector3d offset = draw_offset();
  Vector3d planned = ctl.footstep;
  gait::SwingTrajectory swing = gait::SwingTrajectory::Stationary(s.previous_foot);

  const long n_steps = std::lround(cfg.duration / cfg.dt);
  const long control_every = std::max(1L, std::lround(1.0 / (cfg.control_rate * cfg.dt)));
  const double frame_period = 1.0 / cfg.perception_rate;
  double next_frame = 0.0;
  const double x_start = s.ComWorld().x();

  for (long k = 0; k < n_steps && !outcome; ++k) {
    const double t = static_cast<double>(k) * cfg.dt;
    s.time = t;
    if (perceptive && t >= next_frame - 1e-9) {
      RunPerception(perception, model, cfg, s.ComWorld(), seed);
      next_frame += frame_period;
    }
    if (k % control_every == 0 && s.phase >= params.T_ds) {
      const auto& footholds = perceptive ? perception.footholds : truth;
      const control::MpfcSolution& sol =
          controller.Solve(s.x, s.stance, s.stance_foot, s.phase, footholds);
      result.solve_ms.push_back(sol.solve_time_ms);
      if (controller.consecutive_failures() > cfg.stall_limit) {
        finish(Outcome::kPlannerStall, sol.diagnostics);
        break;
      }
      const control::FootstepCommand cmd =
          control::ExtractControls(sol, s.phase, params.T_ds, prev_cmd ? &*prev_cmd : nullptr);
      prev_cmd = cmd;
      planned = cmd.next_footstep;
      ctl.footstep = planned + offset;
      if (perceptive && perception.inpainted) {
        const Vector2d cell = perception.inpainted->ToCell(ctl.footstep.head<2>());
        if (cell.minCoeff() >= 0 && cell.x() <= perception.inpainted->width() - 1 &&
            cell.y() <= perception.inpainted->height() - 1)
          ctl.footstep.z() = terrain::FootstepHeightLookup(*perception.inpainted,
                                                           ctl.footstep.head<2>());
      }
      ctl.touchdown_phase = s.phase + cmd.remaining_time;
      ctl.ankle_torque = cmd.ankle_torque;
      const double t_k = s.phase - params.T_ds;
      const double T_sw = ctl.touchdown_phase - params.T_ds;
      swing = gait::SwingRetime(swing, t_k, T_sw,
                                gait::SwingWaypoint(s.previous_foot, ctl.footstep,
                                                    cfg.swing_clearance),
                                ctl.footstep);

      Sample sample;
      sample.t = t;
      sample.x = s.x;
      sample.stance = s.stance;
      sample.com = s.ComWorld();
      sample.stance_foot = s.stance_foot;
      sample.target = planned;
      sample.touchdown_phase = ctl.touchdown_phase;
      sample.ankle_torque = ctl.ankle_torque;
      sample.optimal = sol.optimal();
      sample.target_in_footholds = sol.optimal() && InsideAny(footholds, planned);
      sample.num_footholds = static_cast<int>(footholds.size());
      sample.qp_solves = sol.stats.qp_solves;
      result.samples.push_back(sample);
    }

    StepEvents ev;
    const Stance old_stance = s.stance;
    s = StepSim(s, ctl, cfg.dt, params, mcfg.reset_mode, &ev);
    if (ev.touchdown) {
      Footstep step;
      step.t = s.time;
      step.stance = s.stance;
      step.planned = planned;
      step.realized = s.stance_foot;
      // Planned steps may sit on a stone edge up to solver tolerance.
      step.supported = model.Supported(s.stance_foot.head<2>()) || InsideAny(truth, s.stance_foot);
      const auto& sub = subspace.at(old_stance);
      step.subspace_error = (sub.Pi(0) * (ev.x_minus - sub.d(0))).norm();
      result.footsteps.push_back(step);
      result.events.push_back({s.time, "touchdown", alip::ToString(s.stance)});
      if (!step.supported) {
        std::ostringstream msg;
        msg << "footstep at (" << s.stance_foot.x() << ", " << s.stance_foot.y()
            << ") is over a void";
        finish(Outcome::kFallMissedFoothold, msg.str());
        break;
      }
      offset = draw_offset();
      swing = gait::SwingTrajectory::Stationary(s.previous_foot);
      const control::MpfcSolution* last = controller.last();
      ctl.footstep = (last && last->p.size() > 2) ? Vector3d(last->p[2])
                                                 : Vector3d(s.stance_foot + NominalStep(mcfg, s.stance));
      planned = ctl.footstep;
      ctl.footstep += offset;
      ctl.touchdown_phase = params.stride_duration();
      ctl.ankle_torque = 0.0;
    }
    if (ev.liftoff) result.events.push_back({s.time, "liftoff", alip::ToString(s.stance)});
    if (s.phase >= params.T_ds &&
        (std::abs(s.x(0)) > cfg.fall_limit || std::abs(s.x(1)) > cfg.fall_limit)) {
      std::ostringstream msg;
      msg << "CoM offset (" << s.x(0) << ", " << s.x(1) << ") from the stance foot";
      finish(Outcome::kFallWorkspace, msg.str());
      break;
    }
    if (s.ComWorld().x() >= model.goal_x()) {
      finish(Outcome::kSuccess, "goal reached");
      break;
    }
  }
  if (!outcome) {
    if (std::isfinite(model.goal_x()))
      finish(Outcome::kTimeout, "goal not reached");
    else
      finish(Outcome::kSuccess, "duration completed");
  }
  result.outcome = *outcome;
  result.duration = s.time;
  result.distance = s.ComWorld().x() - x_start;
  result.mean_speed = s.time > 0 ? result.distance / s.time : 0.0;
  result.perception_frames = perception.frames;
  return result;
}

namespace {

nlohmann::json Vec(const Eigen::VectorXd& v) {
  nlohmann::json j = nlohmann::json::array();
  for (int i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

}  // namespace

std::string EpisodeJsonl(const SimResult& r, const std::string& header_json) {
  std::string out = header_json + "\n";
  for (const auto& s : r.samples) {
    nlohmann::json j;
    j["type"] = "sample";
    j["t"] = s.t;
    j["x"] = Vec(s.x);
    j["stance"] = alip::ToString(s.stance);
    j["com"] = Vec(s.com);
    j["stance_foot"] = Vec(s.stance_foot);
    j["target"] = Vec(s.target);
    j["touchdown_phase"] = s.touchdown_phase;
    j["u"] = s.ankle_torque;
    j["optimal"] = s.optimal;
    j["target_in_footholds"] = s.target_in_footholds;
    j["footholds"] = s.num_footholds;
    j["qp_solves"] = s.qp_solves;
    out += j.dump() + "\n";
  }
  for (const auto& f : r.footsteps) {
    nlohmann::json j;
    j["type"] = "footstep";
    j["t"] = f.t;
    j["stance"] = alip::ToString(f.stance);
    j["planned"] = Vec(f.planned);
    j["realized"] = Vec(f.realized);
    j["supported"] = f.supported;
    j["subspace_error"] = f.subspace_error;
    out += j.dump() + "\n";
  }
  for (const auto& e : r.events) {
    nlohmann::json j;
    j["type"] = "event";
    j["t"] = e.t;
    j["kind"] = e.kind;
    if (!e.detail.empty()) j["detail"] = e.detail;
    out += j.dump() + "\n";
  }
  nlohmann::json j;
  j["type"] = "summary";
  j["outcome"] = ToString(r.outcome);
  j["duration"] = r.duration;
  j["distance"] = r.distance;
  j["mean_speed"] = r.mean_speed;
  j["footsteps"] = r.footsteps.size();
  j["perception_frames"] = r.perception_frames;
  out += j.dump() + "\n";
  return out;
}

void ExperimentSpec::Validate() const {
  if (trials < 1) throw ParameterError("trials must be at least 1");
  if (d_min.empty()) throw ParameterError("sweep is empty");
  if (modes.empty()) throw ParameterError("no modes selected");
  if (jobs < 1) throw ParameterError("jobs must be at least 1");
  for (double d : d_min)
    if (!(d > 0)) throw ParameterError("d_min values must be positive");
  sim.Validate();
}

std::vector<double> ParseSweep(const std::string& text) {
  double lo = 0, hi = 0, step = 0;
  char c1 = 0, c2 = 0;
  std::istringstream in(text);
  if (!(in >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || !(in >> std::ws).eof())
    throw ParameterError("sweep must look like lo:hi:step, got '" + text + "'");
  if (!(step > 0) || hi < lo) throw ParameterError("sweep needs step > 0 and hi >= lo");
  const int count = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> out;
  for (int i = 0; i < count; ++i) out.push_back(std::round((lo + i * step) * 1e9) / 1e9);
  return out;
}

std::uint64_t TrialSeed(std::uint64_t base, int trial) {
  return Mix(base * 1000003ULL + static_cast<std::uint64_t>(trial)) % 1000000007ULL;
}

namespace {

double Median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  const size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + mid));
  return m;
}

}  // namespace

ExperimentResult RunExperiment(const ExperimentSpec& spec,
                               const std::function<void(int, int)>& progress) {
  spec.Validate();
  struct Job {
    size_t d;
    size_t m;
    int trial;
  };
  std::vector<Job> jobs;
  for (size_t d = 0; d < spec.d_min.size(); ++d)
    for (size_t m = 0; m < spec.modes.size(); ++m)
      for (int t = 0; t < spec.trials; ++t) jobs.push_back({d, m, t});

  std::vector<EpisodeRecord> records(jobs.size());
  std::vector<std::vector<double>> solve_ms(jobs.size());
  std::atomic<size_t> next{0};
  std::mutex progress_mutex;
  int done = 0;
  auto worker = [&]() {
    for (size_t i = next++; i < jobs.size(); i = next++) {
      const Job& job = jobs[i];
      EpisodeRecord& rec = records[i];
      rec.d_min = spec.d_min[job.d];
      rec.mode = spec.modes[job.m];
      rec.trial = job.trial;
      rec.terrain_seed = TrialSeed(spec.seed, job.trial);
      terrain::TerrainSpec tspec;
      tspec.seed = rec.terrain_seed;
      if (spec.flat_override)
        tspec.variant = terrain::Flat{};
      else
        tspec.variant = terrain::SteppingStones{rec.d_min, true};
      const SimResult r = RunEpisode(tspec, spec.sim, rec.mode, Mix(rec.terrain_seed));
      rec.outcome = r.outcome;
      rec.distance = r.distance;
      rec.mean_speed = r.mean_speed;
      rec.footsteps = static_cast<int>(r.footsteps.size());
      rec.median_solve_ms = Median(r.solve_ms);
      solve_ms[i] = r.solve_ms;
      if (progress) {
        std::lock_guard<std::mutex> lock(progress_mutex);
        progress(++done, static_cast<int>(jobs.size()));
      }
    }
  };
  const int n_threads = std::min<int>(spec.jobs, static_cast<int>(jobs.size()));
  std::vector<std::thread> pool;
  for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  ExperimentResult out;
  out.episodes = records;
  for (size_t d = 0; d < spec.d_min.size(); ++d) {
    for (size_t m = 0; m < spec.modes.size(); ++m) {
      ExperimentRow row;
      row.d_min = spec.d_min[d];
      row.mode = spec.modes[m];
      std::vector<double> times;
      double speed = 0.0;
      for (size_t i = 0; i < jobs.size(); ++i) {
        if (jobs[i].d != d || jobs[i].m != m) continue;
        ++row.trials;
        times.insert(times.end(), solve_ms[i].begin(), solve_ms[i].end());
        if (records[i].outcome == Outcome::kSuccess) {
          ++row.successes;
          speed += records[i].mean_speed;
        }
      }
      row.rate = static_cast<double>(row.successes) / row.trials;
      row.mean_speed = row.successes > 0 ? speed / row.successes : std::nan("");
      row.median_solve_ms = Median(times);
      out.rows.push_back(row);
    }
  }
  return out;
}

namespace {

std::string Format(const char* fmt, double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

}  // namespace

std::string SummaryCsv(const ExperimentResult& result) {
  std::string out = "d_min,mode,successes,trials,rate,mean_speed\n";
  for (const auto& r : result.rows) {
    out += Format("%.3f", r.d_min) + "," + ToString(r.mode) + "," + std::to_string(r.successes) +
           "," + std::to_string(r.trials) + "," + Format("%.4f", r.rate) + "," +
           Format("%.6f", r.mean_speed) + "\n";
  }
  return out;
}

std::string TimingCsv(const ExperimentResult& result) {
  std::string out = "d_min,mode,median_solve_ms\n";
  for (const auto& r : result.rows)
    out += Format("%.3f", r.d_min) + "," + ToString(r.mode) + "," +
           Format("%.4f", r.median_solve_ms) + "\n";
  return out;
}

std::string EpisodesCsv(const ExperimentResult& result) {
  std::string out = "d_min,mode,trial,terrain_seed,outcome,distance,mean_speed,footsteps\n";
  for (const auto& e : result.episodes) {
    out += Format("%.3f", e.d_min) + "," + ToString(e.mode) + "," + std::to_string(e.trial) +
           "," + std::to_string(e.terrain_seed) + "," + ToString(e.outcome) + "," +
           Format("%.6f", e.distance) + "," + Format("%.6f", e.mean_speed) + "," +
           std::to_string(e.footsteps) + "\n";
  }
  return out;
}

}  // namespace footstep::sim
