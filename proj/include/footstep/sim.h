#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "footstep/alip.h"
#include "footstep/decomp.h"
#include "footstep/gait.h"
#include "footstep/mpfc.h"
#include "footstep/s3.h"
#include "footstep/terrain.h"

namespace footstep::sim {

using alip::Stance;

enum class TimingMode { kOptT, kFixedT };
enum class TerrainSource { kGroundTruth, kPerceptive };

struct Mode {
  TimingMode timing{TimingMode::kOptT};
  TerrainSource terrain{TerrainSource::kGroundTruth};
  bool operator==(const Mode&) const = default;
};

/// "opt-t-gt", "fixed-t-perceptive", ...
std::string ToString(const Mode& mode);
/// Inverse of ToString; throws ParameterError on anything else.
Mode ParseMode(const std::string& text);

enum class Outcome { kSuccess, kFallWorkspace, kFallMissedFoothold, kPlannerStall, kTimeout };
const char* ToString(Outcome outcome);

struct SimConfig {
  control::MpfcConfig mpfc;
  s3::S3Config s3;
  decomp::DecompConfig decomp;
  double duration{20.0};
  double dt{0.001};
  double control_rate{100.0};
  double perception_rate{30.0};
  double map_size{2.5};
  double map_resolution{0.025};
  /// Standard deviation of height noise added to each perception frame.
  double map_noise{0.0};
  /// Standard deviation of the horizontal touchdown error.
  double touchdown_noise{0.0};
  double swing_clearance{0.15};
  /// CoM offset from the stance foot that counts as a fall.
  double fall_limit{0.45};
  /// Consecutive failed solves tolerated before the episode is abandoned.
  int stall_limit{5};
  /// x of the first stance foot.
  double start_x{-0.5};
  /// Added to the periodic initial state (x_com, y_com, L_x, L_y).
  Eigen::Vector4d initial_offset{Eigen::Vector4d::Zero()};

  void Validate() const;
};

/// Hybrid state of the reduced-order walker.
struct SimState {
  /// ALIP state relative to the stance foot.
  Eigen::Vector4d x{Eigen::Vector4d::Zero()};
  Stance stance{Stance::kLeft};
  Eigen::Vector3d stance_foot{Eigen::Vector3d::Zero()};
  /// Foot that carried the robot before the last touchdown.
  Eigen::Vector3d previous_foot{Eigen::Vector3d::Zero()};
  /// Time since the last touchdown.
  double phase{0.0};
  double time{0.0};
  /// Pre-touchdown state relative to previous_foot; drives the weight transfer.
  Eigen::Vector4d x_touchdown{Eigen::Vector4d::Zero()};
  int steps{0};

  Eigen::Vector2d ComWorld() const { return stance_foot.head<2>() + x.head<2>(); }
};

struct Controls {
  /// Where the swing foot lands.
  Eigen::Vector3d footstep{Eigen::Vector3d::Zero()};
  /// Phase at which it lands.
  double touchdown_phase{0.0};
  double ankle_torque{0.0};
};

struct StepEvents {
  bool touchdown{false};
  bool liftoff{false};
  /// Pre-touchdown state relative to the old stance foot.
  Eigen::Vector4d x_minus{Eigen::Vector4d::Zero()};
};

/// Advances the hybrid dynamics by dt with exact flows: a linear-ramp weight
/// transfer for T_ds after touchdown, then the ALIP flow under constant
/// ankle torque until the commanded touchdown phase.
SimState StepSim(const SimState& state, const Controls& controls, double dt,
                 const alip::AlipParams<double>& params, alip::ResetMode mode,
                 StepEvents* events = nullptr);

/// End-of-stance state of the period-2 gait that steps by v_des * T and
/// alternates lateral offsets of +-step_width, for the given stance leg.
Eigen::Vector4d PeriodicEndOfStance(const control::MpfcConfig& cfg, Stance stance);

/// State at lift-off on that gait, standing on `stance_foot`.
SimState PeriodicStart(const control::MpfcConfig& cfg, Stance stance,
                       const Eigen::Vector3d& stance_foot);

struct Sample {
  double t{0.0};
  Eigen::Vector4d x;
  Stance stance{Stance::kLeft};
  Eigen::Vector2d com;
  Eigen::Vector3d stance_foot;
  Eigen::Vector3d target;
  double touchdown_phase{0.0};
  double ankle_torque{0.0};
  bool optimal{false};
  /// Planned next footstep lies inside the footholds handed to the solver.
  bool target_in_footholds{false};
  int num_footholds{0};
  int qp_solves{0};
};

struct Footstep {
  double t{0.0};
  Stance stance{Stance::kLeft};
  Eigen::Vector3d planned;
  Eigen::Vector3d realized;
  bool supported{true};
  /// Distance of the pre-touchdown state to the desired-velocity subspace.
  double subspace_error{0.0};
};

struct Event {
  double t{0.0};
  std::string kind;
  std::string detail;
};

struct SimResult {
  Outcome outcome{Outcome::kTimeout};
  std::vector<Sample> samples;
  std::vector<Footstep> footsteps;
  std::vector<Event> events;
  double duration{0.0};
  double distance{0.0};
  double mean_speed{0.0};
  int perception_frames{0};
  /// Wall-clock solve times; the only nondeterministic field.
  std::vector<double> solve_ms;
};

/// One closed-loop episode on terrain from `spec`. The seed drives sensor
/// and tracking noise; the terrain seed lives in the spec.
SimResult RunEpisode(const terrain::TerrainSpec& spec, const SimConfig& cfg,
                     const Mode& mode, std::uint64_t seed);

/// Episode log as JSON Lines: a header, one line per sample, footstep and
/// event, and a closing summary. Wall-clock fields are left out.
std::string EpisodeJsonl(const SimResult& result, const std::string& header_json);

struct ExperimentSpec {
  std::vector<double> d_min{0.35, 0.40, 0.45, 0.50, 0.55, 0.60, 0.65, 0.70};
  int trials{50};
  std::vector<Mode> modes{{TimingMode::kOptT, TerrainSource::kGroundTruth},
                          {TimingMode::kFixedT, TerrainSource::kGroundTruth},
                          {TimingMode::kOptT, TerrainSource::kPerceptive},
                          {TimingMode::kFixedT, TerrainSource::kPerceptive}};
  std::uint64_t seed{0};
  /// Replace the stones with flat ground (keeps the sweep bookkeeping).
  bool flat_override{false};
  int jobs{1};
  SimConfig sim;

  void Validate() const;
};

/// Evenly spaced values lo, lo + step, ... up to hi (inclusive).
std::vector<double> ParseSweep(const std::string& text);

struct EpisodeRecord {
  double d_min{0.0};
  Mode mode;
  int trial{0};
  std::uint64_t terrain_seed{0};
  Outcome outcome{Outcome::kTimeout};
  double distance{0.0};
  double mean_speed{0.0};
  int footsteps{0};
  double median_solve_ms{0.0};
};

struct ExperimentRow {
  double d_min{0.0};
  Mode mode;
  int successes{0};
  int trials{0};
  double rate{0.0};
  /// Mean over successful episodes; NaN when none succeeded.
  double mean_speed{0.0};
  double median_solve_ms{0.0};
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;
  std::vector<EpisodeRecord> episodes;
};

/// Terrain seed of a trial; shared across modes and d_min so comparisons are paired.
std::uint64_t TrialSeed(std::uint64_t base, int trial);

ExperimentResult RunExperiment(const ExperimentSpec& spec,
                               const std::function<void(int, int)>& progress = {});

/// d_min, mode, successes, trials, rate, mean_speed. Deterministic.
std::string SummaryCsv(const ExperimentResult& result);
/// d_min, mode, median_solve_ms.
std::string TimingCsv(const ExperimentResult& result);
std::string EpisodesCsv(const ExperimentResult& result);

}  // namespace footstep::sim
