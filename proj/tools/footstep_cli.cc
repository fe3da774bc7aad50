// footstep_cli: map generation, terrain segmentation, closed-loop episodes
// and stepping-stone sweeps.
//
// Exit codes: 0 success, 2 bad input (flags, config, files), 1 internal
// error. `sim` additionally maps non-success outcomes to 10..13.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "footstep/decomp.h"
#include "footstep/errors.h"
#include "footstep/io.h"
#include "footstep/s3.h"
#include "footstep/sim.h"
#include "footstep/terrain.h"

namespace fs = std::filesystem;
using footstep::FormatError;
using footstep::ParameterError;
using nlohmann::json;
namespace io = footstep::io;
namespace sim = footstep::sim;
namespace terrain = footstep::terrain;

namespace {

constexpr int kExitBadInput = 2;

int OutcomeExitCode(sim::Outcome o) {
  switch (o) {
    case sim::Outcome::kSuccess: return 0;
    case sim::Outcome::kFallWorkspace: return 10;
    case sim::Outcome::kFallMissedFoothold: return 11;
    case sim::Outcome::kPlannerStall: return 12;
    case sim::Outcome::kTimeout: return 13;
  }
  return 1;
}

io::RunConfig Load(const std::string& path) {
  return path.empty() ? io::ParseConfig(json::object()) : io::LoadConfig(path);
}

void EnsureDir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw FormatError("cannot create directory " + dir + ": " + ec.message());
}

struct MapArgs {
  std::string config, out, valid_mask;
  double center_x{0.0}, center_y{0.0}, resolution{0.025}, noise{0.0};
  std::vector<double> size{2.5};
  std::uint64_t noise_seed{0};
};

int RunMap(const MapArgs& a) {
  const io::RunConfig cfg = Load(a.config);
  terrain::MapWindow window;
  window.center = {a.center_x, a.center_y};
  window.size = {a.size.front(), a.size.back()};
  window.resolution = a.resolution;
  if (!(window.size.minCoeff() > 0) || !(a.resolution > 0))
    throw ParameterError("--size and --resolution must be positive");
  terrain::ElevationMap map = terrain::Generate(cfg.terrain, window);
  if (!a.valid_mask.empty()) {
    std::ostringstream pgm;
    io::WritePgm(pgm, map.valid);
    io::WriteFile(a.valid_mask, pgm.str());
  }
  if (a.noise > 0) terrain::AddNoise(map, a.noise, a.noise_seed);
  io::SaveMap(a.out, map);
  return 0;
}

struct SegmentArgs {
  std::string config, map, prev_mask, mask, out;
  bool debug{false};
};

int RunSegment(const SegmentArgs& a) {
  const io::RunConfig cfg = Load(a.config);
  const terrain::ElevationMap raw = io::LoadMap(a.map);
  if (raw.num_valid() == 0) throw FormatError("map has no valid cells");
  const terrain::ElevationMap filled = terrain::InpaintLnv(raw);
  EnsureDir(a.out);

  std::optional<footstep::s3::Segmentation> seg;
  terrain::MaskGrid safe;
  if (!a.mask.empty()) {
    safe = io::LoadPgm(a.mask);
    if (safe.rows() != raw.width() || safe.cols() != raw.height())
      throw FormatError("--mask size does not match the map");
  } else {
    std::optional<footstep::s3::SteppabilityMask> prev;
    if (!a.prev_mask.empty()) {
      prev.emplace();
      prev->safe = io::LoadPgm(a.prev_mask);
      if (prev->safe.rows() != raw.width() || prev->safe.cols() != raw.height())
        throw FormatError("--prev-mask size does not match the map");
    }
    seg = footstep::s3::Segment(filled, prev ? &*prev : nullptr, cfg.sim.s3, &raw.valid);
    safe = seg->mask.safe;
  }

  const auto footholds = footstep::decomp::Decompose(safe, filled, cfg.sim.decomp);

  {
    std::ostringstream pgm;
    io::WritePgm(pgm, safe);
    io::WriteFile((fs::path(a.out) / "mask.pgm").string(), pgm.str());
  }
  json doc;
  doc["config"] = io::ConfigJson(cfg);
  doc["map"] = a.map;
  doc["mask_source"] = a.mask.empty() ? "segmentation" : a.mask;
  doc["footholds"] = io::FootholdsJson(footholds);
  io::WriteFile((fs::path(a.out) / "footholds.json").string(), doc.dump(2) + "\n");
  if (a.debug && seg)
    io::WriteFile((fs::path(a.out) / "criteria.csv").string(), io::CriteriaCsv(filled, *seg));
  std::printf("%zu footholds, %d safe cells\n", footholds.size(), static_cast<int>(safe.count()));
  return 0;
}

struct SimArgs {
  std::string config, mode{"opt-t-gt"}, out, svg;
  std::optional<std::uint64_t> seed;
};

int RunSim(const SimArgs& a) {
  io::RunConfig cfg = Load(a.config);
  const sim::Mode mode = sim::ParseMode(a.mode);
  const std::uint64_t seed = a.seed.value_or(cfg.terrain.seed);
  cfg.terrain.seed = seed;

  const sim::SimResult r = sim::RunEpisode(cfg.terrain, cfg.sim, mode, seed);
  json header;
  header["type"] = "header";
  header["mode"] = sim::ToString(mode);
  header["seed"] = seed;
  header["config"] = io::ConfigJson(cfg);
  const std::string log = sim::EpisodeJsonl(r, header.dump());
  if (!a.out.empty()) {
    const fs::path parent = fs::path(a.out).parent_path();
    if (!parent.empty()) EnsureDir(parent.string());
    io::WriteFile(a.out, log);
  }
  if (!a.svg.empty()) io::WriteFile(a.svg, io::EpisodeSvg(r, terrain::TerrainModel(cfg.terrain)));
  std::printf("%s after %.3f s, %zu footsteps, distance %.3f m, mean speed %.3f m/s\n",
              sim::ToString(r.outcome), r.duration, r.footsteps.size(), r.distance, r.mean_speed);
  return OutcomeExitCode(r.outcome);
}

struct ExperimentArgs {
  std::string config, sweep, out{"experiment"};
  std::vector<std::string> modes;
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  int jobs{1};
  bool flat{false};
  bool quiet{false};
};

int RunExperimentCmd(const ExperimentArgs& a) {
  io::RunConfig cfg = Load(a.config);
  auto& spec = cfg.experiment;
  if (!a.sweep.empty()) spec.d_min = sim::ParseSweep(a.sweep);
  if (a.trials) spec.trials = *a.trials;
  if (a.seed) spec.seed = *a.seed;
  if (a.flat) spec.flat_override = true;
  if (!a.modes.empty()) {
    spec.modes.clear();
    for (const auto& m : a.modes) spec.modes.push_back(sim::ParseMode(m));
  }
  spec.jobs = a.jobs;
  spec.sim = cfg.sim;
  spec.Validate();

  EnsureDir(a.out);
  // The echo leaves out --jobs so that outputs do not depend on it.
  io::WriteFile((fs::path(a.out) / "config.json").string(), io::ConfigJson(cfg).dump(2) + "\n");

  auto progress = [&](int done, int total) {
    if (!a.quiet) std::fprintf(stderr, "\r%d/%d episodes", done, total);
  };
  const sim::ExperimentResult r = sim::RunExperiment(spec, progress);
  if (!a.quiet) std::fprintf(stderr, "\n");
  io::WriteFile((fs::path(a.out) / "summary.csv").string(), sim::SummaryCsv(r));
  io::WriteFile((fs::path(a.out) / "timing.csv").string(), sim::TimingCsv(r));
  io::WriteFile((fs::path(a.out) / "episodes.csv").string(), sim::EpisodesCsv(r));
  io::WriteFile((fs::path(a.out) / "success_rate.svg").string(), io::SuccessRateSvg(r));
  std::fputs(sim::SummaryCsv(r).c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Footstep planning over perceived terrain with a reduced-order walker"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config;
  app.add_option("--config", config, "JSON run configuration (unknown keys are rejected)")
      ->check(CLI::ExistingFile);

  MapArgs map_args;
  auto* map_cmd = app.add_subcommand("map", "Sample the configured terrain into a map file");
  map_cmd->add_option("--out", map_args.out, "Output map file")->required();
  map_cmd->add_option("--center-x", map_args.center_x, "Window centre x (m)");
  map_cmd->add_option("--center-y", map_args.center_y, "Window centre y (m)");
  map_cmd->add_option("--size", map_args.size, "Window side length, or x and y lengths (m)")
      ->expected(1, 2);
  map_cmd->add_option("--valid-mask", map_args.valid_mask, "Also write the supported cells as PGM");
  map_cmd->add_option("--resolution", map_args.resolution, "Cell size (m)");
  map_cmd->add_option("--noise", map_args.noise, "Height noise standard deviation (m)");
  map_cmd->add_option("--noise-seed", map_args.noise_seed, "Noise seed");

  SegmentArgs seg_args;
  auto* seg_cmd = app.add_subcommand("segment", "Steppability mask and convex footholds of a map");
  seg_cmd->add_option("--map", seg_args.map, "Input map file")->required();
  seg_cmd->add_option("--prev-mask", seg_args.prev_mask, "Previous frame mask (PGM) for hysteresis");
  seg_cmd->add_option("--mask", seg_args.mask, "Decompose this mask (PGM) instead of segmenting");
  seg_cmd->add_option("--out", seg_args.out, "Output directory")->required();
  seg_cmd->add_flag("--debug", seg_args.debug, "Also write per-cell criteria as CSV");

  SimArgs sim_args;
  auto* sim_cmd = app.add_subcommand("sim", "Run one closed-loop episode");
  sim_cmd->add_option("--mode", sim_args.mode, "opt-t-gt, fixed-t-gt, opt-t-perceptive or fixed-t-perceptive");
  sim_cmd->add_option("--seed", sim_args.seed, "Terrain and noise seed (overrides terrain.seed)");
  sim_cmd->add_option("--out", sim_args.out, "Episode log (JSON Lines)");
  sim_cmd->add_option("--svg", sim_args.svg, "Top-view plot of the episode");

  ExperimentArgs exp_args;
  auto* exp_cmd = app.add_subcommand("experiment", "Stepping-stone success-rate sweep");
  exp_cmd->add_option("--sweep", exp_args.sweep, "d_min range lo:hi:step (default 0.35:0.70:0.05)");
  exp_cmd->add_option("--trials", exp_args.trials, "Terrains per sweep point");
  exp_cmd->add_option("--seed", exp_args.seed, "Base seed for the terrains");
  exp_cmd->add_option("--modes", exp_args.modes, "Modes to compare")->delimiter(',');
  exp_cmd->add_option("--jobs", exp_args.jobs, "Worker threads")->check(CLI::PositiveNumber);
  exp_cmd->add_option("--out", exp_args.out, "Output directory");
  exp_cmd->add_flag("--flat", exp_args.flat, "Replace the stones with flat ground");
  exp_cmd->add_flag("--quiet", exp_args.quiet, "No progress output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitBadInput;
  }

  map_args.config = seg_args.config = sim_args.config = exp_args.config = config;
  try {
    if (*map_cmd) return RunMap(map_args);
    if (*seg_cmd) return RunSegment(seg_args);
    if (*sim_cmd) return RunSim(sim_args);
    if (*exp_cmd) return RunExperimentCmd(exp_args);
  } catch (const ParameterError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitBadInput;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitBadInput;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 1;
  }
  return 1;
}
