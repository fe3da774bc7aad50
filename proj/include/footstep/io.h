#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "footstep/decomp.h"
#include "footstep/s3.h"
#include "footstep/sim.h"
#include "footstep/terrain.h"

namespace footstep::io {

using terrain::ElevationMap;
using terrain::MaskGrid;

// Elevation map text format:
//
//   FSMAP 1
//   size <width> <height>
//   resolution <metres>
//   origin <x> <y>
//   <height rows of width values; row j holds cells (0..width-1, j); nan = invalid>
void WriteMap(std::ostream& out, const ElevationMap& map);
/// Throws FormatError on a bad header, short data or unparsable values.
ElevationMap ReadMap(std::istream& in);
ElevationMap LoadMap(const std::string& path);
void SaveMap(const std::string& path, const ElevationMap& map);

/// Binary PGM (P5), 255 = safe. Image rows run from +y (top) to -y.
void WritePgm(std::ostream& out, const MaskGrid& mask);
/// Reads P5 or P2; any nonzero pixel is safe.
MaskGrid ReadPgm(std::istream& in);
MaskGrid LoadPgm(const std::string& path);

nlohmann::json FootholdsJson(const std::vector<FootholdPolygon>& footholds);
std::vector<FootholdPolygon> ParseFootholds(const nlohmann::json& j);

/// One row per cell: i, j, x, y, z, curvature, inclination, score, safe.
std::string CriteriaCsv(const ElevationMap& map, const s3::Segmentation& seg);

/// Success rate against d_min, one polyline per mode.
std::string SuccessRateSvg(const sim::ExperimentResult& result);
/// Top view of an episode: footholds, CoM path and realized footsteps.
std::string EpisodeSvg(const sim::SimResult& result, const terrain::TerrainModel& model);

/// Everything a command needs, loaded from one JSON file. Every section and
/// key is optional; omitted values keep their defaults and unknown keys are
/// rejected.
struct RunConfig {
  sim::SimConfig sim;
  terrain::TerrainSpec terrain;
  sim::ExperimentSpec experiment;
};

/// Throws ParameterError on unknown keys, wrong types or invalid values.
RunConfig ParseConfig(const nlohmann::json& j);
RunConfig LoadConfig(const std::string& path);
/// Full config including defaults; ParseConfig(ConfigJson(c)) == c.
nlohmann::json ConfigJson(const RunConfig& cfg);

nlohmann::json TerrainJson(const terrain::TerrainSpec& spec);
terrain::TerrainSpec ParseTerrain(const nlohmann::json& j);

std::string ReadFile(const std::string& path);
void WriteFile(const std::string& path, const std::string& contents);

}  // namespace footstep::io
