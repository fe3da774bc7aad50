#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "footstep/foothold.h"

namespace footstep::terrain {

using HeightGrid = Eigen::ArrayXXd;
using MaskGrid = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Regular height grid. Cell (i, j) is centred at origin + resolution*(i, j);
/// the first index runs along x. Invalid cells hold NaN.
struct ElevationMap {
  Eigen::Vector2d origin{0.0, 0.0};
  double resolution{0.025};
  HeightGrid heights;
  MaskGrid valid;

  int width() const { return static_cast<int>(heights.rows()); }
  int height() const { return static_cast<int>(heights.cols()); }
  Eigen::Vector2d CellCenter(int i, int j) const {
    return origin + resolution * Eigen::Vector2d(i, j);
  }
  /// Continuous cell coordinates of a world point (cell centres are integers).
  Eigen::Vector2d ToCell(const Eigen::Vector2d& xy) const {
    return (xy - origin) / resolution;
  }
  bool InBounds(int i, int j) const {
    return i >= 0 && j >= 0 && i < width() && j < height();
  }
  int num_valid() const { return static_cast<int>(valid.count()); }

  /// Map with every cell valid at height z.
  static ElevationMap Constant(const Eigen::Vector2d& origin, double resolution,
                               int width, int height, double z = 0.0);
  void Validate() const;
};

/// Axis-aligned sampling window: size in metres around a centre point.
struct MapWindow {
  Eigen::Vector2d center{0.0, 0.0};
  Eigen::Vector2d size{2.5, 2.5};
  double resolution{0.025};
};

struct Flat {};
struct Stairs {
  double rise{0.16};
  double depth{0.3};
  int count{4};
};
struct Beam {
  double width{0.2};
};
struct SteppingStones {
  double d_min{0.35};
  /// Start and goal platforms on either side of the stone field.
  bool platforms{true};
};
struct Sinusoid {
  double amplitude{0.05};
  double period{1.0};
};

using TerrainVariant = std::variant<Flat, Stairs, Beam, SteppingStones, Sinusoid>;

struct TerrainSpec {
  TerrainVariant variant{Flat{}};
  std::uint64_t seed{0};
  void Validate() const;
};

std::string VariantName(const TerrainVariant& v);

/// Axis-aligned box of terrain at constant height.
struct Block {
  Eigen::AlignedBox2d footprint;
  double z{0.0};
};

/// Geometry of a terrain realisation: exact heights, support and the planar
/// footholds that describe it.
class TerrainModel {
 public:
  explicit TerrainModel(const TerrainSpec& spec);

  const TerrainSpec& spec() const { return spec_; }
  /// Height at xy, or nothing over a void.
  std::optional<double> Height(const Eigen::Vector2d& xy) const;
  bool Supported(const Eigen::Vector2d& xy) const { return Height(xy).has_value(); }
  /// Convex planar regions covering the terrain.
  std::vector<FootholdPolygon> Footholds() const;
  /// Stones (and platforms when present); empty for continuous terrains.
  const std::vector<Block>& blocks() const { return blocks_; }
  /// x coordinate beyond which an episode counts as finished.
  double goal_x() const { return goal_x_; }

 private:
  TerrainSpec spec_;
  std::vector<Block> blocks_;
  double goal_x_{4.0};
};

/// Nominal distance between neighbouring stone centres.
double StonePitch(double d_min);

ElevationMap Generate(const TerrainSpec& spec, const MapWindow& window);
ElevationMap Sample(const TerrainModel& model, const MapWindow& window);

/// Adds i.i.d. Gaussian noise to every valid height.
void AddNoise(ElevationMap& map, double sigma, std::uint64_t seed);

/// Fills invalid cells by multi-source breadth-first propagation of the
/// lowest neighbouring value. Throws NoFootholdError on an all-invalid map.
ElevationMap InpaintLnv(const ElevationMap& map);

/// Median of the valid cells of the 4x4 block around xy.
double HeightMedian4(const ElevationMap& map, const Eigen::Vector2d& xy);

/// Separable Gaussian blur with replicated borders.
HeightGrid GaussianBlur(const HeightGrid& grid, double sigma);

/// Bilinear lookup on a Gaussian-smoothed copy of an inpainted map.
class HeightLookup {
 public:
  explicit HeightLookup(const ElevationMap& inpainted, double sigma_cells = 1.0);
  double operator()(const Eigen::Vector2d& xy) const;

 private:
  ElevationMap smoothed_;
};

double FootstepHeightLookup(const ElevationMap& inpainted,
                            const Eigen::Vector2d& xy);

struct Recentered {
  ElevationMap map;
  /// Cells of the new map that were present in the old one.
  MaskGrid overlap;
  /// Integer cell shift applied (new index = old index - shift).
  Eigen::Vector2i shift;
};

/// Moves the map so that its origin is the grid point nearest new_origin.
Recentered Recenter(const ElevationMap& map, const Eigen::Vector2d& new_origin);

/// Shifts a mask by whole cells, filling exposed cells with `fill`.
MaskGrid ShiftMask(const MaskGrid& mask, const Eigen::Vector2i& shift,
                   bool fill = false);

}  // namespace footstep::terrain
