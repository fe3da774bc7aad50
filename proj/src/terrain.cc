#include "footstep/terrain.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <random>

#include "footstep/errors.h"

namespace footstep::terrain {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kStoneGap = 0.21;
constexpr double kOffsetXY = 0.05;
constexpr double kOffsetZ = 0.075;
constexpr double kSizeSpread = 0.05;
constexpr double kPlatformLength = 2.0;
constexpr double kPlatformHalfWidth = 1.25;

Eigen::AlignedBox2d Box(double x0, double y0, double x1, double y1) {
  return Eigen::AlignedBox2d(Eigen::Vector2d(x0, y0), Eigen::Vector2d(x1, y1));
}

FootholdPolygon BoxFoothold(const Eigen::AlignedBox2d& box, double z, int id) {
  const Eigen::Vector2d lo = box.min(), hi = box.max();
  return FootholdPolygon::FromVertices(
      {lo, {hi.x(), lo.y()}, hi, {lo.x(), hi.y()}}, z, id);
}

// Sinusoid strips: tangent plane at the strip centre.
constexpr double kSinusoidStart = -3.0;
constexpr double kSinusoidEnd = 12.0;
constexpr double kContinuousHalfWidth = 3.0;

}  // namespace

ElevationMap ElevationMap::Constant(const Eigen::Vector2d& origin,
                                    double resolution, int width, int height,
                                    double z) {
  ElevationMap map;
  map.origin = origin;
  map.resolution = resolution;
  map.heights = HeightGrid::Constant(width, height, z);
  map.valid = MaskGrid::Constant(width, height, true);
  return map;
}

void ElevationMap::Validate() const {
  if (!(resolution > 0)) throw ParameterError("map resolution must be positive");
  if (valid.rows() != heights.rows() || valid.cols() != heights.cols())
    throw ParameterError("map validity grid does not match heights");
  for (int j = 0; j < height(); ++j)
    for (int i = 0; i < width(); ++i)
      if (valid(i, j) && !std::isfinite(heights(i, j)))
        throw ParameterError("valid map cell has a non-finite height");
}

void TerrainSpec::Validate() const {
  std::visit(
      [](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Stairs>) {
          if (!(v.rise > 0 && v.depth > 0 && v.count > 0))
            throw ParameterError("stairs dimensions must be positive");
        } else if constexpr (std::is_same_v<T, Beam>) {
          if (!(v.width > 0)) throw ParameterError("beam width must be positive");
        } else if constexpr (std::is_same_v<T, SteppingStones>) {
          if (!(v.d_min > 0)) throw ParameterError("d_min must be positive");
        } else if constexpr (std::is_same_v<T, Sinusoid>) {
          if (!(v.amplitude > 0 && v.period > 0))
            throw ParameterError("sinusoid dimensions must be positive");
        }
      },
      variant);
}

std::string VariantName(const TerrainVariant& v) {
  static const char* kNames[] = {"flat", "stairs", "beam", "stepping_stones",
                                 "sinusoid"};
  return kNames[v.index()];
}

double StonePitch(double d_min) { return d_min + kStoneGap; }

TerrainModel::TerrainModel(const TerrainSpec& spec) : spec_(spec) {
  spec_.Validate();
  goal_x_ = std::numeric_limits<double>::infinity();
  if (const auto* s = std::get_if<SteppingStones>(&spec_.variant)) {
    std::mt19937_64 rng(spec_.seed);
    std::uniform_real_distribution<double> offset(-kOffsetXY, kOffsetXY);
    std::uniform_real_distribution<double> dz(-kOffsetZ, kOffsetZ);
    std::uniform_real_distribution<double> size(s->d_min, s->d_min + kSizeSpread);
    const double pitch = StonePitch(s->d_min);
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 3; ++j) {
        const double length = size(rng);
        const double width = size(rng);
        const double cx = kStoneGap + 0.5 * s->d_min + i * pitch + offset(rng);
        const double cy = (j - 1) * pitch + offset(rng);
        const double z = dz(rng);
        blocks_.push_back({Box(cx - 0.5 * length, cy - 0.5 * width,
                               cx + 0.5 * length, cy + 0.5 * width),
                           z});
      }
    }
    const double goal_start = 5 * pitch + kStoneGap;
    if (s->platforms) {
      blocks_.insert(blocks_.begin(),
                     {Box(-kPlatformLength, -kPlatformHalfWidth, 0.0,
                          kPlatformHalfWidth),
                      0.0});
      blocks_.push_back({Box(goal_start, -kPlatformHalfWidth,
                             goal_start + kPlatformLength, kPlatformHalfWidth),
                         0.0});
    }
    goal_x_ = goal_start + 0.5;
  } else if (const auto* st = std::get_if<Stairs>(&spec_.variant)) {
    goal_x_ = st->count * st->depth + 1.0;
  } else if (std::holds_alternative<Beam>(spec_.variant)) {
    const double w = std::get<Beam>(spec_.variant).width;
    blocks_.push_back({Box(-kPlatformLength, -kPlatformHalfWidth, 0.0,
                           kPlatformHalfWidth),
                       0.0});
    blocks_.push_back({Box(0.0, -0.5 * w, 4.0, 0.5 * w), 0.0});
    blocks_.push_back({Box(4.0, -kPlatformHalfWidth, 4.0 + kPlatformLength,
                           kPlatformHalfWidth),
                       0.0});
    goal_x_ = 4.5;
  }
}

std::optional<double> TerrainModel::Height(const Eigen::Vector2d& xy) const {
  if (std::holds_alternative<Flat>(spec_.variant)) return 0.0;
  if (const auto* st = std::get_if<Stairs>(&spec_.variant)) {
    if (xy.x() < 0) return 0.0;
    const int k = std::min(static_cast<int>(std::floor(xy.x() / st->depth)) + 1,
                           st->count);
    return k * st->rise;
  }
  if (const auto* sn = std::get_if<Sinusoid>(&spec_.variant))
    return sn->amplitude * std::sin(2 * std::numbers::pi * xy.x() / sn->period);
  // Blocks never overlap; later blocks win to keep the lookup well defined.
  std::optional<double> z;
  for (const auto& b : blocks_)
    if (b.footprint.contains(xy)) z = b.z;
  return z;
}

std::vector<FootholdPolygon> TerrainModel::Footholds() const {
  std::vector<FootholdPolygon> out;
  const double W = kContinuousHalfWidth;
  if (std::holds_alternative<Flat>(spec_.variant)) {
    out.push_back(BoxFoothold(Box(-5.0, -W, 50.0, W), 0.0, 0));
  } else if (const auto* st = std::get_if<Stairs>(&spec_.variant)) {
    out.push_back(BoxFoothold(Box(-5.0, -W, 0.0, W), 0.0, 0));
    for (int k = 1; k <= st->count; ++k) {
      const double x0 = (k - 1) * st->depth;
      const double x1 = k < st->count ? k * st->depth : x0 + 10.0;
      out.push_back(BoxFoothold(Box(x0, -W, x1, W), k * st->rise, k));
    }
  } else if (const auto* sn = std::get_if<Sinusoid>(&spec_.variant)) {
    const double len = sn->period / 8;
    const double k = 2 * std::numbers::pi / sn->period;
    int id = 0;
    for (double x0 = kSinusoidStart; x0 < kSinusoidEnd; x0 += len, ++id) {
      const double xc = x0 + 0.5 * len;
      const double h = sn->amplitude * std::sin(k * xc);
      const double slope = sn->amplitude * k * std::cos(k * xc);
      const Eigen::Vector2d lo(x0, -W), hi(x0 + len, W);
      out.push_back(FootholdPolygon::FromVertices(
          {lo, {hi.x(), lo.y()}, hi, {lo.x(), hi.y()}},
          Eigen::Vector3d(-slope, 0, 1), h - slope * xc, id));
    }
  } else {
    for (size_t i = 0; i < blocks_.size(); ++i)
      out.push_back(BoxFoothold(blocks_[i].footprint, blocks_[i].z,
                                static_cast<int>(i)));
  }
  return out;
}

ElevationMap Sample(const TerrainModel& model, const MapWindow& window) {
  if (!(window.resolution > 0) || !(window.size.minCoeff() > 0))
    throw ParameterError("map window must have positive size and resolution");
  const int w = std::max(1, static_cast<int>(std::lround(window.size.x() / window.resolution)));
  const int h = std::max(1, static_cast<int>(std::lround(window.size.y() / window.resolution)));
  ElevationMap map;
  map.resolution = window.resolution;
  map.origin = window.center -
               0.5 * window.resolution * Eigen::Vector2d(w - 1, h - 1);
  map.heights = HeightGrid::Constant(w, h, kNaN);
  map.valid = MaskGrid::Constant(w, h, false);
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      if (auto z = model.Height(map.CellCenter(i, j))) {
        map.heights(i, j) = *z;
        map.valid(i, j) = true;
      }
    }
  }
  return map;
}

ElevationMap Generate(const TerrainSpec& spec, const MapWindow& window) {
  return Sample(TerrainModel(spec), window);
}

void AddNoise(ElevationMap& map, double sigma, std::uint64_t seed) {
  if (sigma <= 0) return;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (int j = 0; j < map.height(); ++j)
    for (int i = 0; i < map.width(); ++i)
      if (map.valid(i, j)) map.heights(i, j) += noise(rng);
}

ElevationMap InpaintLnv(const ElevationMap& map) {
  if (map.num_valid() == 0)
    throw NoFootholdError("cannot inpaint a map with no valid cells");
  ElevationMap out = map;
  const int W = map.width(), H = map.height();
  Eigen::ArrayXXi dist = Eigen::ArrayXXi::Constant(W, H, -1);
  std::deque<Eigen::Vector2i> queue;
  for (int j = 0; j < H; ++j)
    for (int i = 0; i < W; ++i)
      if (map.valid(i, j)) {
        dist(i, j) = 0;
        queue.emplace_back(i, j);
      }
  static const int kDi[] = {1, -1, 0, 0};
  static const int kDj[] = {0, 0, 1, -1};
  // A cell's value is the minimum over its predecessors on shortest paths,
  // which equals the minimum over its nearest valid cells.
  while (!queue.empty()) {
    const Eigen::Vector2i c = queue.front();
    queue.pop_front();
    for (int k = 0; k < 4; ++k) {
      const int i = c.x() + kDi[k], j = c.y() + kDj[k];
      if (!map.InBounds(i, j)) continue;
      const double v = out.heights(c.x(), c.y());
      if (dist(i, j) < 0) {
        dist(i, j) = dist(c.x(), c.y()) + 1;
        out.heights(i, j) = v;
        queue.emplace_back(i, j);
      } else if (dist(i, j) == dist(c.x(), c.y()) + 1) {
        out.heights(i, j) = std::min(out.heights(i, j), v);
      }
    }
  }
  out.valid.setConstant(true);
  return out;
}

double HeightMedian4(const ElevationMap& map, const Eigen::Vector2d& xy) {
  const Eigen::Vector2d c = map.ToCell(xy);
  if (c.x() < -0.5 || c.y() < -0.5 || c.x() > map.width() - 0.5 ||
      c.y() > map.height() - 0.5)
    throw ParameterError("height query outside the map");
  const int i0 = static_cast<int>(std::floor(c.x())) - 1;
  const int j0 = static_cast<int>(std::floor(c.y())) - 1;
  std::vector<double> vals;
  vals.reserve(16);
  for (int j = j0; j < j0 + 4; ++j)
    for (int i = i0; i < i0 + 4; ++i)
      if (map.InBounds(i, j) && map.valid(i, j)) vals.push_back(map.heights(i, j));
  if (vals.empty()) throw NoFootholdError("no valid cells near height query");
  std::sort(vals.begin(), vals.end());
  const size_t n = vals.size();
  return n % 2 ? vals[n / 2] : 0.5 * (vals[n / 2 - 1] + vals[n / 2]);
}

HeightGrid GaussianBlur(const HeightGrid& grid, double sigma) {
  if (sigma <= 0) return grid;
  const int r = static_cast<int>(std::ceil(3 * sigma));
  Eigen::ArrayXd kernel(2 * r + 1);
  for (int k = -r; k <= r; ++k) kernel(k + r) = std::exp(-0.5 * k * k / (sigma * sigma));
  kernel /= kernel.sum();
  const int W = static_cast<int>(grid.rows()), H = static_cast<int>(grid.cols());
  HeightGrid tmp(W, H), out(W, H);
  for (int j = 0; j < H; ++j)
    for (int i = 0; i < W; ++i) {
      double s = 0;
      for (int k = -r; k <= r; ++k) s += kernel(k + r) * grid(std::clamp(i + k, 0, W - 1), j);
      tmp(i, j) = s;
    }
  for (int j = 0; j < H; ++j)
    for (int i = 0; i < W; ++i) {
      double s = 0;
      for (int k = -r; k <= r; ++k) s += kernel(k + r) * tmp(i, std::clamp(j + k, 0, H - 1));
      out(i, j) = s;
    }
  return out;
}

HeightLookup::HeightLookup(const ElevationMap& inpainted, double sigma_cells)
    : smoothed_(inpainted) {
  if (!inpainted.valid.all())
    throw ParameterError("height lookup needs an inpainted map");
  smoothed_.heights = GaussianBlur(inpainted.heights, sigma_cells);
}

double HeightLookup::operator()(const Eigen::Vector2d& xy) const {
  const Eigen::Vector2d c = smoothed_.ToCell(xy);
  const int W = smoothed_.width(), H = smoothed_.height();
  if (!(c.x() >= 0 && c.y() >= 0 && c.x() <= W - 1 && c.y() <= H - 1))
    throw ParameterError("height query outside the map");
  const int i = std::min(static_cast<int>(c.x()), std::max(W - 2, 0));
  const int j = std::min(static_cast<int>(c.y()), std::max(H - 2, 0));
  const int i1 = std::min(i + 1, W - 1), j1 = std::min(j + 1, H - 1);
  const double fx = c.x() - i, fy = c.y() - j;
  const auto& z = smoothed_.heights;
  return (1 - fx) * (1 - fy) * z(i, j) + fx * (1 - fy) * z(i1, j) +
         (1 - fx) * fy * z(i, j1) + fx * fy * z(i1, j1);
}

double FootstepHeightLookup(const ElevationMap& inpainted,
                            const Eigen::Vector2d& xy) {
  return HeightLookup(inpainted)(xy);
}

MaskGrid ShiftMask(const MaskGrid& mask, const Eigen::Vector2i& shift,
                   bool fill) {
  const int W = static_cast<int>(mask.rows()), H = static_cast<int>(mask.cols());
  MaskGrid out = MaskGrid::Constant(W, H, fill);
  for (int j = 0; j < H; ++j) {
    const int sj = j + shift.y();
    if (sj < 0 || sj >= H) continue;
    for (int i = 0; i < W; ++i) {
      const int si = i + shift.x();
      if (si >= 0 && si < W) out(i, j) = mask(si, sj);
    }
  }
  return out;
}

Recentered Recenter(const ElevationMap& map, const Eigen::Vector2d& new_origin) {
  const Eigen::Vector2d d = (new_origin - map.origin) / map.resolution;
  const Eigen::Vector2i shift(static_cast<int>(std::lround(d.x())),
                              static_cast<int>(std::lround(d.y())));
  Recentered r;
  r.shift = shift;
  r.map.origin = map.origin + map.resolution * shift.cast<double>();
  r.map.resolution = map.resolution;
  const int W = map.width(), H = map.height();
  r.map.heights = HeightGrid::Constant(W, H, kNaN);
  r.map.valid = ShiftMask(map.valid, shift, false);
  r.overlap = ShiftMask(MaskGrid::Constant(W, H, true), shift, false);
  for (int j = 0; j < H; ++j)
    for (int i = 0; i < W; ++i)
      if (r.overlap(i, j)) r.map.heights(i, j) = map.heights(i + shift.x(), j + shift.y());
  return r;
}

}  // namespace footstep::terrain
