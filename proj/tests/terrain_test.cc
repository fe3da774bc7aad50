#include "footstep/terrain.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "footstep/errors.h"

namespace footstep::terrain {
namespace {

ElevationMap RandomMap(std::mt19937_64& rng, int w, int h, double p_valid) {
  std::uniform_real_distribution<double> z(-0.2, 0.2), u(0, 1);
  ElevationMap map = ElevationMap::Constant({0.1, -0.3}, 0.05, w, h);
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i) {
      map.heights(i, j) = z(rng);
      map.valid(i, j) = u(rng) < p_valid;
      if (!map.valid(i, j)) map.heights(i, j) = std::nan("");
    }
  map.valid(0, 0) = true;
  map.heights(0, 0) = 0.0;
  return map;
}

TEST(TerrainGenerate, FlatIsZeroEverywhere) {
  const auto map = Generate({Flat{}, 3}, MapWindow{});
  EXPECT_EQ(map.width(), 100);
  EXPECT_EQ(map.height(), 100);
  EXPECT_TRUE(map.valid.all());
  EXPECT_EQ(map.heights.abs().maxCoeff(), 0.0);
}

TEST(TerrainGenerate, StoneCentresOnNominalGrid) {
  const double d = 0.35;
  TerrainModel model({SteppingStones{d, true}, 11});
  ASSERT_EQ(model.blocks().size(), 17u);
  EXPECT_NEAR(StonePitch(d), 0.56, 1e-12);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 3; ++j) {
      const Block& b = model.blocks()[1 + 3 * i + j];
      const Eigen::Vector2d nominal(0.21 + d / 2 + 0.56 * i, 0.56 * (j - 1));
      const Eigen::Vector2d centre = b.footprint.center();
      EXPECT_LE((centre - nominal).cwiseAbs().maxCoeff(), 0.05 + 1e-12);
      const Eigen::Vector2d size = b.footprint.sizes();
      EXPECT_GE(size.minCoeff(), d);
      EXPECT_LE(size.maxCoeff(), d + 0.05);
      EXPECT_LE(std::abs(b.z), 0.075);
    }
}

TEST(TerrainGenerate, StonesLeaveVoidsAndAreDeterministic) {
  const TerrainSpec spec{SteppingStones{0.45, false}, 5};
  const MapWindow window{{1.8, 0.0}, {4.0, 2.5}, 0.025};
  const auto a = Generate(spec, window);
  const auto b = Generate(spec, window);
  EXPECT_TRUE((a.valid == b.valid).all());
  EXPECT_TRUE((a.heights == b.heights || (a.heights != a.heights && b.heights != b.heights)).all());
  EXPECT_GT(a.num_valid(), 0);
  EXPECT_LT(a.num_valid(), a.width() * a.height());
  // The gap between the first two rows is void.
  TerrainModel model(spec);
  EXPECT_FALSE(model.Supported({0.21 + 0.45 + 0.105, 0.0}));
  const auto c = Generate({SteppingStones{0.45, false}, 6}, window);
  EXPECT_FALSE((a.valid == c.valid).all());
}

TEST(TerrainGenerate, FootholdsMatchBlocks) {
  TerrainModel model({SteppingStones{0.5, true}, 2});
  const auto polys = model.Footholds();
  ASSERT_EQ(polys.size(), model.blocks().size());
  for (size_t k = 0; k < polys.size(); ++k) {
    const Eigen::Vector2d c = model.blocks()[k].footprint.center();
    EXPECT_TRUE(polys[k].Contains(c));
    EXPECT_NEAR(polys[k].HeightAt(c), model.blocks()[k].z, 1e-12);
  }
}

TEST(TerrainGenerate, SinusoidFootholdsAreTangentPlanes) {
  TerrainModel model({Sinusoid{0.05, 1.0}, 0});
  for (const auto& p : model.Footholds()) {
    const Eigen::Vector2d c(0.5 * (p.vertices[0].x() + p.vertices[1].x()), 0.3);
    EXPECT_NEAR(p.HeightAt(c), *model.Height(c), 1e-12);
  }
}

TEST(TerrainGenerate, RejectsBadDimensions) {
  EXPECT_THROW(TerrainModel({Stairs{-0.1, 0.3, 2}, 0}), ParameterError);
  EXPECT_THROW(TerrainModel({Beam{0.0}, 0}), ParameterError);
  EXPECT_THROW(Generate({Flat{}, 0}, MapWindow{{0, 0}, {1, 1}, 0.0}), ParameterError);
}

TEST(TerrainInpaint, FullyValidUnchanged) {
  std::mt19937_64 rng(1);
  const auto map = RandomMap(rng, 12, 9, 1.1);
  const auto out = InpaintLnv(map);
  EXPECT_TRUE((out.heights == map.heights).all());
}

TEST(TerrainInpaint, SingleHoleTakesLeastNeighbour) {
  auto map = ElevationMap::Constant({0, 0}, 0.1, 3, 3, 0.5);
  map.valid(1, 1) = false;
  map.heights(1, 1) = std::nan("");
  map.heights(0, 1) = 0.1;
  map.heights(2, 1) = 0.2;
  map.heights(1, 0) = 0.3;
  map.heights(1, 2) = 0.0;
  EXPECT_EQ(InpaintLnv(map).heights(1, 1), 0.0);
}

TEST(TerrainInpaint, GulfFilledFromNearSide) {
  auto map = ElevationMap::Constant({0, 0}, 0.1, 30, 4, 0.0);
  for (int j = 0; j < 4; ++j)
    for (int i = 10; i < 30; ++i) {
      if (i < 20) {
        map.valid(i, j) = false;
        map.heights(i, j) = std::nan("");
      } else {
        map.heights(i, j) = 0.15;
      }
    }
  const auto out = InpaintLnv(map);
  for (int i = 10; i < 20; ++i) {
    const int to_plain = i - 9, to_stone = 20 - i;
    const double expected = to_plain <= to_stone ? 0.0 : 0.15;
    for (int j = 0; j < 4; ++j) EXPECT_EQ(out.heights(i, j), expected) << i;
  }
}

TEST(TerrainInpaint, MatchesNearestValidOracle) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto map = RandomMap(rng, 17, 13, trial % 2 ? 0.1 : 0.4);
    const auto out = InpaintLnv(map);
    ASSERT_TRUE(out.valid.all());
    for (int j = 0; j < map.height(); ++j)
      for (int i = 0; i < map.width(); ++i) {
        if (map.valid(i, j)) {
          EXPECT_EQ(out.heights(i, j), map.heights(i, j));
          continue;
        }
        int best = 1 << 30;
        double value = 0;
        for (int b = 0; b < map.height(); ++b)
          for (int a = 0; a < map.width(); ++a) {
            if (!map.valid(a, b)) continue;
            const int d = std::abs(a - i) + std::abs(b - j);
            if (d < best || (d == best && map.heights(a, b) < value)) {
              best = d;
              value = map.heights(a, b);
            }
          }
        EXPECT_EQ(out.heights(i, j), value);
      }
    const auto twice = InpaintLnv(out);
    EXPECT_TRUE((twice.heights == out.heights).all());
  }
}

TEST(TerrainInpaint, AllInvalidThrows) {
  auto map = ElevationMap::Constant({0, 0}, 0.1, 4, 4);
  map.valid.setConstant(false);
  EXPECT_THROW(InpaintLnv(map), NoFootholdError);
}

TEST(TerrainMedian, ConstantAndEvenCount) {
  auto map = ElevationMap::Constant({0, 0}, 0.1, 8, 8, 0.42);
  EXPECT_DOUBLE_EQ(HeightMedian4(map, {0.35, 0.35}), 0.42);
  for (int j = 2; j < 6; ++j)
    for (int i = 2; i < 6; ++i) map.heights(i, j) = j < 4 ? 0.0 : 1.0;
  EXPECT_DOUBLE_EQ(HeightMedian4(map, {0.35, 0.35}), 0.5);
  EXPECT_THROW(HeightMedian4(map, {5.0, 0.0}), ParameterError);
}

TEST(TerrainMedian, MatchesSortOracle) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> cell(0, 18);
  for (int trial = 0; trial < 200; ++trial) {
    const auto map = RandomMap(rng, 20, 20, 0.7);
    // Query at a cell corner: the block is the 16 cells within 1.5 cells.
    const Eigen::Vector2d xy = map.CellCenter(cell(rng), cell(rng)) +
                               Eigen::Vector2d::Constant(0.5 * map.resolution);
    std::vector<double> vals;
    for (int j = 0; j < map.height(); ++j)
      for (int i = 0; i < map.width(); ++i) {
        const Eigen::Vector2d d = (map.CellCenter(i, j) - xy).cwiseAbs();
        if (d.maxCoeff() < 1.6 * map.resolution && map.valid(i, j))
          vals.push_back(map.heights(i, j));
      }
    if (vals.empty()) {
      EXPECT_THROW(HeightMedian4(map, xy), NoFootholdError);
      continue;
    }
    std::sort(vals.begin(), vals.end());
    const size_t n = vals.size();
    const double expected = n % 2 ? vals[n / 2] : 0.5 * (vals[n / 2 - 1] + vals[n / 2]);
    EXPECT_DOUBLE_EQ(HeightMedian4(map, xy), expected);
  }
}

TEST(TerrainLookup, FlatAndPlateau) {
  const auto flat = ElevationMap::Constant({0, 0}, 0.025, 40, 40);
  EXPECT_EQ(FootstepHeightLookup(flat, {0.31, 0.57}), 0.0);
  auto plateau = flat;
  for (int j = 10; j < 30; ++j)
    for (int i = 10; i < 30; ++i) plateau.heights(i, j) = 0.15;
  EXPECT_NEAR(FootstepHeightLookup(plateau, plateau.CellCenter(20, 20)), 0.15, 1e-3);
  EXPECT_THROW(FootstepHeightLookup(plateau, {-1.0, 0.0}), ParameterError);
  auto holes = flat;
  holes.valid(3, 3) = false;
  EXPECT_THROW(HeightLookup{holes}, ParameterError);
}

TEST(TerrainLookup, TracksSinusoid) {
  const Sinusoid s{0.06, 0.8};
  const auto map = Generate({s, 0}, MapWindow{{0.3, 0.1}, {2.5, 2.5}, 0.025});
  HeightLookup lookup(map);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  for (int k = 0; k < 500; ++k) {
    const Eigen::Vector2d xy(0.3 + u(rng), 0.1 + u(rng));
    const double truth = s.amplitude * std::sin(2 * std::numbers::pi * xy.x() / s.period);
    EXPECT_NEAR(lookup(xy), truth, 0.1 * s.amplitude);
  }
}

TEST(TerrainRecenter, ZeroAndUnitShift) {
  std::mt19937_64 rng(5);
  const auto map = RandomMap(rng, 15, 11, 0.8);
  const auto same = Recenter(map, map.origin);
  EXPECT_TRUE(same.overlap.all());
  EXPECT_TRUE((same.map.valid == map.valid).all());
  const auto one = Recenter(map, map.origin + Eigen::Vector2d(map.resolution, 0));
  EXPECT_EQ(one.overlap.count(), 14 * 11);
  EXPECT_FALSE(one.map.valid.row(14).any());
  for (int j = 0; j < 11; ++j)
    for (int i = 0; i < 14; ++i) {
      EXPECT_EQ(one.map.valid(i, j), map.valid(i + 1, j));
      if (map.valid(i + 1, j)) EXPECT_EQ(one.map.heights(i, j), map.heights(i + 1, j));
    }
}

TEST(TerrainRecenter, SubCellShiftCountsAndRoundTrip) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  for (int trial = 0; trial < 50; ++trial) {
    const auto map = RandomMap(rng, 16, 12, 0.7);
    const Eigen::Vector2d delta(u(rng), u(rng));
    const auto r = Recenter(map, map.origin + delta);
    const int sx = static_cast<int>(std::round(delta.x() / map.resolution));
    const int sy = static_cast<int>(std::round(delta.y() / map.resolution));
    const long expected = std::max(0, 16 - std::abs(sx)) * std::max(0, 12 - std::abs(sy));
    EXPECT_EQ(r.overlap.count(), expected);
    EXPECT_NEAR((r.map.origin - map.origin - map.resolution * Eigen::Vector2d(sx, sy)).norm(), 0, 1e-12);
    const auto back = Recenter(r.map, map.origin);
    for (int j = 0; j < 12; ++j)
      for (int i = 0; i < 16; ++i)
        if (back.overlap(i, j) && r.overlap(i - sx, j - sy) == true) {
          EXPECT_EQ(back.map.valid(i, j), map.valid(i, j));
          if (map.valid(i, j)) EXPECT_EQ(back.map.heights(i, j), map.heights(i, j));
        }
  }
}

TEST(TerrainNoise, DeterministicPerSeed) {
  auto a = ElevationMap::Constant({0, 0}, 0.025, 20, 20);
  auto b = a, c = a;
  AddNoise(a, 0.005, 9);
  AddNoise(b, 0.005, 9);
  AddNoise(c, 0.005, 10);
  EXPECT_TRUE((a.heights == b.heights).all());
  EXPECT_FALSE((a.heights == c.heights).all());
  EXPECT_NEAR(std::sqrt(a.heights.square().mean()), 0.005, 0.001);
}

}  // namespace
}  // namespace footstep::terrain
