#include "footstep/s3.h"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "footstep/errors.h"

namespace footstep::s3 {
namespace {

using terrain::Generate;
using terrain::MapWindow;

MaskGrid RandomMask(std::mt19937_64& rng, int w, int h, double p) {
  std::bernoulli_distribution b(p);
  MaskGrid m(w, h);
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i) m(i, j) = b(rng);
  return m;
}

// Brute-force square-element morphology, out-of-grid cells false.
MaskGrid RefMorph(const MaskGrid& m, int r, bool erode) {
  const int W = static_cast<int>(m.rows()), H = static_cast<int>(m.cols());
  MaskGrid out(W, H);
  for (int j = 0; j < H; ++j)
    for (int i = 0; i < W; ++i) {
      bool all = true, any = false;
      for (int b = j - r; b <= j + r; ++b)
        for (int a = i - r; a <= i + r; ++a) {
          const bool v = a >= 0 && b >= 0 && a < W && b < H && m(a, b);
          all = all && v;
          any = any || v;
        }
      out(i, j) = erode ? all : any;
    }
  return out;
}

// Labels 4-connected components; returns the count.
int LabelComponents(const MaskGrid& m, Eigen::ArrayXXi& label) {
  const int W = static_cast<int>(m.rows()), H = static_cast<int>(m.cols());
  label = Eigen::ArrayXXi::Constant(W, H, -1);
  int n = 0;
  for (int j = 0; j < H; ++j)
    for (int i = 0; i < W; ++i) {
      if (!m(i, j) || label(i, j) >= 0) continue;
      std::vector<std::pair<int, int>> stack{{i, j}};
      label(i, j) = n;
      while (!stack.empty()) {
        auto [a, b] = stack.back();
        stack.pop_back();
        const int na[] = {a + 1, a - 1, a, a};
        const int nb[] = {b, b, b + 1, b - 1};
        for (int k = 0; k < 4; ++k)
          if (na[k] >= 0 && nb[k] >= 0 && na[k] < W && nb[k] < H && m(na[k], nb[k]) &&
              label(na[k], nb[k]) < 0) {
            label(na[k], nb[k]) = n;
            stack.push_back({na[k], nb[k]});
          }
      }
      ++n;
    }
  return n;
}

ElevationMap Ramp(double theta) {
  auto map = ElevationMap::Constant({-0.5, -0.5}, 0.025, 40, 40);
  for (int j = 0; j < 40; ++j)
    for (int i = 0; i < 40; ++i) map.heights(i, j) = std::tan(theta) * map.CellCenter(i, j).x();
  return map;
}

TEST(S3Curvature, FlatIsOne) {
  const auto map = ElevationMap::Constant({0, 0}, 0.025, 30, 20, 0.3);
  S3Config cfg;
  EXPECT_TRUE((CurvatureCriterion(map, cfg) == 1.0).all());
  EXPECT_TRUE((InclinationCriterion(map, cfg) == 1.0).all());
}

TEST(S3Curvature, PenalisesOnlyBelowEdge) {
  const auto map = Generate({terrain::Stairs{0.16, 5.0, 1}, 0}, MapWindow{{0, 0}, {1.0, 1.0}, 0.025});
  const auto c = CurvatureCriterion(map, S3Config{});
  // Edge between cells 19 (low) and 20 (high).
  EXPECT_LT(c(18, 20), 0.5);
  EXPECT_EQ(c(21, 20), 1.0);
  EXPECT_TRUE((c >= 0 && c <= 1).all());
}

TEST(S3Curvature, ParaboloidMatchesConvolutionOracle) {
  const double k = 0.8;
  auto map = ElevationMap::Constant({-0.5, -0.5}, 0.025, 41, 41);
  for (int j = 0; j < 41; ++j)
    for (int i = 0; i < 41; ++i) map.heights(i, j) = 0.5 * k * map.CellCenter(i, j).squaredNorm();
  S3Config cfg;
  const auto score = CurvatureCriterion(map, cfg);
  // Direct 2D Gaussian then 3x3 kernel, replicated borders.
  const int r = 6;
  Eigen::ArrayXXd blurred(41, 41);
  for (int j = 0; j < 41; ++j)
    for (int i = 0; i < 41; ++i) {
      double s = 0, wsum = 0;
      for (int b = -r; b <= r; ++b)
        for (int a = -r; a <= r; ++a) {
          const double w = std::exp(-(a * a + b * b) / (2.0 * 4.0));
          s += w * map.heights(std::clamp(i + a, 0, 40), std::clamp(j + b, 0, 40));
          wsum += w;
        }
      blurred(i, j) = s / wsum;
    }
  for (int j = 0; j < 41; ++j)
    for (int i = 0; i < 41; ++i) {
      double s = -8 * blurred(i, j);
      for (int b = -1; b <= 1; ++b)
        for (int a = -1; a <= 1; ++a)
          if (a || b) s += blurred(std::clamp(i + a, 0, 40), std::clamp(j + b, 0, 40));
      const double log = s / 8.0 / (0.025 * 0.025);
      EXPECT_NEAR(score(i, j), std::min(1.0, std::exp(-cfg.alpha_c * log)), 1e-6);
    }
  // Interior: the 8-neighbour kernel gives 3/8 of the continuous Laplacian 2k.
  const auto log = LaplacianOfGaussian(map, cfg.sigma_log);
  EXPECT_NEAR(log(20, 20), 0.375 * 2 * k, 1e-9);
}

TEST(S3Inclination, RampMatchesCosSquared) {
  S3Config cfg;
  for (double deg = 0; deg <= 45; deg += 5) {
    const double theta = deg * std::numbers::pi / 180;
    const auto c = InclinationCriterion(Ramp(theta), cfg);
    const double expected = std::pow(std::cos(theta), 2);
    EXPECT_NEAR(c(20, 20), expected, 0.02 * expected) << deg;
    EXPECT_NEAR(c(0, 0), expected, 0.02 * expected) << deg;
  }
  const auto c33 = InclinationCriterion(Ramp(33 * std::numbers::pi / 180), cfg);
  EXPECT_NEAR(c33(20, 20), 0.70, 0.01);
}

TEST(S3Inclination, MatchesDirectWindowPca) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0, 0.02);
  auto map = ElevationMap::Constant({0.3, -0.2}, 0.025, 23, 17);
  for (int k = 0; k < map.heights.size(); ++k) map.heights(k) = 0.4 + n(rng);
  S3Config cfg;
  const auto c = InclinationCriterion(map, cfg);
  const int r = cfg.inc_kernel / 2;
  for (int j = 0; j < map.height(); ++j) {
    for (int i = 0; i < map.width(); ++i) {
      std::vector<Eigen::Vector3d> pts;
      for (int b = std::max(j - r, 0); b <= std::min(j + r, map.height() - 1); ++b)
        for (int a = std::max(i - r, 0); a <= std::min(i + r, map.width() - 1); ++a)
          pts.emplace_back(map.CellCenter(a, b).x(), map.CellCenter(a, b).y(), map.heights(a, b));
      Eigen::Vector3d mean = Eigen::Vector3d::Zero();
      for (const auto& p : pts) mean += p / pts.size();
      Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
      for (const auto& p : pts) cov += (p - mean) * (p - mean).transpose() / pts.size();
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
      const double nz = eig.eigenvectors()(2, 0);
      EXPECT_NEAR(c(i, j), nz * nz, 1e-9) << i << "," << j;
    }
  }
}

TEST(S3Inclination, DegenerateWindowScoresZero) {
  const auto map = ElevationMap::Constant({0, 0}, 0.025, 1, 12);
  S3Config cfg;
  EXPECT_TRUE((InclinationCriterion(map, cfg) == 0.0).all());
}

TEST(S3Fuse, Examples) {
  S3Config cfg;
  const HeightGrid ones = HeightGrid::Ones(3, 3);
  const MaskGrid none = MaskGrid::Constant(3, 3, false);
  const MaskGrid all = MaskGrid::Constant(3, 3, true);
  EXPECT_TRUE((Fuse({ones, ones}, &none, cfg) == 1.0).all());
  EXPECT_TRUE((Fuse({ones, HeightGrid::Zero(3, 3)}, &all, cfg) == 0.4).all());
  const auto s = Fuse({HeightGrid::Constant(3, 3, 0.5), HeightGrid::Constant(3, 3, 0.9)}, &all, cfg);
  EXPECT_NEAR(s(1, 1), std::sqrt(0.45) + 0.4, 1e-12);
  EXPECT_NEAR(s(1, 1), 1.0708, 1e-4);
  EXPECT_THROW(Fuse({ones, HeightGrid::Ones(2, 3)}, nullptr, cfg), ParameterError);
}

TEST(S3Fuse, HysteresisMonotone) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    HeightGrid a(10, 10), b(10, 10);
    for (int k = 0; k < 100; ++k) {
      a(k) = u(rng);
      b(k) = u(rng);
    }
    const MaskGrid prev = RandomMask(rng, 10, 10, 0.5);
    S3Config lo, hi;
    lo.k_hyst = u(rng);
    hi.k_hyst = lo.k_hyst + u(rng);
    const MaskGrid s_lo = Fuse({a, b}, &prev, lo) > lo.k_safe;
    const MaskGrid s_hi = Fuse({a, b}, &prev, hi) > hi.k_safe;
    EXPECT_FALSE((s_lo && !s_hi).any());
  }
}

TEST(S3Morphology, MatchesReferenceOracle) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    const MaskGrid m = RandomMask(rng, 16, 16, trial % 2 ? 0.8 : 0.4);
    for (int r : {1, 2, 4}) {
      EXPECT_TRUE((Erode(m, r) == RefMorph(m, r, true)).all());
      EXPECT_TRUE((Dilate(m, r) == RefMorph(m, r, false)).all());
    }
    EXPECT_TRUE((Close(m) == RefMorph(RefMorph(m, 1, false), 1, true)).all());
    EXPECT_TRUE((Open(m) == RefMorph(RefMorph(m, 1, true), 1, false)).all());
    S3Config cfg;
    const MaskGrid expected =
        RefMorph(RefMorph(RefMorph(RefMorph(RefMorph(m, 4, true), 1, false), 1, true), 1, true), 1, false);
    EXPECT_TRUE((Clean(m, cfg) == expected).all());
  }
}

TEST(S3Morphology, Examples) {
  S3Config cfg;
  const MaskGrid all = MaskGrid::Constant(16, 16, true);
  const MaskGrid cleaned = Clean(all, cfg);
  EXPECT_EQ(cleaned.count(), 8 * 8);
  EXPECT_TRUE(cleaned.block(4, 4, 8, 8).all());
  MaskGrid dot = MaskGrid::Constant(16, 16, false);
  dot(8, 8) = true;
  EXPECT_FALSE(Open(dot).any());
  MaskGrid hole = all;
  hole(8, 8) = false;
  EXPECT_TRUE(Close(hole).block(1, 1, 14, 14).all());
}

TEST(S3Segment, FlatAllSafeMinusBorder) {
  const auto map = ElevationMap::Constant({0, 0}, 0.025, 50, 40);
  S3Config cfg;
  const auto seg = Segment(map, nullptr, cfg);
  EXPECT_EQ(seg.mask.safe.count(), (50 - 8) * (40 - 8));
  SteppabilityMask prev{MaskGrid::Constant(50, 40, true), 3};
  const auto seg2 = Segment(map, &prev, cfg);
  EXPECT_TRUE((seg2.mask.safe == seg.mask.safe).all());
  EXPECT_EQ(seg2.mask.frame, 4);
}

TEST(S3Segment, StepBandWiderBelowEdge) {
  const auto map = Generate({terrain::Stairs{0.16, 5.0, 1}, 0}, MapWindow{{0, 0}, {2.5, 2.5}, 0.025});
  const auto seg = Segment(map, nullptr, S3Config{});
  // Edge between columns 49 (low) and 50 (high); measure on the middle row.
  const int j = 50;
  int below = 0, above = 0;
  for (int i = 49; i >= 0 && !seg.mask.safe(i, j); --i) ++below;
  for (int i = 50; i < 100 && !seg.mask.safe(i, j); ++i) ++above;
  EXPECT_TRUE(seg.mask.safe(20, j));
  EXPECT_TRUE(seg.mask.safe(80, j));
  EXPECT_GT(below, above);
}

TEST(S3Segment, OneComponentPerStone) {
  const terrain::TerrainSpec spec{terrain::SteppingStones{0.45, false}, 3};
  const auto raw = Generate(spec, MapWindow{{1.8, 0.0}, {4.0, 2.5}, 0.025});
  const auto map = terrain::InpaintLnv(raw);
  const auto seg = Segment(map, nullptr, S3Config{}, &raw.valid);
  Eigen::ArrayXXi label;
  const int n = LabelComponents(seg.mask.safe, label);
  EXPECT_EQ(n, 15);
  terrain::TerrainModel model(spec);
  std::vector<int> stone_of(n, -1);
  for (int j = 0; j < map.height(); ++j)
    for (int i = 0; i < map.width(); ++i) {
      if (label(i, j) < 0) continue;
      const Eigen::Vector2d xy = map.CellCenter(i, j);
      int stone = -1;
      for (size_t s = 0; s < model.blocks().size(); ++s)
        if (model.blocks()[s].footprint.contains(xy)) stone = static_cast<int>(s);
      ASSERT_GE(stone, 0);
      if (stone_of[label(i, j)] < 0) stone_of[label(i, j)] = stone;
      EXPECT_EQ(stone_of[label(i, j)], stone);
    }
}

TEST(S3Segment, TranslationEquivariant) {
  const auto big = Generate({terrain::Sinusoid{0.12, 0.6}, 0}, MapWindow{{0, 0}, {2.0, 1.0}, 0.025});
  auto shifted_bumps = big;
  for (int j = 0; j < big.height(); ++j)
    for (int i = 0; i < big.width(); ++i)
      shifted_bumps.heights(i, j) += 0.05 * std::sin(0.4 * j) * std::cos(0.3 * i);
  const int s = 7;
  ElevationMap a = shifted_bumps, b = shifted_bumps;
  a.heights = shifted_bumps.heights.block(0, 0, 60, 40);
  a.valid = shifted_bumps.valid.block(0, 0, 60, 40);
  b.heights = shifted_bumps.heights.block(s, 0, 60, 40);
  b.valid = shifted_bumps.valid.block(s, 0, 60, 40);
  const auto sa = Segment(a, nullptr, S3Config{});
  const auto sb = Segment(b, nullptr, S3Config{});
  const int m = 16;
  EXPECT_TRUE((sa.mask.safe.block(s + m, m, 60 - s - 2 * m, 40 - 2 * m) ==
               sb.mask.safe.block(m, m, 60 - s - 2 * m, 40 - 2 * m)).all());
  EXPECT_TRUE((sa.score.block(s + m, m, 20, 8) - sb.score.block(m, m, 20, 8)).abs().maxCoeff() < 1e-12);
}

TEST(S3Segment, DeterministicAndValidated) {
  auto map = Generate({terrain::Stairs{0.16, 0.3, 3}, 0}, MapWindow{{0.4, 0}, {1.5, 1.5}, 0.025});
  const auto a = Segment(map, nullptr, S3Config{});
  const auto b = Segment(map, nullptr, S3Config{});
  EXPECT_TRUE((a.mask.safe == b.mask.safe).all());
  S3Config bad;
  bad.k_safe = 1.5;
  EXPECT_THROW(Segment(map, nullptr, bad), ParameterError);
  map.valid(3, 3) = false;
  EXPECT_THROW(Segment(map, nullptr, S3Config{}), ParameterError);
}

TEST(S3Iou, Examples) {
  const MaskGrid all = MaskGrid::Constant(20, 20, true);
  MaskGrid a = MaskGrid::Constant(20, 20, false), b = a;
  a.block(0, 0, 10, 10).setConstant(true);
  EXPECT_EQ(MaskIou(a, a, all), 1.0);
  b.block(10, 10, 10, 10).setConstant(true);
  EXPECT_EQ(MaskIou(a, b, all), 0.0);
  MaskGrid c = MaskGrid::Constant(20, 20, false);
  c.block(4, 0, 10, 10).setConstant(true);
  EXPECT_NEAR(MaskIou(a, c, all), 60.0 / 140.0, 1e-12);
  const MaskGrid empty = MaskGrid::Constant(20, 20, false);
  EXPECT_EQ(MaskIou(empty, empty, all), 1.0);
  MaskGrid left = all;
  left.block(10, 0, 10, 20).setConstant(false);
  EXPECT_EQ(MaskIou(a, b, left), 0.0);
  EXPECT_EQ(MaskIou(a, c, left), 60.0 / 100.0);
}

}  // namespace
}  // namespace footstep::s3
