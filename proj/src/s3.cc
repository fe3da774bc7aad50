#include "footstep/s3.h"

#include <algorithm>
#include <cmath>

#include "footstep/errors.h"

namespace footstep::s3 {

void S3Config::Validate() const {
  if (!(k_safe > 0 && k_safe <= 1)) throw ParameterError("k_safe must be in (0, 1]");
  if (!(k_hyst >= 0)) throw ParameterError("k_hyst must be non-negative");
  if (!(sigma_log >= 0)) throw ParameterError("sigma_log must be non-negative");
  if (!(alpha_c >= 0)) throw ParameterError("alpha_c must be non-negative");
  if (inc_kernel < 3 || inc_kernel % 2 == 0)
    throw ParameterError("inc_kernel must be an odd size of at least 3");
  if (margin_kernel < 0) throw ParameterError("margin_kernel must be non-negative");
}

HeightGrid LaplacianOfGaussian(const ElevationMap& map, double sigma_px) {
  const HeightGrid blurred = terrain::GaussianBlur(map.heights, sigma_px);
  const int W = map.width(), H = map.height();
  const double scale = 1.0 / (8.0 * map.resolution * map.resolution);
  HeightGrid out(W, H);
  for (int j = 0; j < H; ++j) {
    for (int i = 0; i < W; ++i) {
      double s = 0.0;
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di)
          s += blurred(std::clamp(i + di, 0, W - 1), std::clamp(j + dj, 0, H - 1));
      out(i, j) = (s - 9.0 * blurred(i, j)) * scale;
    }
  }
  return out;
}

HeightGrid CurvatureCriterion(const ElevationMap& map, const S3Config& cfg) {
  return (-cfg.alpha_c * LaplacianOfGaussian(map, cfg.sigma_log)).exp().min(1.0);
}

namespace {

// Summed-area table with a zero first row and column.
Eigen::ArrayXXd Integral(const HeightGrid& g) {
  Eigen::ArrayXXd S = Eigen::ArrayXXd::Zero(g.rows() + 1, g.cols() + 1);
  for (int j = 0; j < g.cols(); ++j)
    for (int i = 0; i < g.rows(); ++i)
      S(i + 1, j + 1) = g(i, j) + S(i, j + 1) + S(i + 1, j) - S(i, j);
  return S;
}

double BoxSum(const Eigen::ArrayXXd& S, int a0, int a1, int b0, int b1) {
  return S(a1 + 1, b1 + 1) - S(a0, b1 + 1) - S(a1 + 1, b0) + S(a0, b0);
}

}  // namespace

HeightGrid InclinationCriterion(const ElevationMap& map, const S3Config& cfg) {
  const int W = map.width(), H = map.height();
  const int r = cfg.inc_kernel / 2;
  const double res = map.resolution;
  // Window moments from summed-area tables. Heights are centred on their mean
  // to keep the tables well scaled.
  const HeightGrid z = map.heights - map.heights.mean();
  HeightGrid az(W, H), bz(W, H);
  for (int j = 0; j < H; ++j)
    for (int i = 0; i < W; ++i) {
      az(i, j) = i * z(i, j);
      bz(i, j) = j * z(i, j);
    }
  const Eigen::ArrayXXd Sz = Integral(z), Szz = Integral(z * z), Saz = Integral(az),
                        Sbz = Integral(bz);
  HeightGrid out(W, H);
  for (int j = 0; j < H; ++j) {
    const int b0 = std::max(j - r, 0), b1 = std::min(j + r, H - 1);
    const int nb = b1 - b0 + 1;
    double sb = 0, sbb = 0;  // offsets from the centre row
    for (int b = b0; b <= b1; ++b) {
      sb += b - j;
      sbb += double(b - j) * (b - j);
    }
    for (int i = 0; i < W; ++i) {
      const int a0 = std::max(i - r, 0), a1 = std::min(i + r, W - 1);
      const int na = a1 - a0 + 1;
      double sa = 0, saa = 0;
      for (int a = a0; a <= a1; ++a) {
        sa += a - i;
        saa += double(a - i) * (a - i);
      }
      const double n = double(na) * nb;
      const double szv = BoxSum(Sz, a0, a1, b0, b1);
      const double mx = sa * nb / n, my = sb * na / n, mz = szv / n;
      Eigen::Matrix3d cov;
      cov(0, 0) = res * res * (saa * nb / n - mx * mx);
      cov(1, 1) = res * res * (sbb * na / n - my * my);
      cov(0, 1) = res * res * (sa * sb / n - mx * my);
      cov(2, 2) = std::max(BoxSum(Szz, a0, a1, b0, b1) / n - mz * mz, 0.0);
      cov(0, 2) = res * ((BoxSum(Saz, a0, a1, b0, b1) - i * szv) / n - mx * mz);
      cov(1, 2) = res * ((BoxSum(Sbz, a0, a1, b0, b1) - j * szv) / n - my * mz);
      cov(1, 0) = cov(0, 1);
      cov(2, 0) = cov(0, 2);
      cov(2, 1) = cov(1, 2);
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig;
      eig.computeDirect(cov);
      const Eigen::Vector3d ev = eig.eigenvalues();
      if (!(ev(1) > 1e-12 * std::max(ev(2), 1e-300))) {
        out(i, j) = 0.0;
        continue;
      }
      const double nz = eig.eigenvectors()(2, 0);
      out(i, j) = std::min(nz * nz, 1.0);
    }
  }
  return out;
}

HeightGrid Fuse(const std::vector<HeightGrid>& criteria, const MaskGrid* prev,
                const S3Config& cfg) {
  if (criteria.empty()) throw ParameterError("fuse needs at least one criterion");
  HeightGrid prod = HeightGrid::Ones(criteria[0].rows(), criteria[0].cols());
  for (const auto& c : criteria) {
    if (c.rows() != prod.rows() || c.cols() != prod.cols())
      throw ParameterError("criterion images differ in size");
    prod *= c;
  }
  HeightGrid score = prod.pow(1.0 / static_cast<double>(criteria.size()));
  if (prev) {
    if (prev->rows() != score.rows() || prev->cols() != score.cols())
      throw ParameterError("previous mask differs in size");
    score += cfg.k_hyst * prev->cast<double>();
  }
  return score;
}

namespace {

// One-dimensional pass of a square structuring element along `axis`.
MaskGrid Pass(const MaskGrid& in, int r, int axis, bool erode) {
  const int W = static_cast<int>(in.rows()), H = static_cast<int>(in.cols());
  MaskGrid out(W, H);
  const int len = axis == 0 ? W : H;
  for (int j = 0; j < H; ++j) {
    for (int i = 0; i < W; ++i) {
      const int c = axis == 0 ? i : j;
      bool acc = erode;
      for (int k = c - r; k <= c + r; ++k) {
        const bool v = (k >= 0 && k < len) ? (axis == 0 ? in(k, j) : in(i, k)) : false;
        if (erode && !v) { acc = false; break; }
        if (!erode && v) { acc = true; break; }
      }
      out(i, j) = acc;
    }
  }
  return out;
}

}  // namespace

MaskGrid Erode(const MaskGrid& mask, int r) {
  if (r <= 0) return mask;
  return Pass(Pass(mask, r, 0, true), r, 1, true);
}

MaskGrid Dilate(const MaskGrid& mask, int r) {
  if (r <= 0) return mask;
  return Pass(Pass(mask, r, 0, false), r, 1, false);
}

MaskGrid Close(const MaskGrid& mask, int r) { return Erode(Dilate(mask, r), r); }
MaskGrid Open(const MaskGrid& mask, int r) { return Dilate(Erode(mask, r), r); }

MaskGrid Clean(const MaskGrid& mask, const S3Config& cfg) {
  return Open(Close(Erode(mask, cfg.margin_kernel)));
}

Segmentation Segment(const ElevationMap& inpainted, const SteppabilityMask* prev,
                     const S3Config& cfg, const MaskGrid* observed) {
  cfg.Validate();
  if (!inpainted.valid.all()) throw ParameterError("segmentation needs an inpainted map");
  Segmentation seg;
  seg.curvature = CurvatureCriterion(inpainted, cfg);
  seg.inclination = InclinationCriterion(inpainted, cfg);
  seg.score = Fuse({seg.curvature, seg.inclination}, prev ? &prev->safe : nullptr, cfg);
  MaskGrid raw = seg.score > cfg.k_safe;
  if (observed) {
    if (observed->rows() != raw.rows() || observed->cols() != raw.cols())
      throw ParameterError("observation mask differs in size");
    raw = raw && *observed;
  }
  seg.mask.safe = Clean(raw, cfg);
  seg.mask.frame = prev ? prev->frame + 1 : 0;
  return seg;
}

double MaskIou(const MaskGrid& a, const MaskGrid& b, const MaskGrid& overlap) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != overlap.rows() ||
      a.cols() != overlap.cols())
    throw ParameterError("masks differ in size");
  const long inter = (a && b && overlap).count();
  const long uni = ((a || b) && overlap).count();
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace footstep::s3
