#pragma once

#include <vector>

#include "footstep/terrain.h"

namespace footstep::s3 {

using terrain::ElevationMap;
using terrain::HeightGrid;
using terrain::MaskGrid;

struct S3Config {
  double k_hyst{0.4};
  double k_safe{0.7};
  double sigma_log{2.0};   // px
  double alpha_c{5.0};
  int inc_kernel{5};       // px, odd
  int margin_kernel{4};    // px, erosion radius
  void Validate() const;
};

struct SteppabilityMask {
  MaskGrid safe;
  int frame{0};
};

/// min(1, exp(-alpha_c * LoG)), LoG in 1/m.
HeightGrid CurvatureCriterion(const ElevationMap& map, const S3Config& cfg);
/// Squared z component of the local PCA normal; 0 where the window is degenerate.
HeightGrid InclinationCriterion(const ElevationMap& map, const S3Config& cfg);
/// Blurred 3x3 Laplacian (mean of neighbours minus centre) divided by res^2.
HeightGrid LaplacianOfGaussian(const ElevationMap& map, double sigma_px);

/// Geometric mean of the criteria plus k_hyst on cells safe in `prev`.
HeightGrid Fuse(const std::vector<HeightGrid>& criteria, const MaskGrid* prev,
                const S3Config& cfg);

/// Square structuring element of half-width r. Cells outside the grid count
/// as false for erosion and contribute nothing to dilation.
MaskGrid Erode(const MaskGrid& mask, int r);
MaskGrid Dilate(const MaskGrid& mask, int r);
MaskGrid Close(const MaskGrid& mask, int r = 1);
MaskGrid Open(const MaskGrid& mask, int r = 1);
/// open(close(erode(mask, margin))).
MaskGrid Clean(const MaskGrid& mask, const S3Config& cfg);

struct Segmentation {
  SteppabilityMask mask;
  HeightGrid curvature;
  HeightGrid inclination;
  HeightGrid score;
};

/// Full per-frame segmentation of an inpainted map. Cells outside `observed`
/// (when given) are forced unsafe before cleaning, so voids that inpainting
/// made flat still receive a margin.
Segmentation Segment(const ElevationMap& inpainted, const SteppabilityMask* prev,
                     const S3Config& cfg, const MaskGrid* observed = nullptr);

/// |a & b & overlap| / |(a | b) & overlap|, 1 when the union is empty.
double MaskIou(const MaskGrid& a, const MaskGrid& b, const MaskGrid& overlap);

}  // namespace footstep::s3
