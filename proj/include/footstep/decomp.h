#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "footstep/foothold.h"
#include "footstep/terrain.h"

namespace footstep::decomp {

using terrain::ElevationMap;
using terrain::MaskGrid;

/// Polygon with holes: outer ring counter-clockwise, holes clockwise.
struct Polygon2D {
  Vertices2d outer;
  std::vector<Vertices2d> holes;
};

using PlanarFoothold = FootholdPolygon;

struct DecompConfig {
  double concavity{0.25};
  double min_area{0.05};
  void Validate() const;
};

/// One polygon per 4-connected safe component, traced along cell edges and
/// with collinear vertices merged.
std::vector<Polygon2D> ExtractContours(const MaskGrid& mask,
                                       const ElevationMap& geometry);

/// Cells whose centres lie inside the polygon (and outside its holes).
MaskGrid Rasterize(const Polygon2D& poly, const ElevationMap& geometry);
MaskGrid Rasterize(const std::vector<PlanarFoothold>& footholds,
                   const ElevationMap& geometry);

/// Largest distance from a polygon vertex to the hull edge bridging its
/// pocket; 0 for a convex ring.
double MaxConcavity(const Vertices2d& ring);

/// Splits a polygon with holes into simple rings, each with concavity <= d.
std::vector<Vertices2d> Acd(const Polygon2D& poly, double d);

struct S1Options {
  double epsilon{1e-6};
  double alpha{1.0};
  double beta{0.5};
  int max_iterations{200};
};

struct S1Result {
  Eigen::Vector2d x;
  int iterations{0};
  double theta{0.0};
};

using S1Cost = std::function<double(const Eigen::Vector2d&)>;
using S1Gradient = std::function<Eigen::Vector2d(const Eigen::Vector2d&)>;

/// Minimises f over the unit circle by rotating along the tangential
/// gradient with a backtracking line search. Throws ConvergenceError.
S1Result S1Solve(const S1Cost& f, const S1Gradient& grad, Eigen::Vector2d x0,
                 const S1Options& opts = {},
                 std::vector<Eigen::Vector2d>* iterates = nullptr);

/// Cost of the cut {x : a'(x - v_i) <= 0}: squared violations of the other
/// vertices.
double CutCost(const Vertices2d& V, int i, const Eigen::Vector2d& a);
Eigen::Vector2d CutGradient(const Vertices2d& V, int i, const Eigen::Vector2d& a);

Eigen::Vector2d MakeCut(const Vertices2d& V, int i, const Eigen::Vector2d& a0,
                        const S1Options& opts = {}, int* iterations = nullptr);

struct Cut {
  Eigen::Vector2d a;
  int vertex{0};
};

struct WhittleResult {
  Vertices2d polygon;  // convex, counter-clockwise
  std::vector<Cut> cuts;
};

/// Convex inner approximation of a near-convex ring. Throws
/// DegenerateGeometryError when fewer than 3 vertices or less than
/// `min_area` remain.
WhittleResult Whittle(const Vertices2d& V, double min_area = 0.0);

/// Least-squares plane through the vertices lifted onto the map.
PlanarFoothold FitPlane(const Vertices2d& convex, const ElevationMap& map,
                        int id = 0);

/// Mask to footholds: contours, ACD, area filter, whittling, plane fit.
/// Sorted by area, largest first; ids follow that order.
std::vector<PlanarFoothold> Decompose(const MaskGrid& mask,
                                      const ElevationMap& map,
                                      const DecompConfig& cfg = {});

double CoverageIou(const std::vector<PlanarFoothold>& a,
                   const std::vector<PlanarFoothold>& b,
                   const ElevationMap& geometry, const MaskGrid& overlap);

}  // namespace footstep::decomp
