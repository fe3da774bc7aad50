#pragma once

#include <Eigen/Dense>

#include "footstep/foothold.h"

/// Planar polygon helpers shared by decomposition and control.
namespace footstep::geometry {

double Cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b);

/// Positive for counter-clockwise rings.
double SignedArea(const Vertices2d& ring);

double PointSegmentDistance(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                            const Eigen::Vector2d& b);

double DistanceToBoundary(const Vertices2d& ring, const Eigen::Vector2d& p);

/// Even-odd point-in-polygon test.
bool PointInRing(const Vertices2d& ring, const Eigen::Vector2d& p);

/// Andrew's monotone chain; CCW, no collinear points.
Vertices2d ConvexHull(Vertices2d points);

bool IsConvexCcw(const Vertices2d& ring, double tol = 1e-12);

/// Intersection of a convex polygon with {x : a'x <= offset}.
Vertices2d ClipHalfPlane(const Vertices2d& polygon, const Eigen::Vector2d& a,
                         double offset);

/// Drops vertices whose adjacent edges have cross product within tol.
Vertices2d RemoveCollinear(const Vertices2d& ring, double tol = 1e-9);

}  // namespace footstep::geometry
