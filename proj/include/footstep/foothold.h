#pragma once

#include <vector>

#include <Eigen/Dense>

namespace footstep {

using Vertices2d = std::vector<Eigen::Vector2d>;

/// Convex planar foothold: {p : F p_xy <= c, f'p = b}.
///
/// Rows of F and the plane normal f are unit length; f_z > 0. Vertices are
/// kept in counter-clockwise order alongside the half-plane form.
struct FootholdPolygon {
  Eigen::Matrix<double, Eigen::Dynamic, 2> F;
  Eigen::VectorXd c;
  Eigen::Vector3d f{Eigen::Vector3d::UnitZ()};
  double b{0.0};
  int id{0};
  Vertices2d vertices;

  /// Builds the half-plane form from CCW vertices on the plane z = height.
  static FootholdPolygon FromVertices(const Vertices2d& ccw_vertices,
                                      double height = 0.0, int id = 0);
  /// Same, with an explicit plane (f need not be normalized).
  static FootholdPolygon FromVertices(const Vertices2d& ccw_vertices,
                                      const Eigen::Vector3d& f, double b,
                                      int id);

  int num_edges() const { return static_cast<int>(c.size()); }
  bool Contains(const Eigen::Vector2d& p, double tol = 0.0) const;
  /// Euclidean distance from p to the 2D polygon (0 inside).
  double Distance(const Eigen::Vector2d& p) const;
  /// Height of the plane above p.
  double HeightAt(const Eigen::Vector2d& p) const;
  Eigen::AlignedBox2d BoundingBox() const;
  double Area() const;
  /// The same polygon moved by t (2D) and dz (vertical).
  FootholdPolygon Translated(const Eigen::Vector2d& t, double dz = 0.0) const;
};

}  // namespace footstep
