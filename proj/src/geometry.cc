#include "footstep/geometry.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "footstep/errors.h"

namespace footstep {

using Eigen::Vector2d;

FootholdPolygon FootholdPolygon::FromVertices(const Vertices2d& ccw_vertices,
                                              double height, int id) {
  return FromVertices(ccw_vertices, Eigen::Vector3d::UnitZ(), height, id);
}

FootholdPolygon FootholdPolygon::FromVertices(const Vertices2d& ccw_vertices,
                                              const Eigen::Vector3d& f,
                                              double b, int id) {
  const int n = static_cast<int>(ccw_vertices.size());
  if (n < 3) throw DegenerateGeometryError("foothold needs at least 3 vertices");
  if (f.norm() <= 0 || f.z() <= 0)
    throw DegenerateGeometryError("foothold plane normal must point up");
  FootholdPolygon poly;
  poly.vertices = ccw_vertices;
  poly.F.resize(n, 2);
  poly.c.resize(n);
  for (int i = 0; i < n; ++i) {
    const Vector2d& a = ccw_vertices[i];
    const Vector2d& e = ccw_vertices[(i + 1) % n];
    const Vector2d edge = e - a;
    const double len = edge.norm();
    if (len <= 0) throw DegenerateGeometryError("foothold has repeated vertex");
    const Vector2d normal(edge.y() / len, -edge.x() / len);  // outward for CCW
    poly.F.row(i) = normal.transpose();
    poly.c(i) = normal.dot(a);
  }
  const double fn = f.norm();
  poly.f = f / fn;
  poly.b = b / fn;
  poly.id = id;
  return poly;
}

bool FootholdPolygon::Contains(const Vector2d& p, double tol) const {
  return ((F * p - c).array() <= tol).all();
}

double FootholdPolygon::Distance(const Vector2d& p) const {
  if (Contains(p)) return 0.0;
  return geometry::DistanceToBoundary(vertices, p);
}

double FootholdPolygon::HeightAt(const Vector2d& p) const {
  return (b - f.x() * p.x() - f.y() * p.y()) / f.z();
}

Eigen::AlignedBox2d FootholdPolygon::BoundingBox() const {
  Eigen::AlignedBox2d box;
  for (const auto& v : vertices) box.extend(v);
  return box;
}

double FootholdPolygon::Area() const { return geometry::SignedArea(vertices); }

FootholdPolygon FootholdPolygon::Translated(const Vector2d& t,
                                            double dz) const {
  FootholdPolygon out = *this;
  for (auto& v : out.vertices) v += t;
  out.c += F * t;
  out.b += f.head<2>().dot(t) + f.z() * dz;
  return out;
}

namespace geometry {

double Cross(const Vector2d& a, const Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

double SignedArea(const Vertices2d& ring) {
  double s = 0.0;
  const size_t n = ring.size();
  for (size_t i = 0; i < n; ++i) s += Cross(ring[i], ring[(i + 1) % n]);
  return 0.5 * s;
}

double PointSegmentDistance(const Vector2d& p, const Vector2d& a,
                            const Vector2d& b) {
  const Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (a + t * ab - p).norm();
}

double DistanceToBoundary(const Vertices2d& ring, const Vector2d& p) {
  double best = std::numeric_limits<double>::infinity();
  const size_t n = ring.size();
  for (size_t i = 0; i < n; ++i)
    best = std::min(best, PointSegmentDistance(p, ring[i], ring[(i + 1) % n]));
  return best;
}

bool PointInRing(const Vertices2d& ring, const Vector2d& p) {
  bool inside = false;
  const size_t n = ring.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vector2d& a = ring[i];
    const Vector2d& b = ring[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

Vertices2d ConvexHull(Vertices2d pts) {
  std::sort(pts.begin(), pts.end(), [](const Vector2d& a, const Vector2d& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  Vertices2d hull(2 * pts.size());
  size_t k = 0;
  for (size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && Cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0)
      --k;
    hull[k++] = pts[i];
  }
  for (size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && Cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0)
      --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

bool IsConvexCcw(const Vertices2d& ring, double tol) {
  const size_t n = ring.size();
  if (n < 3) return false;
  for (size_t i = 0; i < n; ++i) {
    const Vector2d e1 = ring[(i + 1) % n] - ring[i];
    const Vector2d e2 = ring[(i + 2) % n] - ring[(i + 1) % n];
    if (Cross(e1, e2) < -tol) return false;
  }
  return SignedArea(ring) > 0;
}

Vertices2d ClipHalfPlane(const Vertices2d& poly, const Vector2d& a,
                         double offset) {
  Vertices2d out;
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Vector2d& p = poly[i];
    const Vector2d& q = poly[(i + 1) % n];
    const double sp = a.dot(p) - offset;
    const double sq = a.dot(q) - offset;
    if (sp <= 0) out.push_back(p);
    if ((sp < 0 && sq > 0) || (sp > 0 && sq < 0)) {
      const double t = sp / (sp - sq);
      out.push_back(p + t * (q - p));
    }
  }
  return out;
}

Vertices2d RemoveCollinear(const Vertices2d& ring, double tol) {
  Vertices2d cur = ring;
  bool changed = true;
  while (changed && cur.size() > 3) {
    changed = false;
    for (size_t i = 0; i < cur.size() && cur.size() > 3; ++i) {
      const size_t n = cur.size();
      const Vector2d& prev = cur[(i + n - 1) % n];
      const Vector2d& next = cur[(i + 1) % n];
      const Vector2d& v = cur[i];
      if ((v - prev).norm() <= tol ||
          std::abs(Cross(v - prev, next - v)) <= tol) {
        cur.erase(cur.begin() + static_cast<long>(i));
        changed = true;
        --i;
      }
    }
  }
  return cur;
}

}  // namespace geometry
}  // namespace footstep
