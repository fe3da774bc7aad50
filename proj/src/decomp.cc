#include "footstep/decomp.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "footstep/errors.h"
#include "footstep/geometry.h"
#include "footstep/s3.h"

namespace footstep::decomp {

using Eigen::Vector2d;
using geometry::Cross;
using geometry::SignedArea;

void DecompConfig::Validate() const {
  if (!(concavity > 0)) throw ParameterError("ACD concavity limit must be positive");
  if (!(min_area >= 0)) throw ParameterError("minimum area must be non-negative");
}

// ---------------------------------------------------------------------------
// Contours

namespace {

Eigen::ArrayXXi LabelComponents(const MaskGrid& mask, int* count) {
  const int W = static_cast<int>(mask.rows()), H = static_cast<int>(mask.cols());
  Eigen::ArrayXXi label = Eigen::ArrayXXi::Constant(W, H, -1);
  int n = 0;
  std::vector<Eigen::Vector2i> stack;
  for (int j = 0; j < H; ++j) {
    for (int i = 0; i < W; ++i) {
      if (!mask(i, j) || label(i, j) >= 0) continue;
      label(i, j) = n;
      stack.assign(1, {i, j});
      while (!stack.empty()) {
        const Eigen::Vector2i c = stack.back();
        stack.pop_back();
        const std::array<Eigen::Vector2i, 4> nbrs{{{c.x() + 1, c.y()},
                                                   {c.x() - 1, c.y()},
                                                   {c.x(), c.y() + 1},
                                                   {c.x(), c.y() - 1}}};
        for (const auto& q : nbrs) {
          if (q.x() < 0 || q.y() < 0 || q.x() >= W || q.y() >= H) continue;
          if (mask(q.x(), q.y()) && label(q.x(), q.y()) < 0) {
            label(q.x(), q.y()) = n;
            stack.push_back(q);
          }
        }
      }
      ++n;
    }
  }
  *count = n;
  return label;
}

// Directed cell-boundary edge between lattice corners, component on the left.
struct Crack {
  Eigen::Vector2i from;
  int dir;  // 0 +x, 1 +y, 2 -x, 3 -y
};

const std::array<Eigen::Vector2i, 4> kStep{{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}};

std::vector<std::vector<Eigen::Vector2i>> TraceLoops(const std::vector<Crack>& cracks,
                                                     int stride) {
  auto key = [stride](const Eigen::Vector2i& c) { return static_cast<long>(c.x()) * stride + c.y(); };
  std::unordered_map<long, std::array<int, 4>> out;
  for (size_t e = 0; e < cracks.size(); ++e) {
    auto [it, inserted] = out.try_emplace(key(cracks[e].from), std::array<int, 4>{-1, -1, -1, -1});
    it->second[cracks[e].dir] = static_cast<int>(e);
  }
  std::vector<char> used(cracks.size(), 0);
  std::vector<std::vector<Eigen::Vector2i>> loops;
  for (size_t start = 0; start < cracks.size(); ++start) {
    if (used[start]) continue;
    std::vector<Eigen::Vector2i> loop;
    int e = static_cast<int>(start);
    while (!used[e]) {
      used[e] = 1;
      loop.push_back(cracks[e].from);
      const Eigen::Vector2i to = cracks[e].from + kStep[cracks[e].dir];
      const auto& options = out.at(key(to));
      // Prefer the tightest left turn: diagonal cells stay separate.
      const int d = cracks[e].dir;
      int next = -1;
      for (int turn : {1, 0, 3}) {
        const int cand = options[(d + turn) % 4];
        if (cand >= 0) {
          next = cand;
          break;
        }
      }
      e = next;
    }
    loops.push_back(std::move(loop));
  }
  return loops;
}

}  // namespace

std::vector<Polygon2D> ExtractContours(const MaskGrid& mask,
                                       const ElevationMap& geometry) {
  const int W = static_cast<int>(mask.rows()), H = static_cast<int>(mask.cols());
  if (W != geometry.width() || H != geometry.height())
    throw ParameterError("mask does not match map geometry");
  int count = 0;
  const Eigen::ArrayXXi label = LabelComponents(mask, &count);
  std::vector<std::vector<Crack>> cracks(count);
  auto other = [&](int i, int j, int k) {
    return i < 0 || j < 0 || i >= W || j >= H || label(i, j) != k;
  };
  for (int j = 0; j < H; ++j) {
    for (int i = 0; i < W; ++i) {
      const int k = label(i, j);
      if (k < 0) continue;
      if (other(i, j - 1, k)) cracks[k].push_back({{i, j}, 0});
      if (other(i + 1, j, k)) cracks[k].push_back({{i + 1, j}, 1});
      if (other(i, j + 1, k)) cracks[k].push_back({{i + 1, j + 1}, 2});
      if (other(i - 1, j, k)) cracks[k].push_back({{i, j + 1}, 3});
    }
  }
  const double res = geometry.resolution;
  auto corner = [&](const Eigen::Vector2i& c) {
    return Vector2d(geometry.origin + res * (c.cast<double>() - Vector2d::Constant(0.5)));
  };
  std::vector<Polygon2D> polys;
  for (int k = 0; k < count; ++k) {
    Polygon2D poly;
    for (const auto& loop : TraceLoops(cracks[k], H + 2)) {
      Vertices2d ring;
      ring.reserve(loop.size());
      for (const auto& c : loop) ring.push_back(corner(c));
      ring = geometry::RemoveCollinear(ring, 1e-9);
      if (SignedArea(ring) > 0)
        poly.outer = std::move(ring);
      else
        poly.holes.push_back(std::move(ring));
    }
    polys.push_back(std::move(poly));
  }
  return polys;
}

MaskGrid Rasterize(const Polygon2D& poly, const ElevationMap& geometry) {
  MaskGrid out = MaskGrid::Constant(geometry.width(), geometry.height(), false);
  for (int j = 0; j < geometry.height(); ++j)
    for (int i = 0; i < geometry.width(); ++i) {
      const Vector2d p = geometry.CellCenter(i, j);
      if (!geometry::PointInRing(poly.outer, p)) continue;
      bool in_hole = false;
      for (const auto& h : poly.holes) in_hole = in_hole || geometry::PointInRing(h, p);
      out(i, j) = !in_hole;
    }
  return out;
}

MaskGrid Rasterize(const std::vector<PlanarFoothold>& footholds,
                   const ElevationMap& geometry) {
  MaskGrid out = MaskGrid::Constant(geometry.width(), geometry.height(), false);
  for (int j = 0; j < geometry.height(); ++j)
    for (int i = 0; i < geometry.width(); ++i) {
      const Vector2d p = geometry.CellCenter(i, j);
      for (const auto& f : footholds)
        if (f.Contains(p, 1e-9)) {
          out(i, j) = true;
          break;
        }
    }
  return out;
}

// ---------------------------------------------------------------------------
// Approximate convex decomposition

namespace {

struct Notch {
  int index{-1};
  double depth{0.0};
  Vector2d inward{0.0, 0.0};
};

// Hull vertex indices of the ring, in ring order.
std::vector<int> HullIndices(const Vertices2d& ring) {
  const int n = static_cast<int>(ring.size());
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    const Vector2d &p = ring[a], &q = ring[b];
    return p.x() < q.x() || (p.x() == q.x() && (p.y() < q.y() || (p.y() == q.y() && a < b)));
  });
  std::vector<int> hull(2 * n);
  int k = 0;
  for (int i = 0; i < n; ++i) {
    while (k >= 2 && Cross(ring[hull[k - 1]] - ring[hull[k - 2]], ring[idx[i]] - ring[hull[k - 2]]) <= 0) --k;
    hull[k++] = idx[i];
  }
  for (int i = n - 2, t = k + 1; i >= 0; --i) {
    while (k >= t && Cross(ring[hull[k - 1]] - ring[hull[k - 2]], ring[idx[i]] - ring[hull[k - 2]]) <= 0) --k;
    hull[k++] = idx[i];
  }
  hull.resize(std::max(k - 1, 0));
  std::sort(hull.begin(), hull.end());
  return hull;
}

Notch DeepestNotch(const Vertices2d& ring) {
  Notch best;
  const int n = static_cast<int>(ring.size());
  if (n < 4) return best;
  const std::vector<int> hull = HullIndices(ring);
  const int h = static_cast<int>(hull.size());
  for (int k = 0; k < h; ++k) {
    const int a = hull[k], b = hull[(k + 1) % h];
    const Vector2d p = ring[a], e = ring[b] - ring[a];
    const double len = e.norm();
    if (len <= 0) continue;
    for (int i = (a + 1) % n; i != b; i = (i + 1) % n) {
      const double depth = Cross(e, ring[i] - p) / len;
      if (depth > best.depth || (depth == best.depth && best.index >= 0 && i < best.index)) {
        best.index = i;
        best.depth = depth;
        best.inward = Vector2d(-e.y(), e.x()) / len;
      }
    }
  }
  return best;
}

Vertices2d CyclicRange(const Vertices2d& ring, int from, int to) {
  const int n = static_cast<int>(ring.size());
  Vertices2d out;
  for (int i = from;; i = (i + 1) % n) {
    out.push_back(ring[i]);
    if (i == to) break;
  }
  return out;
}

bool ValidPiece(const Vertices2d& ring) {
  return ring.size() >= 3 && SignedArea(ring) > 1e-12;
}

// Splits the ring along a ray from vertex i; returns false when the cut
// would not produce two proper pieces.
bool SplitAlongRay(const Vertices2d& ring, int i, const Vector2d& dir,
                   Vertices2d* a, Vertices2d* b) {
  const int n = static_cast<int>(ring.size());
  const Vector2d o = ring[i];
  double best_t = std::numeric_limits<double>::infinity();
  int best_k = -1;
  double best_s = 0.0;
  for (int k = 0; k < n; ++k) {
    const int k1 = (k + 1) % n;
    if (k == i || k1 == i) continue;
    const Vector2d e = ring[k1] - ring[k];
    const double denom = Cross(dir, e);
    if (std::abs(denom) < 1e-15) continue;
    const double t = Cross(ring[k] - o, e) / denom;
    const double s = Cross(ring[k] - o, dir) / denom;
    if (t > 1e-12 && s >= -1e-12 && s <= 1 + 1e-12 && t < best_t) {
      best_t = t;
      best_k = k;
      best_s = s;
    }
  }
  if (best_k < 0) return false;
  const int k1 = (best_k + 1) % n;
  const double snap = 1e-9;
  if (best_s <= snap || best_s >= 1 - snap) {
    const int v = best_s <= snap ? best_k : k1;
    *a = CyclicRange(ring, i, v);
    *b = CyclicRange(ring, v, i);
  } else {
    const Vector2d q = ring[best_k] + best_s * (ring[k1] - ring[best_k]);
    *a = CyclicRange(ring, i, best_k);
    a->push_back(q);
    *b = CyclicRange(ring, k1, i);
    b->insert(b->begin(), q);
  }
  *a = geometry::RemoveCollinear(*a, 1e-9);
  *b = geometry::RemoveCollinear(*b, 1e-9);
  return ValidPiece(*a) && ValidPiece(*b);
}

void AcdSimple(const Vertices2d& ring, double d, int depth, std::vector<Vertices2d>* out) {
  const Notch notch = DeepestNotch(ring);
  Vertices2d a, b;
  if (notch.index < 0 || notch.depth <= d || depth > 200 ||
      !SplitAlongRay(ring, notch.index, notch.inward, &a, &b)) {
    out->push_back(ring);
    return;
  }
  AcdSimple(a, d, depth + 1, out);
  AcdSimple(b, d, depth + 1, out);
}

// True when segments pq and rs share any point.
bool SegmentsTouch(const Vector2d& p, const Vector2d& q, const Vector2d& r, const Vector2d& s) {
  auto orient = [](const Vector2d& a, const Vector2d& b, const Vector2d& c) {
    const double v = Cross(b - a, c - a);
    return (v > 1e-12) - (v < -1e-12);
  };
  auto on_segment = [](const Vector2d& a, const Vector2d& b, const Vector2d& c) {
    return std::min(a.x(), b.x()) - 1e-12 <= c.x() && c.x() <= std::max(a.x(), b.x()) + 1e-12 &&
           std::min(a.y(), b.y()) - 1e-12 <= c.y() && c.y() <= std::max(a.y(), b.y()) + 1e-12;
  };
  const int o1 = orient(p, q, r), o2 = orient(p, q, s), o3 = orient(r, s, p), o4 = orient(r, s, q);
  if (o1 != o2 && o3 != o4 && o1 && o2 && o3 && o4) return true;
  if (!o1 && on_segment(p, q, r)) return true;
  if (!o2 && on_segment(p, q, s)) return true;
  if (!o3 && on_segment(r, s, p)) return true;
  if (!o4 && on_segment(r, s, q)) return true;
  return false;
}

struct Segment2 {
  Vector2d a, b;
};

bool Visible(const Vector2d& h, const Vector2d& o, const Polygon2D& poly,
             const std::vector<Segment2>& extra) {
  auto blocked = [&](const Vector2d& a, const Vector2d& b) {
    if (a == h || a == o || b == h || b == o) return false;
    return SegmentsTouch(h, o, a, b);
  };
  auto ring_blocks = [&](const Vertices2d& ring) {
    for (size_t k = 0; k < ring.size(); ++k)
      if (blocked(ring[k], ring[(k + 1) % ring.size()])) return true;
    return false;
  };
  if (ring_blocks(poly.outer)) return false;
  for (const auto& hole : poly.holes)
    if (ring_blocks(hole)) return false;
  for (const auto& s : extra)
    if (SegmentsTouch(h, o, s.a, s.b) && !(s.a == o || s.b == o || s.a == h || s.b == h)) return false;
  const Vector2d mid = 0.5 * (h + o);
  if (!geometry::PointInRing(poly.outer, mid)) return (h - o).norm() == 0;
  for (const auto& hole : poly.holes)
    if (geometry::PointInRing(hole, mid)) return false;
  return true;
}

int NearestVisible(const Vector2d& h, const Polygon2D& poly,
                   const std::vector<Segment2>& extra, int exclude) {
  std::vector<int> order(poly.outer.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return (poly.outer[a] - h).squaredNorm() < (poly.outer[b] - h).squaredNorm();
  });
  for (int o : order)
    if (o != exclude && Visible(h, poly.outer[o], poly, extra)) return o;
  return -1;
}

// Resolves holes by two bridges each; returns false if a hole cannot be
// bridged, in which case the polygon is dropped.
bool SplitHoles(const Polygon2D& poly, std::vector<Vertices2d>* out, int depth = 0) {
  if (poly.holes.empty()) {
    out->push_back(poly.outer);
    return true;
  }
  if (depth > 64) return false;
  const Vertices2d& O = poly.outer;
  const Vertices2d& H = poly.holes.front();
  const Vertices2d hull = geometry::ConvexHull(O);
  int p = 0;
  double deepest = -1;
  for (size_t i = 0; i < H.size(); ++i) {
    const double dist = geometry::DistanceToBoundary(hull, H[i]);
    if (dist > deepest) {
      deepest = dist;
      p = static_cast<int>(i);
    }
  }
  const int a = NearestVisible(H[p], poly, {}, -1);
  if (a < 0) return false;
  std::vector<int> second(H.size());
  std::iota(second.begin(), second.end(), 0);
  std::stable_sort(second.begin(), second.end(), [&](int x, int y) {
    return (H[x] - H[p]).squaredNorm() > (H[y] - H[p]).squaredNorm();
  });
  const std::vector<Segment2> first{{H[p], O[a]}};
  for (int q : second) {
    if (q == p) continue;
    int b = NearestVisible(H[q], poly, first, a);
    if (b < 0) continue;
    Vertices2d piece1 = CyclicRange(O, a, b);
    for (const auto& v : CyclicRange(H, q, p)) piece1.push_back(v);
    Vertices2d piece2 = CyclicRange(O, b, a);
    for (const auto& v : CyclicRange(H, p, q)) piece2.push_back(v);
    piece1 = geometry::RemoveCollinear(piece1, 1e-9);
    piece2 = geometry::RemoveCollinear(piece2, 1e-9);
    if (!ValidPiece(piece1) || !ValidPiece(piece2)) continue;
    Polygon2D sub1{piece1, {}}, sub2{piece2, {}};
    for (size_t k = 1; k < poly.holes.size(); ++k) {
      const Vertices2d& other = poly.holes[k];
      (geometry::PointInRing(piece1, other.front()) ? sub1 : sub2).holes.push_back(other);
    }
    std::vector<Vertices2d> result;
    if (SplitHoles(sub1, &result, depth + 1) && SplitHoles(sub2, &result, depth + 1)) {
      out->insert(out->end(), result.begin(), result.end());
      return true;
    }
  }
  return false;
}

}  // namespace

double MaxConcavity(const Vertices2d& ring) { return DeepestNotch(ring).depth; }

std::vector<Vertices2d> Acd(const Polygon2D& poly, double d) {
  if (!(d > 0)) throw ParameterError("ACD concavity limit must be positive");
  std::vector<Vertices2d> out;
  if (poly.outer.size() < 3) return out;
  std::vector<Vertices2d> simple;
  if (!SplitHoles(poly, &simple)) return out;
  for (const auto& ring : simple)
    if (ring.size() >= 3) AcdSimple(ring, d, 0, &out);
  return out;
}

// ---------------------------------------------------------------------------
// Whittling

S1Result S1Solve(const S1Cost& f, const S1Gradient& grad, Vector2d x0,
                 const S1Options& opts, std::vector<Vector2d>* iterates) {
  if (std::abs(x0.norm() - 1.0) > 1e-9) throw ParameterError("s1_solve needs a unit initial guess");
  if (!(opts.alpha > 0) || !(opts.beta > 0 && opts.beta < 1))
    throw ParameterError("s1_solve line-search parameters out of range");
  auto rotate = [](double angle, const Vector2d& x) {
    const double c = std::cos(angle), s = std::sin(angle);
    return Vector2d(c * x.x() - s * x.y(), s * x.x() + c * x.y());
  };
  Vector2d x = x0;
  double theta = 0.0;
  for (int it = 0; it < opts.max_iterations; ++it) {
    if (iterates) iterates->push_back(x);
    const Vector2d g = grad(x);
    theta = Cross(g - x * g.dot(x), x);
    if (std::abs(theta) <= opts.epsilon) return {x, it, theta};
    const double fx = f(x);
    double t = opts.alpha / std::abs(theta);
    Vector2d next = rotate(theta * t, x);
    auto tangential = [&](const Vector2d& y) {
      const Vector2d gy = grad(y);
      return std::abs(Cross(gy - y * gy.dot(y), y));
    };
    // Near the optimum the cost is flat to machine precision; a tie only
    // counts as progress when the tangential gradient shrinks.
    auto rejected = [&](const Vector2d& y) {
      const double fy = f(y);
      return fy > fx || (fy == fx && tangential(y) >= std::abs(theta));
    };
    int backtracks = 0;
    while (rejected(next) && backtracks < 100) {
      t *= opts.beta;
      next = rotate(theta * t, x);
      ++backtracks;
    }
    if (rejected(next)) break;
    x = next.normalized();
  }
  std::ostringstream msg;
  msg << "s1_solve did not converge: x = (" << x.x() << ", " << x.y()
      << "), theta = " << theta << ", f = " << f(x);
  throw ConvergenceError(msg.str());
}

double CutCost(const Vertices2d& V, int i, const Vector2d& a) {
  double cost = 0.0;
  for (int j = 0; j < static_cast<int>(V.size()); ++j) {
    if (j == i) continue;
    const double r = std::max(a.dot(V[j] - V[i]), 0.0);
    cost += r * r;
  }
  return cost;
}

Vector2d CutGradient(const Vertices2d& V, int i, const Vector2d& a) {
  Vector2d g = Vector2d::Zero();
  for (int j = 0; j < static_cast<int>(V.size()); ++j) {
    if (j == i) continue;
    const Vector2d d = V[j] - V[i];
    g += 2.0 * std::max(a.dot(d), 0.0) * d;
  }
  return g;
}

namespace {

// Global minimizer of the cut cost. The breakpoints a'd_j = 0 split the circle
// into arcs with a fixed active set, and on each arc the cost is the quadratic
// form a'Ma. Its minimum over the arc is either an eigenvector of M or an arc
// end, so the candidates below contain the global minimum exactly.
Vector2d ArcMinimum(const Vertices2d& V, int i) {
  constexpr double kPi = std::numbers::pi;
  // Vertex j is active on the open half circle centred on the direction of
  // d_j; the sweep adds it at the lower end and drops it at the upper end.
  struct Break {
    double angle;
    int j;
    bool enter;
  };
  std::vector<Break> breaks;
  for (int j = 0; j < static_cast<int>(V.size()); ++j) {
    if (j == i || (V[j] - V[i]).squaredNorm() == 0) continue;
    const Vector2d d = V[j] - V[i];
    const double phi = std::atan2(d.y(), d.x());
    breaks.push_back({std::remainder(phi - 0.5 * kPi, 2 * kPi), j, true});
    breaks.push_back({std::remainder(phi + 0.5 * kPi, 2 * kPi), j, false});
  }
  auto unit = [](double t) { return Vector2d(std::cos(t), std::sin(t)); };
  if (breaks.empty()) return Vector2d::UnitX();
  std::sort(breaks.begin(), breaks.end(), [](const Break& x, const Break& y) { return x.angle < y.angle; });

  // Active set just after the first breakpoint.
  const int n = static_cast<int>(breaks.size());
  const double start = breaks.front().angle;
  const Vector2d probe = unit(start + 0.5 * ((n > 1 ? breaks[1].angle : start + 2 * kPi) - start));
  Eigen::Matrix2d M = Eigen::Matrix2d::Zero();
  for (const auto& br : breaks)
    if (br.enter) {
      const Vector2d d = V[br.j] - V[i];
      if (probe.dot(d) > 0) M += d * d.transpose();
    }

  // On an arc the cost is exactly a'Ma, so candidates are scored in O(1).
  Vector2d best = unit(start);
  double best_cost = CutCost(V, i, best);
  auto offer = [&](const Vector2d& a) {
    const double c = a.dot(M * a);
    if (c < best_cost) best_cost = c, best = a;
  };
  for (int k = 0; k < n; ++k) {
    if (k > 0) {
      const Vector2d d = V[breaks[k].j] - V[i];
      M += (breaks[k].enter ? 1.0 : -1.0) * d * d.transpose();
    }
    const double lo = breaks[k].angle;
    const double hi = k + 1 < n ? breaks[k + 1].angle : start + 2 * kPi;
    if (hi - lo <= 0) continue;
    offer(unit(lo));
    // Eigenvector of the smaller eigenvalue, perpendicular to the principal axis.
    const Vector2d e = unit(0.5 * std::atan2(2 * M(0, 1), M(0, 0) - M(1, 1)) + 0.5 * kPi);
    for (const Vector2d c : {e, Vector2d(-e)}) {
      const double t = lo + std::remainder(std::atan2(c.y(), c.x()) - lo - kPi, 2 * kPi) + kPi;
      if (t >= lo && t <= hi) offer(c);
    }
  }
  return best;
}

}  // namespace

Vector2d MakeCut(const Vertices2d& V, int i, const Vector2d& a0,
                 const S1Options& opts, int* iterations) {
  // Offsets to the other vertices as columns; vertex i contributes a zero column.
  Eigen::Matrix2Xd D(2, V.size());
  for (size_t j = 0; j < V.size(); ++j) D.col(j) = V[j] - V[i];
  const auto f = [&](const Vector2d& a) { return (a.transpose() * D).cwiseMax(0.0).squaredNorm(); };
  const auto g = [&](const Vector2d& a) -> Vector2d {
    return 2.0 * D * (D.transpose() * a).cwiseMax(0.0);
  };
  S1Result r = S1Solve(f, g, a0.normalized(), opts);
  int total = r.iterations;
  // Descent from the guess can settle in a local basin; restart from the
  // exact arc minimum when it is strictly better.
  const Vector2d global = ArcMinimum(V, i);
  if (f(global) < f(r.x) - 1e-12) {
    const S1Result polished = S1Solve(f, g, global, opts);
    total += polished.iterations;
    r.x = f(polished.x) <= f(global) ? polished.x : global;
  }
  if (iterations) *iterations = total;
  return r.x;
}

namespace {

// Signed distance inside a CCW convex polygon (positive inside) and the
// outward normal of the nearest edge.
double InteriorDistance(const Vertices2d& P, const Vector2d& v, Vector2d* normal) {
  double best = std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < P.size(); ++k) {
    const Vector2d e = P[(k + 1) % P.size()] - P[k];
    const double len = e.norm();
    if (len <= 0) continue;
    const double d = Cross(e, v - P[k]) / len;
    if (d < best) {
      best = d;
      if (normal) *normal = Vector2d(e.y(), -e.x()) / len;
    }
  }
  return best;
}

}  // namespace

WhittleResult Whittle(const Vertices2d& V, double min_area) {
  if (V.size() < 3) throw DegenerateGeometryError("whittle needs at least 3 vertices");
  WhittleResult result;
  result.polygon = geometry::ConvexHull(V);
  if (result.polygon.size() < 3) throw DegenerateGeometryError("vertices are collinear");
  const int n = static_cast<int>(V.size());
  std::vector<double> dist(n);
  for (int i = 0; i < n; ++i) dist[i] = InteriorDistance(result.polygon, V[i], nullptr);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return dist[a] > dist[b]; });
  for (int i : order) {
    Vector2d normal;
    if (InteriorDistance(result.polygon, V[i], &normal) <= 1e-9) continue;
    const Vector2d a = MakeCut(V, i, normal);
    result.polygon = geometry::RemoveCollinear(
        geometry::ClipHalfPlane(result.polygon, a, a.dot(V[i])), 1e-12);
    result.cuts.push_back({a, i});
    if (result.polygon.size() < 3 || SignedArea(result.polygon) <= 0)
      throw DegenerateGeometryError("whittled polygon collapsed");
  }
  if (SignedArea(result.polygon) < min_area)
    throw DegenerateGeometryError("whittled polygon below minimum area");
  return result;
}

// ---------------------------------------------------------------------------
// Planes and the full pipeline

namespace {

double BilinearClamped(const ElevationMap& map, const Vector2d& xy) {
  Vector2d c = map.ToCell(xy);
  const int W = map.width(), H = map.height();
  c.x() = std::clamp(c.x(), 0.0, static_cast<double>(W - 1));
  c.y() = std::clamp(c.y(), 0.0, static_cast<double>(H - 1));
  const int i = std::min(static_cast<int>(c.x()), std::max(W - 2, 0));
  const int j = std::min(static_cast<int>(c.y()), std::max(H - 2, 0));
  const int i1 = std::min(i + 1, W - 1), j1 = std::min(j + 1, H - 1);
  const double fx = c.x() - i, fy = c.y() - j;
  const auto& z = map.heights;
  return (1 - fx) * (1 - fy) * z(i, j) + fx * (1 - fy) * z(i1, j) +
         (1 - fx) * fy * z(i, j1) + fx * fy * z(i1, j1);
}

}  // namespace

PlanarFoothold FitPlane(const Vertices2d& convex, const ElevationMap& map, int id) {
  const int n = static_cast<int>(convex.size());
  if (n < 3) throw DegenerateGeometryError("plane fit needs at least 3 vertices");
  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd z(n);
  for (int k = 0; k < n; ++k) {
    X.row(k) << convex[k].x(), convex[k].y(), 1.0;
    z(k) = BilinearClamped(map, convex[k]);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < 3) throw DegenerateGeometryError("plane fit is rank deficient");
  const Eigen::Vector3d coef = qr.solve(z);
  return FootholdPolygon::FromVertices(convex, Eigen::Vector3d(-coef(0), -coef(1), 1.0),
                                       coef(2), id);
}

namespace {

// Whittling only keeps vertices out of the result, so a long edge across a
// pocket could still pass through it. Extra points along each edge bound how
// far the result can reach past the boundary.
Vertices2d Densify(const Vertices2d& ring, double spacing) {
  Vertices2d out;
  const size_t n = ring.size();
  for (size_t k = 0; k < n; ++k) {
    const Eigen::Vector2d& a = ring[k];
    const Eigen::Vector2d& b = ring[(k + 1) % n];
    const int pieces = std::max(1, static_cast<int>(std::ceil((b - a).norm() / spacing)));
    for (int m = 0; m < pieces; ++m) out.push_back(a + (b - a) * (static_cast<double>(m) / pieces));
  }
  return out;
}

}  // namespace

std::vector<PlanarFoothold> Decompose(const MaskGrid& mask, const ElevationMap& map,
                                      const DecompConfig& cfg) {
  cfg.Validate();
  const ElevationMap heights = map.valid.all() ? map : terrain::InpaintLnv(map);
  std::vector<PlanarFoothold> out;
  for (const Polygon2D& poly : ExtractContours(mask, map)) {
    for (const Vertices2d& piece : Acd(poly, cfg.concavity)) {
      if (SignedArea(piece) < cfg.min_area) continue;
      try {
        out.push_back(FitPlane(Whittle(Densify(piece, 0.5 * map.resolution), cfg.min_area).polygon, heights));
      } catch (const DegenerateGeometryError&) {
      } catch (const ConvergenceError&) {
      }
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const PlanarFoothold& a, const PlanarFoothold& b) {
    return a.Area() > b.Area();
  });
  for (size_t k = 0; k < out.size(); ++k) out[k].id = static_cast<int>(k);
  return out;
}

double CoverageIou(const std::vector<PlanarFoothold>& a,
                   const std::vector<PlanarFoothold>& b,
                   const ElevationMap& geometry, const MaskGrid& overlap) {
  return s3::MaskIou(Rasterize(a, geometry), Rasterize(b, geometry), overlap);
}

}  // namespace footstep::decomp
