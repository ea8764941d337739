#include "mongeampere/polygon.hpp"

#include <algorithm>
#include <limits>

namespace mongeampere {

double polygon_area(std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return 0.0;
  // Anchored at vertex 0: small cells far from the origin keep their digits.
  const Vec2 o = poly[0];
  double twice = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) twice += cross(poly[i] - o, poly[i + 1] - o);
  return 0.5 * twice;
}

Polygon clip_half_plane(std::span<const Vec2> poly, Vec2 normal, double offset) {
  Polygon out;
  const std::size_t n = poly.size();
  if (n == 0) return out;
  out.reserve(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[(i + 1) % n];
    const double fa = dot(normal, a) - offset;
    const double fb = dot(normal, b) - offset;
    if (fa <= 0.0) out.push_back(a);
    if ((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0)) {
      const double t = fa / (fa - fb);
      out.push_back(a + t * (b - a));
    }
  }
  return out;
}

Polygon axis_box(double half_width, Vec2 center) {
  return {center + Vec2{-half_width, -half_width}, center + Vec2{half_width, -half_width},
          center + Vec2{half_width, half_width}, center + Vec2{-half_width, half_width}};
}

Polygon convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), lex_less);
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  Polygon hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

Polygon intersect_convex(std::span<const Vec2> subject, std::span<const Vec2> clipper) {
  Polygon out(subject.begin(), subject.end());
  const std::size_t m = clipper.size();
  if (m < 3) return {};
  for (std::size_t i = 0; i < m && !out.empty(); ++i) {
    const Vec2 a = clipper[i];
    const Vec2 b = clipper[(i + 1) % m];
    // Interior of a CCW polygon lies left of each edge.
    const Vec2 normal{b.y - a.y, a.x - b.x};
    out = clip_half_plane(out, normal, dot(normal, a));
  }
  return out;
}

bool contains_point(std::span<const Vec2> poly, Vec2 p, double tol) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[(i + 1) % n];
    const Vec2 e = b - a;
    const double len = norm(e);
    if (len == 0.0) continue;
    if (cross(e, p - a) / len < -tol) return false;
  }
  return true;
}

Vec2 least_norm_point(std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  if (n == 0) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  if (n >= 3 && contains_point(poly, {0.0, 0.0})) return {0.0, 0.0};
  Vec2 best = poly[0];
  double best_d = norm2(best);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[(i + 1) % n];
    const Vec2 e = b - a;
    const double ee = norm2(e);
    double t = ee > 0.0 ? -dot(a, e) / ee : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const Vec2 q = a + t * e;
    const double dq = norm2(q);
    if (dq < best_d) {
      best_d = dq;
      best = q;
    }
  }
  return best;
}

}  // namespace mongeampere
