#pragma once

// Unit-sphere geometry: geodesics, gnomonic tangent-plane projections,
// spherical polygon areas and Gauss points on great-circle arcs.
//
// Points on the sphere are plain Eigen 3-vectors with unit norm. All lengths
// are radians and all areas steradians.

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <utility>

#include <Eigen/Dense>

#include "scvtfv/errors.hpp"
#include "scvtfv/quadrature.hpp"

namespace scvtfv {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

inline constexpr double kPi = std::numbers::pi;

// Smallest admissible value of p.origin for the gnomonic projection.
inline constexpr double kProjectionLimit = 1e-10;

inline Vec3 normalized(const Vec3& v) { return v / v.norm(); }

// Angle between two unit vectors, accurate near 0 and pi.
inline double geodesic_distance(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

// Longitude in [-pi, pi), latitude in [-pi/2, pi/2].
inline std::pair<double, double> to_lonlat(const Vec3& p) {
  double lon = std::atan2(p.y(), p.x());
  if (lon >= kPi) lon -= 2.0 * kPi;
  const double lat = std::atan2(p.z(), std::hypot(p.x(), p.y()));
  return {lon, lat};
}

inline Vec3 from_lonlat(double lon, double lat) {
  return {std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)};
}

// Unit eastward and northward vectors at p. At the poles the eastward vector
// falls back to the TangentFrame convention.
inline std::pair<Vec3, Vec3> east_north(const Vec3& p);

// Orthonormal basis of the tangent plane at `origin`:
// e1 = east = normalize(z x origin), e2 = origin x e1 = north.
struct TangentFrame {
  Vec3 origin = Vec3::UnitZ();
  Vec3 e1 = Vec3::UnitX();
  Vec3 e2 = Vec3::UnitY();

  static TangentFrame at(const Vec3& origin) {
    TangentFrame f;
    f.origin = origin;
    if (std::abs(origin.z()) > 1.0 - 1e-10) {
      f.e1 = Vec3::UnitX();
      // Remove any residual radial part so the frame stays orthonormal.
      f.e1 = normalized(f.e1 - origin * origin.dot(f.e1));
    } else {
      f.e1 = normalized(Vec3::UnitZ().cross(origin));
    }
    f.e2 = origin.cross(f.e1);
    return f;
  }
};

inline std::pair<Vec3, Vec3> east_north(const Vec3& p) {
  const TangentFrame f = TangentFrame::at(p);
  return {f.e1, f.e2};
}

// Gnomonic (radial) projection of p onto the tangent plane of `frame`.
inline Vec2 project_to_tangent(const TangentFrame& frame, const Vec3& p) {
  const double s = p.dot(frame.origin);
  if (s <= kProjectionLimit) throw AntipodalPoint("point is outside the projectable hemisphere");
  const Vec3 q = p / s - frame.origin;
  return {q.dot(frame.e1), q.dot(frame.e2)};
}

// Inverse of project_to_tangent.
inline Vec3 unproject(const TangentFrame& frame, const Vec2& xy) {
  return normalized(frame.origin + xy.x() * frame.e1 + xy.y() * frame.e2);
}

// Pushforward of the 3-vector v at `at` under the gnomonic map of `frame`.
inline Vec2 project_vector_to_tangent(const TangentFrame& frame, const Vec3& at, const Vec3& v) {
  const double s = at.dot(frame.origin);
  if (s <= kProjectionLimit) throw AntipodalPoint("point is outside the projectable hemisphere");
  const Vec3 d = v / s - at * (v.dot(frame.origin) / (s * s));
  return {d.dot(frame.e1), d.dot(frame.e2)};
}

// Signed spherical excess of the triangle (a, b, c); positive when the
// vertices are counterclockwise seen from outside the sphere.
inline double spherical_triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  const double triple = a.dot(b.cross(c));
  const double denom = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
  return 2.0 * std::atan2(triple, denom);
}

// Area of a star-shaped spherical polygon with counterclockwise vertices,
// summed over triangles fanned from the normalized vertex mean.
inline double spherical_polygon_area(std::span<const Vec3> vertices) {
  const std::size_t n = vertices.size();
  if (n < 3) throw DegeneratePolygon("polygon needs at least three vertices");
  Vec3 mean = Vec3::Zero();
  for (std::size_t k = 0; k < n; ++k) {
    const Vec3& a = vertices[k];
    const Vec3& b = vertices[(k + 1) % n];
    if ((a - b).norm() < 1e-13) throw DegeneratePolygon("consecutive polygon vertices coincide");
    mean += a;
  }
  if (mean.norm() == 0.0) throw DegeneratePolygon("polygon vertex mean vanishes");
  mean.normalize();
  double area = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    area += spherical_triangle_area(mean, vertices[k], vertices[(k + 1) % n]);
  }
  return area;
}

// Spherical linear interpolation between unit vectors a and b.
inline Vec3 slerp(const Vec3& a, const Vec3& b, double t) {
  const double theta = geodesic_distance(a, b);
  const double s = std::sin(theta);
  if (s < 1e-300) return a;
  return (std::sin((1.0 - t) * theta) / s) * a + (std::sin(t * theta) / s) * b;
}

struct ArcQuadrature {
  int size = 0;
  std::array<Vec3, 2> points{};
  std::array<double, 2> weights{};  // radians, sum to the arc length
};

// One- or two-point Gauss rule along the great-circle arc from a to b, with
// points placed at the Gauss-Legendre arc parameters.
inline ArcQuadrature gauss_arc_points(const Vec3& a, const Vec3& b, int m) {
  if (m != 1 && m != 2) throw Error("gauss_arc_points: m must be 1 or 2");
  const double length = geodesic_distance(a, b);
  if (length < 1e-13) throw DegenerateArc("arc endpoints coincide");
  const LineRule rule = gauss_legendre_unit(m);
  ArcQuadrature q;
  q.size = m;
  for (int l = 0; l < m; ++l) {
    q.points[l] = normalized(slerp(a, b, rule.nodes[l]));
    q.weights[l] = rule.weights[l] * length;
  }
  return q;
}

}  // namespace scvtfv
