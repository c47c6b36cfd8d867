#pragma once

// Benchmark flows and tracers on the unit sphere: solid-body zonal rotation,
// the deformational flow with a background zonal wind, Gaussian hills and
// slotted cylinders, plus cell-mean initialization.
//
// Longitude is lambda in [-pi, pi), latitude theta in [-pi/2, pi/2].

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "scvtfv/errors.hpp"
#include "scvtfv/geometry.hpp"
#include "scvtfv/grid.hpp"
#include "scvtfv/quadrature.hpp"

namespace scvtfv {

inline constexpr double kDefaultPeriod = 5.0;
inline constexpr double kDefaultDeformK = 2.0;

// Eastward vector of magnitude u0 cos(theta); equals u0 * (-y, x, 0).
inline Vec3 zonal_wind(const Vec3& p, double u0) { return {-u0 * p.y(), u0 * p.x(), 0.0}; }

// Deformational flow; (u, v) are the east and north components and
// lambda' = lambda - 2 pi t / T.
//   u = k sin^2(lambda' + pi) sin(2 theta) cos(pi t / T) + 2 pi cos(theta) / T
//   v = k sin(2 (lambda' + pi)) cos(theta) cos(pi t / T)
inline Vec3 deformational_wind(const Vec3& p, double t, double period, double k) {
  const auto [lon, lat] = to_lonlat(p);
  const double lp = lon - 2.0 * kPi * t / period + kPi;
  const double ct = std::cos(kPi * t / period);
  const double s = std::sin(lp);
  const double u = k * s * s * std::sin(2.0 * lat) * ct + 2.0 * kPi * std::cos(lat) / period;
  const double v = k * std::sin(2.0 * lp) * std::cos(lat) * ct;
  const Vec3 east{-std::sin(lon), std::cos(lon), 0.0};
  const Vec3 north{-std::sin(lat) * std::cos(lon), -std::sin(lat) * std::sin(lon), std::cos(lat)};
  return u * east + v * north;
}

enum class WindKind { ZonalSolidBody, Deformational };

struct WindSpec {
  WindKind kind = WindKind::ZonalSolidBody;
  double period = kDefaultPeriod;
  double k = kDefaultDeformK;

  double u0() const { return 2.0 * kPi / period; }
  bool time_dependent() const { return kind == WindKind::Deformational; }

  Vec3 velocity(const Vec3& p, double t) const {
    if (kind == WindKind::ZonalSolidBody) return zonal_wind(p, u0());
    return deformational_wind(p, t, period, k);
  }

  // psi with velocity = r_hat x grad(psi); the flux of the wind across a
  // great-circle arc is a difference of psi between its endpoints.
  double stream_function(const Vec3& p, double t) const {
    if (kind == WindKind::ZonalSolidBody) return -u0() * p.z();
    const auto [lon, lat] = to_lonlat(p);
    const double s = std::sin(lon - 2.0 * kPi * t / period + kPi);
    const double c = std::cos(lat);
    return k * s * s * c * c * std::cos(kPi * t / period) - 2.0 * kPi / period * std::sin(lat);
  }

  // Upper bound of |u| over the sphere and over [0, T].
  double max_speed() const {
    if (kind == WindKind::ZonalSolidBody) return u0();
    return k + 2.0 * kPi / period;
  }
};

// Exact integral of u . n along the great-circle arc a -> b, where `normal`
// is the arc's unit normal (constant along a great circle).
inline double exact_arc_flux(const WindSpec& wind, const Vec3& a, const Vec3& b,
                             const Vec3& normal, double t) {
  // u . n = -grad(psi) . tangent when n = tangent x r_hat.
  const Vec3 mid = normalized(a + b);
  const double orientation = normal.dot((b - a).cross(mid)) >= 0.0 ? 1.0 : -1.0;
  return -orientation * (wind.stream_function(b, t) - wind.stream_function(a, t));
}

// ---------------------------------------------------------------------------
// Tracers

inline double gaussian_hill(const Vec3& p, const Vec3& center, double b = 5.0) {
  return std::exp(-b * (p - center).squaredNorm());
}

enum class TracerKind { Constant, GaussianHill, TwoGaussianHills, SlottedCylinders };

struct TracerSpec {
  TracerKind kind = TracerKind::Constant;
  std::vector<std::pair<double, double>> centers;  // (lon, lat)
  double sharpness = 5.0;   // Gaussian b
  double radius = 0.5;      // cylinder radius, radians
  double background = 0.1;  // cylinder background value
  double height = 1.0;      // cylinder value / constant value

  bool smooth() const { return kind != TracerKind::SlottedCylinders; }

  double operator()(const Vec3& p) const {
    switch (kind) {
      case TracerKind::Constant:
        return height;
      case TracerKind::GaussianHill:
      case TracerKind::TwoGaussianHills: {
        double v = 0.0;
        for (const auto& [lon, lat] : centers) v += gaussian_hill(p, from_lonlat(lon, lat), sharpness);
        return v;
      }
      case TracerKind::SlottedCylinders:
        return slotted_cylinders(p);
    }
    return 0.0;
  }

  // Two slotted cylinders: the first is cut from the north, the second from
  // the south, each by a slot of half-width r/6 in longitude that stops
  // 5r/12 from the far rim.
  double slotted_cylinders(const Vec3& p) const {
    const auto [lon, lat] = to_lonlat(p);
    for (std::size_t c = 0; c < centers.size(); ++c) {
      const auto [clon, clat] = centers[c];
      const double r = geodesic_distance(p, from_lonlat(clon, clat));
      if (r > radius) continue;
      const double dlon = std::remainder(lon - clon, 2.0 * kPi);
      if (std::abs(dlon) >= radius / 6.0) return height;
      const double dlat = lat - clat;
      if (c % 2 == 0 && dlat < -5.0 / 12.0 * radius) return height;
      if (c % 2 == 1 && dlat > 5.0 / 12.0 * radius) return height;
    }
    return background;
  }
};

enum class GridFamily { Uniform, Refined };

inline TracerSpec constant_tracer(double value) {
  TracerSpec t;
  t.kind = TracerKind::Constant;
  t.height = value;
  return t;
}

inline TracerSpec zonal_hill_tracer(GridFamily family) {
  TracerSpec t;
  t.kind = TracerKind::GaussianHill;
  if (family == GridFamily::Uniform) {
    t.centers = {{0.0, 0.0}};
  } else {
    t.centers = {{-7.0 * kPi / 18.0, -kPi / 12.0}};
  }
  return t;
}

inline std::vector<std::pair<double, double>> two_feature_centers(GridFamily family) {
  if (family == GridFamily::Uniform) return {{-kPi / 6.0, 0.0}, {kPi / 6.0, 0.0}};
  return {{-5.0 * kPi / 9.0, -kPi / 12.0}, {-2.0 * kPi / 9.0, -kPi / 12.0}};
}

inline TracerSpec two_hills_tracer(GridFamily family) {
  TracerSpec t;
  t.kind = TracerKind::TwoGaussianHills;
  t.centers = two_feature_centers(family);
  return t;
}

inline TracerSpec slotted_cylinders_tracer(GridFamily family) {
  TracerSpec t;
  t.kind = TracerKind::SlottedCylinders;
  t.centers = two_feature_centers(family);
  return t;
}

// Point sampler for the solid-body solution at time t: the initial field at
// the point rotated back by u0 t about the polar axis.
inline std::function<double(const Vec3&)> exact_solid_body_solution(const TracerSpec& tracer,
                                                                      const WindSpec& wind,
                                                                      double t) {
  if (wind.kind != WindKind::ZonalSolidBody) {
    throw UnsupportedWind("exact solution is only available for solid-body rotation");
  }
  const double angle = -wind.u0() * t;
  const double c = std::cos(angle), s = std::sin(angle);
  return [tracer, c, s](const Vec3& p) {
    return tracer(Vec3{c * p.x() - s * p.y(), s * p.x() + c * p.y(), p.z()});
  };
}

struct CellMeanOptions {
  // Smooth fields: degree-4 rule on each fan triangle split n x n.
  int smooth_subdivision = 1;
  // Discontinuous fields: centroid sampling on each fan triangle split n x n.
  int discontinuous_subdivision = 4;
  // Sample point values at the generators instead of averaging.
  bool point_values = false;
};

// Cell means of f over every Voronoi cell, integrated on the fan of spherical
// triangles (generator, v_k, v_k+1).
template <class F>
std::vector<double> cell_means(const Grid& grid, F&& f, bool smooth, const CellMeanOptions& opt = {}) {
  std::vector<double> out(grid.ncells());
  if (opt.point_values) {
    for (Index i = 0; i < grid.ncells(); ++i) out[i] = f(grid.centers[i]);
    return out;
  }
  const TriangleRule rule = triangle_rule(smooth ? TriangleDegree::Four : TriangleDegree::One);
  const int sub = smooth ? opt.smooth_subdivision : opt.discontinuous_subdivision;
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < grid.ncells(); ++i) {
    const auto ring = grid.vertices_of(i);
    const std::size_t n = ring.size();
    double sum_f = 0.0, sum_1 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const auto [fk, ak] = integrate_spherical_triangle_subdivided(
          grid.centers[i], grid.vertices[ring[k]], grid.vertices[ring[(k + 1) % n]], rule, sub, f);
      sum_f += fk;
      sum_1 += ak;
    }
    out[i] = sum_f / sum_1;
  }
  return out;
}

inline std::vector<double> cell_mean_init(const Grid& grid, const TracerSpec& tracer,
                                          const CellMeanOptions& opt = {}) {
  return cell_means(grid, tracer, tracer.smooth(), opt);
}

}  // namespace scvtfv
