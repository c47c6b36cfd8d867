#pragma once

// Fixed quadrature rules: Gauss-Legendre on [0, 1] and symmetric rules on the
// reference triangle, plus their lift to spherical triangles.

#include <array>
#include <cmath>
#include <span>

#include <Eigen/Dense>

#include "scvtfv/errors.hpp"

namespace scvtfv {

using Vec3 = Eigen::Vector3d;

struct LineRule {
  int size = 0;
  std::array<double, 4> nodes{};    // on [0, 1]
  std::array<double, 4> weights{};  // sum to 1
};

// n-point Gauss-Legendre rule mapped to [0, 1]; exact for degree 2n-1.
inline LineRule gauss_legendre_unit(int n) {
  LineRule r;
  r.size = n;
  switch (n) {
    case 1:
      r.nodes[0] = 0.5;
      r.weights[0] = 1.0;
      break;
    case 2: {
      const double d = 0.5 / std::sqrt(3.0);
      r.nodes = {0.5 - d, 0.5 + d};
      r.weights = {0.5, 0.5};
      break;
    }
    case 3: {
      const double d = 0.5 * std::sqrt(0.6);
      r.nodes = {0.5 - d, 0.5, 0.5 + d};
      r.weights = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
      break;
    }
    case 4: {
      const double a = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
      const double b = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
      const double wa = (18.0 + std::sqrt(30.0)) / 36.0;
      const double wb = (18.0 - std::sqrt(30.0)) / 36.0;
      r.nodes = {0.5 * (1.0 - b), 0.5 * (1.0 - a), 0.5 * (1.0 + a), 0.5 * (1.0 + b)};
      r.weights = {0.5 * wb, 0.5 * wa, 0.5 * wa, 0.5 * wb};
      break;
    }
    default:
      throw Error("gauss_legendre_unit: supported sizes are 1..4");
  }
  return r;
}

// Barycentric triangle rule, weights sum to 1.
struct TriangleRule {
  int size = 0;
  std::array<std::array<double, 3>, 7> bary{};
  std::array<double, 7> weights{};
};

enum class TriangleDegree { One = 1, Two = 2, Four = 4 };

inline TriangleRule triangle_rule(TriangleDegree degree) {
  TriangleRule r;
  if (degree == TriangleDegree::One) {
    r.size = 1;
    r.bary[0] = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    r.weights[0] = 1.0;
    return r;
  }
  if (degree == TriangleDegree::Two) {
    r.size = 3;
    const double a = 2.0 / 3.0, b = 1.0 / 6.0;
    r.bary[0] = {a, b, b};
    r.bary[1] = {b, a, b};
    r.bary[2] = {b, b, a};
    r.weights[0] = r.weights[1] = r.weights[2] = 1.0 / 3.0;
    return r;
  }
  // Dunavant degree 4, six points.
  r.size = 6;
  const double a1 = 0.108103018168070, b1 = 0.445948490915965;
  const double w1 = 0.223381589678011;
  const double a2 = 0.816847572980459, b2 = 0.091576213509771;
  const double w2 = 0.109951743655322;
  r.bary[0] = {a1, b1, b1};
  r.bary[1] = {b1, a1, b1};
  r.bary[2] = {b1, b1, a1};
  r.bary[3] = {a2, b2, b2};
  r.bary[4] = {b2, a2, b2};
  r.bary[5] = {b2, b2, a2};
  for (int k = 0; k < 3; ++k) r.weights[k] = w1;
  for (int k = 3; k < 6; ++k) r.weights[k] = w2;
  return r;
}

// Integrates f over the spherical triangle (a, b, c) on the unit sphere by
// applying `rule` to the flat triangle and lifting with the radial-projection
// Jacobian |P.N| / |P|^3. Returns {integral of f, integral of 1}.
template <class F>
std::pair<double, double> integrate_spherical_triangle(const Vec3& a, const Vec3& b,
                                                       const Vec3& c, const TriangleRule& rule,
                                                       F&& f) {
  const Vec3 cross = (b - a).cross(c - a);
  const double flat_area = 0.5 * cross.norm();
  if (flat_area == 0.0) return {0.0, 0.0};
  const Vec3 normal = cross / (2.0 * flat_area);
  double sum_f = 0.0, sum_1 = 0.0;
  for (int q = 0; q < rule.size; ++q) {
    const Vec3 p = rule.bary[q][0] * a + rule.bary[q][1] * b + rule.bary[q][2] * c;
    const double r = p.norm();
    const double jac = std::abs(p.dot(normal)) / (r * r * r);
    const double w = rule.weights[q] * flat_area * jac;
    sum_f += w * f(Vec3(p / r));
    sum_1 += w;
  }
  return {sum_f, sum_1};
}

// Same as above after splitting the triangle into n*n congruent sub-triangles.
template <class F>
std::pair<double, double> integrate_spherical_triangle_subdivided(
    const Vec3& a, const Vec3& b, const Vec3& c, const TriangleRule& rule, int n, F&& f) {
  if (n <= 1) return integrate_spherical_triangle(a, b, c, rule, f);
  double sum_f = 0.0, sum_1 = 0.0;
  const auto node = [&](int i, int j) -> Vec3 {
    const double u = double(i) / n, v = double(j) / n;
    return (1.0 - u - v) * a + u * b + v * c;
  };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; i + j < n; ++j) {
      auto [f1, a1] = integrate_spherical_triangle(node(i, j), node(i + 1, j), node(i, j + 1),
                                                   rule, f);
      sum_f += f1;
      sum_1 += a1;
      if (i + j + 1 < n) {
        auto [f2, a2] = integrate_spherical_triangle(node(i + 1, j), node(i + 1, j + 1),
                                                     node(i, j + 1), rule, f);
        sum_f += f2;
        sum_1 += a2;
      }
    }
  }
  return {sum_f, sum_1};
}

}  // namespace scvtfv
