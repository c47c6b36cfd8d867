#pragma once

// Spherical Voronoi grids built by icosahedral bisection and optimized into
// SCVTs with Lloyd's method.
//
// The Delaunay triangulation (generators + CCW triangles) is the primary data;
// everything else (Voronoi vertices, cell rings, edges, normals, areas) is
// derived deterministically by `precompute_geometry`.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "scvtfv/errors.hpp"
#include "scvtfv/geometry.hpp"
#include "scvtfv/quadrature.hpp"

namespace scvtfv {

using Index = std::int32_t;
using Triangle = std::array<Index, 3>;

inline constexpr int kMaxGridLevel = 8;

inline constexpr std::int64_t cell_count_for_level(int level) {
  return 10 * (std::int64_t{1} << (2 * level)) + 2;
}

struct Grid {
  // Metadata.
  int level = 0;
  std::string density_tag = "uniform";
  double lloyd_tol = 0.0;
  int lloyd_iterations = 0;
  double lloyd_movement = 0.0;

  // Primary data: generators x_i and the dual Delaunay triangles (CCW seen
  // from outside the sphere).
  std::vector<Vec3> centers;
  std::vector<Triangle> triangles;

  // Voronoi vertices (triangle circumcenters), one per triangle.
  std::vector<Vec3> vertices;

  // Per-cell rings in CSR layout. Ring slot k of cell i holds the Voronoi
  // vertex cell_vertices[k], the edge from vertex k to k+1, the neighbor
  // across that edge and the orientation factor n_{e,i}.
  std::vector<Index> cell_offsets;
  std::vector<Index> cell_vertices;
  std::vector<Index> cell_edges;
  std::vector<Index> cell_neighbors;
  std::vector<std::int8_t> cell_edge_signs;
  std::vector<double> cell_areas;
  std::vector<TangentFrame> cell_frames;

  // Per-edge data. edge_cells[e] = CE(e) with edge_cells[e][0] < [1]; the
  // normal points from edge_cells[e][0] toward edge_cells[e][1].
  std::vector<std::array<Index, 2>> edge_cells;
  std::vector<std::array<Index, 2>> edge_vertices;
  std::vector<Vec3> edge_midpoints;  // Voronoi edge midpoint x_e^mid
  std::vector<Vec3> edge_points;     // Delaunay edge crossing x_e
  std::vector<Vec3> edge_normals;
  std::vector<double> edge_lengths;           // |Gamma_e|
  std::vector<double> edge_center_distances;  // Delta x_e

  Index ncells() const { return static_cast<Index>(centers.size()); }
  Index nedges() const { return static_cast<Index>(edge_cells.size()); }

  std::span<const Index> edges_of(Index i) const { return ring(cell_edges, i); }
  std::span<const Index> neighbors_of(Index i) const { return ring(cell_neighbors, i); }
  std::span<const Index> vertices_of(Index i) const { return ring(cell_vertices, i); }
  std::span<const std::int8_t> signs_of(Index i) const {
    return {cell_edge_signs.data() + cell_offsets[i],
            static_cast<std::size_t>(cell_offsets[i + 1] - cell_offsets[i])};
  }
  std::vector<Vec3> cell_polygon(Index i) const {
    std::vector<Vec3> out;
    for (Index v : vertices_of(i)) out.push_back(vertices[v]);
    return out;
  }
  double total_area() const {
    return std::accumulate(cell_areas.begin(), cell_areas.end(), 0.0);
  }

 private:
  std::span<const Index> ring(const std::vector<Index>& v, Index i) const {
    return {v.data() + cell_offsets[i],
            static_cast<std::size_t>(cell_offsets[i + 1] - cell_offsets[i])};
  }
};

// Positive weight on the sphere used by Lloyd's method.
struct DensityFunction {
  std::string tag = "uniform";
  std::function<double(const Vec3&)> eval = [](const Vec3&) { return 1.0; };

  double operator()(const Vec3& p) const { return eval(p); }
};

inline DensityFunction uniform_density() { return {}; }

// Synthetic stand-in for a topography-refined grid: a Gaussian cap around
// (lon -70 deg, lat -20 deg) with about three times finer spacing inside.
// Lloyd spacing scales as density^(-1/4), so squaring the cap profile that
// falls from 1 to gamma = 1/9 gives a spacing ratio of 9^(1/2) = 3.
struct RefinedDensityParams {
  double center_lon = -70.0 * kPi / 180.0;
  double center_lat = -20.0 * kPi / 180.0;
  double width = 20.0 * kPi / 180.0;
  double gamma = 1.0 / 9.0;
};

inline DensityFunction refined_density(const RefinedDensityParams& p = {}) {
  const Vec3 c = from_lonlat(p.center_lon, p.center_lat);
  DensityFunction d;
  d.tag = "synthetic_andes";
  d.eval = [c, p](const Vec3& x) {
    const double r = geodesic_distance(x, c) / p.width;
    const double profile = p.gamma + (1.0 - p.gamma) * std::exp(-r * r);
    return profile * profile;
  };
  return d;
}

namespace detail {

inline std::uint64_t edge_key(Index a, Index b) {
  return (std::uint64_t(std::uint32_t(a)) << 32) | std::uint32_t(b);
}

inline Vec3 circumcenter(const Vec3& a, const Vec3& b, const Vec3& c) {
  return normalized((b - a).cross(c - a));
}

// Triangles around each generator in CCW order, CSR layout. For a CCW
// triangle (v, a, b) the next triangle around v is the one holding the
// directed edge v -> b.
struct Rings {
  std::vector<Index> offsets;
  std::vector<Index> tris;
};

inline Rings build_rings(Index ncenters, std::span<const Triangle> triangles) {
  std::unordered_map<std::uint64_t, Index> by_edge;
  by_edge.reserve(triangles.size() * 3);
  std::vector<Index> any_tri(ncenters, -1);
  std::vector<Index> degree(ncenters, 0);
  for (Index t = 0; t < Index(triangles.size()); ++t) {
    const Triangle& tr = triangles[t];
    for (int k = 0; k < 3; ++k) {
      by_edge[edge_key(tr[k], tr[(k + 1) % 3])] = t;
      any_tri[tr[k]] = t;
      ++degree[tr[k]];
    }
  }
  Rings r;
  r.offsets.assign(ncenters + 1, 0);
  for (Index v = 0; v < ncenters; ++v) {
    if (degree[v] < 3) throw DegenerateCell("generator with fewer than three triangles");
    r.offsets[v + 1] = r.offsets[v] + degree[v];
  }
  r.tris.resize(r.offsets.back());
  for (Index v = 0; v < ncenters; ++v) {
    Index t = any_tri[v];
    for (Index k = 0; k < degree[v]; ++k) {
      r.tris[r.offsets[v] + k] = t;
      const Triangle& tr = triangles[t];
      const int pos = tr[0] == v ? 0 : (tr[1] == v ? 1 : 2);
      const Index b = tr[(pos + 2) % 3];
      auto it = by_edge.find(edge_key(v, b));
      if (it == by_edge.end()) throw DegenerateCell("triangulation is not closed");
      t = it->second;
    }
    if (t != r.tris[r.offsets[v]]) throw DegenerateCell("triangle ring does not close");
  }
  return r;
}

// Lawson edge flips until every edge satisfies the empty-circumcircle test.
// Returns the number of flips performed.
inline int restore_delaunay(std::span<const Vec3> centers, std::vector<Triangle>& triangles,
                            int max_passes = 100) {
  int flips = 0;
  for (int pass = 0; pass < max_passes; ++pass) {
    std::unordered_map<std::uint64_t, Index> by_edge;
    by_edge.reserve(triangles.size() * 3);
    for (Index t = 0; t < Index(triangles.size()); ++t) {
      for (int k = 0; k < 3; ++k) {
        by_edge[edge_key(triangles[t][k], triangles[t][(k + 1) % 3])] = t;
      }
    }
    std::vector<char> touched(triangles.size(), 0);
    int pass_flips = 0;
    for (Index t1 = 0; t1 < Index(triangles.size()); ++t1) {
      for (int k = 0; k < 3 && !touched[t1]; ++k) {
        const Index u = triangles[t1][k], w = triangles[t1][(k + 1) % 3];
        const Index a = triangles[t1][(k + 2) % 3];
        auto it = by_edge.find(edge_key(w, u));
        if (it == by_edge.end()) continue;
        const Index t2 = it->second;
        if (touched[t2]) continue;
        const Triangle& tr2 = triangles[t2];
        const int p = tr2[0] == w ? 0 : (tr2[1] == w ? 1 : 2);
        const Index b = tr2[(p + 2) % 3];
        const Vec3& pu = centers[u];
        const Vec3 n = (centers[w] - pu).cross(centers[a] - pu);
        if (n.dot(centers[b] - pu) <= 1e-15 * n.norm()) continue;
        triangles[t1] = {u, b, a};
        triangles[t2] = {b, w, a};
        touched[t1] = touched[t2] = 1;
        ++pass_flips;
      }
    }
    flips += pass_flips;
    if (pass_flips == 0) break;
  }
  return flips;
}

inline Vec3 density_centroid(const Vec3& generator, std::span<const Vec3> ring,
                             const DensityFunction& density, const TriangleRule& rule) {
  Vec3 moment = Vec3::Zero();
  const std::size_t n = ring.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Vec3& a = ring[k];
    const Vec3& b = ring[(k + 1) % n];
    const Vec3 cross = (a - generator).cross(b - generator);
    const double flat_area = 0.5 * cross.norm();
    if (flat_area == 0.0) continue;
    const Vec3 normal = cross / (2.0 * flat_area);
    for (int q = 0; q < rule.size; ++q) {
      const Vec3 p = rule.bary[q][0] * generator + rule.bary[q][1] * a + rule.bary[q][2] * b;
      const double r = p.norm();
      const Vec3 s = p / r;
      const double w = rule.weights[q] * flat_area * std::abs(p.dot(normal)) / (r * r * r);
      moment += w * density(s) * s;
    }
  }
  return normalized(moment);
}

}  // namespace detail

// Density-weighted centroid of every Voronoi cell, projected to the sphere.
// Uses a degree-2 rule on the triangle fan from each generator.
inline std::vector<Vec3> cell_centroids(const Grid& grid, const DensityFunction& density) {
  const TriangleRule rule = triangle_rule(TriangleDegree::Two);
  std::vector<Vec3> out(grid.ncells());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < grid.ncells(); ++i) {
    const std::vector<Vec3> ring = grid.cell_polygon(i);
    out[i] = detail::density_centroid(grid.centers[i], ring, density, rule);
  }
  return out;
}

// Fills every derived field of `grid` from its generators and triangles.
inline void precompute_geometry(Grid& grid) {
  const Index nc = grid.ncells();
  const Index nt = Index(grid.triangles.size());
  grid.vertices.resize(nt);
  for (Index t = 0; t < nt; ++t) {
    const Triangle& tr = grid.triangles[t];
    grid.vertices[t] =
        detail::circumcenter(grid.centers[tr[0]], grid.centers[tr[1]], grid.centers[tr[2]]);
  }
  const detail::Rings rings = detail::build_rings(nc, grid.triangles);

  grid.cell_offsets = rings.offsets;
  const std::size_t nslots = rings.tris.size();
  grid.cell_vertices = rings.tris;  // Voronoi vertex id == triangle id
  grid.cell_neighbors.assign(nslots, -1);
  grid.cell_edges.assign(nslots, -1);
  grid.cell_edge_signs.assign(nslots, 0);
  grid.edge_cells.clear();
  grid.edge_vertices.clear();

  // Neighbor across ring slot k of cell v is the third vertex b of the
  // triangle (v, a, b) at slot k.
  for (Index v = 0; v < nc; ++v) {
    for (Index s = rings.offsets[v]; s < rings.offsets[v + 1]; ++s) {
      const Triangle& tr = grid.triangles[rings.tris[s]];
      const int pos = tr[0] == v ? 0 : (tr[1] == v ? 1 : 2);
      grid.cell_neighbors[s] = tr[(pos + 2) % 3];
    }
  }
  std::unordered_map<std::uint64_t, Index> edge_of_pair;
  edge_of_pair.reserve(nslots);
  for (Index v = 0; v < nc; ++v) {
    const Index begin = rings.offsets[v], end = rings.offsets[v + 1];
    for (Index s = begin; s < end; ++s) {
      const Index w = grid.cell_neighbors[s];
      const Index next = s + 1 < end ? s + 1 : begin;
      if (v < w) {
        const Index e = grid.nedges();
        grid.edge_cells.push_back({v, w});
        grid.edge_vertices.push_back({grid.cell_vertices[s], grid.cell_vertices[next]});
        edge_of_pair[detail::edge_key(v, w)] = e;
        grid.cell_edges[s] = e;
        grid.cell_edge_signs[s] = 1;
      }
    }
  }
  for (Index v = 0; v < nc; ++v) {
    for (Index s = rings.offsets[v]; s < rings.offsets[v + 1]; ++s) {
      const Index w = grid.cell_neighbors[s];
      if (v > w) {
        auto it = edge_of_pair.find(detail::edge_key(w, v));
        if (it == edge_of_pair.end()) throw DegenerateCell("unmatched Voronoi edge");
        grid.cell_edges[s] = it->second;
        grid.cell_edge_signs[s] = -1;
      }
    }
  }

  const Index ne = grid.nedges();
  grid.edge_midpoints.resize(ne);
  grid.edge_points.resize(ne);
  grid.edge_normals.resize(ne);
  grid.edge_lengths.resize(ne);
  grid.edge_center_distances.resize(ne);
  for (Index e = 0; e < ne; ++e) {
    const auto [i, j] = grid.edge_cells[e];
    const Vec3& va = grid.vertices[grid.edge_vertices[e][0]];
    const Vec3& vb = grid.vertices[grid.edge_vertices[e][1]];
    grid.edge_midpoints[e] = normalized(va + vb);
    grid.edge_points[e] = normalized(grid.centers[i] + grid.centers[j]);
    // va -> vb runs counterclockwise around cell i, so vb x va points out of i.
    Vec3 n = vb.cross(va);
    const double nn = n.norm();
    if (nn < 1e-300) throw DegenerateCell("zero-length Voronoi edge");
    n /= nn;
    grid.edge_normals[e] = n;
    grid.edge_lengths[e] = geodesic_distance(va, vb);
    grid.edge_center_distances[e] = geodesic_distance(grid.centers[i], grid.centers[j]);
  }

  grid.cell_areas.resize(nc);
  grid.cell_frames.resize(nc);
  for (Index i = 0; i < nc; ++i) {
    const std::vector<Vec3> poly = grid.cell_polygon(i);
    const double area = spherical_polygon_area(poly);
    if (!(area >= 1e-14)) throw DegenerateCell("cell " + std::to_string(i) + " has no area");
    grid.cell_areas[i] = area;
    grid.cell_frames[i] = TangentFrame::at(grid.centers[i]);
  }
}

namespace detail {

inline void base_icosahedron(std::vector<Vec3>& pts, std::vector<Triangle>& tris) {
  pts.clear();
  tris.clear();
  const double lat = std::atan(0.5);
  pts.push_back(Vec3::UnitZ());
  for (int k = 0; k < 5; ++k) pts.push_back(from_lonlat(2.0 * kPi * k / 5.0, lat));
  for (int k = 0; k < 5; ++k) pts.push_back(from_lonlat(2.0 * kPi * (k + 0.5) / 5.0, -lat));
  pts.push_back(-Vec3::UnitZ());
  for (Index k = 0; k < 5; ++k) {
    const Index u0 = 1 + k, u1 = 1 + (k + 1) % 5;
    const Index l0 = 6 + k, l1 = 6 + (k + 1) % 5;
    tris.push_back({0, u0, u1});
    tris.push_back({u0, l0, u1});
    tris.push_back({u1, l0, l1});
    tris.push_back({11, l1, l0});
  }
  for (Triangle& t : tris) {
    const Vec3 n = (pts[t[1]] - pts[t[0]]).cross(pts[t[2]] - pts[t[0]]);
    if (n.dot(pts[t[0]]) < 0.0) std::swap(t[1], t[2]);
  }
}

inline void bisect(std::vector<Vec3>& pts, std::vector<Triangle>& tris) {
  std::map<std::pair<Index, Index>, Index> mids;
  const auto midpoint = [&](Index a, Index b) {
    const auto key = std::minmax(a, b);
    auto it = mids.find(key);
    if (it != mids.end()) return it->second;
    const Index id = Index(pts.size());
    pts.push_back(normalized(pts[a] + pts[b]));
    mids.emplace(key, id);
    return id;
  };
  std::vector<Triangle> out;
  out.reserve(tris.size() * 4);
  for (const Triangle& t : tris) {
    const Index ab = midpoint(t[0], t[1]);
    const Index bc = midpoint(t[1], t[2]);
    const Index ca = midpoint(t[2], t[0]);
    out.push_back({t[0], ab, ca});
    out.push_back({ab, t[1], bc});
    out.push_back({ca, bc, t[2]});
    out.push_back({ab, bc, ca});
  }
  tris = std::move(out);
}

}  // namespace detail

// Voronoi grid dual to the icosahedron bisected `level` times
// (10 * 4^level + 2 cells), before any Lloyd optimization.
inline Grid build_icosahedral_grid(int level) {
  if (level < 0 || level > kMaxGridLevel) {
    throw LevelTooLarge("grid level must be in [0, " + std::to_string(kMaxGridLevel) + "]");
  }
  Grid g;
  g.level = level;
  detail::base_icosahedron(g.centers, g.triangles);
  for (int l = 0; l < level; ++l) detail::bisect(g.centers, g.triangles);
  precompute_geometry(g);
  return g;
}

struct LloydReport {
  int iterations = 0;
  double movement = 0.0;  // last max generator displacement, radians
  int flips = 0;
  bool converged = false;
};

// Lloyd iteration: generators move to their density-weighted centroids and the
// triangulation is repaired with edge flips, until the largest displacement
// drops below `tol` (radians) or `max_iter` sweeps have run.
inline LloydReport lloyd_optimize(Grid& grid, const DensityFunction& density, double tol,
                                  int max_iter) {
  if (!(tol > 0.0)) throw Error("lloyd_optimize: tol must be positive");
  LloydReport rep;
  const TriangleRule rule = triangle_rule(TriangleDegree::Two);
  const Index nc = grid.ncells();
  detail::Rings rings = detail::build_rings(nc, grid.triangles);
  std::vector<Vec3> cc(grid.triangles.size());
  std::vector<Vec3> moved(nc);
  std::vector<double> shift(nc);
  for (int it = 0; it < max_iter; ++it) {
    for (std::size_t t = 0; t < grid.triangles.size(); ++t) {
      const Triangle& tr = grid.triangles[t];
      cc[t] = detail::circumcenter(grid.centers[tr[0]], grid.centers[tr[1]], grid.centers[tr[2]]);
    }
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < nc; ++i) {
      std::vector<Vec3> ring;
      ring.reserve(8);
      for (Index s = rings.offsets[i]; s < rings.offsets[i + 1]; ++s) ring.push_back(cc[rings.tris[s]]);
      moved[i] = detail::density_centroid(grid.centers[i], ring, density, rule);
      shift[i] = geodesic_distance(moved[i], grid.centers[i]);
    }
    rep.movement = *std::max_element(shift.begin(), shift.end());
    rep.iterations = it + 1;
    if (rep.movement < tol) {
      rep.converged = true;
      break;
    }
    grid.centers = moved;
    const int flips = detail::restore_delaunay(grid.centers, grid.triangles);
    if (flips > 0) {
      rep.flips += flips;
      rings = detail::build_rings(nc, grid.triangles);
    }
  }
  grid.density_tag = density.tag;
  grid.lloyd_tol = tol;
  grid.lloyd_iterations = rep.iterations;
  grid.lloyd_movement = rep.movement;
  precompute_geometry(grid);
  return rep;
}

// Default Lloyd budget per level.
inline int default_lloyd_iterations(int level) { return level <= 5 ? 5000 : 500; }
inline constexpr double kDefaultLloydTol = 1e-10;

// Icosahedral grid optimized into an SCVT for `density`.
inline Grid build_scvt(int level, const DensityFunction& density = uniform_density(),
                       double tol = kDefaultLloydTol, int max_iter = -1) {
  Grid g = build_icosahedral_grid(level);
  lloyd_optimize(g, density, tol, max_iter < 0 ? default_lloyd_iterations(level) : max_iter);
  return g;
}

}  // namespace scvtfv
