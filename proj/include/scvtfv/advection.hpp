#pragma once

// Edge fluxes for the SG2/SG3/SG4 and OG2/OG3/OG4 schemes and the
// finite-volume tendency
//
//   d(phi_i)/dt = -1/|Omega_i| * sum_{e in EC(i)} n_{e,i} F_e.

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "scvtfv/errors.hpp"
#include "scvtfv/geometry.hpp"
#include "scvtfv/grid.hpp"
#include "scvtfv/reconstruction.hpp"

namespace scvtfv {

enum class Scheme { SG2, SG3, SG4, OG2, OG3, OG4 };

inline constexpr std::array<Scheme, 6> kAllSchemes = {Scheme::SG2, Scheme::SG3, Scheme::SG4,
                                                      Scheme::OG2, Scheme::OG3, Scheme::OG4};

inline std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::SG2: return "SG2";
    case Scheme::SG3: return "SG3";
    case Scheme::SG4: return "SG4";
    case Scheme::OG2: return "OG2";
    case Scheme::OG3: return "OG3";
    case Scheme::OG4: return "OG4";
  }
  return "?";
}

inline Scheme parse_scheme(const std::string& name) {
  for (Scheme s : kAllSchemes) {
    if (scheme_name(s) == name) return s;
  }
  throw ConfigError("unknown scheme '" + name + "' (expected SG2, SG3, SG4, OG2, OG3 or OG4)");
}

inline bool is_og(Scheme s) { return s == Scheme::OG2 || s == Scheme::OG3 || s == Scheme::OG4; }

// Nominal order of accuracy.
inline int nominal_order(Scheme s) {
  switch (s) {
    case Scheme::SG2: case Scheme::OG2: return 2;
    case Scheme::SG3: case Scheme::OG3: return 3;
    default: return 4;
  }
}

// Gauss points per edge: the midpoint for SG and OG2, two points for OG3/OG4.
inline int quadrature_points(Scheme s) {
  return (s == Scheme::OG3 || s == Scheme::OG4) ? 2 : 1;
}

// ---------------------------------------------------------------------------
// Edge values

inline double sg2_edge_value(double phi_i, double phi_j) { return 0.5 * (phi_i + phi_j); }

inline double sg4_edge_value(double phi_i, double phi_j, double d2_i, double d2_j, double dx) {
  return 0.5 * (phi_i + phi_j) - dx * dx / 12.0 * (d2_i + d2_j);
}

// sign(0) is taken as +1.
inline double sg3_edge_value(double phi_i, double phi_j, double d2_i, double d2_j, double dx,
                             double u_e, int n_ei, double beta) {
  const double s = double(n_ei) * u_e >= 0.0 ? 1.0 : -1.0;
  return sg4_edge_value(phi_i, phi_j, d2_i, d2_j, dx) + s * beta * dx * dx / 12.0 * (d2_j - d2_i);
}

inline double sg_flux(double edge_value, double u_e, double length) { return edge_value * u_e * length; }

// Normal winds on edges, oriented along grid.edge_normals. `normal` is the
// value at the Voronoi edge midpoint; `quad` holds the values at the scheme's
// Gauss points (quad[e][0] == normal[e] for one-point rules).
struct EdgeWinds {
  int npoints = 1;
  std::vector<double> normal;
  std::vector<std::array<double, 2>> quad;
};

// Gauss points of every edge plus their gnomonic images in the frames of
// both adjacent cells.
struct EdgeQuadrature {
  int npoints = 1;
  std::vector<ArcQuadrature> arcs;
  std::vector<std::array<std::array<Vec2, 2>, 2>> projected;  // [edge][side][point]
};

inline EdgeQuadrature build_edge_quadrature(const Grid& grid, int npoints) {
  if (npoints != 1 && npoints != 2) throw Error("edge quadrature supports 1 or 2 points");
  EdgeQuadrature q;
  q.npoints = npoints;
  q.arcs.resize(grid.nedges());
  q.projected.resize(grid.nedges());
  for (Index e = 0; e < grid.nedges(); ++e) {
    const Vec3& a = grid.vertices[grid.edge_vertices[e][0]];
    const Vec3& b = grid.vertices[grid.edge_vertices[e][1]];
    q.arcs[e] = gauss_arc_points(a, b, npoints);
    for (int side = 0; side < 2; ++side) {
      const TangentFrame& f = grid.cell_frames[grid.edge_cells[e][side]];
      for (int l = 0; l < npoints; ++l) q.projected[e][side][l] = project_to_tangent(f, q.arcs[e].points[l]);
    }
  }
  return q;
}

// OG edge flux from the upwind reconstruction. `upwind` holds the
// coefficients of the upwind cell, `xy` the Gauss points in its frame.
inline double og_flux(const PolyCoeffs& upwind, const ArcQuadrature& arc,
                      std::span<const Vec2> xy, std::span<const double> u) {
  double f = 0.0;
  for (int l = 0; l < arc.size; ++l) f += arc.weights[l] * evaluate_poly(upwind, xy[l].x(), xy[l].y()) * u[l];
  return f;
}

// Upwind side of an edge: 0 (edge_cells[e][0], for which n_{e,i} = +1) when
// u_e >= 0, otherwise 1.
inline int upwind_side(double u_e) { return u_e >= 0.0 ? 0 : 1; }

// Finite-volume tendency from edge fluxes oriented along edge_normals.
inline void flux_divergence(const Grid& grid, std::span<const double> flux, std::span<double> out) {
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < grid.ncells(); ++i) {
    const auto edges = grid.edges_of(i);
    const auto signs = grid.signs_of(i);
    double s = 0.0;
    for (std::size_t k = 0; k < edges.size(); ++k) s += double(signs[k]) * flux[edges[k]];
    out[i] = -s / grid.cell_areas[i];
  }
}

// Unit normal n_e expressed in the tangent frame of cell i.
inline Vec2 projected_edge_normal(const Grid& grid, Index e, Index i) {
  const TangentFrame& f = grid.cell_frames[i];
  const Vec3& n = grid.edge_normals[e];
  Vec2 v(n.dot(f.e1), n.dot(f.e2));
  return v / v.norm();
}

// High-order flux operator of one scheme on one grid. Holds scratch buffers,
// so one instance must not be used from several threads at once.
class AdvectionOperator {
 public:
  AdvectionOperator(const Grid& grid, Scheme scheme, double beta = 1.0)
      : grid_(&grid), scheme_(scheme), beta_(beta) {
    if (scheme == Scheme::SG3 && !(beta >= 0.0 && beta <= 1.0)) {
      throw ConfigError("SG3 beta must lie in [0, 1]");
    }
    quad_ = build_edge_quadrature(grid, quadrature_points(scheme));
    switch (scheme) {
      case Scheme::SG2:
        break;
      case Scheme::SG3:
      case Scheme::SG4:
        recon_ = build_sg_operator(grid);
        nhat_.resize(grid.nedges());
        for (Index e = 0; e < grid.nedges(); ++e) {
          for (int side = 0; side < 2; ++side) {
            nhat_[e][side] = projected_edge_normal(grid, e, grid.edge_cells[e][side]);
          }
        }
        break;
      case Scheme::OG2: recon_ = build_og_operator(grid, 1); break;
      case Scheme::OG3: recon_ = build_og_operator(grid, 2); break;
      case Scheme::OG4: recon_ = build_og_operator(grid, 3); break;
    }
  }

  Scheme scheme() const { return scheme_; }
  double beta() const { return beta_; }
  const Grid& grid() const { return *grid_; }
  const EdgeQuadrature& quadrature() const { return quad_; }
  const ReconstructionOperator& reconstruction() const { return recon_; }

  void fluxes(std::span<const double> phi, const EdgeWinds& winds, std::vector<double>& flux) {
    const Grid& g = *grid_;
    if (winds.npoints != quad_.npoints && is_og(scheme_)) {
      throw Error("edge winds do not match the scheme's quadrature");
    }
    flux.resize(g.nedges());
    if (scheme_ != Scheme::SG2) recon_.apply_all(phi, coeffs_);
    const Index ne = g.nedges();
#pragma omp parallel for schedule(static)
    for (Index e = 0; e < ne; ++e) {
      const Index c0 = g.edge_cells[e][0], c1 = g.edge_cells[e][1];
      const double u = winds.normal[e];
      switch (scheme_) {
        case Scheme::SG2:
          flux[e] = sg_flux(sg2_edge_value(phi[c0], phi[c1]), u, g.edge_lengths[e]);
          break;
        case Scheme::SG3:
        case Scheme::SG4: {
          const double d0 = sg_directional_second_derivative(coeffs_[c0], nhat_[e][0]);
          const double d1 = sg_directional_second_derivative(coeffs_[c1], nhat_[e][1]);
          const double dx = g.edge_center_distances[e];
          // c0 is the cell the normal points away from, so n_{e,c0} = +1.
          const double v = scheme_ == Scheme::SG4
                               ? sg4_edge_value(phi[c0], phi[c1], d0, d1, dx)
                               : sg3_edge_value(phi[c0], phi[c1], d0, d1, dx, u, +1, beta_);
          flux[e] = sg_flux(v, u, g.edge_lengths[e]);
          break;
        }
        default: {
          const int side = upwind_side(u);
          const Index up = g.edge_cells[e][side];
          flux[e] = og_flux(coeffs_[up], quad_.arcs[e],
                            std::span<const Vec2>(quad_.projected[e][side].data(), quad_.npoints),
                            std::span<const double>(winds.quad[e].data(), quad_.npoints));
        }
      }
    }
  }

  void tendency(std::span<const double> phi, const EdgeWinds& winds, std::span<double> out) {
    fluxes(phi, winds, flux_);
    flux_divergence(*grid_, flux_, out);
  }

 private:
  const Grid* grid_;
  Scheme scheme_;
  double beta_;
  EdgeQuadrature quad_;
  ReconstructionOperator recon_;
  std::vector<std::array<Vec2, 2>> nhat_;
  std::vector<PolyCoeffs> coeffs_;
  std::vector<double> flux_;
};

}  // namespace scvtfv
