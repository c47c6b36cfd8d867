#pragma once

// Zalesak flux-corrected transport for the last Runge-Kutta stage.
//
// With the 1/|Omega_i| factor of the finite-volume update:
//   phi^L_i   = phi^n_i - dt/|Omega_i| sum_e n_{e,i} F^L_e(phi^n)
//   F^C_e     = F^H_e(phi^{n+1/2}) - F^L_e(phi^n)
//   phi^+_i   = phi^L_i - dt/|Omega_i| sum_e max(n_{e,i} F^C_e, 0)
//   phi^-_i   = phi^L_i - dt/|Omega_i| sum_e min(n_{e,i} F^C_e, 0)
//   phi^{n+1} = phi^L_i - dt/|Omega_i| sum_e n_{e,i} R_e F^C_e

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "scvtfv/advection.hpp"
#include "scvtfv/errors.hpp"
#include "scvtfv/grid.hpp"

namespace scvtfv {

// Cells entering the local bounds of cell i besides i itself and phi^L_i.
enum class FctBounds { AllNeighbors, UpwindOnly };

inline FctBounds parse_fct_bounds(const std::string& s) {
  if (s == "all") return FctBounds::AllNeighbors;
  if (s == "upwind") return FctBounds::UpwindOnly;
  throw ConfigError("unknown FCT bounds '" + s + "' (expected all or upwind)");
}

inline std::string fct_bounds_name(FctBounds b) { return b == FctBounds::AllNeighbors ? "all" : "upwind"; }

inline constexpr double kFctZeroDenominator = 1e-300;

// First-order upwind tracer value: phi_i if n_{e,i} u_e > 0, else phi_j.
inline double upwind_value(double phi_i, double phi_j, int n_ei, double u_e) {
  return double(n_ei) * u_e > 0.0 ? phi_i : phi_j;
}

// Upwind flux oriented along n_e of edge e.
inline double low_order_flux(const Grid& grid, Index e, std::span<const double> phi, double u_e) {
  const Index c0 = grid.edge_cells[e][0], c1 = grid.edge_cells[e][1];
  return upwind_value(phi[c0], phi[c1], +1, u_e) * u_e * grid.edge_lengths[e];
}

// (phi^L - bound) / (phi^L - candidate), 1 when there is nothing to limit.
inline double fct_ratio(double low, double bound, double candidate) {
  const double den = low - candidate;
  if (std::abs(den) < kFctZeroDenominator) return 1.0;
  return (low - bound) / den;
}

struct FctWorkspace {
  std::vector<double> low;        // phi^L
  std::vector<double> flux_low;   // F^L
  std::vector<double> flux_corr;  // F^C
  std::vector<double> plus, minus;
  std::vector<double> lo, hi;     // phi^min, phi^max
  std::vector<double> ratio;      // R_e
};

inline void compute_low_order_fluxes(const Grid& grid, std::span<const double> phi,
                                     const EdgeWinds& winds, std::vector<double>& out) {
  out.resize(grid.nedges());
#pragma omp parallel for schedule(static)
  for (Index e = 0; e < grid.nedges(); ++e) out[e] = low_order_flux(grid, e, phi, winds.normal[e]);
}

// Final-stage update. `flux_low` holds F^L(phi^n) with the winds of time n,
// `flux_high` F^H(phi^{n+1/2}); `winds_low` orients the upwind bounds.
inline void fct_final_stage(const Grid& grid, std::span<const double> phi_n,
                            std::span<const double> flux_low, std::span<const double> flux_high,
                            const EdgeWinds& winds_low, double dt, FctBounds bounds,
                            FctWorkspace& ws, std::span<double> phi_next) {
  const Index nc = grid.ncells();
  const Index ne = grid.nedges();
  ws.low.resize(nc);
  ws.flux_corr.resize(ne);
  ws.plus.resize(nc);
  ws.minus.resize(nc);
  ws.lo.resize(nc);
  ws.hi.resize(nc);
  ws.ratio.resize(ne);

#pragma omp parallel for schedule(static)
  for (Index e = 0; e < ne; ++e) ws.flux_corr[e] = flux_high[e] - flux_low[e];

#pragma omp parallel for schedule(static)
  for (Index i = 0; i < nc; ++i) {
    const auto edges = grid.edges_of(i);
    const auto signs = grid.signs_of(i);
    const auto nbrs = grid.neighbors_of(i);
    const double scale = dt / grid.cell_areas[i];
    double sl = 0.0, sp = 0.0, sm = 0.0;
    double lo = phi_n[i], hi = phi_n[i];
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const Index e = edges[k];
      const double s = double(signs[k]);
      sl += s * flux_low[e];
      const double c = s * ws.flux_corr[e];
      sp += std::max(c, 0.0);
      sm += std::min(c, 0.0);
      const bool inflow = s * winds_low.normal[e] < 0.0;
      if (bounds == FctBounds::AllNeighbors || inflow) {
        lo = std::min(lo, phi_n[nbrs[k]]);
        hi = std::max(hi, phi_n[nbrs[k]]);
      }
    }
    const double low = phi_n[i] - scale * sl;
    ws.low[i] = low;
    ws.plus[i] = low - scale * sp;
    ws.minus[i] = low - scale * sm;
    ws.lo[i] = std::min(lo, low);
    ws.hi[i] = std::max(hi, low);
  }

#pragma omp parallel for schedule(static)
  for (Index e = 0; e < ne; ++e) {
    // i = edge_cells[e][0] has n_{e,i} = +1.
    const Index i = grid.edge_cells[e][0], j = grid.edge_cells[e][1];
    double r;
    if (ws.flux_corr[e] > 0.0) {
      r = std::min({1.0, fct_ratio(ws.low[i], ws.lo[i], ws.plus[i]),
                    fct_ratio(ws.low[j], ws.hi[j], ws.minus[j])});
    } else {
      r = std::min({1.0, fct_ratio(ws.low[j], ws.lo[j], ws.plus[j]),
                    fct_ratio(ws.low[i], ws.hi[i], ws.minus[i])});
    }
    ws.ratio[e] = std::clamp(r, 0.0, 1.0);
  }

  bool finite = true;
#pragma omp parallel for schedule(static) reduction(&& : finite)
  for (Index i = 0; i < nc; ++i) {
    const auto edges = grid.edges_of(i);
    const auto signs = grid.signs_of(i);
    double s = 0.0;
    for (std::size_t k = 0; k < edges.size(); ++k) s += double(signs[k]) * ws.ratio[edges[k]] * ws.flux_corr[edges[k]];
    phi_next[i] = ws.low[i] - dt / grid.cell_areas[i] * s;
    finite = finite && std::isfinite(phi_next[i]);
  }
  if (!finite) throw NonFiniteField("flux-corrected update produced a non-finite value");
}

}  // namespace scvtfv
