#pragma once

// Three-stage Runge-Kutta (Wicker-Skamarock):
//   X1 = X^n + dt/3 F(X^n)
//   X2 = X^n + dt/2 F(X1)
//   X^{n+1} = X^n + dt F(X2)
// with F = dX/dt. The advection integrator can replace the last stage with
// the flux-corrected update.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "scvtfv/advection.hpp"
#include "scvtfv/errors.hpp"
#include "scvtfv/grid.hpp"
#include "scvtfv/limiter.hpp"
#include "scvtfv/testcases.hpp"
#include "scvtfv/winds.hpp"

namespace scvtfv {

namespace detail {

template <class V>
void check_finite(const V& x) {
  for (std::size_t k = 0; k < std::size_t(x.size()); ++k) {
    if (!std::isfinite(x[k])) throw NonFiniteField("state became non-finite");
  }
}

}  // namespace detail

// One step for any resizable vector type. rhs(x, t, out) writes dX/dt.
template <class V, class Rhs>
void rk3_step(V& x, Rhs&& rhs, double t, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidTimeStep("time step must be positive");
  const std::size_t n = std::size_t(x.size());
  V k = x, stage = x;
  rhs(x, t, k);
  for (std::size_t i = 0; i < n; ++i) stage[i] = x[i] + dt / 3.0 * k[i];
  rhs(stage, t + dt / 3.0, k);
  for (std::size_t i = 0; i < n; ++i) stage[i] = x[i] + dt / 2.0 * k[i];
  rhs(stage, t + dt / 2.0, k);
  for (std::size_t i = 0; i < n; ++i) x[i] += dt * k[i];
  detail::check_finite(x);
}

struct StepPlan {
  double dt = 0.0;
  std::int64_t steps = 0;
};

// dt = courant * min Delta x_e / max|u|, shrunk so that `period` is an
// integer number of steps.
inline StepPlan choose_dt(const Grid& grid, double max_speed, double courant, double period) {
  if (!(courant > 0.0) || !std::isfinite(courant)) throw InvalidTimeStep("courant number must be positive");
  if (!(max_speed > 0.0)) throw ZeroWind("maximum wind speed is zero");
  if (!(period > 0.0)) throw InvalidTimeStep("period must be positive");
  double dx = INFINITY;
  for (double d : grid.edge_center_distances) dx = std::min(dx, d);
  const double dt0 = courant * dx / max_speed;
  StepPlan p;
  p.steps = std::int64_t(std::ceil(period / dt0 - 1e-12));
  if (p.steps < 1) p.steps = 1;
  p.dt = period / double(p.steps);
  return p;
}

inline StepPlan choose_dt(const Grid& grid, const WindSpec& wind, double courant) {
  return choose_dt(grid, wind.max_speed(), courant, wind.period);
}

struct LimiterConfig {
  bool enabled = false;
  FctBounds bounds = FctBounds::AllNeighbors;
};

// RK3 for the tracer equation with optional FCT on the last stage.
class AdvectionIntegrator {
 public:
  AdvectionIntegrator(AdvectionOperator& op, EdgeWindSampler& winds, LimiterConfig limiter = {})
      : op_(&op), winds_(&winds), limiter_(limiter) {}

  void step(std::vector<double>& phi, double t, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidTimeStep("time step must be positive");
    const Grid& g = op_->grid();
    const std::size_t n = phi.size();
    k_.resize(n);
    stage_.resize(n);

    const EdgeWinds& w0 = winds_->at(t);
    if (limiter_.enabled) {
      compute_low_order_fluxes(g, phi, w0, ws_.flux_low);
      winds_low_ = w0;
    }
    op_->tendency(phi, w0, k_);
    for (std::size_t i = 0; i < n; ++i) stage_[i] = phi[i] + dt / 3.0 * k_[i];

    op_->tendency(stage_, winds_->at(t + dt / 3.0), k_);
    for (std::size_t i = 0; i < n; ++i) stage_[i] = phi[i] + dt / 2.0 * k_[i];

    const EdgeWinds& w2 = winds_->at(t + dt / 2.0);
    if (limiter_.enabled) {
      op_->fluxes(stage_, w2, flux_high_);
      fct_final_stage(g, phi, ws_.flux_low, flux_high_, winds_low_, dt, limiter_.bounds, ws_, k_);
      phi.swap(k_);
    } else {
      op_->tendency(stage_, w2, k_);
      for (std::size_t i = 0; i < n; ++i) phi[i] += dt * k_[i];
      detail::check_finite(phi);
    }
  }

  const FctWorkspace& fct_workspace() const { return ws_; }

 private:
  AdvectionOperator* op_;
  EdgeWindSampler* winds_;
  LimiterConfig limiter_;
  std::vector<double> k_, stage_, flux_high_;
  EdgeWinds winds_low_;
  FctWorkspace ws_;
};

}  // namespace scvtfv
