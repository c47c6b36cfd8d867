#pragma once

// Error norms and convergence tables.
//
//   ||phi||_inf = max |phi_i|
//   ||phi||_2   = sqrt(sum |phi_i|^2 |Omega_i|)      (not divided by 4 pi)
//   E_p         = ||phi - phi_ref||_p / ||phi_ref||_p
//   rate        = log2(E_l / E_{l+1})

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "scvtfv/errors.hpp"
#include "scvtfv/grid.hpp"

namespace scvtfv {

struct Norms {
  double linf = 0.0;
  double l2 = 0.0;
};

inline Norms norms(std::span<const double> field, std::span<const double> areas) {
  Norms n;
  double s = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) {
    n.linf = std::max(n.linf, std::abs(field[i]));
    s += field[i] * field[i] * areas[i];
  }
  n.l2 = std::sqrt(s);
  return n;
}

inline Norms norms(std::span<const double> field, const Grid& grid) { return norms(field, grid.cell_areas); }

struct RelativeErrors {
  double e_inf = 0.0;
  double e_2 = 0.0;
};

inline RelativeErrors relative_errors(std::span<const double> field, std::span<const double> reference,
                                      std::span<const double> areas) {
  std::vector<double> diff(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) diff[i] = field[i] - reference[i];
  const Norms d = norms(diff, areas);
  const Norms r = norms(reference, areas);
  if (!(r.linf > 0.0) || !(r.l2 > 0.0)) throw ZeroReference("reference field is identically zero");
  return {d.linf / r.linf, d.l2 / r.l2};
}

inline RelativeErrors relative_errors(std::span<const double> field, std::span<const double> reference,
                                      const Grid& grid) {
  return relative_errors(field, reference, grid.cell_areas);
}

// Rates between consecutive entries; each level halves the spacing.
inline std::vector<double> convergence_rates(std::span<const double> errors) {
  std::vector<double> out;
  for (double e : errors) {
    if (!(e > 0.0)) throw NonPositiveError("convergence rates need positive errors");
  }
  for (std::size_t k = 0; k + 1 < errors.size(); ++k) out.push_back(std::log2(errors[k] / errors[k + 1]));
  return out;
}

inline double total_mass(std::span<const double> field, const Grid& grid) {
  double m = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) m += grid.cell_areas[i] * field[i];
  return m;
}

inline double relative_drift(double mass, double mass0) {
  return mass0 != 0.0 ? std::abs(mass - mass0) / std::abs(mass0) : std::abs(mass - mass0);
}

// ---------------------------------------------------------------------------
// CSV

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline constexpr const char* kErrorCsvHeader =
    "level,ncells,dt,steps,scheme,limiter,E_inf,E_2,rate_inf,rate_2,mass_drift,min,max,runtime_s";

struct ErrorRow {
  int level = 0;
  std::int64_t ncells = 0;
  double dt = 0.0;
  std::int64_t steps = 0;
  std::string scheme;
  bool limiter = false;
  double e_inf = 0.0;
  double e_2 = 0.0;
  std::optional<double> rate_inf, rate_2;  // empty on the coarsest level
  double mass_drift = 0.0;
  double min = 0.0;
  double max = 0.0;
  double runtime_s = 0.0;
};

// Fills rate_inf / rate_2 from consecutive rows (rows sorted by level).
inline void fill_rates(std::vector<ErrorRow>& rows) {
  for (std::size_t k = 0; k < rows.size(); ++k) {
    rows[k].rate_inf.reset();
    rows[k].rate_2.reset();
    if (k == 0) continue;
    const double scale = double(rows[k].level - rows[k - 1].level);
    if (rows[k - 1].e_inf > 0.0 && rows[k].e_inf > 0.0) {
      rows[k].rate_inf = std::log2(rows[k - 1].e_inf / rows[k].e_inf) / scale;
    }
    if (rows[k - 1].e_2 > 0.0 && rows[k].e_2 > 0.0) {
      rows[k].rate_2 = std::log2(rows[k - 1].e_2 / rows[k].e_2) / scale;
    }
  }
}

inline void write_error_csv(std::ostream& os, std::span<const ErrorRow> rows) {
  os << kErrorCsvHeader << '\n';
  const auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (const ErrorRow& r : rows) {
    os << r.level << ',' << r.ncells << ',' << format_double(r.dt) << ',' << r.steps << ',' << r.scheme
       << ',' << (r.limiter ? "on" : "off") << ',' << format_double(r.e_inf) << ','
       << format_double(r.e_2) << ',' << opt(r.rate_inf) << ',' << opt(r.rate_2) << ','
       << format_double(r.mass_drift) << ',' << format_double(r.min) << ',' << format_double(r.max)
       << ',' << format_double(r.runtime_s) << '\n';
  }
}

}  // namespace scvtfv
