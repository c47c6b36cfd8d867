#pragma once

// Benchmark driver: grid cache, one run per level, CSV tables, snapshots.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "scvtfv/advection.hpp"
#include "scvtfv/errors.hpp"
#include "scvtfv/grid.hpp"
#include "scvtfv/grid_io.hpp"
#include "scvtfv/limiter.hpp"
#include "scvtfv/metrics.hpp"
#include "scvtfv/testcases.hpp"
#include "scvtfv/timestepping.hpp"
#include "scvtfv/winds.hpp"

namespace scvtfv {

enum class TestCase { ZonalHill, DeformHills, DeformCylinders };

inline std::string test_case_name(TestCase t) {
  switch (t) {
    case TestCase::ZonalHill: return "zonal_hill";
    case TestCase::DeformHills: return "deform_hills";
    case TestCase::DeformCylinders: return "deform_cylinders";
  }
  return "?";
}

inline TestCase parse_test_case(const std::string& s) {
  if (s == "zonal_hill") return TestCase::ZonalHill;
  if (s == "deform_hills") return TestCase::DeformHills;
  if (s == "deform_cylinders") return TestCase::DeformCylinders;
  throw ConfigError("unknown test '" + s + "' (expected zonal_hill, deform_hills or deform_cylinders)");
}

inline std::string family_name(GridFamily f) { return f == GridFamily::Uniform ? "uniform" : "refined"; }

inline GridFamily parse_family(const std::string& s) {
  if (s == "uniform") return GridFamily::Uniform;
  if (s == "refined") return GridFamily::Refined;
  throw ConfigError("unknown grid family '" + s + "' (expected uniform or refined)");
}

inline DensityFunction family_density(GridFamily f) {
  return f == GridFamily::Uniform ? uniform_density() : refined_density();
}

// SG3 upwind weight used for each test unless overridden.
inline double default_beta(TestCase t) { return t == TestCase::DeformCylinders ? 0.25 : 1.0; }

struct ExperimentConfig {
  TestCase test = TestCase::ZonalHill;
  Scheme scheme = Scheme::OG2;
  std::optional<double> beta;
  int level_min = 3;
  int level_max = 5;
  GridFamily family = GridFamily::Uniform;
  LimiterConfig limiter;
  double courant = 0.6;
  WindSource wind_source = WindSource::AnalyticFlux;
  SamplePoints sample_points = SamplePoints::VoronoiMidpoint;
  double deform_k = kDefaultDeformK;
  double period = kDefaultPeriod;
  std::filesystem::path out_dir;    // empty: no files written
  std::filesystem::path grid_dir;   // empty: grids are not cached on disk
  double lloyd_tol = kDefaultLloydTol;
  int lloyd_max_iter = -1;          // -1: per-level default
  int snapshot_every = 0;           // steps; 0 disables snapshots
  bool track_error = false;
  bool timings = true;              // false writes runtime_s = 0
  bool point_init = false;          // point values instead of cell means
  std::optional<std::int64_t> max_steps;  // stop early (t < T); for diagnostics

  double sg3_beta() const { return beta.value_or(default_beta(test)); }

  WindSpec wind() const {
    WindSpec w;
    w.kind = test == TestCase::ZonalHill ? WindKind::ZonalSolidBody : WindKind::Deformational;
    w.period = period;
    w.k = deform_k;
    return w;
  }

  TracerSpec tracer() const {
    switch (test) {
      case TestCase::ZonalHill: return zonal_hill_tracer(family);
      case TestCase::DeformHills: return two_hills_tracer(family);
      case TestCase::DeformCylinders: return slotted_cylinders_tracer(family);
    }
    return {};
  }

  void validate() const {
    if (level_min < 0 || level_max > kMaxGridLevel || level_min > level_max) {
      throw ConfigError("levels must satisfy 0 <= min <= max <= " + std::to_string(kMaxGridLevel));
    }
    const double b = sg3_beta();
    if (!(b >= 0.0 && b <= 1.0)) throw ConfigError("beta must lie in [0, 1]");
    if (!(courant > 0.0)) throw ConfigError("courant must be positive");
    if (!(period > 0.0)) throw ConfigError("period must be positive");
    if (snapshot_every < 0) throw ConfigError("snapshot cadence must be >= 0");
    if (track_error && test != TestCase::ZonalHill) {
      throw ConfigError("--track-error needs an exact solution (zonal_hill only)");
    }
  }
};

// ---------------------------------------------------------------------------
// Grid cache

inline std::string grid_cache_name(GridFamily family, int level, const std::string& density_tag,
                                   double tol) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s_%s_l%d_tol%.0e.grid", family_name(family).c_str(),
                density_tag.c_str(), level, tol);
  return buf;
}

// Loads the grid from `dir` if cached, otherwise builds and stores it.
inline Grid obtain_grid(GridFamily family, int level, double tol, int max_iter,
                        const std::filesystem::path& dir) {
  const DensityFunction density = family_density(family);
  if (dir.empty()) return build_scvt(level, density, tol, max_iter);
  const std::filesystem::path path = dir / grid_cache_name(family, level, density.tag, tol);
  if (std::filesystem::exists(path)) {
    Grid g = load_grid(path);
    if (g.level == level && g.density_tag == density.tag && g.lloyd_tol == tol) return g;
  }
  Grid g = build_scvt(level, density, tol, max_iter);
  std::filesystem::create_directories(dir);
  // Unique temporary name so concurrent processes never share a partial file.
  const std::filesystem::path tmp = path.string() + "." + std::to_string(std::random_device{}()) + ".tmp";
  save_grid(g, tmp);
  std::filesystem::rename(tmp, path);
  return g;
}

// ---------------------------------------------------------------------------
// Snapshots: one "lon,lat,value" row per cell, 17 significant digits.

struct SnapshotRow {
  double lon = 0.0, lat = 0.0, value = 0.0;
};

inline void dump_snapshot(std::span<const double> field, const Grid& grid,
                          const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << "lon,lat,value\n";
  for (Index i = 0; i < grid.ncells(); ++i) {
    const auto [lon, lat] = to_lonlat(grid.centers[i]);
    os << format_double(lon) << ',' << format_double(lat) << ',' << format_double(field[i]) << '\n';
  }
  if (!os) throw IoError("failed writing " + path.string());
}

inline std::vector<SnapshotRow> read_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line) || line != "lon,lat,value") throw FormatError("bad snapshot header");
  std::vector<SnapshotRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    SnapshotRow r;
    char c1 = 0, c2 = 0;
    std::istringstream ls(line);
    if (!(ls >> r.lon >> c1 >> r.lat >> c2 >> r.value) || c1 != ',' || c2 != ',') {
      throw FormatError("bad snapshot row: " + line);
    }
    rows.push_back(r);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Runs

struct ErrorSample {
  std::int64_t step = 0;
  double time = 0.0;
  double e_inf = 0.0;
  double e_2 = 0.0;
};

struct LevelResult {
  ErrorRow row;
  double final_min = 0.0, final_max = 0.0;
  double initial_min = 0.0, initial_max = 0.0;
  double final_time = 0.0;
  std::vector<ErrorSample> error_series;
  std::vector<double> final_field;
};

struct ExperimentResult {
  std::vector<LevelResult> levels;
  std::vector<ErrorRow> rows() const {
    std::vector<ErrorRow> r;
    for (const auto& l : levels) r.push_back(l.row);
    return r;
  }
};

inline std::string run_tag(const ExperimentConfig& c) {
  return test_case_name(c.test) + "_" + scheme_name(c.scheme) + "_" + family_name(c.family) + "_lim" +
         (c.limiter.enabled ? "on" : "off");
}

inline std::vector<double> initial_field(const ExperimentConfig& cfg, const Grid& grid) {
  CellMeanOptions opt;
  opt.point_values = cfg.point_init;
  return cell_mean_init(grid, cfg.tracer(), opt);
}

// Exact cell means at time t for the solid-body test; the initial field for
// the deformational tests at t = T.
inline std::vector<double> reference_field(const ExperimentConfig& cfg, const Grid& grid, double t) {
  CellMeanOptions opt;
  opt.point_values = cfg.point_init;
  const TracerSpec tracer = cfg.tracer();
  if (cfg.test == TestCase::ZonalHill) {
    return cell_means(grid, exact_solid_body_solution(tracer, cfg.wind(), t), tracer.smooth(), opt);
  }
  return cell_mean_init(grid, tracer, opt);
}

inline LevelResult run_level(const ExperimentConfig& cfg, const Grid& grid) {
  const auto start = std::chrono::steady_clock::now();
  const WindSpec wind = cfg.wind();
  AdvectionOperator op(grid, cfg.scheme, cfg.sg3_beta());
  EdgeWindSampler sampler(grid, wind, quadrature_points(cfg.scheme), cfg.wind_source, cfg.sample_points);
  AdvectionIntegrator integ(op, sampler, cfg.limiter);
  const StepPlan plan = choose_dt(grid, wind, cfg.courant);
  const std::int64_t steps = cfg.max_steps ? std::min(*cfg.max_steps, plan.steps) : plan.steps;

  std::vector<double> phi = initial_field(cfg, grid);
  const double mass0 = total_mass(phi, grid);
  LevelResult res;
  res.initial_min = *std::min_element(phi.begin(), phi.end());
  res.initial_max = *std::max_element(phi.begin(), phi.end());
  double run_min = res.initial_min, run_max = res.initial_max, drift = 0.0;

  const std::string tag = run_tag(cfg) + "_l" + std::to_string(grid.level);
  const auto snapshot = [&](std::int64_t n) {
    if (cfg.out_dir.empty() || cfg.snapshot_every <= 0) return;
    char buf[32];
    std::snprintf(buf, sizeof buf, "_step%06lld.csv", static_cast<long long>(n));
    dump_snapshot(phi, grid, cfg.out_dir / (tag + buf));
  };
  const auto track = [&](std::int64_t n, double t) {
    if (!cfg.track_error) return;
    const RelativeErrors e = relative_errors(phi, reference_field(cfg, grid, t), grid);
    res.error_series.push_back({n, t, e.e_inf, e.e_2});
  };

  snapshot(0);
  track(0, 0.0);
  for (std::int64_t n = 0; n < steps; ++n) {
    const double t = double(n) * plan.dt;
    integ.step(phi, t, plan.dt);
    for (double v : phi) {
      run_min = std::min(run_min, v);
      run_max = std::max(run_max, v);
    }
    drift = std::max(drift, relative_drift(total_mass(phi, grid), mass0));
    const std::int64_t done = n + 1;
    if (cfg.snapshot_every > 0 && (done % cfg.snapshot_every == 0 || done == steps)) snapshot(done);
    track(done, double(done) * plan.dt);
  }

  res.final_time = double(steps) * plan.dt;
  const RelativeErrors err = relative_errors(phi, reference_field(cfg, grid, res.final_time), grid);
  res.final_min = *std::min_element(phi.begin(), phi.end());
  res.final_max = *std::max_element(phi.begin(), phi.end());
  ErrorRow& row = res.row;
  row.level = grid.level;
  row.ncells = grid.ncells();
  row.dt = plan.dt;
  row.steps = steps;
  row.scheme = scheme_name(cfg.scheme);
  row.limiter = cfg.limiter.enabled;
  row.e_inf = err.e_inf;
  row.e_2 = err.e_2;
  row.mass_drift = drift;
  row.min = run_min;
  row.max = run_max;
  if (cfg.timings) {
    row.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  res.final_field = std::move(phi);
  return res;
}

inline void write_error_series(std::ostream& os, std::span<const ErrorSample> s) {
  os << "step,time,E_inf,E_2\n";
  for (const ErrorSample& e : s) {
    os << e.step << ',' << format_double(e.time) << ',' << format_double(e.e_inf) << ','
       << format_double(e.e_2) << '\n';
  }
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (!cfg.out_dir.empty()) std::filesystem::create_directories(cfg.out_dir);
  ExperimentResult result;
  for (int level = cfg.level_min; level <= cfg.level_max; ++level) {
    try {
      const Grid grid = obtain_grid(cfg.family, level, cfg.lloyd_tol, cfg.lloyd_max_iter, cfg.grid_dir);
      result.levels.push_back(run_level(cfg, grid));
    } catch (const Error& e) {
      throw Error(run_tag(cfg) + " level " + std::to_string(level) + ": " + e.what());
    }
  }
  std::vector<ErrorRow> rows = result.rows();
  fill_rates(rows);
  for (std::size_t k = 0; k < rows.size(); ++k) result.levels[k].row = rows[k];
  if (!cfg.out_dir.empty()) {
    std::ofstream os(cfg.out_dir / (run_tag(cfg) + ".csv"));
    if (!os) throw IoError("cannot write to " + cfg.out_dir.string());
    write_error_csv(os, rows);
    if (cfg.track_error) {
      for (const LevelResult& l : result.levels) {
        std::ofstream ts(cfg.out_dir / (run_tag(cfg) + "_l" + std::to_string(l.row.level) + "_errors.csv"));
        write_error_series(ts, l.error_series);
      }
    }
  }
  return result;
}

}  // namespace scvtfv
