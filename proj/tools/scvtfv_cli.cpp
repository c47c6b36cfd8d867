// scvtfv: run advection benchmarks and build grids.
//
//   scvtfv run --test deform_hills --scheme OG4 --levels 3..5 --grid uniform \
//              --limiter on --courant 0.6 --out results/
//   scvtfv grid --level 4 --grid refined --out grid.bin

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <regex>
#include <string>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "scvtfv/scvtfv.hpp"

namespace {

std::pair<int, int> parse_levels(const std::string& s) {
  static const std::regex range(R"(^\s*(\d+)\s*(?:\.\.\s*(\d+))?\s*$)");
  std::smatch m;
  if (!std::regex_match(s, m, range)) throw scvtfv::ConfigError("levels must look like 4 or 3..5");
  const int lo = std::stoi(m[1]);
  const int hi = m[2].matched ? std::stoi(m[2]) : lo;
  return {lo, hi};
}

bool parse_on_off(const std::string& s, const char* what) {
  if (s == "on") return true;
  if (s == "off") return false;
  throw scvtfv::ConfigError(std::string(what) + " must be on or off");
}

void set_jobs(int jobs) {
#ifdef _OPENMP
  if (jobs > 0) omp_set_num_threads(jobs);
#else
  (void)jobs;
#endif
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-volume tracer advection on spherical centroidal Voronoi grids"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from an INI/TOML file (flags override it)");

  // run
  auto* run = app.add_subcommand("run", "Run one scheme on one test over a range of levels");
  std::string test = "zonal_hill", scheme = "OG2", levels = "3..5", family = "uniform";
  std::string limiter = "off", fct_bounds = "all", wind_source = "analytic-flux";
  std::string sample_points = "midpoint", timings = "on", out = "results", grid_dir;
  double courant = 0.6, deform_k = scvtfv::kDefaultDeformK, lloyd_tol = scvtfv::kDefaultLloydTol;
  double beta = -1.0;
  int snapshot_every = 0, jobs = 0, lloyd_iter = -1;
  bool track_error = false, point_init = false;
  run->add_option("--test", test, "zonal_hill | deform_hills | deform_cylinders")->capture_default_str();
  run->add_option("--scheme", scheme, "SG2 | SG3 | SG4 | OG2 | OG3 | OG4")->capture_default_str();
  run->add_option("--levels", levels, "Grid level or range lo..hi")->capture_default_str();
  run->add_option("--grid", family, "uniform | refined")->capture_default_str();
  run->add_option("--limiter", limiter, "FCT on the last RK3 stage: on | off")->capture_default_str();
  run->add_option("--fct-bounds", fct_bounds, "FCT bound neighborhood: all | upwind")->capture_default_str();
  run->add_option("--courant", courant, "Courant number")->capture_default_str();
  run->add_option("--beta", beta, "SG3 upwind weight in [0,1] (default 1, 0.25 for deform_cylinders)");
  run->add_option("--wind-source", wind_source, "analytic | analytic-flux | edge-normal-recon")
      ->capture_default_str();
  run->add_option("--wind-samples", sample_points,
                  "edge-normal-recon sample points: midpoint | delaunay")->capture_default_str();
  run->add_option("--deform-k", deform_k, "Deformational flow amplitude k")->capture_default_str();
  run->add_option("--out", out, "Output directory")->capture_default_str();
  run->add_option("--grid-cache", grid_dir, "Directory for cached grids (default <out>/grids)");
  run->add_option("--lloyd-tol", lloyd_tol, "Lloyd tolerance, radians")->capture_default_str();
  run->add_option("--lloyd-iter", lloyd_iter, "Lloyd iteration cap (-1: 5000 up to level 5, else 500)")
      ->capture_default_str();
  run->add_option("--snapshot-every", snapshot_every, "Write a field snapshot every N steps (0: off)")
      ->capture_default_str();
  run->add_flag("--track-error", track_error, "Write E_inf/E_2 after every step (zonal_hill)");
  run->add_flag("--point-init", point_init, "Initialize with point values instead of cell means");
  run->add_option("--timings", timings, "Record runtime_s (off writes 0 for reproducible CSV)")
      ->capture_default_str();
  run->add_option("--jobs", jobs, "Worker threads (0: OpenMP default)")->capture_default_str();

  // grid
  auto* grid_cmd = app.add_subcommand("grid", "Build an SCVT and write it to a grid file");
  int grid_level = 3;
  std::string grid_family = "uniform", grid_out = "grid.bin";
  grid_cmd->add_option("--level", grid_level, "Bisection level")->capture_default_str();
  grid_cmd->add_option("--grid", grid_family, "uniform | refined")->capture_default_str();
  grid_cmd->add_option("--out", grid_out, "Output file")->capture_default_str();
  grid_cmd->add_option("--lloyd-tol", lloyd_tol, "Lloyd tolerance, radians")->capture_default_str();
  grid_cmd->add_option("--lloyd-iter", lloyd_iter, "Lloyd iteration cap")->capture_default_str();
  grid_cmd->add_option("--jobs", jobs, "Worker threads (0: OpenMP default)")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    set_jobs(jobs);
    if (*grid_cmd) {
      const scvtfv::GridFamily f = scvtfv::parse_family(grid_family);
      scvtfv::Grid g = scvtfv::build_icosahedral_grid(grid_level);
      const auto rep = scvtfv::lloyd_optimize(
          g, scvtfv::family_density(f), lloyd_tol,
          lloyd_iter < 0 ? scvtfv::default_lloyd_iterations(grid_level) : lloyd_iter);
      scvtfv::save_grid(g, grid_out);
      std::printf("level %d  cells %d  lloyd iterations %d  movement %.3e  %s\n", grid_level, g.ncells(),
                  rep.iterations, rep.movement, rep.converged ? "converged" : "NOT converged");
      return 0;
    }

    scvtfv::ExperimentConfig cfg;
    cfg.test = scvtfv::parse_test_case(test);
    cfg.scheme = scvtfv::parse_scheme(scheme);
    if (beta >= 0.0 || run->count("--beta") > 0) cfg.beta = beta;
    std::tie(cfg.level_min, cfg.level_max) = parse_levels(levels);
    cfg.family = scvtfv::parse_family(family);
    cfg.limiter.enabled = parse_on_off(limiter, "--limiter");
    cfg.limiter.bounds = scvtfv::parse_fct_bounds(fct_bounds);
    cfg.courant = courant;
    cfg.wind_source = scvtfv::parse_wind_source(wind_source);
    if (sample_points == "midpoint") {
      cfg.sample_points = scvtfv::SamplePoints::VoronoiMidpoint;
    } else if (sample_points == "delaunay") {
      cfg.sample_points = scvtfv::SamplePoints::DelaunayCrossing;
    } else {
      throw scvtfv::ConfigError("--wind-samples must be midpoint or delaunay");
    }
    cfg.deform_k = deform_k;
    cfg.out_dir = out;
    cfg.grid_dir = grid_dir.empty() ? std::filesystem::path(out) / "grids" : std::filesystem::path(grid_dir);
    cfg.lloyd_tol = lloyd_tol;
    cfg.lloyd_max_iter = lloyd_iter;
    cfg.snapshot_every = snapshot_every;
    cfg.track_error = track_error;
    cfg.point_init = point_init;
    cfg.timings = parse_on_off(timings, "--timings");

    const scvtfv::ExperimentResult res = scvtfv::run_experiment(cfg);
    scvtfv::write_error_csv(std::cout, res.rows());
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
