// Acceptance checks: one PASS/FAIL line per criterion.
//
//   scvtfv_acceptance [--grid-cache DIR] [--only N[,N...]]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "scvtfv/scvtfv.hpp"

using namespace scvtfv;

namespace {

std::filesystem::path g_grid_dir = "grids";

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "FAILED ") + what;
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::map<std::pair<int, int>, Grid>& grid_memo() {
  static std::map<std::pair<int, int>, Grid> m;
  return m;
}

const Grid& grid(GridFamily family, int level) {
  auto& memo = grid_memo();
  const auto key = std::make_pair(int(family), level);
  auto it = memo.find(key);
  if (it == memo.end()) {
    it = memo.emplace(key, obtain_grid(family, level, kDefaultLloydTol, -1, g_grid_dir)).first;
  }
  return it->second;
}

struct Run {
  std::vector<ErrorRow> rows;  // levels 3..5, rates filled
  std::vector<LevelResult> levels;
  double seconds = 0.0;
};

// Mass drift of every run, for criterion 6.
std::vector<std::pair<std::string, double>> g_mass_log;

Run run(TestCase test, Scheme scheme, bool limiter, GridFamily family = GridFamily::Uniform, int lo = 3,
        int hi = 5, bool track = false) {
  ExperimentConfig cfg;
  cfg.test = test;
  cfg.scheme = scheme;
  cfg.family = family;
  cfg.limiter.enabled = limiter;
  cfg.track_error = track;
  cfg.timings = false;
  Run r;
  for (int level = lo; level <= hi; ++level) {
    const Grid& g = grid(family, level);
    const auto t0 = std::chrono::steady_clock::now();
    r.levels.push_back(run_level(cfg, g));
    r.seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.rows.push_back(r.levels.back().row);
    g_mass_log.emplace_back(run_tag(cfg) + "_l" + std::to_string(level), r.levels.back().row.mass_drift);
  }
  fill_rates(r.rows);
  return r;
}

double finest_rate_inf(const Run& r) { return *r.rows.back().rate_inf; }
double finest_rate_2(const Run& r) { return *r.rows.back().rate_2; }

std::map<Scheme, Run>& zonal_uniform() {
  static std::map<Scheme, Run> runs;
  if (runs.empty()) {
    for (Scheme s : kAllSchemes) runs[s] = run(TestCase::ZonalHill, s, false);
  }
  return runs;
}

std::string rate_table(const std::map<Scheme, Run>& runs, bool inf) {
  std::string s;
  for (const auto& [scheme, r] : runs) {
    if (!s.empty()) s += " ";
    s += scheme_name(scheme) + "=" + fmt("%.2f", inf ? finest_rate_inf(r) : finest_rate_2(r));
  }
  return s;
}

// ---------------------------------------------------------------------------

Verdict criterion1() {
  auto& runs = zonal_uniform();
  double seconds = 0.0;
  for (const auto& [s, r] : runs) seconds += r.seconds;
  Verdict v;
  const auto in = [](double x, double c, double tol) { return std::abs(x - c) <= tol; };
  const double og2 = finest_rate_inf(runs[Scheme::OG2]), sg2 = finest_rate_inf(runs[Scheme::SG2]);
  const double og3 = finest_rate_inf(runs[Scheme::OG3]), og4 = finest_rate_inf(runs[Scheme::OG4]);
  const double sg4 = finest_rate_inf(runs[Scheme::SG4]);
  v.require(in(og2, 2.0, 0.3), "OG2 " + fmt("%.2f", og2) + " in 2.0+-0.3");
  v.require(in(sg2, 2.0, 0.3), "SG2 " + fmt("%.2f", sg2) + " in 2.0+-0.3");
  v.require(in(og3, 3.0, 0.4), "OG3 " + fmt("%.2f", og3) + " in 3.0+-0.4");
  v.require(og4 >= 3.0, "OG4 " + fmt("%.2f", og4) + " >= 3.0");
  v.require(sg4 <= 1.5, "SG4 " + fmt("%.2f", sg4) + " <= 1.5");
  v.require(seconds < 300.0, "runtime " + fmt("%.1f", seconds) + " s < 300 s");
  return v;
}

Verdict criterion2() {
  auto& runs = zonal_uniform();
  Verdict v;
  for (std::size_t k = 0; k < runs[Scheme::OG2].rows.size(); ++k) {
    const ErrorRow& og2 = runs[Scheme::OG2].rows[k];
    const ErrorRow& sg2 = runs[Scheme::SG2].rows[k];
    const ErrorRow& og3 = runs[Scheme::OG3].rows[k];
    const ErrorRow& sg3 = runs[Scheme::SG3].rows[k];
    const std::string l = "l" + std::to_string(og2.level) + " ";
    v.require(og2.e_inf < sg2.e_inf, l + "OG2 " + fmt("%.3e", og2.e_inf) + " < SG2 " + fmt("%.3e", sg2.e_inf));
    v.require(sg3.e_inf <= og3.e_inf, l + "SG3 " + fmt("%.3e", sg3.e_inf) + " <= OG3 " + fmt("%.3e", og3.e_inf));
  }
  return v;
}

Verdict criterion3() {
  std::map<Scheme, Run> runs;
  for (Scheme s : kAllSchemes) runs[s] = run(TestCase::ZonalHill, s, true);
  Verdict v;
  for (const auto& [s, r] : runs) {
    const double rate = finest_rate_2(r);
    v.require(rate >= 1.5, scheme_name(s) + " L2 " + fmt("%.2f", rate) + " >= 1.5");
  }
  return v;
}

Verdict criterion4() {
  std::map<Scheme, Run> runs;
  for (Scheme s : kAllSchemes) runs[s] = run(TestCase::DeformHills, s, false);
  Verdict v;
  const auto band = [&](Scheme s, double lo, double hi) {
    const double r = finest_rate_2(runs[s]);
    const std::string range = hi > 10 ? ">= " + fmt("%.1f", lo) : "in [" + fmt("%.1f", lo) + ", " + fmt("%.1f", hi) + "]";
    v.require(r >= lo && r <= hi, scheme_name(s) + " L2 " + fmt("%.2f", r) + " " + range);
  };
  band(Scheme::OG4, 2.3, 99.0);
  band(Scheme::SG4, 2.3, 99.0);
  band(Scheme::OG3, 1.6, 2.6);
  band(Scheme::SG3, 1.6, 2.6);
  band(Scheme::OG2, 1.0, 1.9);
  band(Scheme::SG2, 1.0, 1.9);
  v.detail += " (L_inf: " + rate_table(runs, true) + ")";
  return v;
}

Verdict criterion5() {
  Verdict v;
  std::map<Scheme, double> overshoot;
  for (Scheme s : kAllSchemes) {
    const Run on = run(TestCase::DeformCylinders, s, true, GridFamily::Uniform, 5, 5);
    const LevelResult& l = on.levels[0];
    const double up = l.final_max - l.initial_max, down = l.initial_min - l.final_min;
    v.require(up <= 1e-12 && down <= 1e-12,
              scheme_name(s) + " limited excess " + fmt("%.1e", std::max(up, down)) + " <= 1e-12");
    const Run off = run(TestCase::DeformCylinders, s, false, GridFamily::Uniform, 5, 5);
    const LevelResult& m = off.levels[0];
    overshoot[s] = std::max(m.final_max - m.initial_max, 0.0) + std::max(m.initial_min - m.final_min, 0.0);
  }
  const double centered = std::min(overshoot[Scheme::SG2], overshoot[Scheme::SG4]);
  std::string table;
  for (const auto& [s, o] : overshoot) table += " " + scheme_name(s) + "=" + fmt("%.3f", o);
  for (Scheme s : {Scheme::SG3, Scheme::OG2, Scheme::OG3, Scheme::OG4}) {
    v.require(overshoot[s] < centered, "unlimited " + scheme_name(s) + " overshoot below SG2/SG4");
  }
  v.detail += "; unlimited overshoot+undershoot:" + table;
  return v;
}

Verdict criterion6() {
  Verdict v;
  double worst = 0.0;
  std::string who;
  for (const auto& [tag, d] : g_mass_log) {
    if (d > worst) {
      worst = d;
      who = tag;
    }
  }
  v.require(!g_mass_log.empty(), std::to_string(g_mass_log.size()) + " runs");
  v.require(worst < 1e-11, "worst drift " + fmt("%.2e", worst) + " (" + who + ") < 1e-11");
  return v;
}

Verdict criterion7() {
  Verdict v;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (GridFamily f : {GridFamily::Uniform, GridFamily::Refined}) {
    const Grid& g = grid(f, 3);
    for (int degree : {1, 2, 3}) {
      const ReconstructionOperator op = build_og_operator(g, degree);
      double worst = 0.0, worst_mean = 0.0;
      std::vector<double> means(g.ncells(), 0.0);
      for (Index i = 0; i < g.ncells(); ++i) {
        PolyCoeffs p;
        p.degree = degree;
        for (int j = 0; j < coeff_count(degree); ++j) p.c[j] = u(rng);
        for (Index k : op.stencil(i)) {
          const MonomialAverages a = compute_monomial_averages(g, g.cell_frames[i], k, degree);
          double m = 0.0;
          for (int j = 0; j < coeff_count(degree); ++j) m += p.c[j] * a.values[j];
          means[k] = m;
        }
        const PolyCoeffs r = op.apply(i, means);
        const MonomialAverages own = compute_monomial_averages(g, g.cell_frames[i], i, degree);
        double mean = 0.0;
        for (int j = 0; j < coeff_count(degree); ++j) {
          worst = std::max(worst, std::abs(r.c[j] - p.c[j]));
          mean += r.c[j] * own.values[j];
        }
        worst_mean = std::max(worst_mean, std::abs(mean - means[i]));
      }
      const std::string tag = family_name(f) + " deg" + std::to_string(degree);
      v.require(worst < 1e-9, tag + " coeff " + fmt("%.1e", worst));
      v.require(worst_mean < 1e-12, tag + " mean " + fmt("%.1e", worst_mean));
    }
  }
  return v;
}

Verdict criterion8() {
  Verdict v;
  const double lambda = -1.0;
  std::vector<double> errs;
  for (double dt : {1e-2, 5e-3, 2.5e-3}) {
    std::vector<double> x = {1.0};
    rk3_step(x, [lambda](const std::vector<double>& s, double, std::vector<double>& out) {
      out[0] = lambda * s[0];
    }, 0.0, dt);
    errs.push_back(std::abs(x[0] - std::exp(lambda * dt)));
  }
  for (double r : convergence_rates(errs)) v.require(std::abs(r - 4.0) <= 0.1, "rate " + fmt("%.3f", r));
  return v;
}

Verdict criterion9() {
  Verdict v;
  // Linear tangent fields in each edge's own frame.
  {
    const Grid& g = grid(GridFamily::Uniform, 3);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    for (SamplePoints where : {SamplePoints::VoronoiMidpoint, SamplePoints::DelaunayCrossing}) {
      for (Index e = 0; e < g.nedges(); ++e) {
        const EdgeSampleSet s = edge_sample_set(g, e, where);
        const Eigen::MatrixXd map = velocity_fit_map(s.xy, s.nhat);
        VelocityCoeffs a;
        for (int k = 0; k < 6; ++k) a(k) = u(rng);
        Eigen::VectorXd samples(s.xy.size());
        for (std::size_t l = 0; l < s.xy.size(); ++l) samples(l) = s.nhat[l].dot(evaluate_velocity(a, s.xy[l]));
        worst = std::max(worst, (VelocityCoeffs(map * samples) - a).cwiseAbs().maxCoeff());
      }
    }
    v.require(worst < 1e-10, "linear recovery " + fmt("%.1e", worst) + " < 1e-10");
  }
  // Solid-body normal velocity at the two Gauss points of each edge.
  std::vector<double> errs;
  for (int level : {4, 5}) {
    const Grid& g = grid(GridFamily::Uniform, level);
    WindSpec wind;
    EdgeWindSampler recon(g, wind, 2, WindSource::EdgeNormalRecon);
    EdgeWindSampler exact(g, wind, 2, WindSource::Analytic);
    const EdgeWinds& a = recon.at(0.0);
    const EdgeWinds& b = exact.at(0.0);
    double worst = 0.0;
    for (Index e = 0; e < g.nedges(); ++e) {
      for (int l = 0; l < 2; ++l) worst = std::max(worst, std::abs(a.quad[e][l] - b.quad[e][l]));
    }
    errs.push_back(worst);
  }
  const double factor = errs[0] / errs[1];
  v.require(std::abs(factor - 4.0) <= 1.0, "max error l4 " + fmt("%.3e", errs[0]) + " / l5 " +
                                               fmt("%.3e", errs[1]) + " = " + fmt("%.2f", factor) +
                                               " in 4+-1");
  return v;
}

Verdict criterion10() {
  Verdict v;
  auto& uni = zonal_uniform();
  for (Scheme s : {Scheme::OG2, Scheme::OG3, Scheme::OG4}) {
    const Run r = run(TestCase::ZonalHill, s, false, GridFamily::Refined);
    const double a = finest_rate_inf(r), b = finest_rate_inf(uni[s]);
    v.require(std::abs(a - b) <= 0.5,
              scheme_name(s) + " refined " + fmt("%.2f", a) + " vs uniform " + fmt("%.2f", b));
  }
  const Run sg4 = run(TestCase::ZonalHill, Scheme::SG4, false, GridFamily::Refined, 5, 5, true);
  const auto& series = sg4.levels[0].error_series;
  const ErrorSample& half = series[(series.size() - 1) / 2];
  const double growth = series.back().e_inf / half.e_inf;
  v.require(growth > 2.0, "SG4 refined l5 E_inf(T) / E_inf(" + fmt("%.3f", half.time) + ") = " +
                              fmt("%.2f", growth) + " > 2");
  return v;
}

Verdict criterion11() {
  Verdict v;
  for (int level = 0; level <= 5; ++level) {
    const Grid raw = build_icosahedral_grid(level);
    v.require(raw.ncells() == 10 * (1 << (2 * level)) + 2, "l" + std::to_string(level) + " count " +
                                                                std::to_string(raw.ncells()));
  }
  for (int level = 2; level <= 5; ++level) {
    const Grid& g = grid(GridFamily::Uniform, level);
    int pentagons = 0;
    for (Index i = 0; i < g.ncells(); ++i) pentagons += g.edges_of(i).size() == 5 ? 1 : 0;
    const double area_err = std::abs(g.total_area() - 4 * kPi);
    const std::vector<Vec3> c = cell_centroids(g, uniform_density());
    double residual = 0.0;
    for (Index i = 0; i < g.ncells(); ++i) residual = std::max(residual, geodesic_distance(c[i], g.centers[i]));
    const std::string l = "l" + std::to_string(level) + " ";
    v.require(g.ncells() == cell_count_for_level(level), l + "cells " + std::to_string(g.ncells()));
    v.require(pentagons == 12, l + "pentagons " + std::to_string(pentagons));
    v.require(area_err <= 1e-10, l + "area err " + fmt("%.1e", area_err));
    v.require(residual < 1e-8, l + "Lloyd residual " + fmt("%.1e", residual));
  }
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string dir = "grids";
  std::vector<int> only;
  app.add_option("--grid-cache", dir, "Directory for cached grids")->capture_default_str();
  app.add_option("--only", only, "Run only these criteria")->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  g_grid_dir = dir;

  // Criterion 6 reads the mass log of every other run, so it goes last.
  const std::vector<std::pair<int, std::function<Verdict()>>> all = {
      {11, criterion11}, {7, criterion7}, {8, criterion8},  {9, criterion9},   {1, criterion1},
      {2, criterion2},   {3, criterion3}, {4, criterion4},  {5, criterion5},   {10, criterion10},
      {6, criterion6}};
  std::map<int, Verdict> verdicts;
  for (const auto& [id, fn] : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::fprintf(stderr, "  criterion %d done in %.1f s\n", id, s);
    verdicts[id] = v;
  }
  int failed = 0;
  for (const auto& [id, v] : verdicts) {
    std::printf("%s criterion %d: %s\n", v.pass ? "PASS" : "FAIL", id, v.detail.c_str());
    failed += v.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", int(verdicts.size()) - failed, verdicts.size());
  return failed == 0 ? 0 : 1;
}
