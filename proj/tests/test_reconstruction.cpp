#include <cmath>
#include <random>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "scvtfv/reconstruction.hpp"
#include "test_support.hpp"

using namespace scvtfv;
using scvtfv::testing::refined_grid;
using scvtfv::testing::uniform_grid;

TEST(EvaluatePoly, GradedBasis) {
  PolyCoeffs p;
  p.degree = 2;
  // 1 + 2x + 3y + 4x^2 + 5xy + 6y^2
  for (int j = 0; j < 6; ++j) p.c[j] = j + 1.0;
  EXPECT_DOUBLE_EQ(evaluate_poly(p, 0.0, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(evaluate_poly(p, 1.0, 0.0), 7.0);
  EXPECT_DOUBLE_EQ(evaluate_poly(p, 0.0, 1.0), 10.0);
  EXPECT_DOUBLE_EQ(evaluate_poly(p, 2.0, -1.0), 1 + 4 - 3 + 16 - 10 + 6);
  EXPECT_EQ(monomial_index(0, 3), 9);
  EXPECT_EQ(monomial_index(3, 0), 6);
  EXPECT_EQ(monomial_index(1, 1), 4);
}

TEST(MonomialAverages, UnitSquare) {
  const std::vector<Vec2> sq = {Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)};
  const MonomialAverages a = polygon_monomial_averages(sq, 3);
  EXPECT_NEAR(a.area, 1.0, 1e-15);
  EXPECT_NEAR(a.values[monomial_index(0, 0)], 1.0, 1e-15);
  EXPECT_NEAR(a.values[monomial_index(1, 0)], 0.5, 1e-15);
  EXPECT_NEAR(a.values[monomial_index(2, 0)], 1.0 / 3, 1e-15);
  EXPECT_NEAR(a.values[monomial_index(1, 1)], 0.25, 1e-15);
  EXPECT_NEAR(a.values[monomial_index(3, 0)], 0.25, 1e-15);
  EXPECT_NEAR(a.values[monomial_index(2, 1)], 1.0 / 6, 1e-15);
  EXPECT_THROW(polygon_monomial_averages(sq, 4), Error);
}

TEST(MonomialAverages, TriangleCentroid) {
  const std::vector<Vec2> tri = {Vec2(0, 0), Vec2(3, 0), Vec2(0, 3)};
  const MonomialAverages a = polygon_monomial_averages(tri, 2);
  EXPECT_NEAR(a.area, 4.5, 1e-14);
  EXPECT_NEAR(a.values[1], 1.0, 1e-14);
  EXPECT_NEAR(a.values[2], 1.0, 1e-14);
  // <x^2> over the triangle = 9/6.
  EXPECT_NEAR(a.values[3], 1.5, 1e-14);
}

namespace {

// Exact cell means of p (defined in cell i's tangent plane) over every member
// of cell i's stencil.
std::vector<double> synthesized_means(const Grid& g, const ReconstructionOperator& op, Index i,
                                      const PolyCoeffs& p) {
  std::vector<double> means(g.ncells(), 0.0);
  for (Index k : op.stencil(i)) {
    const MonomialAverages a = compute_monomial_averages(g, g.cell_frames[i], k, p.degree);
    double v = 0.0;
    for (int j = 0; j < coeff_count(p.degree); ++j) v += p.c[j] * a.values[j];
    means[k] = v;
  }
  return means;
}

}  // namespace

class KExactness : public ::testing::TestWithParam<std::tuple<int, int>> {};

TEST_P(KExactness, RecoversRandomPolynomialsOnEveryCell) {
  const auto [family, degree] = GetParam();
  const Grid& g = family == 0 ? uniform_grid(3) : refined_grid(3);
  const ReconstructionOperator op = build_og_operator(g, degree);
  std::mt19937_64 rng(11 + degree);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0, worst_mean = 0.0;
  for (Index i = 0; i < g.ncells(); ++i) {
    PolyCoeffs p;
    p.degree = degree;
    for (int j = 0; j < coeff_count(degree); ++j) p.c[j] = u(rng);
    const std::vector<double> means = synthesized_means(g, op, i, p);
    const PolyCoeffs r = op.apply(i, means);
    for (int j = 0; j < coeff_count(degree); ++j) worst = std::max(worst, std::abs(r.c[j] - p.c[j]));
    const MonomialAverages own = compute_monomial_averages(g, g.cell_frames[i], i, degree);
    double mean = 0.0;
    for (int j = 0; j < coeff_count(degree); ++j) mean += r.c[j] * own.values[j];
    worst_mean = std::max(worst_mean, std::abs(mean - means[i]));
  }
  EXPECT_LT(worst, 1e-9);
  EXPECT_LT(worst_mean, 1e-12);
}

INSTANTIATE_TEST_SUITE_P(OgDegrees, KExactness,
                         ::testing::Combine(::testing::Values(0, 1), ::testing::Values(1, 2, 3)));

TEST(OgReconstruction, MeanConservedForArbitraryData) {
  const Grid& g = uniform_grid(3);
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> means(g.ncells());
  for (double& m : means) m = u(rng);
  for (int degree : {1, 2, 3}) {
    const ReconstructionOperator op = build_og_operator(g, degree);
    for (Index i = 0; i < g.ncells(); i += 7) {
      const PolyCoeffs r = op.apply(i, means);
      const MonomialAverages own = compute_monomial_averages(g, g.cell_frames[i], i, degree);
      double mean = 0.0;
      for (int j = 0; j < coeff_count(degree); ++j) mean += r.c[j] * own.values[j];
      EXPECT_NEAR(mean, means[i], 1e-12);
    }
  }
}

TEST(OgReconstruction, ConstantDataGivesConstantPolynomial) {
  const Grid& g = uniform_grid(2);
  const std::vector<double> means(g.ncells(), 2.5);
  for (int degree : {1, 2, 3}) {
    const ReconstructionOperator op = build_og_operator(g, degree);
    for (Index i = 0; i < g.ncells(); ++i) {
      const PolyCoeffs r = op.apply(i, means);
      EXPECT_NEAR(r.c[0], 2.5, 1e-12);
      for (int j = 1; j < coeff_count(degree); ++j) EXPECT_NEAR(r.c[j], 0.0, 1e-9);
    }
  }
}

TEST(OgReconstruction, StencilSizes) {
  const Grid& g = uniform_grid(3);
  const ReconstructionOperator op1 = build_og_operator(g, 1);
  const ReconstructionOperator op2 = build_og_operator(g, 2);
  for (Index i = 0; i < g.ncells(); ++i) {
    const std::size_t nb = g.neighbors_of(i).size();
    EXPECT_EQ(op1.stencil(i).size(), nb + 1);
    EXPECT_EQ(op1.stencil(i)[0], i);
    std::set<Index> ring2 = {i};
    for (Index k : g.neighbors_of(i)) {
      ring2.insert(k);
      for (Index m : g.neighbors_of(k)) ring2.insert(m);
    }
    EXPECT_EQ(op2.stencil(i).size(), ring2.size());
    EXPECT_LE(op2.stencil(i).size(), 19u);
  }
  EXPECT_THROW(build_og_operator(g, 4), Error);
}

TEST(SgReconstruction, ExactForQuadraticPointValues) {
  const Grid& g = uniform_grid(3);
  const ReconstructionOperator op = build_sg_operator(g);
  EXPECT_EQ(op.ncoeff(), 6);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (Index i = 0; i < g.ncells(); ++i) {
    PolyCoeffs p;
    p.degree = 2;
    for (int j = 0; j < 6; ++j) p.c[j] = u(rng);
    std::vector<double> vals(g.ncells(), 0.0);
    for (Index k : op.stencil(i)) {
      const Vec2 xy = project_to_tangent(g.cell_frames[i], g.centers[k]);
      vals[k] = evaluate_poly(p, xy.x(), xy.y());
    }
    const PolyCoeffs r = op.apply(i, vals);
    for (int j = 0; j < 6; ++j) EXPECT_NEAR(r.c[j], p.c[j], 1e-9) << "cell " << i << " coeff " << j;
  }
}

TEST(SgReconstruction, DirectionalSecondDerivative) {
  PolyCoeffs p;
  p.degree = 2;
  p.c[3] = 1.0;  // x^2
  p.c[4] = 2.0;  // xy
  p.c[5] = 3.0;  // y^2
  EXPECT_DOUBLE_EQ(sg_directional_second_derivative(p, Vec2(1, 0)), 2.0);
  EXPECT_DOUBLE_EQ(sg_directional_second_derivative(p, Vec2(0, 1)), 6.0);
  const Vec2 d = Vec2(1, 1) / std::sqrt(2.0);
  EXPECT_NEAR(sg_directional_second_derivative(p, d), 0.5 * (2 + 4 + 6), 1e-14);
}
