#pragma once

// Per-cell polynomial reconstruction on gnomonic tangent planes.
//
// Two families share one storage format: for every cell a dense matrix maps
// the stencil mean values (center cell first) to polynomial coefficients in
// the graded monomial basis 1, x, y, x^2, xy, y^2, x^3, x^2y, xy^2, y^3 about
// the cell center's projection (the origin of its frame).
//
//  * SG: quadratic fit that interpolates the neighbor means at the projected
//    neighbor centers, with c0 pinned to the cell mean.
//  * OG (degree 1..3): k-exact fit of the stencil cell means with
//    inverse-squared-distance weights; the center-cell mean is an exact
//    constraint, eliminated before the least-squares solve.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "scvtfv/errors.hpp"
#include "scvtfv/geometry.hpp"
#include "scvtfv/grid.hpp"
#include "scvtfv/quadrature.hpp"

namespace scvtfv {

inline constexpr int kMaxPolyDegree = 3;
inline constexpr int kMaxCoeffs = 10;
inline constexpr double kSvdCutoff = 1e-12;

inline constexpr int coeff_count(int degree) { return (degree + 1) * (degree + 2) / 2; }

// Position of x^m y^n in the graded basis.
inline constexpr int monomial_index(int m, int n) {
  const int d = m + n;
  return d * (d + 1) / 2 + n;
}

enum class Flavor { SG, OG2, OG3, OG4 };

inline int flavor_degree(Flavor f) {
  switch (f) {
    case Flavor::SG: return 2;
    case Flavor::OG2: return 1;
    case Flavor::OG3: return 2;
    case Flavor::OG4: return 3;
  }
  return 0;
}

struct PolyCoeffs {
  int degree = 0;
  std::array<double, kMaxCoeffs> c{};
};

// Nested Horner evaluation: sum over n of y^n * (sum over m of c_{m,n} x^m).
inline double evaluate_poly(const PolyCoeffs& p, double x, double y) {
  double result = 0.0;
  for (int n = p.degree; n >= 0; --n) {
    double inner = 0.0;
    for (int m = p.degree - n; m >= 0; --m) inner = inner * x + p.c[monomial_index(m, n)];
    result = result * y + inner;
  }
  return result;
}

// n^T H n for the Hessian H = [[2 c3, c4], [c4, 2 c5]] of a quadratic fit.
inline double sg_directional_second_derivative(const PolyCoeffs& p, const Vec2& n) {
  return 2.0 * p.c[3] * n.x() * n.x() + 2.0 * p.c[4] * n.x() * n.y() + 2.0 * p.c[5] * n.y() * n.y();
}

// ---------------------------------------------------------------------------
// Stencils

struct Stencil {
  Index center = 0;
  std::vector<Index> members;  // center first, then ascending discovery order
};

inline Stencil first_level_stencil(const Grid& grid, Index i) {
  Stencil s;
  s.center = i;
  s.members.push_back(i);
  for (Index k : grid.neighbors_of(i)) s.members.push_back(k);
  return s;
}

inline Stencil second_level_stencil(const Grid& grid, Index i) {
  Stencil s = first_level_stencil(grid, i);
  const std::size_t first = s.members.size();
  for (std::size_t a = 1; a < first; ++a) {
    for (Index k : grid.neighbors_of(s.members[a])) {
      if (std::find(s.members.begin(), s.members.end(), k) == s.members.end()) {
        s.members.push_back(k);
      }
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Monomial averages

struct MonomialAverages {
  int max_degree = 0;
  std::array<double, kMaxCoeffs> values{};  // same ordering as PolyCoeffs
  double area = 0.0;                        // planar area of the polygon
};

// Averages of x^m y^n over a counterclockwise planar polygon, from the boundary
// integral of x^(m+1) y^n / (m+1) dy with Gauss-Legendre rules exact for the
// integrand.
inline MonomialAverages polygon_monomial_averages(std::span<const Vec2> poly, int max_degree) {
  if (max_degree < 0 || max_degree > kMaxPolyDegree) {
    throw Error("monomial averages support degrees 0..3");
  }
  MonomialAverages out;
  out.max_degree = max_degree;
  std::array<double, kMaxCoeffs> integral{};
  const std::size_t nv = poly.size();
  for (int d = 0; d <= max_degree; ++d) {
    const LineRule rule = gauss_legendre_unit((d + 3) / 2);  // ceil((d + 2) / 2)
    for (int n = 0; n <= d; ++n) {
      const int m = d - n;
      double sum = 0.0;
      for (std::size_t k = 0; k < nv; ++k) {
        const Vec2& a = poly[k];
        const Vec2& b = poly[(k + 1) % nv];
        const Vec2 delta = b - a;
        double seg = 0.0;
        for (int q = 0; q < rule.size; ++q) {
          const Vec2 p = a + rule.nodes[q] * delta;
          seg += rule.weights[q] * std::pow(p.x(), m + 1) * std::pow(p.y(), n);
        }
        sum += seg * delta.y();
      }
      integral[monomial_index(m, n)] = sum / (m + 1);
    }
  }
  out.area = integral[0];
  if (!(out.area > 0.0)) throw DegeneratePolygon("projected polygon has no positive area");
  for (int j = 0; j < coeff_count(max_degree); ++j) out.values[j] = integral[j] / out.area;
  out.values[0] = 1.0;
  return out;
}

// Averages of the monomials of `frame` over cell k, treating its gnomonic
// image as a planar polygon.
inline MonomialAverages compute_monomial_averages(const Grid& grid, const TangentFrame& frame,
                                                  Index k, int max_degree) {
  std::vector<Vec2> poly;
  for (Index v : grid.vertices_of(k)) poly.push_back(project_to_tangent(frame, grid.vertices[v]));
  return polygon_monomial_averages(poly, max_degree);
}

// ---------------------------------------------------------------------------
// Operators

struct CellReconstruction {
  std::vector<Index> members;                      // stencil, center first
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> map;  // ncoeff x members
};

namespace detail {

struct Pinv {
  Eigen::MatrixXd matrix;
  int rank = 0;
};

// Minimum-norm least-squares pseudoinverse with a relative singular-value cutoff.
inline Pinv pseudo_inverse(const Eigen::MatrixXd& a, double cutoff = kSvdCutoff) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  Pinv out;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
  const double tol = s.size() > 0 ? cutoff * s(0) : 0.0;
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    if (s(k) > tol) {
      inv(k) = 1.0 / s(k);
      ++out.rank;
    }
  }
  out.matrix = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
  return out;
}

}  // namespace detail

// Quadratic point-value fit over the first-level stencil.
inline CellReconstruction build_sg_cell(const Grid& grid, Index i) {
  const Stencil st = first_level_stencil(grid, i);
  const int n = int(st.members.size()) - 1;
  if (n < 5) throw StencilTooSmall("SG fit needs at least five neighbors");
  const TangentFrame& frame = grid.cell_frames[i];
  Eigen::MatrixXd a(n, 5);
  for (int r = 0; r < n; ++r) {
    const Vec2 p = project_to_tangent(frame, grid.centers[st.members[r + 1]]);
    a.row(r) << p.x(), p.y(), p.x() * p.x(), p.x() * p.y(), p.y() * p.y();
  }
  const detail::Pinv pinv = detail::pseudo_inverse(a);
  if (pinv.rank < 5) {
    throw RankDeficientStencil("SG stencil of cell " + std::to_string(i) + " is rank deficient");
  }
  CellReconstruction out;
  out.members = st.members;
  out.map.setZero(6, n + 1);
  out.map(0, 0) = 1.0;
  out.map.block(1, 1, 5, n) = pinv.matrix;
  out.map.block(1, 0, 5, 1) = -pinv.matrix.rowwise().sum();
  return out;
}

// k-exact mean-preserving fit of degree 1, 2 or 3.
inline CellReconstruction build_og_cell(const Grid& grid, Index i, int degree) {
  if (degree < 1 || degree > kMaxPolyDegree) throw Error("OG degree must be 1, 2 or 3");
  const Stencil st = degree == 1 ? first_level_stencil(grid, i) : second_level_stencil(grid, i);
  const int ncoeff = coeff_count(degree);
  const int n = int(st.members.size()) - 1;
  if (n < ncoeff - 1) {
    throw StencilTooSmall("OG stencil of cell " + std::to_string(i) + " is too small");
  }
  const TangentFrame& frame = grid.cell_frames[i];
  const MonomialAverages own = compute_monomial_averages(grid, frame, i, degree);

  // Rows w_k * (A_k[1:] - A_k[0] * own[1:]) after eliminating c0 with the
  // exact center-cell constraint; A_k[0] = 1.
  Eigen::MatrixXd reduced(n, ncoeff - 1);
  Eigen::VectorXd weight(n);
  for (int r = 0; r < n; ++r) {
    const Index k = st.members[r + 1];
    const MonomialAverages avg = compute_monomial_averages(grid, frame, k, degree);
    const Vec2 p = project_to_tangent(frame, grid.centers[k]);
    weight(r) = 1.0 / p.squaredNorm();
    for (int j = 1; j < ncoeff; ++j) reduced(r, j - 1) = weight(r) * (avg.values[j] - own.values[j]);
  }
  const detail::Pinv pinv = detail::pseudo_inverse(reduced);
  if (pinv.rank < ncoeff - 1) {
    throw RankDeficientStencil("OG stencil of cell " + std::to_string(i) + " is rank deficient");
  }
  // c_rest = Q (phi_k - phi_i), Q = pinv * diag(w); c0 = phi_i - own[1:] . c_rest
  const Eigen::MatrixXd q = pinv.matrix * weight.asDiagonal();
  Eigen::RowVectorXd own_rest(ncoeff - 1);
  for (int j = 1; j < ncoeff; ++j) own_rest(j - 1) = own.values[j];

  CellReconstruction out;
  out.members = st.members;
  out.map.setZero(ncoeff, n + 1);
  out.map.block(1, 1, ncoeff - 1, n) = q;
  out.map.block(1, 0, ncoeff - 1, 1) = -q.rowwise().sum();
  const Eigen::RowVectorXd c0_members = -own_rest * q;
  out.map.block(0, 1, 1, n) = c0_members;
  out.map(0, 0) = 1.0 - c0_members.sum();
  return out;
}

// All per-cell maps of one flavor, flattened for repeated application.
class ReconstructionOperator {
 public:
  ReconstructionOperator() = default;

  ReconstructionOperator(const Grid& grid, Flavor flavor) : flavor_(flavor) {
    degree_ = flavor_degree(flavor);
    ncoeff_ = coeff_count(degree_);
    const Index nc = grid.ncells();
    std::vector<CellReconstruction> cells(nc);
#pragma omp parallel for schedule(dynamic, 64)
    for (Index i = 0; i < nc; ++i) {
      cells[i] = flavor == Flavor::SG ? build_sg_cell(grid, i) : build_og_cell(grid, i, degree_);
    }
    offsets_.assign(nc + 1, 0);
    for (Index i = 0; i < nc; ++i) offsets_[i + 1] = offsets_[i] + Index(cells[i].members.size());
    members_.resize(offsets_.back());
    weights_.resize(std::size_t(offsets_.back()) * ncoeff_);
    for (Index i = 0; i < nc; ++i) {
      const Index base = offsets_[i];
      const Index len = offsets_[i + 1] - base;
      std::copy(cells[i].members.begin(), cells[i].members.end(), members_.begin() + base);
      // Stored member-major: ncoeff weights per member.
      for (Index s = 0; s < len; ++s) {
        for (int j = 0; j < ncoeff_; ++j) {
          weights_[std::size_t(base + s) * ncoeff_ + j] = cells[i].map(j, s);
        }
      }
    }
  }

  Flavor flavor() const { return flavor_; }
  int degree() const { return degree_; }
  int ncoeff() const { return ncoeff_; }
  Index ncells() const { return Index(offsets_.size()) - 1; }

  std::span<const Index> stencil(Index i) const {
    return {members_.data() + offsets_[i], std::size_t(offsets_[i + 1] - offsets_[i])};
  }

  PolyCoeffs apply(Index i, std::span<const double> means) const {
    PolyCoeffs p;
    p.degree = degree_;
    for (Index s = offsets_[i]; s < offsets_[i + 1]; ++s) {
      const double v = means[members_[s]];
      const double* w = &weights_[std::size_t(s) * ncoeff_];
      for (int j = 0; j < ncoeff_; ++j) p.c[j] += w[j] * v;
    }
    return p;
  }

  void apply_all(std::span<const double> means, std::vector<PolyCoeffs>& out) const {
    out.resize(ncells());
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < ncells(); ++i) out[i] = apply(i, means);
  }

 private:
  Flavor flavor_ = Flavor::SG;
  int degree_ = 0;
  int ncoeff_ = 0;
  std::vector<Index> offsets_;
  std::vector<Index> members_;
  std::vector<double> weights_;
};

inline ReconstructionOperator build_sg_operator(const Grid& grid) {
  return ReconstructionOperator(grid, Flavor::SG);
}

inline ReconstructionOperator build_og_operator(const Grid& grid, int degree) {
  switch (degree) {
    case 1: return ReconstructionOperator(grid, Flavor::OG2);
    case 2: return ReconstructionOperator(grid, Flavor::OG3);
    case 3: return ReconstructionOperator(grid, Flavor::OG4);
    default: throw Error("OG degree must be 1, 2 or 3");
  }
}

}  // namespace scvtfv
