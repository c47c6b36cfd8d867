#pragma once

// Linear least-squares reconstruction of the tangent velocity near an edge
// from edge-normal samples on the edges of its two cells:
//
//   u(x, y) = a0 + a1 x + a2 y,   a_k in R^2,
//
// fit on the gnomonic plane centered at the edge's own sample point with
// inverse squared distance weights. Samples that coincide with the plane's
// origin are imposed exactly instead of weighted.

#include <algorithm>
#include <array>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "scvtfv/advection.hpp"
#include "scvtfv/errors.hpp"
#include "scvtfv/geometry.hpp"
#include "scvtfv/grid.hpp"
#include "scvtfv/reconstruction.hpp"

namespace scvtfv {

inline constexpr double kCoincidentSample = 1e-12;

enum class SamplePoints { VoronoiMidpoint, DelaunayCrossing };

using VelocityCoeffs = Eigen::Matrix<double, 6, 1>;  // a0x a0y a1x a1y a2x a2y

inline Eigen::Matrix<double, 2, 6> velocity_basis(const Vec2& p) {
  Eigen::Matrix<double, 2, 6> b = Eigen::Matrix<double, 2, 6>::Zero();
  b(0, 0) = b(1, 1) = 1.0;
  b(0, 2) = b(1, 3) = p.x();
  b(0, 4) = b(1, 5) = p.y();
  return b;
}

inline Vec2 evaluate_velocity(const VelocityCoeffs& a, const Vec2& p) { return velocity_basis(p) * a; }

// Linear map (6 x n) from normal samples u_l = u(xy_l) . nhat_l to the
// coefficients of the velocity model.
inline Eigen::MatrixXd velocity_fit_map(std::span<const Vec2> xy, std::span<const Vec2> nhat) {
  const int n = int(xy.size());
  std::vector<int> exact, weighted;
  for (int l = 0; l < n; ++l) (xy[l].norm() < kCoincidentSample ? exact : weighted).push_back(l);
  const auto row = [&](int l) {
    Eigen::Matrix<double, 1, 6> r = nhat[l].transpose() * velocity_basis(xy[l]);
    return r;
  };

  // Exact rows C a = d; a = C+ d + N z with N spanning ker C.
  Eigen::MatrixXd cpinv = Eigen::MatrixXd::Zero(6, exact.size());
  Eigen::MatrixXd null = Eigen::MatrixXd::Identity(6, 6);
  int crank = 0;
  if (!exact.empty()) {
    Eigen::MatrixXd c(exact.size(), 6);
    for (std::size_t r = 0; r < exact.size(); ++r) c.row(r) = row(exact[r]);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(c, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    for (Eigen::Index k = 0; k < s.size(); ++k) crank += s(k) > kSvdCutoff * s(0) ? 1 : 0;
    cpinv = detail::pseudo_inverse(c).matrix;
    null = svd.matrixV().rightCols(6 - crank);
  }

  Eigen::MatrixXd wa(weighted.size(), 6);
  Eigen::VectorXd w(weighted.size());
  for (std::size_t r = 0; r < weighted.size(); ++r) {
    w(r) = 1.0 / xy[weighted[r]].squaredNorm();
    wa.row(r) = w(r) * row(weighted[r]);
  }
  const detail::Pinv reduced = detail::pseudo_inverse(wa * null);
  if (crank + reduced.rank < 6) {
    throw RankDeficientSamples("velocity samples have rank " + std::to_string(crank + reduced.rank) +
                               " < 6");
  }
  // z = P W (b - A C+ d), P = (W A N)+
  const Eigen::MatrixXd pz = reduced.matrix;
  Eigen::MatrixXd map = Eigen::MatrixXd::Zero(6, n);
  const Eigen::MatrixXd from_b = null * pz * w.asDiagonal();  // 6 x |weighted|
  const Eigen::MatrixXd from_d = cpinv - null * pz * wa * cpinv;
  for (std::size_t r = 0; r < weighted.size(); ++r) map.col(weighted[r]) = from_b.col(r);
  for (std::size_t r = 0; r < exact.size(); ++r) map.col(exact[r]) = from_d.col(r);
  return map;
}

// Geometry of the samples used for one edge.
struct EdgeSampleSet {
  TangentFrame frame;
  std::vector<Index> edges;  // EC(i) u EC(j), e first
  std::vector<Vec2> xy;
  std::vector<Vec2> nhat;
};

inline Vec3 sample_point(const Grid& grid, Index e, SamplePoints where) {
  return where == SamplePoints::VoronoiMidpoint ? grid.edge_midpoints[e] : grid.edge_points[e];
}

inline Vec2 projected_normal_at(const TangentFrame& frame, const Vec3& at, const Vec3& n) {
  const Vec2 v = project_vector_to_tangent(frame, at, n);
  return v / v.norm();
}

inline EdgeSampleSet edge_sample_set(const Grid& grid, Index e, SamplePoints where) {
  EdgeSampleSet s;
  s.frame = TangentFrame::at(sample_point(grid, e, where));
  s.edges.push_back(e);
  for (int side = 0; side < 2; ++side) {
    for (Index l : grid.edges_of(grid.edge_cells[e][side])) {
      if (std::find(s.edges.begin(), s.edges.end(), l) == s.edges.end()) s.edges.push_back(l);
    }
  }
  for (Index l : s.edges) {
    const Vec3 p = sample_point(grid, l, where);
    s.xy.push_back(project_to_tangent(s.frame, p));
    s.nhat.push_back(projected_normal_at(s.frame, p, grid.edge_normals[l]));
  }
  return s;
}

// Precomputed per-edge maps from edge-normal samples to normal velocities at
// the Voronoi midpoint and at the Gauss points of the edge.
class WindReconstruction {
 public:
  WindReconstruction() = default;

  WindReconstruction(const Grid& grid, int npoints, SamplePoints where = SamplePoints::VoronoiMidpoint)
      : npoints_(npoints), where_(where) {
    if (npoints != 1 && npoints != 2) throw Error("wind reconstruction supports 1 or 2 points");
    const Index ne = grid.nedges();
    std::vector<EdgeSampleSet> sets(ne);
    std::vector<std::vector<double>> rows(ne);
#pragma omp parallel for schedule(dynamic, 64)
    for (Index e = 0; e < ne; ++e) {
      sets[e] = edge_sample_set(grid, e, where);
      const EdgeSampleSet& s = sets[e];
      const Eigen::MatrixXd map = velocity_fit_map(s.xy, s.nhat);
      const Vec3& n = grid.edge_normals[e];
      const Vec3& va = grid.vertices[grid.edge_vertices[e][0]];
      const Vec3& vb = grid.vertices[grid.edge_vertices[e][1]];
      const ArcQuadrature arc = gauss_arc_points(va, vb, npoints);
      std::vector<Vec3> queries = {grid.edge_midpoints[e]};
      for (int l = 0; l < npoints; ++l) queries.push_back(arc.points[l]);
      const int m = int(s.edges.size());
      rows[e].resize(queries.size() * m);
      for (std::size_t q = 0; q < queries.size(); ++q) {
        const Vec2 p = project_to_tangent(s.frame, queries[q]);
        const Vec2 nq = projected_normal_at(s.frame, queries[q], n);
        const Eigen::RowVectorXd r = nq.transpose() * velocity_basis(p) * map;
        for (int k = 0; k < m; ++k) rows[e][q * m + k] = r(k);
      }
    }
    offsets_.assign(ne + 1, 0);
    for (Index e = 0; e < ne; ++e) offsets_[e + 1] = offsets_[e] + Index(sets[e].edges.size());
    members_.resize(offsets_.back());
    weights_.resize(std::size_t(offsets_.back()) * (1 + npoints));
    for (Index e = 0; e < ne; ++e) {
      std::copy(sets[e].edges.begin(), sets[e].edges.end(), members_.begin() + offsets_[e]);
      std::copy(rows[e].begin(), rows[e].end(), weights_.begin() + std::size_t(offsets_[e]) * (1 + npoints));
    }
  }

  int npoints() const { return npoints_; }
  SamplePoints sample_points() const { return where_; }

  // samples[l] = u(x_l) . n_l for every edge l.
  void reconstruct(std::span<const double> samples, EdgeWinds& out) const {
    const Index ne = Index(offsets_.size()) - 1;
    out.npoints = npoints_;
    out.normal.resize(ne);
    out.quad.resize(ne);
#pragma omp parallel for schedule(static)
    for (Index e = 0; e < ne; ++e) {
      const Index base = offsets_[e];
      const Index m = offsets_[e + 1] - base;
      const double* w = &weights_[std::size_t(base) * (1 + npoints_)];
      std::array<double, 3> v{};
      for (int q = 0; q <= npoints_; ++q) {
        double s = 0.0;
        for (Index k = 0; k < m; ++k) s += w[q * m + k] * samples[members_[base + k]];
        v[q] = s;
      }
      out.normal[e] = v[0];
      out.quad[e] = {v[1], npoints_ == 2 ? v[2] : v[1]};
    }
  }

 private:
  int npoints_ = 1;
  SamplePoints where_ = SamplePoints::VoronoiMidpoint;
  std::vector<Index> offsets_;
  std::vector<Index> members_;
  std::vector<double> weights_;
};

}  // namespace scvtfv
