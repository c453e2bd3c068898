#pragma once

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "navint/interval.hpp"

namespace navint {

/// Centrally symmetric polytope { c + H b : ||b||_inf <= 1 } given by its
/// center c and generator matrix H (one generator per column).
class Zonotope {
 public:
  Zonotope(Eigen::VectorXd center, Eigen::MatrixXd generators)
      : center_(std::move(center)), generators_(std::move(generators)) {
    if (generators_.size() > 0 && generators_.rows() != center_.size()) {
      throw std::invalid_argument("Zonotope: generator rows must match center dimension");
    }
    if (generators_.size() == 0) {
      generators_.resize(center_.size(), 0);
    }
  }

  static Zonotope point(const Eigen::VectorXd& center) {
    return Zonotope(center, Eigen::MatrixXd(center.size(), 0));
  }

  /// Axis-aligned box: one generator per dimension with the given half-widths.
  static Zonotope box(const Eigen::VectorXd& center, const Eigen::VectorXd& half_widths) {
    if (half_widths.size() != center.size()) {
      throw std::invalid_argument("Zonotope::box: dimension mismatch");
    }
    return Zonotope(center, half_widths.cwiseAbs().asDiagonal());
  }

  int dim() const { return static_cast<int>(center_.size()); }
  int order() const { return static_cast<int>(generators_.cols()); }
  const Eigen::VectorXd& center() const { return center_; }
  const Eigen::MatrixXd& generators() const { return generators_; }

  /// Point realized by a specific generator weight vector b in [-1,1]^m.
  Eigen::VectorXd realize(const Eigen::VectorXd& b) const {
    if (b.size() != generators_.cols()) {
      throw std::invalid_argument("Zonotope::realize: weight dimension mismatch");
    }
    return center_ + generators_ * b;
  }

 private:
  Eigen::VectorXd center_;
  Eigen::MatrixXd generators_;
};

inline Zonotope minkowski_sum(const Zonotope& a, const Zonotope& b) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("minkowski_sum: dimension mismatch");
  }
  Eigen::MatrixXd gens(a.dim(), a.order() + b.order());
  gens.leftCols(a.order()) = a.generators();
  gens.rightCols(b.order()) = b.generators();
  return Zonotope(a.center() + b.center(), std::move(gens));
}

inline Zonotope linear_image(const Eigen::MatrixXd& map, const Zonotope& z) {
  if (map.cols() != z.dim()) {
    throw std::invalid_argument("linear_image: map columns must match zonotope dimension");
  }
  return Zonotope(map * z.center(), map * z.generators());
}

/// Per-dimension interval hull [c_i - sum_j |H_ij|, c_i + sum_j |H_ij|].
inline std::vector<Interval> interval_hull(const Zonotope& z) {
  const Eigen::VectorXd radius = z.generators().cwiseAbs().rowwise().sum();
  std::vector<Interval> hull;
  hull.reserve(static_cast<size_t>(z.dim()));
  for (int i = 0; i < z.dim(); ++i) {
    hull.emplace_back(z.center()(i) - radius(i), z.center()(i) + radius(i));
  }
  return hull;
}

/// Support value max_{x in Z} d.x — handy for containment checks.
inline double support(const Zonotope& z, const Eigen::VectorXd& direction) {
  if (direction.size() != z.dim()) {
    throw std::invalid_argument("support: direction dimension mismatch");
  }
  return direction.dot(z.center()) +
         (z.generators().transpose() * direction).cwiseAbs().sum();
}

/// Order reduction on a raw generator matrix: keep the q - n largest-norm
/// columns and over-approximate the rest by an axis-aligned box (n diagonal
/// generators holding the row sums of the dropped columns' absolute values).
/// The result has exactly q columns when reduction happens, preserves the
/// interval hull, and always contains the original set.
inline Eigen::MatrixXd reduce_generators(const Eigen::MatrixXd& gens, int q) {
  const int n = static_cast<int>(gens.rows());
  const int m = static_cast<int>(gens.cols());
  if (q < n) {
    throw std::invalid_argument("reduce_generators: order bound below dimension");
  }
  if (m <= q) {
    return gens;
  }

  // Zero columns carry nothing; discarding them may already satisfy the bound.
  std::vector<int> nonzero;
  nonzero.reserve(static_cast<size_t>(m));
  for (int j = 0; j < m; ++j) {
    if (gens.col(j).squaredNorm() > 0.0) {
      nonzero.push_back(j);
    }
  }
  if (static_cast<int>(nonzero.size()) <= q) {
    Eigen::MatrixXd out(n, nonzero.size());
    for (size_t k = 0; k < nonzero.size(); ++k) {
      out.col(static_cast<int>(k)) = gens.col(nonzero[k]);
    }
    return out;
  }

  // Deterministic selection: norm descending, original index as tie-break.
  Eigen::VectorXd norms(m);
  for (int j = 0; j < m; ++j) {
    norms(j) = gens.col(j).squaredNorm();
  }
  const auto larger = [&norms](int a, int b) {
    if (norms(a) != norms(b)) return norms(a) > norms(b);
    return a < b;
  };
  const int keep = q - n;
  std::vector<int> idx = nonzero;
  if (keep > 0) {
    std::nth_element(idx.begin(), idx.begin() + keep, idx.end(), larger);
  }
  std::vector<int> kept(idx.begin(), idx.begin() + keep);
  std::sort(kept.begin(), kept.end());

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, q);
  for (int k = 0; k < keep; ++k) {
    out.col(k) = gens.col(kept[k]);
  }
  Eigen::VectorXd box = Eigen::VectorXd::Zero(n);
  for (size_t k = static_cast<size_t>(keep); k < idx.size(); ++k) {
    box += gens.col(idx[k]).cwiseAbs();
  }
  out.block(0, keep, n, n).diagonal() = box;
  return out;
}

inline Zonotope reduce(const Zonotope& z, int q) {
  return Zonotope(z.center(), reduce_generators(z.generators(), q));
}

}  // namespace navint
