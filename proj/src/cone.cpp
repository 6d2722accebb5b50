#include "conepush/cone.hpp"

#include "conepush/nnls.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace conepush {

namespace {

constexpr double kParallelTol = 1e-12;
constexpr double kFacetSideTol = 1e-12;

Eigen::MatrixXd generator_matrix(const std::vector<Vec3>& gens) {
  Eigen::MatrixXd g(3, static_cast<Eigen::Index>(gens.size()));
  for (std::size_t i = 0; i < gens.size(); ++i) g.col(static_cast<Eigen::Index>(i)) = gens[i];
  return g;
}

}  // namespace

PolyhedralCone::PolyhedralCone(std::span<const Vec3> generators) {
  for (const Vec3& g : generators) {
    if (!g.allFinite()) throw std::invalid_argument("cone generator is not finite");
    const double n = g.norm();
    if (n == 0.0) continue;
    const Vec3 u = g / n;
    bool duplicate = false;
    for (const Vec3& e : generators_) {
      if (e.dot(u) > 1.0 - kParallelTol) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) generators_.push_back(u);
  }
  if (generators_.empty()) return;

  const Eigen::MatrixXd g = generator_matrix(generators_);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(g);
  const auto& sv = svd.singularValues();
  rank_ = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > 1e-10 * sv[0]) ++rank_;
  if (rank_ < 3) return;

  // Double description in 3-D: a pair of generators spans a facet iff every
  // other generator lies on one side of the plane through them.
  const std::size_t n = generators_.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      Vec3 normal = generators_[i].cross(generators_[j]);
      const double len = normal.norm();
      if (len < kParallelTol) continue;
      normal /= len;
      bool all_pos = true;
      bool all_neg = true;
      for (std::size_t k = 0; k < n; ++k) {
        const double s = normal.dot(generators_[k]);
        if (s < -kFacetSideTol) all_pos = false;
        if (s > kFacetSideTol) all_neg = false;
      }
      if (all_pos == all_neg) continue;  // straddles, or everything coplanar
      if (all_neg) normal = -normal;
      bool duplicate = false;
      for (const Vec3& f : facets_) {
        if (f.dot(normal) > 1.0 - kParallelTol) {
          duplicate = true;
          break;
        }
      }
      if (!duplicate) facets_.push_back(normal);
    }
  }
  if (facets_.size() < 3) facets_.clear();
}

Vec3 PolyhedralCone::central_direction() const {
  Vec3 s = Vec3::Zero();
  for (const Vec3& g : generators_) s += g;
  const double n = s.norm();
  return n > 0.0 ? Vec3(s / n) : s;
}

double cone_residual(const PolyhedralCone& c, const Vec3& x) {
  const double n = x.norm();
  if (n == 0.0) return 0.0;
  if (c.empty()) return 1.0;
  return nnls(generator_matrix(c.generators()), x / n).residual;
}

double cone_margin(const PolyhedralCone& c, const Vec3& x) {
  const double n = x.norm();
  if (n == 0.0) return 0.0;
  if (c.degenerate()) return -cone_residual(c, x);
  const Vec3 u = x / n;
  double m = std::numeric_limits<double>::infinity();
  for (const Vec3& f : c.facet_normals()) m = std::min(m, f.dot(u));
  return m;
}

bool cone_contains(const PolyhedralCone& c, const Vec3& x, double tol) {
  if (x.norm() == 0.0) return true;
  if (c.empty()) return false;
  if (!c.degenerate()) return cone_margin(c, x) >= -tol;
  return cone_residual(c, x) <= tol;
}

Vec3 cone_project(const PolyhedralCone& c, const Vec3& x, const Vec3& metric_weights) {
  if (c.empty()) throw std::invalid_argument("cone_project on an empty cone");
  if (x.norm() == 0.0) throw std::invalid_argument("cone_project of the zero vector");
  if ((metric_weights.array() <= 0.0).any())
    throw std::invalid_argument("cone_project weights must be positive");

  const Vec3 w = metric_weights;
  auto to_unit_weighted = [&](const Vec3& y) -> Vec3 { return y / w.cwiseProduct(y).norm(); };

  if (cone_contains(c, x)) return to_unit_weighted(x);

  // Work in the weighted space, where the metric is Euclidean. The closest
  // point of (cone ∩ sphere) to an exterior direction lies on an extreme ray
  // or on the arc between two generators.
  const Vec3 target = w.cwiseProduct(x).normalized();
  std::vector<Vec3> gw;
  gw.reserve(c.generators().size());
  for (const Vec3& g : c.generators()) gw.push_back(w.cwiseProduct(g).normalized());

  Vec3 best = gw.front();
  double best_cos = -2.0;
  auto consider = [&](const Vec3& cand) {
    const double cs = cand.dot(target);
    if (cs > best_cos + 1e-15) {
      best_cos = cs;
      best = cand;
    }
  };

  for (std::size_t i = 0; i < gw.size(); ++i) consider(gw[i]);
  for (std::size_t i = 0; i < gw.size(); ++i) {
    for (std::size_t j = i + 1; j < gw.size(); ++j) {
      Eigen::Matrix<double, 3, 2> m;
      m.col(0) = gw[i];
      m.col(1) = gw[j];
      const Eigen::Matrix2d gram = m.transpose() * m;
      if (std::abs(gram.determinant()) < 1e-14) continue;
      const Eigen::Vector2d coef = gram.ldlt().solve(m.transpose() * target);
      if (coef[0] <= 0.0 || coef[1] <= 0.0) continue;
      const Vec3 y = m * coef;
      if (y.norm() == 0.0) continue;
      consider(y.normalized());
    }
  }
  return to_unit_weighted(best.cwiseQuotient(w));
}

}  // namespace conepush
