#pragma once

// Finitely generated convex cones in 3-space. Used both for wrench cones
// (pusher friction cones) and for twist cones (robust motion cones).

#include "conepush/geom.hpp"

#include <span>
#include <vector>

namespace conepush {

/// Absolute tolerance on unit-vector membership residuals.
constexpr double kMembershipTol = 1e-9;

class PolyhedralCone {
 public:
  PolyhedralCone() = default;
  /// Generators are unit-normalized and deduplicated; zero vectors are dropped.
  explicit PolyhedralCone(std::span<const Vec3> generators);

  const std::vector<Vec3>& generators() const { return generators_; }
  /// Unit inward facet normals; empty when the cone has no facet form.
  const std::vector<Vec3>& facet_normals() const { return facets_; }

  bool empty() const { return generators_.empty(); }
  int rank() const { return rank_; }
  /// True when the cone is not solid (rank < 3) or has no pointed facet form.
  /// Degenerate cones are queried through their generators only.
  bool degenerate() const { return facets_.empty(); }

  /// Normalized sum of the generators, a direction strictly inside a pointed cone.
  Vec3 central_direction() const;

  bool operator==(const PolyhedralCone&) const = default;

 private:
  std::vector<Vec3> generators_;
  std::vector<Vec3> facets_;
  int rank_ = 0;
};

/// Distance from the unit vector x/|x| to the cone (non-negative least squares).
double cone_residual(const PolyhedralCone& c, const Vec3& x);

/// Signed clearance of x/|x|: the smallest facet inner product for solid
/// cones, minus the residual otherwise. Non-negative inside the cone.
double cone_margin(const PolyhedralCone& c, const Vec3& x);

/// True iff x is a non-negative combination of the generators within `tol`
/// (on the unit-normalized x). The zero vector is in every cone.
bool cone_contains(const PolyhedralCone& c, const Vec3& x, double tol = kMembershipTol);

/// Direction inside the cone with the smallest angle to x under the weighted
/// metric |diag(w) y|. Returned with unit weighted norm.
Vec3 cone_project(const PolyhedralCone& c, const Vec3& x, const Vec3& metric_weights);

}  // namespace conepush
