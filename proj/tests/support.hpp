#pragma once

#include "conepush/scene.hpp"

#include <random>
#include <string>

namespace conepush::test_support {

inline std::string scene_path(const std::string& name) {
  return std::string(CONEPUSH_SCENE_DIR) + "/" + name + ".scene";
}

inline Scene bundled_scene(const std::string& name) { return compile_scene(load_scene(scene_path(name))); }

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v(n(rng), n(rng), n(rng));
  return v.normalized();
}

/// Brute-force cone membership: x is a nonnegative combination of some subset
/// of at most three generators (Caratheodory), found by direct 3x3 and 2x3
/// solves. Independent of the library's NNLS and facet code.
inline bool brute_force_in_cone(const std::vector<Vec3>& gens, const Vec3& x, double tol) {
  const Vec3 u = x.normalized();
  const std::size_t n = gens.size();
  auto accept = [&](const Vec3& approx) { return (approx - u).norm() <= tol; };
  for (std::size_t i = 0; i < n; ++i) {
    const double a = gens[i].dot(u) / gens[i].squaredNorm();
    if (a >= 0.0 && accept(a * gens[i])) return true;
    for (std::size_t j = i + 1; j < n; ++j) {
      Eigen::Matrix<double, 3, 2> m;
      m << gens[i], gens[j];
      const Eigen::Vector2d c = (m.transpose() * m).ldlt().solve(m.transpose() * u);
      if (c.minCoeff() >= 0.0 && accept(m * c)) return true;
      for (std::size_t k = j + 1; k < n; ++k) {
        Mat3 m3;
        m3 << gens[i], gens[j], gens[k];
        if (std::abs(m3.determinant()) < 1e-14) continue;
        const Vec3 c3 = m3.partialPivLu().solve(u);
        if (c3.minCoeff() >= 0.0 && accept(m3 * c3)) return true;
      }
    }
  }
  return false;
}

}  // namespace conepush::test_support
