#include "conepush/geom.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace conepush;

namespace {

void expect_pose_near(const PlanarPose& a, const PlanarPose& b, double tol) {
  EXPECT_NEAR(a.x(), b.x(), tol);
  EXPECT_NEAR(a.z(), b.z(), tol);
  EXPECT_NEAR(normalize_angle(a.theta() - b.theta()), 0.0, tol);
}

PlanarPose random_pose(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return {0.1 * u(rng), 0.1 * u(rng), kPi * u(rng)};
}

Polygon2D t_shape() {
  return Polygon2D({{-35, -35}, {35, -35}, {35, -10}, {12.5, -10}, {12.5, 15}, {-12.5, 15},
                    {-12.5, -10}, {-35, -10}});
}

// Independent even-odd ray cast toward +x.
bool ray_cast_inside(const std::vector<Vec2>& v, const Vec2& p) {
  bool inside = false;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    if ((v[i].y() > p.y()) != (v[j].y() > p.y())) {
      const double x = v[j].x() + (p.y() - v[j].y()) * (v[i].x() - v[j].x()) / (v[i].y() - v[j].y());
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

}  // namespace

TEST(PlanarPose, NormalizesAngle) {
  EXPECT_DOUBLE_EQ(PlanarPose(0, 0, 3 * kPi).theta(), kPi);
  EXPECT_DOUBLE_EQ(PlanarPose(0, 0, -kPi).theta(), kPi);
  EXPECT_NEAR(PlanarPose::from_mm_deg(0, 0, 270).theta_deg(), -90.0, 1e-12);
  EXPECT_DOUBLE_EQ(PlanarPose::from_mm_deg(0, 0, 180).theta_deg(), 180.0);
}

TEST(Compose, IdentityIsExact) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const PlanarPose p = random_pose(rng);
    EXPECT_EQ(compose(PlanarPose::identity(), p), p);
    EXPECT_EQ(compose(p, PlanarPose::identity()), p);
  }
}

TEST(Compose, TranslationsAdd) {
  const PlanarPose r = compose(PlanarPose::from_mm_deg(10, 0, 0), PlanarPose::from_mm_deg(0, 5, 0));
  EXPECT_NEAR(r.x_mm(), 10.0, 1e-12);
  EXPECT_NEAR(r.z_mm(), 5.0, 1e-12);
  EXPECT_EQ(r.theta(), 0.0);
}

TEST(Compose, QuarterTurnMapsXOntoZ) {
  const PlanarPose r = compose(PlanarPose::from_mm_deg(0, 0, 90), PlanarPose::from_mm_deg(1, 0, 0));
  EXPECT_NEAR(r.x_mm(), 0.0, 1e-12);
  EXPECT_NEAR(r.z_mm(), 1.0, 1e-12);
  EXPECT_NEAR(r.theta_deg(), 90.0, 1e-12);
}

TEST(Compose, MatchesHomogeneousMatrixProduct) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 200; ++i) {
    const PlanarPose a = random_pose(rng), b = random_pose(rng);
    const Mat3 m = a.matrix() * b.matrix();
    const PlanarPose c = compose(a, b);
    EXPECT_NEAR(c.x(), m(0, 2), 1e-14);
    EXPECT_NEAR(c.z(), m(1, 2), 1e-14);
    EXPECT_NEAR(normalize_angle(c.theta() - std::atan2(m(1, 0), m(0, 0))), 0.0, 1e-14);
  }
}

TEST(Compose, AssociativeAndInverse) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const PlanarPose a = random_pose(rng), b = random_pose(rng), c = random_pose(rng);
    expect_pose_near(compose(compose(a, b), c), compose(a, compose(b, c)), 1e-12);
    expect_pose_near(compose(a, a.inverse()), PlanarPose::identity(), 1e-12);
  }
}

TEST(IntegrateTwist, ZeroTwistIsIdentity) {
  const PlanarPose q(0.01, -0.02, 0.3);
  EXPECT_EQ(integrate_twist(q, Twist(0, 0, 0), 5.0), q);
}

TEST(IntegrateTwist, PureTranslation) {
  const PlanarPose r = integrate_twist(PlanarPose(), Twist(1, 0, 0), 2.0);
  EXPECT_DOUBLE_EQ(r.x(), 2.0);
  EXPECT_DOUBLE_EQ(r.z(), 0.0);
  EXPECT_DOUBLE_EQ(r.theta(), 0.0);
}

TEST(IntegrateTwist, NegativeDurationThrows) {
  EXPECT_THROW(integrate_twist(PlanarPose(), Twist(1, 0, 0), -1.0), std::invalid_argument);
}

TEST(IntegrateTwist, ArcMatchesFineStepIntegration) {
  // RK4 on x' = R(theta) v, theta' = w with a small step; truncation error far
  // below the 1e-9 mm requirement.
  for (double w : {0.5, 1.0, 2.0, -3.0}) {
    const Twist v(1, 0, w);
    const double t = 1.3;
    const int n = 20000;
    const double h = t / n;
    Vec3 s = Vec3::Zero();
    auto f = [&](const Vec3& y) {
      return Vec3(std::cos(y[2]) * v.vx() - std::sin(y[2]) * v.vz(),
                  std::sin(y[2]) * v.vx() + std::cos(y[2]) * v.vz(), v.wy());
    };
    for (int k = 0; k < n; ++k) {
      const Vec3 k1 = f(s), k2 = f(s + h / 2 * k1), k3 = f(s + h / 2 * k2), k4 = f(s + h * k3);
      s += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    const PlanarPose r = integrate_twist(PlanarPose(), v, t);
    EXPECT_LT(std::abs(m_to_mm(r.x() - s[0])), 1e-9);
    EXPECT_LT(std::abs(m_to_mm(r.z() - s[1])), 1e-9);
    // Point on the circle of radius 1/w centered at (0, 1/w).
    EXPECT_NEAR(std::hypot(r.x(), r.z() - 1.0 / w), std::abs(1.0 / w), 1e-12);
  }
}

TEST(IntegrateTwist, ReverseTwistReturns) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const PlanarPose q = random_pose(rng);
    const Twist v(0.05 * u(rng), 0.05 * u(rng), 2.0 * u(rng));
    const PlanarPose back = integrate_twist(integrate_twist(q, v, 0.7), -v, 0.7);
    EXPECT_LT(std::abs(m_to_mm(back.x() - q.x())), 1e-9);
    EXPECT_LT(std::abs(m_to_mm(back.z() - q.z())), 1e-9);
    EXPECT_LT(std::abs(rad_to_deg(normalize_angle(back.theta() - q.theta()))), 1e-9);
  }
}

TEST(TwistBetween, InvertsIntegration) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const PlanarPose a = random_pose(rng);
    PlanarPose b = random_pose(rng);
    b = PlanarPose(b.x(), b.z(), 0.9 * b.theta());
    const Twist v = twist_between(a, b);
    expect_pose_near(integrate_twist(a, v, 1.0), b, 1e-12);
  }
}

TEST(FrameJacobian, IdentityAtOrigin) {
  const FrameJacobian j = frame_jacobian(PlanarPose());
  EXPECT_TRUE(j.matrix().isApprox(Mat3::Identity()));
}

TEST(FrameJacobian, LeverArm) {
  const double d = 0.03;
  const FrameJacobian j = frame_jacobian(PlanarPose(d, 0, 0));
  const Twist vc = j.twist_map(Twist(0, 0, 2.0));
  EXPECT_NEAR(vc.linear().norm(), d * 2.0, 1e-15);
  EXPECT_DOUBLE_EQ(vc.wy(), 2.0);
}

TEST(FrameJacobian, AdjointAndUnitDeterminant) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const FrameJacobian j = frame_jacobian(random_pose(rng));
    EXPECT_NEAR(j.determinant(), 1.0, 1e-12);
    const Twist v(n(rng), n(rng), n(rng));
    const Wrench w(n(rng), n(rng), n(rng));
    const double lhs = j.twist_map(v).v.dot(w.v);
    const double rhs = v.v.dot(j.wrench_map(w).v);
    EXPECT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, std::abs(lhs)));
    EXPECT_TRUE(j.inverse_twist_map(j.twist_map(v)).v.isApprox(v.v, 1e-12));
    EXPECT_TRUE(j.inverse_wrench_map(j.wrench_map(w)).v.isApprox(w.v, 1e-12));
  }
}

TEST(Polygon, RejectsInvalid) {
  EXPECT_THROW(Polygon2D({{0, 0}, {1, 0}}), std::invalid_argument);
  EXPECT_THROW(Polygon2D({{0, 0}, {0, 1}, {1, 0}}), std::invalid_argument);  // clockwise
  EXPECT_THROW(Polygon2D({{0, 0}, {1, 1}, {1, 0}, {0, 1}}), std::invalid_argument);  // bow tie
  EXPECT_THROW(Polygon2D({{0, 0}, {1, 0}, {1, 0}, {0, 1}}), std::invalid_argument);
}

TEST(Polygon, AreaAndCentroid) {
  const Polygon2D sq({{-1, -1}, {1, -1}, {1, 1}, {-1, 1}});
  EXPECT_DOUBLE_EQ(sq.signed_area(), 4.0);
  EXPECT_TRUE(sq.centroid().isZero(1e-15));
  EXPECT_TRUE(sq.inward_normal(0).isApprox(Vec2(0, 1)));
  const Polygon2D t = t_shape();
  EXPECT_DOUBLE_EQ(t.signed_area(), 70.0 * 25.0 + 25.0 * 25.0);
  EXPECT_NEAR(t.centroid().y(), (1750.0 * -22.5 + 625.0 * 2.5) / 2375.0, 1e-12);
}

TEST(PointInPolygon, Basics) {
  const Polygon2D sq({{-1, -1}, {1, -1}, {1, 1}, {-1, 1}});
  EXPECT_TRUE(point_in_polygon(sq.centroid(), sq));
  EXPECT_FALSE(point_in_polygon({3, 0}, sq));
  EXPECT_TRUE(point_in_polygon({1, 0}, sq));  // boundary counts as inside
  EXPECT_FALSE(point_in_polygon({25, 0}, t_shape()));  // notch
}

TEST(PointInPolygon, MatchesRayCastOnTShape) {
  const Polygon2D t = t_shape();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-40.0, 40.0);
  for (int i = 0; i < 20000; ++i) {
    const Vec2 p(u(rng), u(rng));
    if (t.distance_to_boundary(p) < 1e-9) continue;
    EXPECT_EQ(point_in_polygon(p, t), ray_cast_inside(t.vertices(), p)) << p.transpose();
  }
}
