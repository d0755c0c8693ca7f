#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "alat/geometry.hpp"

using alat::geometry::Manifold;
using alat::geometry::Vec;

namespace {

Vec v1(double x) {
  Vec v(1);
  v << x;
  return v;
}

Vec v2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

// Oracle: torus distance by brute force over lattice translates |k| <= 2.
double torus_dist_brute(const Manifold& m, const Vec& a, const Vec& b) {
  double best = 1e300;
  const auto& P = m.periods();
  if (m.dim() == 2) {
    for (int k0 = -2; k0 <= 2; ++k0)
      for (int k1 = -2; k1 <= 2; ++k1) {
        double dx = b[0] - a[0] + k0 * P[0];
        double dy = b[1] - a[1] + k1 * P[1];
        best = std::min(best, std::hypot(dx, dy));
      }
  }
  return best;
}

// Oracle: transport ODE along the great circle from q to q2, integrated with
// small RK4 steps. On S2, parallel transport of v along a geodesic gamma(t)
// satisfies v' = -<v, gamma'> gamma (covariant derivative zero, ambient form).
Vec sphere_transport_ode(const Manifold& m, const Vec& q, const Vec& q2,
                         const Vec& v0) {
  double d = m.dist(q, q2);
  if (d < 1e-14) return v0;
  Vec u = m.log(q, q2) / d;
  int steps = 2000;
  double h = d / steps;
  Vec v = v0;
  for (int i = 0; i < steps; ++i) {
    double t = i * h;
    auto gamma = [&](double s) -> Vec {
      return std::cos(s) * q + std::sin(s) * u;
    };
    auto gdot = [&](double s) -> Vec {
      return -std::sin(s) * q + std::cos(s) * u;
    };
    auto f = [&](double s, const Vec& w) -> Vec {
      return -w.dot(gdot(s)) * gamma(s);
    };
    Vec k1 = f(t, v);
    Vec k2 = f(t + h / 2, v + h / 2 * k1);
    Vec k3 = f(t + h / 2, v + h / 2 * k2);
    Vec k4 = f(t + h, v + h * k3);
    v += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return v;
}

}  // namespace

TEST_CASE("circle distances") {
  auto m = Manifold::circle(2 * M_PI);
  CHECK(m.dist(v1(0.0), v1(3.0)) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(m.dist(v1(0.0), v1(5.0)) ==
        doctest::Approx(2 * M_PI - 5).epsilon(1e-12));
}

TEST_CASE("flat torus distance matches brute-force oracle") {
  auto m = Manifold::flat_torus({2 * M_PI, 2 * M_PI});
  double expect = std::hypot(3.0, 2 * M_PI - 4);
  CHECK(m.dist(v2(0, 0), v2(3, 4)) == doctest::Approx(expect).epsilon(1e-12));

  std::uint64_t rng = 7;
  for (int i = 0; i < 200; ++i) {
    Vec a = m.random_point(rng), b = m.random_point(rng);
    CHECK(m.dist(a, b) ==
          doctest::Approx(torus_dist_brute(m, a, b)).epsilon(1e-12));
  }
}

TEST_CASE("circle exp/log in the flat chart") {
  auto m = Manifold::circle(2 * M_PI);
  CHECK(m.exp(v1(0.0), v1(1.5))[0] == doctest::Approx(1.5));
  CHECK(m.log(v1(0.0), v1(2 * M_PI - 0.3))[0] == doctest::Approx(-0.3));
  CHECK_THROWS_AS((void)m.log(v1(0.0), v1(M_PI)), std::domain_error);
}

TEST_CASE("S2 exp lands on equator and log inverts") {
  auto m = Manifold::sphere2();
  Vec north(3);
  north << 0, 0, 1;
  Vec v(3);
  v << M_PI / 2, 0, 0;
  Vec q = m.exp(north, v);
  CHECK(std::abs(q[2]) < 1e-12);  // equator
  Vec w = m.log(north, q);
  CHECK((w - v).norm() < 1e-12);
}

TEST_CASE("log inverts exp on random samples") {
  std::uint64_t rng = 99;
  for (auto m : {Manifold::circle(2 * M_PI), Manifold::flat_torus({5.0, 3.0}),
                 Manifold::sphere2()}) {
    double worst = 0;
    for (int i = 0; i < 10000; ++i) {
      Vec q = m.random_point(rng);
      Vec v = m.random_tangent(q, 0.99 * m.injectivity_radius(), rng);
      Vec back = m.log(q, m.exp(q, v));
      worst = std::max(worst, (back - v).norm());
    }
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("transport is a norm-preserving isometry") {
  std::uint64_t rng = 3;
  for (auto m : {Manifold::circle(2 * M_PI), Manifold::flat_torus({5.0, 3.0}),
                 Manifold::sphere2()}) {
    double worst = 0;
    for (int i = 0; i < 10000; ++i) {
      Vec q = m.random_point(rng);
      Vec q2 = m.exp(q, m.random_tangent(q, 1.9 * m.epsilon0(), rng));
      Vec v = m.random_tangent(q, 2.0, rng);
      Vec w = m.transport(q, q2, v);
      worst = std::max(worst, std::abs(w.norm() - v.norm()));
      // transport(q, q, v) = v
      Vec id = m.transport(q, q, v);
      worst = std::max(worst, (id - v).norm());
    }
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("flat transport is the identity in the chart") {
  auto c = Manifold::circle(2 * M_PI);
  CHECK(c.transport(v1(0.0), v1(1.0), v1(0.7))[0] == doctest::Approx(0.7));
  auto t = Manifold::flat_torus({6.0, 6.0});
  Vec v = v2(0.3, -0.2);
  CHECK((t.transport(v2(1, 2), v2(1.5, 2.5), v) - v).norm() == 0.0);
}

TEST_CASE("S2 transport matches the transport ODE oracle") {
  auto m = Manifold::sphere2(0.9);
  std::uint64_t rng = 17;
  for (int i = 0; i < 50; ++i) {
    Vec q = m.random_point(rng);
    Vec q2 = m.exp(q, m.random_tangent(q, 1.7, rng));
    Vec v = m.random_tangent(q, 1.0, rng);
    Vec got = m.transport(q, q2, v);
    Vec expect = sphere_transport_ode(m, q, q2, v);
    CHECK((got - expect).norm() < 1e-8);
  }
}

TEST_CASE("S2 holonomy around a geodesic triangle equals enclosed area") {
  auto m = Manifold::sphere2(1.2);
  // octant triangle: north pole -> (1,0,0) -> (0,1,0) -> north; area = pi/2
  Vec a(3), b(3), c(3);
  a << 0, 0, 1;
  b << 1, 0, 0;
  c << 0, 1, 0;
  Vec v(3);
  v << 1, 0, 0;  // tangent at a
  Vec w = m.transport(a, b, v);
  w = m.transport(b, c, w);
  w = m.transport(c, a, w);
  // rotation of the tangent plane at a by the enclosed area pi/2
  double cosang = std::clamp(w.dot(v) / (v.norm() * w.norm()), -1.0, 1.0);
  CHECK(std::acos(cosang) == doctest::Approx(M_PI / 2).epsilon(1e-10));
}

TEST_CASE("dist symmetry and triangle inequality") {
  std::uint64_t rng = 23;
  for (auto m : {Manifold::circle(2 * M_PI), Manifold::flat_torus({5.0, 3.0}),
                 Manifold::sphere2()}) {
    for (int i = 0; i < 10000; ++i) {
      Vec a = m.random_point(rng), b = m.random_point(rng),
          c = m.random_point(rng);
      CHECK(std::abs(m.dist(a, b) - m.dist(b, a)) < 1e-12);
      CHECK(m.dist(a, c) <= m.dist(a, b) + m.dist(b, c) + 1e-12);
    }
  }
}

TEST_CASE("constructor validation") {
  CHECK_THROWS_AS(Manifold::circle(2 * M_PI, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(Manifold::flat_torus({-1.0}), std::invalid_argument);
}
