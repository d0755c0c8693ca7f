#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "alat/lattice.hpp"

using namespace alat::lattice;
using alat::geometry::Manifold;
using alat::hamiltonian::Hamiltonian;

namespace {

Vec v1(double x) {
  Vec v(1);
  v << x;
  return v;
}

Hamiltonian quad_radial() {  // g(t) = t^2/2
  return Hamiltonian::radial([](double t) { return t * t / 2; },
                             [](double t) { return t; },
                             [](double) { return 1.0; });
}

std::uint64_t rng_state = 20240811;
double uni() {
  rng_state ^= rng_state << 13;
  rng_state ^= rng_state >> 7;
  rng_state ^= rng_state << 17;
  return static_cast<double>(rng_state >> 11) * 0x1.0p-53;
}

// random admissible lattice point: a mean-centered closed random walk in q
LatticePoint random_point(const LatticeContext& ctx, double p_max) {
  int n = ctx.r(), d = ctx.dim();
  std::vector<Vec> steps(n);
  Vec mean = Vec::Zero(d);
  for (int j = 0; j < n; ++j) {
    steps[j] = Vec(d);
    for (int i = 0; i < d; ++i) {
      steps[j][i] = 0.35 * ctx.m.epsilon0() * (2 * uni() - 1);
    }
    mean += steps[j];
  }
  mean /= n;  // recentering closes the loop; steps stay below epsilon0
  LatticePoint z;
  Vec q(d);
  for (int i = 0; i < d; ++i) q[i] = ctx.m.periods()[i] * uni();
  for (int j = 0; j < n; ++j) {
    z.q.push_back(ctx.m.reduce(q));
    Vec p(d);
    for (int i = 0; i < d; ++i) p[i] = p_max * (2 * uni() - 1);
    z.p.push_back(p);
    q = q + steps[j] - mean;
  }
  validate_lattice(ctx.m, z);
  return z;
}

}  // namespace

TEST_CASE("subdivision ops") {
  auto u = Subdivision::uniform(7);
  u.validate();
  double s = 0;
  for (double w : u.weights) s += w;
  CHECK(s == 1.0);  // exact

  Subdivision one = Subdivision::uniform(1);
  auto st = one.stabilized();
  REQUIRE(st.r() == 2);
  CHECK(st.weights[0] == 1.0);
  CHECK(st.weights[1] == 0.0);

  Subdivision half{{0.5, 0.5}};
  auto dd = half.doubled();
  REQUIRE(dd.r() == 4);
  for (double w : dd.weights) CHECK(w == 0.25);
  CHECK(dd.length() == half.length() / 2);
  dd.validate();
}

TEST_CASE("dissect: constants and uniform winding orbit") {
  Manifold m = Manifold::circle(2 * M_PI, 1.2);
  LatticeContext cc{m, Hamiltonian::constant(1, 3.0), Subdivision::uniform(5)};
  auto z = dissect(cc, v1(1.3), v1(0.0));
  for (int j = 0; j < 5; ++j) {
    CHECK(z.q[j][0] == doctest::Approx(1.3));
    CHECK(z.p[j][0] == 0.0);
  }

  // winding-1 orbit of g(t)=t^2/2 at p* = 2 pi, uniform dissection: z_j = gamma(j/r)
  LatticeContext ctx{m, quad_radial(), Subdivision::uniform(9)};
  auto orb = dissect(ctx, v1(0.25), v1(2 * M_PI));
  for (int j = 0; j < 9; ++j) {
    double expect = std::fmod(0.25 + 2 * M_PI * j / 9.0, 2 * M_PI);
    CHECK(orb.q[j][0] == doctest::Approx(expect).epsilon(1e-12));
    CHECK(orb.p[j][0] == doctest::Approx(2 * M_PI));
  }
  // speed bound rejection: same orbit at r = 4 (pieces too long)
  LatticeContext bad{m, quad_radial(), Subdivision::uniform(4)};
  CHECK_THROWS_AS(dissect(bad, v1(0.0), v1(2 * M_PI)), std::domain_error);
}

TEST_CASE("flow data: identity flow mismatches") {
  Manifold m = Manifold::circle(2 * M_PI, 1.2);
  LatticeContext ctx{m, Hamiltonian::constant(1, 0.0),
                     Subdivision::uniform(4)};
  LatticePoint z;
  for (int j = 0; j < 4; ++j) {
    z.q.push_back(v1(j == 3 ? 0.5 : 0.5 * j));
    z.p.push_back(v1(0.1 * j));
  }
  auto fd = flow_data(ctx, z);
  for (int j = 0; j < 4; ++j) {
    int prev = (j + 3) % 4;
    CHECK(fd.eps_q[j][0] ==
          doctest::Approx(m.log(z.q[prev], z.q[j])[0]).epsilon(1e-14));
    CHECK(fd.eps_p[j][0] ==
          doctest::Approx(z.p[j][0] - z.p[prev][0]).epsilon(1e-14));
    // transport isometry of the mismatch
    CHECK(fd.eps_q[j].norm() ==
          doctest::Approx(fd.eps_q_tilde[j].norm()).epsilon(1e-14));
  }
  CHECK(fd.momentum_sup == doctest::Approx(0.3));
}

TEST_CASE("dissection of a true orbit has vanishing mismatches") {
  Manifold m = Manifold::circle(2 * M_PI, 1.2);
  LatticeContext ctx{m, quad_radial(), Subdivision::uniform(9)};
  auto z = dissect(ctx, v1(0.0), v1(2 * M_PI));
  auto fd = flow_data(ctx, z);
  for (int j = 0; j < 9; ++j) {
    CHECK(fd.eps_q[j].norm() < 1e-10);
    CHECK(fd.eps_p[j].norm() < 1e-10);
  }
}

TEST_CASE("closed-form flow matches RK4 to 1e-10") {
  Manifold m = Manifold::circle(2 * M_PI, 1.2);
  LatticeContext exact{m, quad_radial(), Subdivision::uniform(8)};
  LatticeContext rk4 = exact;
  rk4.force_rk4 = true;
  for (double p0 : {0.3, 2 * M_PI, -1.7}) {
    auto a = flow_piece(exact, v1(0.4), v1(p0), 1.0 / 8);
    auto b = flow_piece(rk4, v1(0.4), v1(p0), 1.0 / 8);
    CHECK(m.dist(a.q, b.q) < 1e-10);
    CHECK((a.p - b.p).norm() < 1e-12);
    CHECK(std::abs(a.action - b.action) < 1e-10);
  }
}

TEST_CASE("eval_S: constants and orbit actions") {
  Manifold m = Manifold::circle(2 * M_PI, 1.2);
  for (double c : {0.0, 2.5, -1.25}) {
    LatticeContext ctx{m, Hamiltonian::constant(1, c),
                       Subdivision::uniform(6)};
    auto z = dissect(ctx, v1(0.7), v1(0.0));
    CHECK(eval_S(ctx, z) == doctest::Approx(-c).epsilon(1e-14));
  }
  // winding-1 orbit: S = p* g'(p*) - g(p*), closed-form action oracle
  LatticeContext ctx{m, quad_radial(), Subdivision::uniform(9)};
  double p = 2 * M_PI;
  auto z = dissect(ctx, v1(0.0), v1(p));
  double expect = p * p - p * p / 2;
  CHECK(eval_S(ctx, z) == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("gradient vanishes at dissected orbits") {
  Manifold m = Manifold::circle(2 * M_PI, 1.2);
  LatticeContext ctx{m, quad_radial(), Subdivision::uniform(9)};
  auto z = dissect(ctx, v1(0.0), v1(2 * M_PI));
  CHECK(grad_S(ctx, z, false).norm() < 1e-8);
  CHECK(grad_S_fd(ctx, z, false).norm() < 1e-7);
}

TEST_CASE("exact and finite-difference gradients agree to 1e-7") {
  Manifold mc = Manifold::circle(2 * M_PI, 1.2);
  Manifold mt = Manifold::flat_torus({2 * M_PI, 2 * M_PI}, 1.2);
  int checked = 0;
  for (const Manifold& m : {mc, mt}) {
    LatticeContext ctx{m, quad_radial(), Subdivision::uniform(6)};
    for (int trial = 0; trial < 500; ++trial) {
      LatticePoint z = random_point(ctx, 1.5);
      Vec ge, gf;
      try {
        ge = grad_S(ctx, z, trial % 2 == 0);
        gf = grad_S_fd(ctx, z, trial % 2 == 0);
      } catch (const std::exception&) {
        continue;  // flow piece left the short-geodesic regime
      }
      ++checked;
      CHECK((ge - gf).cwiseAbs().maxCoeff() < 1e-7);
    }
  }
  CHECK(checked > 500);
}

TEST_CASE("analytic Hessian matches FD-of-gradient Hessian") {
  Manifold m = Manifold::circle(2 * M_PI, 1.2);
  LatticeContext ctx{m, quad_radial(), Subdivision::uniform(5)};
  for (int trial = 0; trial < 10; ++trial) {
    LatticePoint z = random_point(ctx, 1.0);
    for (bool fiber : {false, true}) {
      Mat ha = hess_S(ctx, z, fiber);
      // FD oracle built from the exact gradient
      int N = ctx.packed_size(fiber);
      Vec x = pack(ctx, z, fiber);
      Mat hf(N, N);
      double h = 1e-6;
      for (int j = 0; j < N; ++j) {
        Vec xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        hf.col(j) = (grad_S(ctx, unpack(ctx, xp, fiber, z.q[0]), fiber) -
                     grad_S(ctx, unpack(ctx, xm, fiber, z.q[0]), fiber)) /
                    (2 * h);
      }
      CHECK((ha - hf).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("cyclic rotation invariance of eval_S") {
  Manifold m = Manifold::circle(2 * M_PI, 1.2);
  Subdivision alpha{{0.3, 0.25, 0.25, 0.2}};
  LatticeContext ctx{m, quad_radial(), alpha};
  for (int trial = 0; trial < 50; ++trial) {
    LatticePoint z = random_point(ctx, 1.0);
    double s0;
    try {
      s0 = eval_S(ctx, z);
    } catch (const std::exception&) {
      continue;
    }
    for (int rot = 1; rot < 4; ++rot) {
      LatticePoint zr;
      Subdivision ar;
      for (int j = 0; j < 4; ++j) {
        zr.q.push_back(z.q[(j + rot) % 4]);
        zr.p.push_back(z.p[(j + rot) % 4]);
        ar.weights.push_back(alpha.weights[(j + rot) % 4]);
      }
      LatticeContext cr{m, quad_radial(), ar};
      CHECK(eval_S(cr, zr) == doctest::Approx(s0).epsilon(1e-12));
    }
  }
}

TEST_CASE("suspension preserves S exactly and independent of v") {
  Manifold m = Manifold::circle(2 * M_PI, 1.2);
  LatticeContext ctx{m, quad_radial(), Subdivision::uniform(9)};
  LatticeContext up{m, quad_radial(), ctx.alpha.stabilized()};
  for (int trial = 0; trial < 20; ++trial) {
    LatticePoint z = random_point(ctx, 1.0);
    double s0;
    try {
      s0 = eval_S(ctx, z);
    } catch (const std::exception&) {
      continue;
    }
    for (int k = 0; k < 5; ++k) {
      Vec v = v1(4 * (uni() - 0.5));
      double s1 = eval_S(up, suspend_point(z, v));
      CHECK(std::abs(s1 - s0) < 1e-12 * std::max(1.0, std::abs(s0)));
    }
  }

  // gradient in the new q-slot: -eps_p[r] = p_end - v (FD oracle)
  auto orb = dissect(ctx, v1(0.0), v1(2 * M_PI));
  for (double vv : {0.0, 0.8}) {
    auto zs = suspend_point(orb, v1(vv));
    Vec g = grad_S_fd(up, zs, false);
    // packed layout: q_r block at node r
    int qslot = 2 * 9 * 1;  // q_9 in (q,p) pairs of dim 1
    double expect = 2 * M_PI - vv;  // p_end - v
    CHECK(g[qslot] == doctest::Approx(expect).epsilon(1e-6));
  }
  // suspended at v = end momentum: critical again
  auto zs = suspend_point(orb, v1(2 * M_PI));
  CHECK(grad_S(up, zs, false).norm() < 1e-8);
}

TEST_CASE("estimate regime flag") {
  Manifold m = Manifold::circle(2 * M_PI, 1.2);
  LatticeContext ctx{m, quad_radial(), Subdivision::uniform(4)};
  alat::hamiltonian::DerivativeBounds b{0.4, 0.2};
  CHECK(estimate_regime(ctx, 0.24, b));        // 0.25 * 0.6 = 0.15 <= 0.24
  CHECK(!estimate_regime(ctx, 0.1, b));
}
