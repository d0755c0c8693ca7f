#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "alat/hamiltonian.hpp"

using namespace alat::hamiltonian;
using alat::geometry::Manifold;

namespace {

Vec v1(double x) {
  Vec v(1);
  v << x;
  return v;
}

struct Setup {
  Manifold m = Manifold::circle(2 * M_PI, 1.2);
  Profile prof = Profile::default_profile();
  LagrangianEmbedding zero_section{m, 0.5, {0.0}};
  CappedFamily fam{prof, zero_section.min_nonzero_geodesic_length()};
  AsymptoticPiece hinf{0.025, 1.0};
};

}  // namespace

TEST_CASE("embedding basics") {
  Setup su;
  CHECK(su.zero_section.contained_in_half_disc());
  CHECK(su.zero_section.F_norm() == 0.0);
  CHECK(su.zero_section.min_nonzero_geodesic_length() ==
        doctest::Approx(M_PI));
  auto lens = su.zero_section.geodesic_lengths(10.0);
  REQUIRE(lens.size() == 4);  // 0, pi, 2pi, 3pi
  CHECK(lens[1] == doctest::Approx(M_PI));

  LagrangianEmbedding wavy(su.m, 0.3, {0.09});
  CHECK(wavy.contained_in_half_disc());
  CHECK(wavy.F_norm() == doctest::Approx(0.3));
  // F >= 0 with minimum 0
  double fmin = 1e300;
  for (int i = 0; i < 200; ++i) {
    double f = wavy.F(v1(2 * M_PI * i / 200.0));
    CHECK(f >= 0.0);
    fmin = std::min(fmin, f);
  }
  CHECK(fmin < 1e-12);

  // containment violation is rejected by assemble_Hs, not the constructor
  LagrangianEmbedding fat(su.m, 0.5, {0.2});
  CHECK(!fat.contained_in_half_disc());
  CHECK_THROWS_AS(assemble_Hs(fat, su.fam, su.hinf, 1.0),
                  std::invalid_argument);
}

TEST_CASE("assembled H^s values per region") {
  Setup su;
  for (double s : {0.5, 6.0}) {
    auto H = assemble_Hs(su.zero_section, su.fam, su.hinf, s);
    // on L itself (p = 0): H = f_s(0) = 0
    CHECK(H.value(v1(1.0), v1(0.0)) == 0.0);
    // ||p|| = 0.6: outside the image (rho = 1/2) but inside D_{2/3}: H = s
    CHECK(H.value(v1(0.2), v1(0.6)) == doctest::Approx(s).epsilon(1e-14));
    // ||p|| = 2: linear regime
    double expect = su.hinf.eps * (su.hinf.mu * 2 + su.hinf.intercept()) + s;
    CHECK(H.value(v1(0.0), v1(2.0)) == doctest::Approx(expect).epsilon(1e-13));
    CHECK(H.value(v1(0.0), v1(-2.0)) ==
          doctest::Approx(expect).epsilon(1e-13));
  }
}

TEST_CASE("assembled H^s is admissible and continuous across the seam") {
  Setup su;
  auto H = assemble_Hs(su.zero_section, su.fam, su.hinf, 6.0);
  auto rep = check_admissible(H, su.m);
  CHECK(rep.admissible);
  CHECK(rep.mu == doctest::Approx(su.hinf.slope_at_infinity()).epsilon(1e-9));

  // seam ||p|| = rho: both branch formulas agree to 1e-9
  for (int i = 0; i < 100; ++i) {
    double eps = 1e-7 * (i + 1);
    double inside = H.value(v1(0.3), v1(0.5 - eps));
    double outside = H.value(v1(0.3), v1(0.5 + eps));
    CHECK(std::abs(inside - outside) < 1e-9);
  }
}

TEST_CASE("gradients match finite differences") {
  Setup su;
  LagrangianEmbedding wavy(su.m, 0.3, {0.09});
  for (const auto& H :
       {assemble_Hs(su.zero_section, su.fam, su.hinf, 6.0),
        assemble_Hs(wavy, su.fam, su.hinf, 3.0)}) {
    for (double q0 : {0.1, 2.0}) {
      for (double p0 : {0.05, 0.11, 0.8, 1.7}) {
        Vec q = v1(q0), p = v1(p0);
        double h = 1e-6;
        double fdp =
            (H.value(q, v1(p0 + h)) - H.value(q, v1(p0 - h))) / (2 * h);
        double fdq =
            (H.value(v1(q0 + h), p) - H.value(v1(q0 - h), p)) / (2 * h);
        CHECK(H.grad_p(q, p)[0] == doctest::Approx(fdp).epsilon(1e-5));
        CHECK(H.grad_q(q, p)[0] ==
              doctest::Approx(fdq).epsilon(1e-5).scale(1.0));
      }
    }
  }
}

TEST_CASE("c1_c2: constants, smoothed norm, grid monotonicity") {
  Setup su;
  auto bounds0 = c1_c2(Hamiltonian::constant(1, 3.0), su.m);
  CHECK(bounds0.c1 == 0.0);
  CHECK(bounds0.c2 == 0.0);

  // H = eps * h(||p||) has sup gradient eps * mu (attained at ||p|| = 1)
  auto H = Hamiltonian::asymptotic(su.hinf);
  auto b = c1_c2(H, su.m, 64);
  CHECK(b.c1 / 1.1 ==
        doctest::Approx(su.hinf.slope_at_infinity()).epsilon(0.05));

  auto Hs = assemble_Hs(su.zero_section, su.fam, su.hinf, 4.0);
  auto coarse = c1_c2(Hs, su.m, 12);
  auto fine = c1_c2(Hs, su.m, 48);
  CHECK(fine.c1 >= coarse.c1 - 1e-12);
  CHECK(fine.c2 >= coarse.c2 * 0.999);
}

TEST_CASE("verify_profile_suite passes for default and perturbed profiles") {
  Setup su;
  for (auto prof : {Profile::default_profile(), Profile::perturbed_profile()}) {
    CappedFamily fam(prof, su.zero_section.min_nonzero_geodesic_length());
    auto rep = verify_profile_suite(fam, su.hinf, su.m, su.zero_section);
    for (const auto& c : rep.checks) {
      INFO(prof.name(), " property ", c.id, " worst=", c.worst);
      CHECK(c.pass);
    }
    CHECK(rep.all_pass());
    // spot values promised by the construction
    CHECK(rep.get("f4").worst > 0);
    CHECK(rep.get("f7").worst > 0);
  }
}

TEST_CASE("wiggle W: balance, distinct critical values, admissibility") {
  Setup su2;
  Manifold m = Manifold::circle(2 * M_PI, 1.5);
  WiggleW w(1.0, 3.3, {-0.72, -0.45, 0.0, 0.3, 0.6}, {0.3, 0.1, 0.35, 0.25});
  // linear with one constant on both sides
  CHECK(w.value(1.0) - w.value(-1.0) == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(w.value(2.5) == doctest::Approx(w.value(1.0) + 1.5).epsilon(1e-12));
  CHECK(w.deriv(-1.4) == -1.0);

  auto vals = w.critical_values();
  REQUIRE(vals.size() == 5);
  std::vector<double> sorted = vals;
  std::sort(sorted.begin(), sorted.end());
  for (size_t i = 0; i + 1 < sorted.size(); ++i) {
    CHECK(sorted[i + 1] - sorted[i] > 0.04);  // distinct values
  }
  // minima/maxima alternate: W''(z) signs +,-,+,-,+
  for (size_t k = 0; k < 5; ++k) {
    CHECK((k % 2 == 0 ? w.second(w.zeros()[k]) : -w.second(w.zeros()[k])) > 0);
  }
  CHECK(w.max_abs_deriv() < 2.6);

  auto H = w.hamiltonian();
  auto rep = check_admissible(H, m);
  CHECK(rep.admissible);
  // derivative consistency
  for (double p : {-0.9, -0.2, 0.13, 0.5, 0.97}) {
    double h = 1e-6;
    double fd = (w.value(p + h) - w.value(p - h)) / (2 * h);
    CHECK(w.deriv(p) == doctest::Approx(fd).epsilon(1e-6));
  }
}
