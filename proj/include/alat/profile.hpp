#pragma once

#include <functional>
#include <string>
#include <vector>

namespace alat::hamiltonian {

/// Concave profile f on (0, infinity): f -> -infinity at 0, f = 0 on
/// [1, infinity), strictly concave on (0, 1). Closed-form value and two
/// derivatives. The default is f(t) = -(1-t)^3 / t.
class Profile {
 public:
  static Profile default_profile();
  /// -(1-t)^3/t - bump*(1-t)^4/t, still concave and C^2 at t = 1.
  static Profile perturbed_profile(double bump = 0.5);

  double f(double t) const;
  double fp(double t) const;
  double fpp(double t) const;

  /// Minus the tangent intercept, A(t) = t f'(t) - f(t). Strictly decreasing
  /// from +infinity to 0 on (0, 1]; A(t_s) = s defines the tangent point.
  double action_of_tangent(double t) const;

  /// The unique t in (0,1) whose tangent meets the value axis at -s.
  double tangent_point(double s) const;

  /// The unique t in (0,1) with f'(t) = slope (f' is a decreasing bijection
  /// onto (0, infinity)); returns -1 if slope <= 0.
  double t_from_slope(double slope) const;

  const std::string& name() const { return name_; }

 private:
  std::function<double(double)> f_, fp_, fpp_;
  std::string name_;
};

/// Knot data of the capped function at one parameter value s > 0. On
/// [0, t_s] the derivative h' is: a linear ramp, a cubic rise, a plateau at
/// beta*m, and a cubic descent meeting f' at t_s with matching slope; the
/// plateau height is solved exactly from the area constraint
/// integral_0^{t_s} h' = t_s f'(t_s), which makes h(t_s) = f(t_s) + s.
struct CapParams {
  double s = 0;
  double ts = 0;       // tangent point of the profile
  double m = 0;        // f'(t_s)
  double mpp = 0;      // f''(t_s)
  double t0 = 0, t1 = 0, t2 = 0;
  double beta = 0;     // plateau height / m
  double c = 0;        // f_s = c t^2 near 0
  double ramp_top = 0; // h'(t0)
};

/// The smooth family f_s built from a profile per the bump construction,
/// blended below s0 so that derivatives stay bounded as s -> 0.
class CappedFamily {
 public:
  /// min_geodesic_length: shortest nonzero closed geodesic of L; the blend
  /// threshold s0 is chosen so sup_t f_s'(t) stays below it for s <= s0.
  CappedFamily(Profile profile, double min_geodesic_length);

  double value(double s, double t) const;   // f_s(t)
  double dt(double s, double t) const;      // d/dt f_s
  double dtt(double s, double t) const;     // d^2/dt^2 f_s

  double s0() const { return s0_; }
  const Profile& profile() const { return profile_; }

  double tangent_point(double s) const { return profile_.tangent_point(s); }

  /// Paper-convention action set of the profile: for each closed-geodesic
  /// length l, the value t f'(t) - f(t) at the tangent of slope l (0 for
  /// l = 0), filtered to [window_lo, window_hi], sorted, merged at 1e-9.
  std::vector<double> action_set(const std::vector<double>& lengths,
                                 double window_lo, double window_hi) const;

  /// Cap data at parameter s > 0 (construction details, used by checks).
  CapParams cap_params(double s) const;

 private:
  struct Eval {
    double v, d, dd;
  };
  Eval eval_uncapped(double s, double t) const;  // h_s branch, s > 0
  Eval eval_blended(double s, double t) const;

  Profile profile_;
  double s0_ = 0.25;
  std::uint64_t serial_ = 0;  // distinguishes cache entries per construction
};

/// C-infinity step: 0 for x <= 0, 1 for x >= 1.
double smoothstep_cinf(double x);

}  // namespace alat::hamiltonian
