#include "alat/profile.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <atomic>

#include "alat/detail/hermite.hpp"

namespace alat::hamiltonian {

namespace {

using detail::Hermite;

constexpr double kRampFraction = 0.3;   // t0 / t1
constexpr double kPlateauEnd = 0.85;    // t2 / ts
constexpr double kRampTopFraction = 0.5;  // h'(t0) / (beta m)

}  // namespace

double smoothstep_cinf(double x) {
  if (x <= 0) return 0;
  if (x >= 1) return 1;
  double e0 = std::exp(-1 / x);
  double e1 = std::exp(-1 / (1 - x));
  return e0 / (e0 + e1);
}

Profile Profile::default_profile() {
  Profile p;
  p.name_ = "default";
  p.f_ = [](double t) {
    if (t >= 1) return 0.0;
    double u = 1 - t;
    return -u * u * u / t;
  };
  p.fp_ = [](double t) {
    if (t >= 1) return 0.0;
    return 1 / (t * t) - 3 + 2 * t;
  };
  p.fpp_ = [](double t) {
    if (t >= 1) return 0.0;
    return 2 - 2 / (t * t * t);
  };
  return p;
}

Profile Profile::perturbed_profile(double bump) {
  Profile p;
  p.name_ = "perturbed";
  p.f_ = [bump](double t) {
    if (t >= 1) return 0.0;
    double u = 1 - t;
    return -u * u * u / t - bump * u * u * u * u;
  };
  p.fp_ = [bump](double t) {
    if (t >= 1) return 0.0;
    double u = 1 - t;
    return 1 / (t * t) - 3 + 2 * t + 4 * bump * u * u * u;
  };
  p.fpp_ = [bump](double t) {
    if (t >= 1) return 0.0;
    double u = 1 - t;
    return 2 - 2 / (t * t * t) - 12 * bump * u * u;
  };
  return p;
}

double Profile::f(double t) const { return f_(t); }
double Profile::fp(double t) const { return fp_(t); }
double Profile::fpp(double t) const { return fpp_(t); }

double Profile::action_of_tangent(double t) const {
  return t * fp_(t) - f_(t);
}

double Profile::tangent_point(double s) const {
  if (!(s > 0)) throw std::domain_error("tangent_point needs s > 0");
  // A(t) = t f'(t) - f(t) decreases strictly from +inf to 0 on (0,1].
  double lo = 1e-12, hi = 1.0;
  if (!(action_of_tangent(lo) > s)) {
    throw std::runtime_error("tangent_point: bracketing failed at t -> 0");
  }
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (action_of_tangent(mid) > s)
      lo = mid;
    else
      hi = mid;
  }
  double t = 0.5 * (lo + hi);
  // Newton polish: A'(t) = t f''(t)
  for (int it = 0; it < 4; ++it) {
    double g = action_of_tangent(t) - s, gp = t * fpp_(t);
    if (std::abs(gp) < 1e-300) break;
    double tn = t - g / gp;
    if (tn > 0 && tn < 1) t = tn;
  }
  return t;
}

double Profile::t_from_slope(double slope) const {
  if (!(slope > 0)) return -1;
  double lo = 1e-12, hi = 1.0;
  if (fp_(lo) < slope) throw std::runtime_error("t_from_slope: slope too big");
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (fp_(mid) > slope)
      lo = mid;
    else
      hi = mid;
  }
  double t = 0.5 * (lo + hi);
  for (int it = 0; it < 4; ++it) {
    double g = fp_(t) - slope, gp = fpp_(t);
    if (std::abs(gp) < 1e-300) break;
    double tn = t - g / gp;
    if (tn > 0 && tn < 1) t = tn;
  }
  return t;
}

CappedFamily::CappedFamily(Profile profile, double min_geodesic_length)
    : profile_(std::move(profile)) {
  static std::atomic<std::uint64_t> next_serial{1};
  serial_ = next_serial.fetch_add(1);
  if (!(min_geodesic_length > 0)) {
    throw std::invalid_argument("min_geodesic_length must be > 0");
  }
  // largest s0 on a decreasing ladder with sup f_s' < shortest geodesic
  double s0 = 1.0;
  for (int i = 0; i < 60; ++i) {
    CapParams cp = cap_params(s0);
    if (cp.beta * cp.m < 0.8 * min_geodesic_length && s0 < 1.0 + 1e-12) break;
    s0 *= 0.8;
    if (s0 < 1e-6) throw std::runtime_error("no admissible blend threshold");
  }
  s0_ = s0;
}

CapParams CappedFamily::cap_params(double s) const {
  if (!(s > 0)) throw std::domain_error("cap_params needs s > 0");
  CapParams cp;
  cp.s = s;
  cp.ts = profile_.tangent_point(s);
  cp.m = profile_.fp(cp.ts);
  cp.mpp = profile_.fpp(cp.ts);
  double r1 = std::min(0.2, 0.5 / (1 + s));
  cp.t1 = r1 * cp.ts;
  cp.t0 = kRampFraction * cp.t1;

  // Area(beta) = P*beta + Q must equal ts*m; all beta-scaled pieces are
  // linear in beta so the plateau height solves exactly. The descent width
  // h2 is shrunk until the Hermite stays monotone (|f''(ts)| h2 <= 2.5
  // (beta-1) m), which keeps the tangent intercepts shallow.
  double h1 = cp.t1 - cp.t0;
  double eta = kRampTopFraction;
  double h2 = (1 - kPlateauEnd) * cp.ts;
  for (int it = 0; it < 60; ++it) {
    cp.t2 = cp.ts - h2;
    double P = cp.m * (eta * cp.t0 / 2                    // ramp
                       + h1 * (eta + 1) / 2               // rise average
                       + h1 * h1 * (eta / cp.t0) / 12     // rise slope term
                       + (cp.t2 - cp.t1)                  // plateau
                       + h2 / 2);                         // descent, beta part
    double Q = h2 * cp.m / 2 - h2 * h2 * cp.mpp / 12;     // descent, fixed part
    cp.beta = (cp.ts * cp.m - Q) / P;
    if (!(cp.beta > 1)) {  // descent still eats too much area
      h2 *= 0.25;
      continue;
    }
    double h2_ok = 2.5 * (cp.beta - 1) * cp.m / std::max(1e-12, -cp.mpp);
    if (h2 <= h2_ok * (1 + 1e-9)) break;
    h2 = std::max(h2_ok, h2 * 0.25);
  }
  if (!(cp.beta > 1)) throw std::runtime_error("cap construction degenerate");
  cp.ramp_top = eta * cp.beta * cp.m;
  cp.c = cp.ramp_top / (2 * cp.t0);
  return cp;
}

CappedFamily::Eval CappedFamily::eval_uncapped(double s, double t) const {
  // caches construction data keyed by (family, s); pure per family instance
  struct Key {
    std::uint64_t fam;
    double s;
    bool operator==(const Key& o) const { return fam == o.fam && s == o.s; }
  };
  struct KeyHash {
    size_t operator()(const Key& k) const {
      return std::hash<std::uint64_t>()(k.fam) ^ std::hash<double>()(k.s) * 3;
    }
  };
  thread_local std::unordered_map<Key, CapParams, KeyHash> cache;
  Key key{serial_, s};
  auto it = cache.find(key);
  if (it == cache.end()) {
    if (cache.size() > 4096) cache.clear();
    it = cache.emplace(key, cap_params(s)).first;
  }
  const CapParams& cp = it->second;

  if (t >= 1) return {s, 0, 0};
  if (t >= cp.ts) {
    return {profile_.f(t) + s, profile_.fp(t), profile_.fpp(t)};
  }
  double slope0 = cp.ramp_top / cp.t0;
  double area_ramp = cp.ramp_top * cp.t0 / 2;
  Hermite rise{cp.t0, cp.t1, cp.ramp_top, slope0, cp.beta * cp.m, 0};
  Hermite fall{cp.t2, cp.ts, cp.beta * cp.m, 0, cp.m, cp.mpp};
  if (t <= cp.t0) {
    return {slope0 * t * t / 2, slope0 * t, slope0};
  }
  if (t <= cp.t1) {
    return {area_ramp + rise.integral(t), rise.value(t), rise.deriv(t)};
  }
  double area1 = area_ramp + rise.full_integral();
  if (t <= cp.t2) {
    return {area1 + cp.beta * cp.m * (t - cp.t1), cp.beta * cp.m, 0};
  }
  double area2 = area1 + cp.beta * cp.m * (cp.t2 - cp.t1);
  return {area2 + fall.integral(t), fall.value(t), fall.deriv(t)};
}

CappedFamily::Eval CappedFamily::eval_blended(double s, double t) const {
  if (t < 0) throw std::domain_error("f_s domain is t >= 0");
  if (s < 0) throw std::domain_error("f_s needs s >= 0");
  if (s == 0) return {0, 0, 0};
  double psi = smoothstep_cinf((s - s0_ / 2) / (s0_ / 2));
  Eval full{0, 0, 0};
  if (psi > 0) full = eval_uncapped(s, t);
  if (psi >= 1) return full;
  Eval base = eval_uncapped(s0_, t);
  double w = (1 - psi) * (s / s0_);
  return {w * base.v + psi * full.v, w * base.d + psi * full.d,
          w * base.dd + psi * full.dd};
}

double CappedFamily::value(double s, double t) const {
  return eval_blended(s, t).v;
}
double CappedFamily::dt(double s, double t) const {
  return eval_blended(s, t).d;
}
double CappedFamily::dtt(double s, double t) const {
  return eval_blended(s, t).dd;
}

std::vector<double> CappedFamily::action_set(
    const std::vector<double>& lengths, double window_lo,
    double window_hi) const {
  std::vector<double> vals;
  for (double l : lengths) {
    if (l < 0) throw std::domain_error("geodesic lengths must be >= 0");
    double a;
    if (l == 0) {
      a = 0.0;  // horizontal tangents on [1, infinity)
    } else {
      double t = profile_.t_from_slope(l);
      a = profile_.action_of_tangent(t);
    }
    if (a >= window_lo && a <= window_hi) vals.push_back(a);
  }
  std::sort(vals.begin(), vals.end());
  std::vector<double> out;
  for (double v : vals) {
    if (out.empty() || v - out.back() > 1e-9) out.push_back(v);
  }
  return out;
}

}  // namespace alat::hamiltonian
