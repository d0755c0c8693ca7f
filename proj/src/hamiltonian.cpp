#include "alat/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "alat/detail/hermite.hpp"

namespace alat::hamiltonian {

namespace {

using detail::Hermite;

double next_uniform(std::uint64_t& state) {
  state ^= state << 13;
  state ^= state >> 7;
  state ^= state << 17;
  return static_cast<double>(state >> 11) * 0x1.0p-53;
}

double smoothstep3(double u) {  // cubic, C^1 at the ends
  if (u <= 0) return 0;
  if (u >= 1) return 1;
  return u * u * (3 - 2 * u);
}
double smoothstep3_int(double u) {  // integral from 0
  if (u <= 0) return 0;
  if (u >= 1) return u - 0.5;
  return u * u * u - u * u * u * u / 2;
}
double smoothstep3_deriv(double u) {
  if (u <= 0 || u >= 1) return 0;
  return 6 * u * (1 - u);
}

}  // namespace

// ---------------------------------------------------------------- H_infty

double AsymptoticPiece::h(double t) const {
  if (t <= 2.0 / 3) return 0;
  return mu / 3 * smoothstep3_int(3 * (t - 2.0 / 3));
}
double AsymptoticPiece::hp(double t) const {
  return mu * smoothstep3(3 * (t - 2.0 / 3));
}
double AsymptoticPiece::hpp(double t) const {
  return 3 * mu * smoothstep3_deriv(3 * (t - 2.0 / 3));
}

// ------------------------------------------------------------- embedding

LagrangianEmbedding::LagrangianEmbedding(const Manifold& N, double rho_,
                                         std::vector<double> amp)
    : base(N), rho(rho_), g_amp(std::move(amp)) {
  if (!base.flat()) {
    throw std::invalid_argument("embeddings require a flat base manifold");
  }
  if (static_cast<int>(g_amp.size()) != base.dim()) {
    throw std::invalid_argument("one amplitude per base dimension");
  }
  for (double a : g_amp) {
    if (a < 0) throw std::invalid_argument("amplitudes must be >= 0");
  }
  if (!(rho > 0)) throw std::invalid_argument("rho must be > 0");
}

double LagrangianEmbedding::g(const Vec& q) const {
  double v = 0;
  for (int i = 0; i < base.dim(); ++i) {
    v += g_amp[i] * (1 - std::cos(2 * M_PI * q[i] / base.periods()[i])) / 2;
  }
  return v;
}

Vec LagrangianEmbedding::dg(const Vec& q) const {
  Vec v(base.dim());
  for (int i = 0; i < base.dim(); ++i) {
    double w = 2 * M_PI / base.periods()[i];
    v[i] = g_amp[i] * w * std::sin(w * q[i]) / 2;
  }
  return v;
}

Mat LagrangianEmbedding::d2g(const Vec& q) const {
  Mat m = Mat::Zero(base.dim(), base.dim());
  for (int i = 0; i < base.dim(); ++i) {
    double w = 2 * M_PI / base.periods()[i];
    m(i, i) = g_amp[i] * w * w * std::cos(w * q[i]) / 2;
  }
  return m;
}

double LagrangianEmbedding::F_norm() const {
  double s = 0;
  for (double a : g_amp) s += a;
  return s / rho;
}

double LagrangianEmbedding::max_dg_norm() const {
  double s = 0;
  for (int i = 0; i < base.dim(); ++i) {
    double m = g_amp[i] * M_PI / base.periods()[i];
    s += m * m;
  }
  return std::sqrt(s);
}

bool LagrangianEmbedding::contained_in_half_disc() const {
  return rho + max_dg_norm() <= 0.5 + 1e-12;
}

double LagrangianEmbedding::j_inv_norm(const Vec& q, const Vec& p) const {
  return (p - dg(q)).norm() / rho;
}

std::vector<double> LagrangianEmbedding::geodesic_lengths(
    double max_len) const {
  std::set<double> out;
  out.insert(0.0);
  int d = base.dim();
  std::vector<double> lp(d);
  for (int i = 0; i < d; ++i) lp[i] = rho * base.periods()[i];
  if (d == 1) {
    for (int k = 1; k * lp[0] <= max_len; ++k) out.insert(k * lp[0]);
  } else if (d == 2) {
    int kmax0 = static_cast<int>(max_len / lp[0]) + 1;
    int kmax1 = static_cast<int>(max_len / lp[1]) + 1;
    for (int k0 = -kmax0; k0 <= kmax0; ++k0) {
      for (int k1 = -kmax1; k1 <= kmax1; ++k1) {
        if (k0 == 0 && k1 == 0) continue;
        double l = std::hypot(k0 * lp[0], k1 * lp[1]);
        if (l <= max_len) out.insert(l);
      }
    }
  } else {
    throw std::invalid_argument("geodesic lengths implemented for d <= 2");
  }
  // merge at 1e-9
  std::vector<double> v;
  for (double l : out) {
    if (v.empty() || l - v.back() > 1e-9) v.push_back(l);
  }
  return v;
}

double LagrangianEmbedding::min_nonzero_geodesic_length() const {
  double m = rho * base.periods()[0];
  for (int i = 1; i < base.dim(); ++i) {
    m = std::min(m, rho * base.periods()[i]);
  }
  return m;
}

// ------------------------------------------------------------ Hamiltonian

std::optional<Mat> Hamiltonian::hess_pp(const Vec& q, const Vec& p) const {
  if (!dpp_) return std::nullopt;
  return scale_ * dpp_(q, p);
}

Hamiltonian Hamiltonian::constant(int dim, double c) {
  Hamiltonian h;
  h.momentum_only_ = true;
  h.val_ = [c](const Vec&, const Vec&) { return c; };
  h.dq_ = [dim](const Vec&, const Vec&) { return Vec::Zero(dim); };
  h.dp_ = [dim](const Vec&, const Vec&) { return Vec::Zero(dim); };
  h.dpp_ = [dim](const Vec&, const Vec&) { return Mat::Zero(dim, dim); };
  return h;
}

Hamiltonian Hamiltonian::radial(std::function<double(double)> g,
                                std::function<double(double)> gp,
                                std::function<double(double)> gpp) {
  Hamiltonian h;
  h.momentum_only_ = true;
  h.val_ = [g](const Vec&, const Vec& p) { return g(p.norm()); };
  h.dq_ = [](const Vec& q, const Vec&) { return Vec::Zero(q.size()); };
  h.dp_ = [gp, gpp](const Vec&, const Vec& p) -> Vec {
    double r = p.norm();
    if (r < 1e-14) return Vec::Zero(p.size());
    return gp(r) / r * p;
  };
  h.dpp_ = [gp, gpp](const Vec&, const Vec& p) -> Mat {
    int n = static_cast<int>(p.size());
    double r = p.norm();
    if (r < 1e-10) return gpp(0.0) * Mat::Identity(n, n);
    Vec u = p / r;
    return gpp(r) * u * u.transpose() +
           gp(r) / r * (Mat::Identity(n, n) - u * u.transpose());
  };
  return h;
}

Hamiltonian Hamiltonian::momentum_1d(std::function<double(double)> W,
                                     std::function<double(double)> Wp,
                                     std::function<double(double)> Wpp) {
  Hamiltonian h;
  h.momentum_only_ = true;
  h.val_ = [W](const Vec&, const Vec& p) { return W(p[0]); };
  h.dq_ = [](const Vec&, const Vec&) { return Vec::Zero(1); };
  h.dp_ = [Wp](const Vec&, const Vec& p) {
    Vec v(1);
    v[0] = Wp(p[0]);
    return v;
  };
  h.dpp_ = [Wpp](const Vec&, const Vec& p) {
    Mat m(1, 1);
    m(0, 0) = Wpp(p[0]);
    return m;
  };
  return h;
}

Hamiltonian Hamiltonian::asymptotic(const AsymptoticPiece& hinf) {
  return radial([hinf](double r) { return hinf.eps * hinf.h(r); },
                [hinf](double r) { return hinf.eps * hinf.hp(r); },
                [hinf](double r) { return hinf.eps * hinf.hpp(r); });
}

Hamiltonian assemble_Hs(const LagrangianEmbedding& L, const CappedFamily& fam,
                        const AsymptoticPiece& hinf, double s) {
  if (!L.contained_in_half_disc()) {
    throw std::invalid_argument(
        "embedding image must lie in the half disc bundle: rho + max||dg|| "
        "<= 1/2");
  }
  if (s < 0) throw std::invalid_argument("assemble_Hs needs s >= 0");
  Hamiltonian h;
  h.momentum_only_ = L.max_dg_norm() == 0.0;
  double rho = L.rho;
  auto inside = [L, rho, fam, s](const Vec& q, const Vec& p, double& t,
                                 Vec& xi) {
    xi = p - L.dg(q);
    t = xi.norm() / rho;
    return t < 1.0;
  };
  h.val_ = [=](const Vec& q, const Vec& p) -> double {
    double t;
    Vec xi;
    if (inside(q, p, t, xi)) return fam.value(s, t);
    return hinf.value(p.norm()) + s;
  };
  h.dp_ = [=](const Vec& q, const Vec& p) -> Vec {
    double t;
    Vec xi;
    if (inside(q, p, t, xi)) {
      if (t < 1e-14) return Vec::Zero(p.size());
      return fam.dt(s, t) / (rho * rho * t) * xi;
    }
    double r = p.norm();
    if (r < 1e-14) return Vec::Zero(p.size());
    return hinf.eps * hinf.hp(r) / r * p;
  };
  h.dq_ = [=](const Vec& q, const Vec& p) -> Vec {
    double t;
    Vec xi;
    if (inside(q, p, t, xi)) {
      if (t < 1e-14) return Vec::Zero(q.size());
      return -fam.dt(s, t) / (rho * rho * t) * (L.d2g(q) * xi);
    }
    return Vec::Zero(q.size());
  };
  if (h.momentum_only_) {
    h.dpp_ = [=](const Vec&, const Vec& p) -> Mat {
      int n = static_cast<int>(p.size());
      double r = p.norm(), t = r / rho;
      if (t >= 1.0) {
        if (r < 1e-14) return Mat::Zero(n, n);
        Vec u = p / r;
        return hinf.eps * (hinf.hpp(r) * u * u.transpose() +
                           hinf.hp(r) / r *
                               (Mat::Identity(n, n) - u * u.transpose()));
      }
      if (t < 1e-10) {
        return fam.dtt(s, 0.0) / (rho * rho) * Mat::Identity(n, n);
      }
      Vec u = p / r;
      return fam.dtt(s, t) / (rho * rho) * u * u.transpose() +
             fam.dt(s, t) / (rho * rho * t) *
                 (Mat::Identity(n, n) - u * u.transpose());
    };
  }
  return h;
}

// ---------------------------------------------------------- C1, C2 bounds

DerivativeBounds c1_c2(const Hamiltonian& H, const Manifold& m,
                       int grid_per_dim) {
  if (!m.flat()) throw std::invalid_argument("c1_c2 samples flat charts");
  int d = m.dim();
  int nq = H.momentum_only() ? 1 : grid_per_dim;
  int np = grid_per_dim;
  double c1 = 0, c2 = 0;
  double fd = 1e-4;

  std::vector<int> qi(d, 0), pi(d, 0);
  auto for_grid = [&](auto&& body) {
    std::vector<int> idx(2 * d, 0);
    while (true) {
      Vec q(d), p(d);
      for (int i = 0; i < d; ++i) {
        q[i] = m.periods()[i] * (idx[i] + 0.5) / nq;
        p[i] = -1.0 + 2.0 * idx[d + i] / (np - 1);
      }
      if (p.norm() <= 1.0) body(q, p);
      int k = 0;
      for (; k < 2 * d; ++k) {
        int cap = k < d ? nq : np;
        if (++idx[k] < cap) break;
        idx[k] = 0;
      }
      if (k == 2 * d) break;
    }
  };

  for_grid([&](const Vec& q, const Vec& p) {
    Vec gq = H.grad_q(q, p), gp = H.grad_p(q, p);
    c1 = std::max(c1, std::sqrt(gq.squaredNorm() + gp.squaredNorm()));
    // finite-difference Hessian in the 2d phase-space coordinates
    Mat hess(2 * d, 2 * d);
    for (int j = 0; j < 2 * d; ++j) {
      Vec qp = q, qm = q, pp = p, pm = p;
      if (j < d) {
        qp[j] += fd;
        qm[j] -= fd;
      } else {
        pp[j - d] += fd;
        pm[j - d] -= fd;
      }
      Vec gqd = (H.grad_q(qp, pp) - H.grad_q(qm, pm)) / (2 * fd);
      Vec gpd = (H.grad_p(qp, pp) - H.grad_p(qm, pm)) / (2 * fd);
      hess.col(j) << gqd, gpd;
    }
    Mat sym = 0.5 * (hess + hess.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(sym, Eigen::EigenvaluesOnly);
    c2 = std::max(c2, es.eigenvalues().cwiseAbs().maxCoeff());
  });
  return {1.1 * c1, 1.1 * c2};
}

AdmissibilityReport check_admissible(const Hamiltonian& H, const Manifold& m,
                                     int samples) {
  AdmissibilityReport rep;
  int d = m.dim();
  std::uint64_t rng = 1234577;
  // fit mu, c from two probes on one ray, then verify on random samples
  Vec q0 = Vec::Zero(d), dir = Vec::Zero(d);
  dir[0] = 1;
  double h1 = H.value(q0, 1.0 * dir), h2 = H.value(q0, 2.0 * dir);
  rep.mu = h2 - h1;
  rep.c = h1 - rep.mu;
  double worst = 0;
  for (int i = 0; i < samples; ++i) {
    Vec q(d), p(d);
    for (int j = 0; j < d; ++j) {
      q[j] = m.periods()[j] * next_uniform(rng);
      p[j] = 2 * next_uniform(rng) - 1;
    }
    if (p.norm() < 1e-9) continue;
    double r = 1.0 + 3.0 * next_uniform(rng);
    p *= r / p.norm();
    worst = std::max(worst,
                     std::abs(H.value(q, p) - (rep.mu * r + rep.c)));
  }
  rep.worst_residual = worst;
  rep.admissible =
      worst < 1e-9 && rep.mu > 0 && rep.mu <= m.epsilon0() + 1e-12;
  return rep;
}

// -------------------------------------------------------- property suite

bool ProfileSuiteReport::all_pass() const {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

const PropertyCheck& ProfileSuiteReport::get(const std::string& id) const {
  for (const auto& c : checks) {
    if (c.id == id) return c;
  }
  throw std::out_of_range("no such property check: " + id);
}

namespace {

PropertyCheck check_f1(const CappedFamily& fam) {
  // smooth family: central differences in s converge at second order
  PropertyCheck c{"f1", true, 0, "second-order s-difference ladder"};
  for (double s : {0.8, 2.0, 6.0}) {
    for (double t : {0.1, 0.45, 0.95}) {
      double h = 1e-2;
      auto d = [&](double step) {
        return (fam.value(s + step, t) - fam.value(s - step, t)) / (2 * step);
      };
      double e1 = std::abs(d(h) - d(h / 4));
      double e2 = std::abs(d(h / 2) - d(h / 4));
      if (e1 > 1e-11 && e2 > 0.4 * e1) c.pass = false;
      c.worst = std::max(c.worst, e2);
    }
  }
  return c;
}

PropertyCheck check_f2(const CappedFamily& fam) {
  PropertyCheck c{"f2", true, 0, "f_s = c t^2 exactly near zero"};
  for (double s : {0.4 * fam.s0(), fam.s0(), 3.0, 11.0}) {
    double tref = std::min(fam.cap_params(std::max(s, fam.s0())).t0,
                           fam.cap_params(fam.s0()).t0);
    double ceff = fam.value(s, tref) / (tref * tref);
    if (!(ceff > 0)) c.pass = false;
    for (double t : {tref / 5, tref / 2}) {
      double resid = std::abs(fam.value(s, t) - ceff * t * t);
      c.worst = std::max(c.worst, resid);
      if (resid > 1e-12 * std::max(1.0, ceff)) c.pass = false;
    }
  }
  return c;
}

PropertyCheck check_f3(const CappedFamily& fam) {
  PropertyCheck c{"f3", true, 0, "f_s = s on [1, infinity)"};
  for (double s : {0.2, 1.0, 7.0, 30.0}) {
    for (double t : {1.0, 1.0001, 1.5, 4.0}) {
      double r = std::abs(fam.value(s, t) - s);
      c.worst = std::max(c.worst, r);
      if (r > 1e-12 * std::max(1.0, s)) c.pass = false;
    }
  }
  return c;
}

PropertyCheck check_f4(const CappedFamily& fam) {
  PropertyCheck c{"f4", true, 1e300, "strict increase on (0,1)"};
  for (double s : {0.1, 0.6, 3.0, 8.0, 25.0}) {
    for (int i = 1; i < 500; ++i) {
      double d = fam.dt(s, i / 500.0);
      c.worst = std::min(c.worst, d);
      if (!(d > 0)) c.pass = false;
    }
  }
  return c;
}

PropertyCheck check_f5(const CappedFamily& fam) {
  PropertyCheck c{"f5", true, 0, "capped tangents intercept in (-1, 0]"};
  for (double s : {5.0, 8.0, 20.0, 60.0}) {
    double ts = fam.tangent_point(s);
    for (int i = 0; i <= 600; ++i) {
      double t = ts * i / 600.0;
      double ic = fam.value(s, t) - t * fam.dt(s, t);
      c.worst = std::min(c.worst, ic);
      if (!(ic > -1.0 && ic <= 1e-12)) c.pass = false;
    }
  }
  return c;
}

PropertyCheck check_f6(const CappedFamily& fam) {
  PropertyCheck c{"f6", true, 0, "f_s = f + s above t_s, exactly"};
  const Profile& f = fam.profile();
  for (double s : {5.0, 9.0, 18.0}) {
    double ts = fam.tangent_point(s);
    for (int i = 0; i <= 300; ++i) {
      double t = ts + (2.0 - ts) * i / 300.0;
      double r = std::abs(fam.value(s, t) - f.f(t) - s);
      c.worst = std::max(c.worst, r);
      if (r > 1e-12) c.pass = false;
    }
  }
  return c;
}

PropertyCheck check_f7(const CappedFamily& fam) {
  PropertyCheck c{"f7", true, 1e300, "intercepts above -s/4 on [0,1]"};
  for (double s : {0.05, 0.3, 1.0, 2.5, 4.0, 10.0}) {
    for (int i = 0; i <= 500; ++i) {
      double t = i / 500.0;
      double ic = fam.value(s, t) - t * fam.dt(s, t);
      c.worst = std::min(c.worst, ic + s / 4);
      if (!(ic > -s / 4)) c.pass = false;
    }
  }
  return c;
}

PropertyCheck check_f8(const CappedFamily& fam, const LagrangianEmbedding& L) {
  // negative part of the action set of f_s equals the action set of f
  // shifted down by s, for all s (slope-crossing scan oracle)
  PropertyCheck c{"f8", true, 0, "negative actions match shifted action set"};
  auto lengths = L.geodesic_lengths(60.0);
  for (double s :
       {0.3 * fam.s0(), fam.s0(), 1.5, 3.0, 5.0, 9.0}) {
    std::vector<double> neg;  // computed negative actions of f_s orbits
    for (double l : lengths) {
      if (l == 0) {
        neg.push_back(-s);  // horizontal tangents at t >= 1
        continue;
      }
      // scan f_s' for slope crossings
      int n = 4000;
      double prev = fam.dt(s, 1e-9) - l;
      for (int i = 1; i <= n; ++i) {
        double t = static_cast<double>(i) / n;
        double cur = fam.dt(s, t) - l;
        if (prev == 0 || prev * cur < 0) {
          double lo = (i - 1.0) / n, hi = static_cast<double>(i) / n;
          for (int it = 0; it < 80; ++it) {
            double mid = (lo + hi) / 2;
            ((fam.dt(s, mid) - l) * prev > 0 ? lo : hi) = mid;
          }
          double t0 = (lo + hi) / 2;
          double a = t0 * fam.dt(s, t0) - fam.value(s, t0);
          if (a < -1e-9) neg.push_back(a);
        }
        prev = cur;
      }
    }
    std::sort(neg.begin(), neg.end());
    std::vector<double> merged;
    for (double v : neg) {
      if (merged.empty() || v - merged.back() > 1e-7) merged.push_back(v);
    }
    auto expect = fam.action_set(
        std::vector<double>(lengths.begin(), lengths.end()), 0, s - 1e-9);
    for (double& e : expect) e -= s;
    if (merged.size() != expect.size()) {
      c.pass = false;
      continue;
    }
    for (size_t i = 0; i < merged.size(); ++i) {
      double r = std::abs(merged[i] - expect[i]);
      c.worst = std::max(c.worst, r);
      if (r > 1e-6) c.pass = false;
    }
  }
  return c;
}

PropertyCheck check_h1(const AsymptoticPiece& hinf) {
  PropertyCheck c{"H1", true, 0, "H_infty zero on D_{2/3}"};
  for (int i = 0; i <= 400; ++i) {
    double t = (2.0 / 3) * i / 400.0;
    double v = std::abs(hinf.value(t));
    c.worst = std::max(c.worst, v);
    if (v != 0.0) c.pass = false;
  }
  return c;
}

PropertyCheck check_h3(const AsymptoticPiece& hinf, const Manifold& m) {
  // time-1 flow of H_infty from random fiber points: never returns to the
  // fiber unless stationary (displacement eps h'(|p|) below injectivity)
  PropertyCheck c{"H3", true, 0, "no fiber returns except constants"};
  std::uint64_t rng = 4321;
  for (int i = 0; i < 1000; ++i) {
    Vec q = m.random_point(rng);
    Vec p = m.random_tangent(q, 3.0, rng);
    double speed = hinf.eps * hinf.hp(p.norm());
    if (speed > m.injectivity_radius()) {
      c.pass = false;  // slope too large for the non-return argument
      continue;
    }
    if (speed == 0.0) continue;  // stationary orbit, allowed
    Vec q1 = m.exp(q, speed * p / p.norm());
    double d = m.dist(q, q1);
    c.worst = std::max(c.worst, -d);
    if (d < 1e-9) c.pass = false;
  }
  return c;
}

PropertyCheck check_h4(const AsymptoticPiece& hinf, const Manifold& m,
                       const LagrangianEmbedding& L, const CappedFamily& fam) {
  PropertyCheck c{"H4", true, 0, "S_1 defined near H_infty"};
  double delta = m.epsilon0() / 5;
  auto b1 = c1_c2(Hamiltonian::asymptotic(hinf), m, 20);
  c.worst = std::max(c.worst, b1.sum() - delta);
  if (b1.sum() > delta) c.pass = false;
  // a C^2-close admissible Hamiltonian: the assembled H^eps for small eps
  auto b2 = c1_c2(assemble_Hs(L, fam, hinf, 1e-4), m, 20);
  c.worst = std::max(c.worst, b2.sum() - delta);
  if (b2.sum() > delta) c.pass = false;
  return c;
}

}  // namespace

ProfileSuiteReport verify_profile_suite(const CappedFamily& fam,
                                        const AsymptoticPiece& hinf,
                                        const Manifold& m,
                                        const LagrangianEmbedding& L) {
  ProfileSuiteReport rep;
  rep.checks.push_back(check_f1(fam));
  rep.checks.push_back(check_f2(fam));
  rep.checks.push_back(check_f3(fam));
  rep.checks.push_back(check_f4(fam));
  rep.checks.push_back(check_f5(fam));
  rep.checks.push_back(check_f6(fam));
  rep.checks.push_back(check_f7(fam));
  rep.checks.push_back(check_f8(fam, L));
  rep.checks.push_back(check_h1(hinf));
  // H2: a scaled copy passes the same asymptotic checks
  {
    PropertyCheck c{"H2", true, 0, "t H_infty stays in the class"};
    for (double t : {0.5, 0.25}) {
      AsymptoticPiece sc = hinf.scaled(t);
      if (!check_h1(sc).pass || !check_h3(sc, m).pass) c.pass = false;
    }
    rep.checks.push_back(c);
  }
  rep.checks.push_back(check_h3(hinf, m));
  rep.checks.push_back(check_h4(hinf, m, L, fam));
  return rep;
}

// ---------------------------------------------------------------- WiggleW

WiggleW::WiggleW(double mu, double c0, std::vector<double> zeros,
                 std::vector<double> dips)
    : mu_(mu), c0_(c0), zeros_(std::move(zeros)) {
  size_t n = zeros_.size();
  if (n % 2 == 0 || n < 3) {
    throw std::invalid_argument("need an odd number (>= 3) of zeros");
  }
  if (dips.size() != n - 1) {
    throw std::invalid_argument("need n - 1 prescribed dips");
  }
  for (size_t i = 0; i + 1 < n; ++i) {
    if (!(zeros_[i] < zeros_[i + 1])) {
      throw std::invalid_argument("zeros must increase");
    }
  }
  if (!(zeros_.front() > -1 && zeros_.back() < 1)) {
    throw std::invalid_argument("zeros must lie in (-1, 1)");
  }

  // Segment widths include the boundary pieces [-1, z_1] and [z_n, 1].
  std::vector<double> h;
  h.push_back(zeros_.front() + 1);
  for (size_t i = 0; i + 1 < n; ++i) h.push_back(zeros_[i + 1] - zeros_[i]);
  h.push_back(1 - zeros_.back());

  // W(z_k) = mu + c0 - dips[k]; the curvature magnitudes sigma_k follow from
  // the Hermite segment areas, and the final pair (sigma_n, dip_n) is solved
  // so that W returns to mu + c0 at p = 1 (same constant on both sides).
  sigmas_.assign(n, 0.0);
  sigmas_[0] = 12 * (dips[0] - h[0] * mu_ / 2) / (h[0] * h[0]);
  for (size_t k = 0; k + 2 < n; ++k) {
    double dw = std::abs(dips[k + 1] - dips[k]);
    sigmas_[k + 1] = 12 * dw / (h[k + 1] * h[k + 1]) - sigmas_[k];
  }
  double hn = h[n], hm = h[n - 1];
  double denom = (hn * hn - hm * hm) / 12;
  if (std::abs(denom) < 1e-9) {
    throw std::invalid_argument("final segment widths too close to balance");
  }
  sigmas_[n - 1] =
      (dips[n - 2] + hm * hm * sigmas_[n - 2] / 12 - hn * mu_ / 2) / denom;
  double last_dip =
      dips[n - 2] + hm * hm * (sigmas_[n - 2] + sigmas_[n - 1]) / 12;
  dips.push_back(last_dip);
  for (double sg : sigmas_) {
    if (!(sg > 0)) {
      throw std::invalid_argument("dip pattern gives a non-positive sigma");
    }
  }
  auto signed_slope = [&](size_t k) {
    return (k % 2 == 0 ? 1.0 : -1.0) * sigmas_[k];
  };

  knot_t_ = {-1.0};
  knot_v_ = {-mu_};
  knot_s_ = {0.0};
  for (size_t k = 0; k < n; ++k) {
    knot_t_.push_back(zeros_[k]);
    knot_v_.push_back(0.0);
    knot_s_.push_back(signed_slope(k));
  }
  knot_t_.push_back(1.0);
  knot_v_.push_back(mu_);
  knot_s_.push_back(0.0);

  knot_area_ = {0.0};
  for (size_t k = 0; k + 1 < knot_t_.size(); ++k) {
    Hermite h{knot_t_[k], knot_t_[k + 1], knot_v_[k], knot_s_[k],
              knot_v_[k + 1], knot_s_[k + 1]};
    knot_area_.push_back(knot_area_.back() + h.full_integral());
  }
}

double WiggleW::deriv(double p) const {
  if (p <= -1) return -mu_;
  if (p >= 1) return mu_;
  size_t k = 0;
  while (k + 2 < knot_t_.size() && p > knot_t_[k + 1]) ++k;
  Hermite h{knot_t_[k], knot_t_[k + 1], knot_v_[k], knot_s_[k],
            knot_v_[k + 1], knot_s_[k + 1]};
  return h.value(p);
}

double WiggleW::second(double p) const {
  if (p <= -1 || p >= 1) return 0;
  size_t k = 0;
  while (k + 2 < knot_t_.size() && p > knot_t_[k + 1]) ++k;
  Hermite h{knot_t_[k], knot_t_[k + 1], knot_v_[k], knot_s_[k],
            knot_v_[k + 1], knot_s_[k + 1]};
  return h.deriv(p);
}

double WiggleW::value(double p) const {
  if (p <= -1) return -mu_ * p + c0_;
  if (p >= 1) return mu_ * p + c0_;  // balanced: same constant on both sides
  size_t k = 0;
  while (k + 2 < knot_t_.size() && p > knot_t_[k + 1]) ++k;
  Hermite h{knot_t_[k], knot_t_[k + 1], knot_v_[k], knot_s_[k],
            knot_v_[k + 1], knot_s_[k + 1]};
  return mu_ + c0_ + knot_area_[k] + h.integral(p);
}

std::vector<double> WiggleW::critical_values() const {
  std::vector<double> out;
  for (double z : zeros_) out.push_back(value(z));
  return out;
}

double WiggleW::max_abs_deriv() const {
  double m = 0;
  for (int i = 0; i <= 4000; ++i) {
    m = std::max(m, std::abs(deriv(-1 + 2.0 * i / 4000)));
  }
  return m;
}

Hamiltonian WiggleW::hamiltonian() const {
  WiggleW w = *this;
  return Hamiltonian::momentum_1d([w](double p) { return w.value(p); },
                                  [w](double p) { return w.deriv(p); },
                                  [w](double p) { return w.second(p); });
}

}  // namespace alat::hamiltonian
