#include "alat/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "alat/detail/rng.hpp"

namespace alat::dynamics {

using detail::Xorshift;
using lattice::eval_S;
using lattice::grad_S;
using lattice::hess_S;
using lattice::pack;
using lattice::Subdivision;
using lattice::unpack;

double chi(double x, double eps0) {
  double lo = eps0 / 5, hi = eps0 / 4;
  if (x <= lo) return 1.0;
  if (x >= hi) return 0.0;
  double u = (x - lo) / (hi - lo);
  double s = u * u * u * (10 + u * (-15 + 6 * u));  // quintic smoothstep
  return 1.0 - s;
}

double chi_r(const FlowData& fd, double eps0) {
  double v = 1.0;
  for (const auto& e : fd.eps_q) v *= chi(e.norm(), eps0);
  return v;
}

double chi_r(const LatticeContext& ctx, const LatticePoint& z) {
  return chi_r(lattice::flow_data(ctx, z), ctx.m.epsilon0());
}

Vec pseudo_gradient(const LatticeContext& ctx, const LatticePoint& z,
                    FieldKind kind) {
  Vec g = grad_S(ctx, z, false);
  double c = chi_r(ctx, z);
  int d = ctx.dim();
  for (int j = 0; j < ctx.r(); ++j) {
    g.segment(2 * j * d, d) *= c;  // q-slot scaled by the bump
  }
  if (kind == FieldKind::Fiber) g.segment(0, d).setZero();
  return g;
}

namespace {

bool lattice_ok(const geometry::Manifold& m, const LatticePoint& z) {
  int n = z.r();
  for (int j = 0; j < n; ++j) {
    if (!(m.dist(z.q[j], z.q[(j + 1) % n]) < m.epsilon0())) return false;
  }
  return true;
}

// mean-centered closed random walk; p entries uniform in [-p_max, p_max]^d
LatticePoint random_lattice_point(const LatticeContext& ctx, double p_max,
                                  Xorshift& rng) {
  int n = ctx.r(), d = ctx.dim();
  std::vector<Vec> steps(n);
  Vec mean = Vec::Zero(d);
  for (int j = 0; j < n; ++j) {
    steps[j] = Vec(d);
    for (int i = 0; i < d; ++i) {
      steps[j][i] = 0.35 * ctx.m.epsilon0() * rng.symmetric();
    }
    mean += steps[j];
  }
  mean /= n;
  LatticePoint z;
  Vec q(d);
  for (int i = 0; i < d; ++i) q[i] = ctx.m.periods()[i] * rng.uniform();
  for (int j = 0; j < n; ++j) {
    z.q.push_back(ctx.m.reduce(q));
    Vec p(d);
    for (int i = 0; i < d; ++i) p[i] = p_max * rng.symmetric();
    z.p.push_back(p);
    q = q + steps[j] - mean;
  }
  return z;
}

}  // namespace

System lattice_system(const LatticeContext& ctx, bool fiber,
                      const Vec& q0_fixed) {
  System sys;
  sys.dim = ctx.packed_size(fiber);
  LatticeContext c = ctx;
  Vec q0 = q0_fixed;
  sys.value = [c, fiber, q0](const Vec& x) {
    return eval_S(c, unpack(c, x, fiber, q0));
  };
  sys.grad = [c, fiber, q0](const Vec& x) {
    return grad_S(c, unpack(c, x, fiber, q0), fiber);
  };
  sys.hess = [c, fiber, q0](const Vec& x) {
    return hess_S(c, unpack(c, x, fiber, q0), fiber);
  };
  sys.pseudo = [c, fiber, q0](const Vec& x) {
    LatticePoint z = unpack(c, x, fiber, q0);
    FlowData fd = lattice::flow_data(c, z);
    double bump = chi_r(fd, c.m.epsilon0());
    Vec g = grad_S(c, z, fiber);
    int d = c.dim();
    int idx = 0;
    for (int j = 0; j < c.r(); ++j) {
      if (!(fiber && j == 0)) {
        g.segment(idx, d) *= bump;
        idx += d;
      }
      idx += d;
    }
    return g;
  };
  sys.in_domain = [c, fiber, q0](const Vec& x) {
    return lattice_ok(c.m, unpack(c, x, fiber, q0));
  };
  return sys;
}

TrajectoryStats flow(const LatticeContext& ctx, const LatticePoint& z,
                     FieldKind kind, double sign, double duration,
                     double step) {
  bool fiber = kind == FieldKind::Fiber;
  System sys = lattice_system(ctx, fiber, z.q[0]);
  Vec x = pack(ctx, z, fiber);
  TrajectoryStats st;
  int d = ctx.dim();
  int nsteps = std::max(1, static_cast<int>(std::ceil(duration / step)));
  double h = duration / nsteps;
  auto f = [&](const Vec& y) { return (sign * -1.0) * sys.field(y); };
  // sign = +1 flows -X (descent); sign = -1 flows +X
  for (int i = 0; i < nsteps; ++i) {
    LatticePoint cur = unpack(ctx, x, fiber, z.q[0]);
    if (!lattice_ok(ctx.m, cur)) {
      st.invariant_violated = true;
      break;
    }
    Vec k1 = f(x);
    Vec k2 = f(x + h / 2 * k1);
    Vec k3 = f(x + h / 2 * k2);
    Vec k4 = f(x + h * k3);
    Vec xn = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    LatticePoint nxt = unpack(ctx, xn, fiber, z.q[0]);
    for (int j = 0; j < ctx.r(); ++j) {
      double rate =
          std::abs(nxt.p[j].norm() - cur.p[j].norm()) / h;
      st.max_p_rate = std::max(st.max_p_rate, rate);
    }
    x = xn;
    ++st.steps;
  }
  st.end = x;
  LatticePoint endp = unpack(ctx, x, fiber, z.q[0]);
  st.value_end = lattice_ok(ctx.m, endp) ? eval_S(ctx, endp) : 0.0;
  st.left_domain = !lattice_ok(ctx.m, endp);
  return st;
}

void hessian_signature(const LatticeContext& ctx, const SearchOptions& opt,
                       CriticalPoint& cp) {
  Mat H = hess_S(ctx, cp.point, opt.fiber);
  Eigen::SelfAdjointEigenSolver<Mat> es(H);
  Vec ev = es.eigenvalues();
  double radius = ev.cwiseAbs().maxCoeff();
  double null_tol = opt.null_tol_factor * std::max(radius, 1e-12);
  cp.morse_index = 0;
  cp.nullity = 0;
  cp.hessian_spectrum.assign(ev.data(), ev.data() + ev.size());
  double min_abs_nonzero = 1e300;
  for (int i = 0; i < ev.size(); ++i) {
    if (std::abs(ev[i]) < null_tol) {
      ++cp.nullity;
    } else {
      if (ev[i] < 0) ++cp.morse_index;
      min_abs_nonzero = std::min(min_abs_nonzero, std::abs(ev[i]));
    }
  }
  cp.degenerate = cp.nullity > 0;
  cp.ill_conditioned =
      min_abs_nonzero < 1e300 && radius / min_abs_nonzero > 1e12;
}

namespace {

// reconstruct the time-1 orbit from node 0; fills closure, action, winding
void reconstruct_orbit(const LatticeContext& ctx, bool fiber,
                       CriticalPoint& cp) {
  LatticeContext fine = ctx;
  fine.flow_substeps = 2048;
  const Vec& q0 = cp.point.q[0];
  const Vec& p0 = cp.point.p[0];
  auto e = lattice::flow_piece(fine, q0, p0, 1.0);
  double base_err = ctx.m.dist(e.q, q0);
  cp.closure_error =
      fiber ? base_err : std::hypot(base_err, (e.p - p0).norm());
  cp.orbit_action = e.action;
  cp.winding = Vec(ctx.dim());
  for (int i = 0; i < ctx.dim(); ++i) {
    cp.winding[i] = e.disp[i] / ctx.m.periods()[i];
  }
}

}  // namespace

std::vector<CriticalPoint> find_critical(const LatticeContext& ctx,
                                         const std::vector<LatticePoint>& seeds,
                                         const SearchOptions& opt) {
  bool fiber = opt.fiber;
  std::vector<CriticalPoint> out;
  for (const LatticePoint& seed : seeds) {
    if (!lattice_ok(ctx.m, seed)) continue;
    Vec q0 = fiber && opt.q0.size() ? Vec(ctx.m.reduce(opt.q0)) : seed.q[0];
    LatticePoint z = seed;
    if (fiber) z.q[0] = q0;
    System sys = lattice_system(ctx, fiber, q0);
    Vec x = pack(ctx, z, fiber);

    // descent along the negative pseudo-gradient until the Newton basin
    bool dead = false;
    try {
      double t = 0;
      while (sys.grad(x).norm() > opt.descent_tol) {
        Vec f = sys.field(x);
        double fn = f.norm();
        double h = std::min(0.05 * ctx.m.epsilon0() / (fn + 1e-12), 0.5);
        Vec k1 = -sys.field(x);
        Vec k2 = -sys.field(x + h / 2 * k1);
        Vec k3 = -sys.field(x + h / 2 * k2);
        Vec k4 = -sys.field(x + h * k3);
        x += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
        t += h;
        if (!sys.inside(x) || sys.value(x) < opt.value_floor ||
            t > opt.descent_time) {
          dead = true;
          break;
        }
      }
    } catch (const std::exception&) {
      dead = true;  // left the evaluable region
    }
    if (dead) continue;

    // damped Newton on the gradient
    bool converged = false;
    try {
      double lambda = 0.0;
      Vec g = sys.grad(x);
      for (int it = 0; it < opt.newton_max_iter; ++it) {
        if (g.norm() < opt.newton_tol) {
          converged = true;
          break;
        }
        Mat H = sys.hess(x);
        Mat A = H + lambda * Mat::Identity(H.rows(), H.cols());
        Vec step = A.colPivHouseholderQr().solve(-g);
        Vec xn = x + step;
        Vec gn;
        bool ok = sys.inside(xn);
        if (ok) {
          try {
            gn = sys.grad(xn);
          } catch (const std::exception&) {
            ok = false;
          }
        }
        if (ok && gn.norm() < g.norm()) {
          x = xn;
          g = gn;
          lambda = std::max(lambda / 4, 0.0);
        } else {
          lambda = lambda == 0 ? 1e-6 : lambda * 10;
          if (lambda > 1e8) break;
        }
      }
    } catch (const std::exception&) {
      converged = false;
    }
    if (!converged) continue;  // seed discarded (logged by callers if needed)

    CriticalPoint cp;
    cp.point = unpack(ctx, x, fiber, q0);
    cp.grad_norm = sys.grad(x).norm();
    cp.value = sys.value(x);

    bool dup = false;
    for (auto& prev : out) {
      if (lattice::lattice_distance(ctx.m, prev.point, cp.point) <
          opt.dedup_distance) {
        dup = true;
        break;
      }
    }
    if (dup) continue;
    hessian_signature(ctx, opt, cp);
    reconstruct_orbit(ctx, fiber, cp);
    out.push_back(std::move(cp));
  }

  // cluster degenerate (Bott) representatives
  std::vector<CriticalPoint> merged;
  for (auto& cp : out) {
    bool absorbed = false;
    if (cp.degenerate) {
      for (auto& rep : merged) {
        if (rep.degenerate &&
            std::abs(rep.value - cp.value) < 1e-7 &&
            lattice::lattice_distance(ctx.m, rep.point, cp.point) <
                opt.bott_cluster_distance) {
          ++rep.cluster_size;
          absorbed = true;
          break;
        }
      }
    }
    if (!absorbed) merged.push_back(std::move(cp));
  }
  std::sort(merged.begin(), merged.end(),
            [](const CriticalPoint& a, const CriticalPoint& b) {
              if (a.value != b.value) return a.value < b.value;
              return a.point.p[0][0] < b.point.p[0][0];
            });
  return merged;
}

std::vector<LatticePoint> orbit_candidate_seeds(const LatticeContext& ctx,
                                                bool fiber, const Vec& q0,
                                                int random_seeds,
                                                std::uint64_t rng_seed) {
  std::vector<LatticePoint> seeds;
  int d = ctx.dim();
  Xorshift rng(rng_seed);
  Vec base = q0.size() ? Vec(ctx.m.reduce(q0)) : Vec(Vec::Zero(d));

  if (ctx.H.momentum_only() && ctx.m.flat()) {
    // winding candidates: time-1 displacement = grad_p H(p) equal to a
    // lattice vector; solve along each lattice direction by slope scan
    double vmax = 0.999 * ctx.m.epsilon0() / ctx.alpha.length();
    double pmax = 3.0;
    std::vector<Vec> lattice_vectors;
    if (d == 1) {
      double P = ctx.m.periods()[0];
      for (int k = -static_cast<int>(vmax / P); k * P <= vmax; ++k) {
        Vec v(1);
        v << k * P;
        lattice_vectors.push_back(v);
      }
    } else {
      std::vector<double> P = ctx.m.periods();
      int k0max = static_cast<int>(vmax / P[0]);
      int k1max = static_cast<int>(vmax / P[1]);
      for (int k0 = -k0max; k0 <= k0max; ++k0) {
        for (int k1 = -k1max; k1 <= k1max; ++k1) {
          Vec v(2);
          v << k0 * P[0], k1 * P[1];
          if (v.norm() <= vmax) lattice_vectors.push_back(v);
        }
      }
    }
    for (const Vec& v : lattice_vectors) {
      // scan p = t * dir for grad_p H(p) . dir = ||v||, dir = v-hat
      Vec dir;
      if (v.norm() < 1e-12) {
        dir = Vec::Zero(d);
        dir[0] = 1;
      } else {
        dir = v / v.norm();
      }
      double target = v.norm();
      auto slope = [&](double t) {
        return ctx.H.grad_p(base, Vec(t * dir)).dot(dir) - target;
      };
      int nscan = 800;
      double prev = slope(-pmax);
      for (int i = 1; i <= nscan; ++i) {
        double t = -pmax + 2 * pmax * i / nscan;
        double cur = slope(t);
        if (prev == 0.0 || prev * cur < 0) {
          double lo = -pmax + 2 * pmax * (i - 1) / nscan, hi = t;
          double flo = prev;
          for (int it = 0; it < 70; ++it) {
            double mid = (lo + hi) / 2;
            if (slope(mid) * flo > 0)
              lo = mid;
            else
              hi = mid;
          }
          double t0 = (lo + hi) / 2;
          try {
            seeds.push_back(lattice::dissect(ctx, base, Vec(t0 * dir)));
          } catch (const std::exception&) {
            // candidate too fast for this subdivision; skip
          }
        }
        prev = cur;
      }
    }
  }
  for (int i = 0; i < random_seeds; ++i) {
    LatticePoint z = random_lattice_point(ctx, 1.2, rng);
    if (fiber && q0.size()) z.q[0] = base;
    if (lattice_ok(ctx.m, z)) seeds.push_back(z);
  }
  return seeds;
}

// ------------------------------------------------------------- suites

SuiteReport verify_lemma_2_3(const LatticeContext& ctx, long samples,
                             std::uint64_t rng_seed, double* k_out) {
  SuiteReport rep{"lemma-2.3"};
  Xorshift rng(rng_seed);
  bool exact = ctx.H.momentum_only() && ctx.m.flat();
  double K = 1.0;

  auto draw = [&](bool calibrating, long count, double* ratio_max) {
    for (long i = 0; i < count; ++i) {
      LatticePoint z = random_lattice_point(ctx, 1.3, rng);
      if (!lattice_ok(ctx.m, z)) {
        --i;
        continue;
      }
      FlowData fd;
      try {
        fd = lattice::flow_data(ctx, z);
      } catch (const std::exception&) {
        --i;
        continue;
      }
      int n = ctx.r();
      int j = static_cast<int>(rng.uniform() * n) % n;
      Vec gq, gp;
      if (exact) {
        gq = -fd.eps_p[j];
        gp = fd.eps_q[(j + 1) % n];
      } else {
        lattice::grad_S_fd_node(ctx, z, j, gq, gp);
      }
      double P = std::max(1.0, fd.momentum_sup);
      const Vec& et = fd.eps_q_tilde[(j + 1) % n];
      // (i): ||grad_p S - e-tilde|| <= 1/4 ||e-tilde||
      double lhs1 = (gp - et).norm();
      double rhs1 = 0.25 * et.norm() + 1e-8;
      // (ii): ||grad_q S + eps_p|| <= K max(1,P)(||eps_q[j]|| + ||eps_q[j+1]||)
      double lhs2 = (gq + fd.eps_p[j]).norm();
      double den = P * (fd.eps_q[j].norm() + fd.eps_q[(j + 1) % n].norm());
      if (calibrating) {
        if (den > 1e-10) *ratio_max = std::max(*ratio_max, lhs2 / den);
        continue;
      }
      ++rep.samples;
      bool viol1 = lhs1 > rhs1;
      bool viol2 = den > 1e-10 ? lhs2 > K * den + 1e-8 : lhs2 > 1e-7;
      if (viol1 || viol2) ++rep.violations;
      rep.worst_margin = std::max(
          {rep.worst_margin, lhs1 - rhs1, lhs2 - (K * den + 1e-8)});
    }
  };

  double ratio_max = 0;
  draw(true, samples / 2, &ratio_max);
  K = std::max(1.1 * ratio_max, 1.0);
  if (k_out) *k_out = K;
  draw(false, samples - samples / 2, nullptr);
  rep.note = "K = " + std::to_string(K);
  return rep;
}

SuiteReport verify_lemma_3_4(const LatticeContext& ctx, int trajectories,
                             double duration, std::uint64_t rng_seed) {
  SuiteReport rep{"lemma-3.4"};
  Xorshift rng(rng_seed);
  double bound = 5 * ctx.m.epsilon0() / 4 + 1e-6;
  for (int i = 0; i < trajectories; ++i) {
    LatticePoint z = random_lattice_point(ctx, 1.2, rng);
    if (!lattice_ok(ctx.m, z)) continue;
    for (double sign : {+1.0, -1.0}) {
      TrajectoryStats st;
      try {
        st = flow(ctx, z, FieldKind::Full, sign, duration, 0.02);
      } catch (const std::exception&) {
        continue;
      }
      ++rep.samples;
      if (st.invariant_violated) ++rep.violations;
      if (st.max_p_rate > bound) ++rep.violations;
      rep.worst_margin = std::max(rep.worst_margin, st.max_p_rate - bound);
    }
  }
  return rep;
}

SuiteReport verify_lemma_3_5(const LatticeContext& ctx, long samples,
                             std::uint64_t rng_seed) {
  SuiteReport rep{"lemma-3.5"};
  Xorshift rng(rng_seed);
  double eps0 = ctx.m.epsilon0();
  double lower = 1e300;
  while (rep.samples < samples) {
    LatticePoint z = random_lattice_point(ctx, 1.0, rng);
    // push outside B_r: scale momenta to P in (2, 6], stretch one q-gap
    double P = 2.0 + 4.0 * rng.uniform();
    int n = ctx.r(), d = ctx.dim();
    double pmax = 0;
    for (auto& p : z.p) pmax = std::max(pmax, p.norm());
    if (pmax < 1e-9) continue;
    for (auto& p : z.p) p *= P / pmax;
    int stretch = static_cast<int>(rng.uniform() * n) % n;
    Vec dirv(d);
    for (int i = 0; i < d; ++i) dirv[i] = rng.symmetric();
    if (dirv.norm() < 1e-9) continue;
    dirv *= (0.6 * eps0 + 0.3 * eps0 * rng.uniform()) / dirv.norm();
    z.q[stretch] = ctx.m.exp(z.q[(stretch + 1) % n], dirv);
    if (!lattice_ok(ctx.m, z)) continue;
    bool outside = false;
    for (int j = 0; j < n; ++j) {
      if (ctx.m.dist(z.q[j], z.q[(j + 1) % n]) > eps0 / 2) outside = true;
    }
    FlowData fd;
    try {
      fd = lattice::flow_data(ctx, z);
    } catch (const std::exception&) {
      continue;
    }
    if (!outside || fd.momentum_sup <= 2.0) continue;
    // X_r(S_r) = chi ||grad_q||^2 + ||grad_p||^2
    Vec g = grad_S(ctx, z, false);
    double bump = chi_r(fd, eps0);
    double val = 0;
    int dd = ctx.dim();
    for (int j = 0; j < n; ++j) {
      val += bump * g.segment(2 * j * dd, dd).squaredNorm() +
             g.segment((2 * j + 1) * dd, dd).squaredNorm();
    }
    ++rep.samples;
    lower = std::min(lower, val);
    if (!(val > 0)) ++rep.violations;
  }
  rep.worst_margin = lower;  // sampled epsilon_lower
  return rep;
}

SuiteReport verify_lemma_3_6(const LatticeContext& ctx, long samples,
                             std::uint64_t rng_seed) {
  SuiteReport rep{"lemma-3.6"};
  Xorshift rng(rng_seed);
  int n = ctx.r(), d = ctx.dim();
  long tried = 0;
  while (rep.samples < samples && tried < 50 * samples) {
    ++tried;
    LatticePoint z = random_lattice_point(ctx, 0.0, rng);
    double P = 2.0 + 3.0 * rng.uniform();
    Vec dirv(d);
    for (int i = 0; i < d; ++i) dirv[i] = rng.symmetric();
    if (dirv.norm() < 1e-9) continue;
    dirv /= dirv.norm();
    bool dip = rng.uniform() < 0.3;  // occasionally break the hypothesis
    for (int j = 0; j < n; ++j) {
      Vec noise(d);
      for (int i = 0; i < d; ++i) {
        noise[i] = 0.15 * P / n * rng.symmetric();
      }
      z.p[j] = P * dirv + noise;
      if (dip && j == n / 2) z.p[j] *= 0.2;
    }
    double pmax = 0;
    for (auto& p : z.p) pmax = std::max(pmax, p.norm());
    for (auto& p : z.p) p *= P / pmax;  // momentum sup exactly P
    FlowData fd;
    try {
      fd = lattice::flow_data(ctx, z);
    } catch (const std::exception&) {
      continue;
    }
    if (fd.momentum_sup < 2.0) continue;
    double sum = 0;
    for (int j = 1; j < n; ++j) sum += fd.eps_p[j].norm();
    if (sum > fd.momentum_sup / 2) continue;  // hypothesis not satisfied
    ++rep.samples;
    double minp = 1e300;
    for (const auto& p : z.p) minp = std::min(minp, p.norm());
    double margin = minp - fd.momentum_sup / 2;
    rep.worst_margin = std::min(rep.worst_margin, margin);
    if (margin < -1e-9) ++rep.violations;
  }
  return rep;
}

SuiteReport verify_lemma_6_4(const ContextFamily& family,
                             const std::vector<double>& s_values,
                             double f_norm, const Vec& q0, int winding_max,
                             double tol) {
  SuiteReport rep{"lemma-6.4"};
  (void)winding_max;
  for (double s : s_values) {
    LatticeContext ctx = family(s);
    SearchOptions opt;
    opt.fiber = true;
    opt.q0 = q0;
    auto seeds = orbit_candidate_seeds(ctx, true, q0, 0, 7);
    auto crits = find_critical(ctx, seeds, opt);
    double h = 1e-3;
    LatticeContext up = family(s + h), dn = family(s - h);
    for (const auto& cp : crits) {
      if (cp.value >= -f_norm - 1e-6) continue;  // strictly below -||F||
      double drift =
          (eval_S(up, cp.point) - eval_S(dn, cp.point)) / (2 * h);
      ++rep.samples;
      double margin = std::abs(drift + 1.0);
      rep.worst_margin = std::max(rep.worst_margin, margin);
      if (margin > tol) ++rep.violations;
    }
  }
  return rep;
}

SuiteReport verify_lemma_7_1(const LatticeContext& ctx, const Vec& q0,
                             int winding_max) {
  SuiteReport rep{"lemma-7.1"};
  (void)winding_max;
  SearchOptions opt;
  opt.fiber = true;
  opt.q0 = q0;
  auto seeds = orbit_candidate_seeds(ctx, true, q0, 0, 11);
  auto crits = find_critical(ctx, seeds, opt);
  for (const auto& cp : crits) {
    double full = grad_S(ctx, cp.point, false).norm();
    ++rep.samples;
    rep.worst_margin = std::max(rep.worst_margin, full - 2.0);
    if (full > 2.0 + 1e-6) ++rep.violations;
  }
  return rep;
}

SuiteReport verify_lemma_10_5(const ContextFamily& family, double c_infty,
                              const std::vector<double>& s_values,
                              long samples, std::uint64_t rng_seed,
                              double* k_out) {
  SuiteReport rep{"lemma-10.5"};
  Xorshift rng(rng_seed);
  double h = 1e-3;
  double k = 0;
  // S-bar = S + c_infty + s; drift |d/ds S-bar| <= k (P + 1)
  auto run = [&](bool calibrating, long count) {
    for (long i = 0; i < count; ++i) {
      double s = s_values[static_cast<size_t>(rng.uniform() * s_values.size()) %
                          s_values.size()];
      LatticeContext ctx = family(s);
      LatticePoint z = random_lattice_point(ctx, 2.5, rng);
      if (!lattice_ok(ctx.m, z)) {
        --i;
        continue;
      }
      double up, dn, P;
      try {
        up = eval_S(family(s + h), z);
        dn = eval_S(family(s - h), z);
        P = lattice::flow_data(ctx, z).momentum_sup;
      } catch (const std::exception&) {
        --i;
        continue;
      }
      double drift = std::abs((up - dn) / (2 * h) + 1.0);  // d/ds S-bar
      double ratio = drift / (P + 1);
      if (calibrating) {
        k = std::max(k, ratio);
        continue;
      }
      ++rep.samples;
      double margin = drift - k * (P + 1);
      rep.worst_margin = std::max(rep.worst_margin, margin);
      if (margin > 1e-9) ++rep.violations;
    }
  };
  run(true, samples / 2);
  k = std::max(1.1 * k, 1e-6);
  if (k_out) *k_out = k;
  (void)c_infty;
  run(false, samples - samples / 2);
  rep.note = "k = " + std::to_string(k);
  return rep;
}

SpacelikeReport spacelike_check(const ContextFamily& family,
                                const ParamPath& path, double a,
                                double value_band, int winding_max,
                                int t_samples) {
  SpacelikeReport rep;
  (void)winding_max;
  for (int i = 0; i <= t_samples; ++i) {
    double t = static_cast<double>(i) / t_samples;
    double s = path.s(t);
    Vec q = path.q(t);
    LatticeContext ctx = family(s);
    SearchOptions opt;
    opt.fiber = true;
    opt.q0 = q;
    auto crits =
        find_critical(ctx, orbit_candidate_seeds(ctx, true, q, 0, 3), opt);
    double h = 1e-4;
    double t0 = std::max(0.0, t - h), t1 = std::min(1.0, t + h);
    for (const auto& cp : crits) {
      if (std::abs(cp.value - a) > value_band) continue;
      // lift-independent derivative at a fiber-critical point: move the
      // basepoint along the path, keep the other coordinates
      auto shifted = [&](double tt) {
        LatticePoint z = cp.point;
        Vec dq = ctx.m.log(q, family(path.s(tt)).m.reduce(path.q(tt)));
        for (auto& qq : z.q) qq = ctx.m.exp(qq, dq);
        return eval_S(family(path.s(tt)), z);
      };
      double deriv = (shifted(t1) - shifted(t0)) / (t1 - t0);
      ++rep.checked;
      rep.worst = std::max(rep.worst, deriv);
      if (!(deriv < 0)) rep.spacelike = false;
    }
  }
  return rep;
}

ZprimeResult zprime_transport(const ContextFamily& family, double s_from,
                              double s_to, const Vec& q0,
                              const std::vector<LatticePoint>& points,
                              const ZprimeOptions& opt) {
  ZprimeResult res;
  Xorshift rng(opt.rng_seed);
  LatticeContext c0 = family(s_from);
  bool fiber = true;

  auto field_Y = [&](const LatticeContext& ctx, const Vec& x) {
    System sys = lattice_system(ctx, fiber, q0);
    return sys.field(x);
  };
  auto grad_state = [&](const LatticeContext& ctx, const Vec& x) {
    System sys = lattice_system(ctx, fiber, q0);
    return sys.grad(x);
  };
  auto value_at = [&](double s, const Vec& x) {
    LatticeContext ctx = family(s);
    return eval_S(ctx, unpack(ctx, x, fiber, q0));
  };
  auto dS_ds = [&](double s, const Vec& x) {
    double h = 1e-4;
    return (value_at(s + h, x) - value_at(s - h, x)) / (2 * h);
  };
  auto momentum_sup = [&](const LatticeContext& ctx, const Vec& x) {
    LatticePoint z = unpack(ctx, x, fiber, q0);
    double P = 0;
    for (const auto& p : z.p) P = std::max(P, p.norm());
    return P;
  };

  // stop-flow value g = S(psi_{-tau}(x)): flow +Y for time tau
  auto g_value = [&](double s, const Vec& x) {
    LatticeContext ctx = family(s);
    Vec y = x;
    int steps = std::max(10, static_cast<int>(opt.tau / 0.05));
    double h = opt.tau / steps;
    for (int i = 0; i < steps; ++i) {
      Vec k1 = field_Y(ctx, y);
      Vec k2 = field_Y(ctx, y + h / 2 * k1);
      Vec k3 = field_Y(ctx, y + h / 2 * k2);
      Vec k4 = field_Y(ctx, y + h * k3);
      y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return value_at(s, y);
  };

  // doubling search for the gain
  double span = s_to - s_from;
  for (double c = 1.0; c <= opt.c_max; c *= 2) {
    double worst_a = -1e300, worst_b = -1e300;
    bool ok = true;
    Xorshift crng(opt.rng_seed + 17);
    for (int i = 0; i < opt.certificate_samples; ++i) {
      double s = s_from + span * crng.uniform();
      LatticeContext ctx = family(s);
      LatticePoint z = random_lattice_point(ctx, 1.3, crng);
      z.q[0] = ctx.m.reduce(q0);
      if (!lattice_ok(ctx.m, z)) continue;
      Vec x = pack(ctx, z, fiber);
      double f, P;
      Vec Y, G;
      try {
        f = value_at(s, x);
        Y = field_Y(ctx, x);
        G = grad_state(ctx, x);
        P = momentum_sup(ctx, x);
      } catch (const std::exception&) {
        continue;
      }
      double gain = opt.momentum_scaled ? c * (1 + P) : c;
      if (std::abs(f - opt.a) < 0.05 * (opt.b - opt.a)) {
        // Z'(f) = dS/ds - gain * Y(S)
        double zf = dS_ds(s, x) - gain * Y.dot(G);
        worst_a = std::max(worst_a, zf);
        if (!(zf < 0)) ok = false;
      }
      if (i % 4 == 0) {
        try {
          double g = g_value(s, x);
          if (std::abs(g - opt.b) < 0.05 * (opt.b - opt.a)) {
            double h = 1e-4;
            Vec xz = x - h * gain * Y;  // Euler step of Z' (state part)
            double zg = (g_value(s + h, xz) - g) / h;
            worst_b = std::max(worst_b, zg);
            if (!(zg < 0)) ok = false;
          }
        } catch (const std::exception&) {
        }
      }
    }
    if (ok) {
      res.ok = true;
      res.c = c;
      res.worst_a_margin = worst_a;
      res.worst_b_margin = worst_b;
      break;
    }
  }
  if (!res.ok) return res;

  // transport the given points by integrating dz/ds = -gain * Y(z; s)
  for (const LatticePoint& pt : points) {
    LatticePoint z = pt;
    z.q[0] = c0.m.reduce(q0);
    Vec x = pack(c0, z, fiber);
    int steps = 200;
    double h = span / steps;
    bool bad = false;
    for (int i = 0; i < steps && !bad; ++i) {
      double s = s_from + i * h;
      auto f = [&](double ss, const Vec& y) -> Vec {
        LatticeContext ctx = family(ss);
        double gain =
            opt.momentum_scaled ? res.c * (1 + momentum_sup(ctx, y)) : res.c;
        return -gain * field_Y(ctx, y);
      };
      try {
        Vec k1 = f(s, x);
        Vec k2 = f(s + h / 2, x + h / 2 * k1);
        Vec k3 = f(s + h / 2, x + h / 2 * k2);
        Vec k4 = f(s + h, x + h * k3);
        x += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
      } catch (const std::exception&) {
        bad = true;
      }
    }
    LatticeContext c1 = family(s_to);
    res.transported.push_back(unpack(c1, x, fiber, q0));
  }
  return res;
}

}  // namespace alat::dynamics
