#include "alat/lattice.hpp"

#include <cmath>
#include <stdexcept>

namespace alat::lattice {

double Subdivision::length() const {
  double l = 0;
  for (double w : weights) l = std::max(l, w);
  return l;
}

void Subdivision::validate() const {
  if (weights.empty()) throw std::invalid_argument("empty subdivision");
  double s = 0;
  for (double w : weights) {
    if (w < 0) throw std::invalid_argument("negative subdivision weight");
    s += w;
  }
  if (std::abs(s - 1.0) > 1e-12) {
    throw std::invalid_argument("subdivision weights must sum to 1");
  }
}

Subdivision Subdivision::uniform(int r) {
  if (r < 1) throw std::invalid_argument("r must be >= 1");
  Subdivision a;
  a.weights.assign(r, 1.0 / r);
  // force the exact sum for r not a power of two
  double s = 0;
  for (int i = 0; i + 1 < r; ++i) s += a.weights[i];
  a.weights[r - 1] = 1.0 - s;
  return a;
}

Subdivision Subdivision::stabilized() const {
  Subdivision a = *this;
  a.weights.push_back(0.0);
  return a;
}

Subdivision Subdivision::doubled() const {
  Subdivision a;
  int n = r();
  a.weights.resize(2 * n);
  for (int j = 0; j < 2 * n; ++j) a.weights[j] = weights[j % n] / 2;
  return a;
}

void validate_lattice(const Manifold& m, const LatticePoint& z) {
  int n = z.r();
  if (n < 1 || static_cast<int>(z.p.size()) != n) {
    throw std::invalid_argument("malformed lattice point");
  }
  for (int j = 0; j < n; ++j) {
    if (!(m.dist(z.q[j], z.q[(j + 1) % n]) < m.epsilon0())) {
      throw std::invalid_argument(
          "lattice adjacency violated: dist(q_j, q_{j+1}) >= epsilon0");
    }
  }
}

PieceEnd flow_piece(const LatticeContext& ctx, const Vec& q, const Vec& p,
                    double t) {
  const Manifold& m = ctx.m;
  if (!m.flat()) {
    throw std::invalid_argument("Hamiltonian flows require a flat manifold");
  }
  if (t == 0.0) return {m.reduce(q), p, 0.0, Vec::Zero(q.size())};
  if (ctx.H.momentum_only() && !ctx.force_rk4) {
    Vec v = ctx.H.grad_p(q, p);
    double action = t * (p.dot(v) - ctx.H.value(q, p));
    return {m.exp(q, t * v), p, action, t * v};
  }
  // RK4 on (q, p, A) with A' = p . qdot - H
  int steps = std::max(1, ctx.flow_substeps);
  double h = t / steps;
  Vec qq = q, pp = p;
  double action = 0;
  auto rhs = [&](const Vec& qa, const Vec& pa, Vec& dq, Vec& dp, double& dA) {
    dq = ctx.H.grad_p(qa, pa);
    dp = -ctx.H.grad_q(qa, pa);
    dA = pa.dot(dq) - ctx.H.value(qa, pa);
  };
  Vec k1q, k1p, k2q, k2p, k3q, k3p, k4q, k4p;
  double k1a, k2a, k3a, k4a;
  for (int i = 0; i < steps; ++i) {
    rhs(qq, pp, k1q, k1p, k1a);
    rhs(qq + h / 2 * k1q, pp + h / 2 * k1p, k2q, k2p, k2a);
    rhs(qq + h / 2 * k2q, pp + h / 2 * k2p, k3q, k3p, k3a);
    rhs(qq + h * k3q, pp + h * k3p, k4q, k4p, k4a);
    qq += h / 6 * (k1q + 2 * k2q + 2 * k3q + k4q);
    pp += h / 6 * (k1p + 2 * k2p + 2 * k3p + k4p);
    action += h / 6 * (k1a + 2 * k2a + 2 * k3a + k4a);
  }
  return {m.reduce(qq), pp, action, qq - q};
}

FlowData flow_data(const LatticeContext& ctx, const LatticePoint& z) {
  validate_lattice(ctx.m, z);
  if (z.r() != ctx.r()) {
    throw std::invalid_argument("lattice point / subdivision size mismatch");
  }
  const Manifold& m = ctx.m;
  int n = z.r();
  FlowData fd;
  fd.ends.resize(n);
  fd.eps_q.resize(n);
  fd.eps_q_tilde.resize(n);
  fd.eps_p.resize(n);
  for (int j = 0; j < n; ++j) {
    fd.ends[j] = flow_piece(ctx, z.q[j], z.p[j], ctx.alpha.weights[j]);
    if (!(m.dist(z.q[j], fd.ends[j].q) < m.epsilon0())) {
      throw std::domain_error("flow piece longer than epsilon0");
    }
    fd.momentum_sup = std::max(fd.momentum_sup, z.p[j].norm());
  }
  for (int j = 0; j < n; ++j) {
    const PieceEnd& prev = fd.ends[(j + n - 1) % n];
    if (m.dist(prev.q, z.q[j]) >= m.epsilon0()) ++fd.delta0_flags;
    fd.eps_q[j] = m.log(prev.q, z.q[j]);
    fd.eps_q_tilde[j] = m.transport(prev.q, z.q[(j + n - 1) % n], fd.eps_q[j]);
    fd.eps_p[j] = z.p[j] - m.transport(prev.q, z.q[j], prev.p);
  }
  return fd;
}

double FlowData::max_eps_q_norm() const {
  double v = 0;
  for (const auto& e : eps_q) v = std::max(v, e.norm());
  return v;
}

double eval_S(const LatticeContext& ctx, const LatticePoint& z,
              const FlowData& fd) {
  int n = z.r();
  double s = 0;
  for (int j = 0; j < n; ++j) {
    // piece j action plus the correction end_j.p * eps_q at node j+1
    s += fd.ends[j].action + fd.ends[j].p.dot(fd.eps_q[(j + 1) % n]);
  }
  return s;
}

double eval_S(const LatticeContext& ctx, const LatticePoint& z) {
  return eval_S(ctx, z, flow_data(ctx, z));
}

namespace {

// S restricted to the terms touching node j as a function of z_j and
// q_{j+1}: T_j = action_j(z_j) + E_j(z_j).p . eps_q(node j+1).
double local_term(const LatticeContext& ctx, const Vec& qj, const Vec& pj,
                  double alpha_j, const Vec& q_next) {
  PieceEnd e = flow_piece(ctx, qj, pj, alpha_j);
  return e.action + e.p.dot(ctx.m.log(e.q, q_next));
}

// 4th-order central difference (Richardson-extrapolated), step per spec
double richardson_diff(const std::function<double(double)>& f, double h) {
  return (8 * (f(h) - f(-h)) - (f(2 * h) - f(-2 * h))) / (12 * h);
}

}  // namespace

Vec grad_S_fd(const LatticeContext& ctx, const LatticePoint& z, bool fiber) {
  int n = z.r(), d = ctx.dim();
  const double h = 1e-6;
  Vec out = Vec::Zero(ctx.packed_size(fiber));
  int idx = 0;
  for (int j = 0; j < n; ++j) {
    const Vec& q_next = z.q[(j + 1) % n];
    const Vec& q_prev = z.q[(j + n - 1) % n];
    const Vec& p_prev = z.p[(j + n - 1) % n];
    double a_j = ctx.alpha.weights[j];
    double a_prev = ctx.alpha.weights[(j + n - 1) % n];
    if (!(fiber && j == 0)) {
      for (int k = 0; k < d; ++k) {
        out[idx + k] = richardson_diff(
            [&](double t) {
              Vec qj = z.q[j];
              qj[k] += t;
              return local_term(ctx, qj, z.p[j], a_j, q_next) +
                     local_term(ctx, q_prev, p_prev, a_prev, qj);
            },
            h);
      }
      idx += d;
    }
    for (int k = 0; k < d; ++k) {
      out[idx + k] = richardson_diff(
          [&](double t) {
            Vec pj = z.p[j];
            pj[k] += t;
            return local_term(ctx, z.q[j], pj, a_j, q_next);
          },
          h);
    }
    idx += d;
  }
  return out;
}

void grad_S_fd_node(const LatticeContext& ctx, const LatticePoint& z, int j,
                    Vec& gq, Vec& gp) {
  int n = z.r(), d = ctx.dim();
  const double h = 1e-6;
  const Vec& q_next = z.q[(j + 1) % n];
  const Vec& q_prev = z.q[(j + n - 1) % n];
  const Vec& p_prev = z.p[(j + n - 1) % n];
  double a_j = ctx.alpha.weights[j];
  double a_prev = ctx.alpha.weights[(j + n - 1) % n];
  gq = Vec(d);
  gp = Vec(d);
  for (int k = 0; k < d; ++k) {
    gq[k] = richardson_diff(
        [&](double t) {
          Vec qj = z.q[j];
          qj[k] += t;
          return local_term(ctx, qj, z.p[j], a_j, q_next) +
                 local_term(ctx, q_prev, p_prev, a_prev, qj);
        },
        h);
    gp[k] = richardson_diff(
        [&](double t) {
          Vec pj = z.p[j];
          pj[k] += t;
          return local_term(ctx, z.q[j], pj, a_j, q_next);
        },
        h);
  }
}

Vec grad_S(const LatticeContext& ctx, const LatticePoint& z, bool fiber) {
  if (!(ctx.H.momentum_only() && ctx.m.flat()) || ctx.force_rk4) {
    return grad_S_fd(ctx, z, fiber);
  }
  // exact: grad_{p_j} S = eps_q[j+1] (transport trivial on flat charts),
  //        grad_{q_j} S = -eps_p[j]
  FlowData fd = flow_data(ctx, z);
  int n = z.r(), d = ctx.dim();
  Vec out(ctx.packed_size(fiber));
  int idx = 0;
  for (int j = 0; j < n; ++j) {
    if (!(fiber && j == 0)) {
      out.segment(idx, d) = -fd.eps_p[j];
      idx += d;
    }
    out.segment(idx, d) = fd.eps_q[(j + 1) % n];
    idx += d;
  }
  return out;
}

Mat hess_S(const LatticeContext& ctx, const LatticePoint& z, bool fiber) {
  int n = z.r(), d = ctx.dim();
  int N = ctx.packed_size(fiber);
  if (ctx.H.momentum_only() && ctx.m.flat() && !ctx.force_rk4) {
    // analytic assembly from the exact gradient formulas:
    //   d(grad_{p_j}S)/dp_j = -alpha_j Hpp(p_j), /dq_{j+1} = I, /dq_j = -I
    //   d(grad_{q_j}S)/dp_{j-1} = I, /dp_j = -I
    Mat H = Mat::Zero(N, N);
    auto qslot = [&](int j) {  // packed offset of q_j or -1
      if (fiber && j == 0) return -1;
      return fiber ? (2 * j - 1) * d : 2 * j * d;
    };
    auto pslot = [&](int j) {
      return fiber ? (j == 0 ? 0 : 2 * j * d) : (2 * j + 1) * d;
    };
    for (int j = 0; j < n; ++j) {
      int pj = pslot(j);
      Mat hpp = *ctx.H.hess_pp(z.q[j], z.p[j]);
      H.block(pj, pj, d, d) -= ctx.alpha.weights[j] * hpp;
      int qn = qslot((j + 1) % n);
      if (qn >= 0) {
        H.block(pj, qn, d, d) += Mat::Identity(d, d);
        H.block(qn, pj, d, d) += Mat::Identity(d, d);
      }
      int qj = qslot(j);
      if (qj >= 0) {
        H.block(pj, qj, d, d) -= Mat::Identity(d, d);
        H.block(qj, pj, d, d) -= Mat::Identity(d, d);
      }
    }
    return H;
  }
  // finite differences of the gradient
  const double h = 1e-5;
  Vec x = pack(ctx, z, fiber);
  Mat H(N, N);
  for (int j = 0; j < N; ++j) {
    Vec xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    Vec gp = grad_S(ctx, unpack(ctx, xp, fiber, z.q[0]), fiber);
    Vec gm = grad_S(ctx, unpack(ctx, xm, fiber, z.q[0]), fiber);
    H.col(j) = (gp - gm) / (2 * h);
  }
  return 0.5 * (H + H.transpose());
}

bool estimate_regime(const LatticeContext& ctx, double delta,
                     const hamiltonian::DerivativeBounds& bounds) {
  return ctx.alpha.length() * bounds.sum() <= delta;
}

LatticePoint dissect(const LatticeContext& ctx, const Vec& q0, const Vec& p0) {
  ctx.alpha.validate();
  int n = ctx.r();
  LatticePoint z;
  z.q.reserve(n);
  z.p.reserve(n);
  Vec q = ctx.m.reduce(q0), p = p0;
  for (int j = 0; j < n; ++j) {
    z.q.push_back(q);
    z.p.push_back(p);
    // speed bound ||gamma'|| l(alpha) < epsilon0 sampled at the node
    double speed = std::sqrt(ctx.H.grad_p(q, p).squaredNorm() +
                             ctx.H.grad_q(q, p).squaredNorm());
    if (speed * ctx.alpha.length() >= ctx.m.epsilon0()) {
      throw std::domain_error("dissection speed bound violated");
    }
    PieceEnd e = flow_piece(ctx, q, p, ctx.alpha.weights[j]);
    q = e.q;
    p = e.p;
  }
  validate_lattice(ctx.m, z);
  return z;
}

LatticePoint suspend_point(const LatticePoint& z, const Vec& v) {
  LatticePoint out = z;
  out.q.push_back(z.q[0]);
  out.p.push_back(v);
  return out;
}

Vec pack(const LatticeContext& ctx, const LatticePoint& z, bool fiber) {
  int n = z.r(), d = ctx.dim();
  Vec x(ctx.packed_size(fiber));
  int idx = 0;
  for (int j = 0; j < n; ++j) {
    if (!(fiber && j == 0)) {
      x.segment(idx, d) = z.q[j];
      idx += d;
    }
    x.segment(idx, d) = z.p[j];
    idx += d;
  }
  return x;
}

LatticePoint unpack(const LatticeContext& ctx, const Vec& x, bool fiber,
                    const Vec& q0_fixed) {
  int n = ctx.r(), d = ctx.dim();
  LatticePoint z;
  z.q.resize(n);
  z.p.resize(n);
  int idx = 0;
  for (int j = 0; j < n; ++j) {
    if (fiber && j == 0) {
      z.q[j] = ctx.m.reduce(q0_fixed);
    } else {
      z.q[j] = ctx.m.reduce(x.segment(idx, d));
      idx += d;
    }
    z.p[j] = x.segment(idx, d);
    idx += d;
  }
  return z;
}

double lattice_distance(const Manifold& m, const LatticePoint& a,
                        const LatticePoint& b) {
  if (a.r() != b.r()) return 1e300;
  double worst = 0;
  for (int j = 0; j < a.r(); ++j) {
    worst = std::max(worst, m.dist(a.q[j], b.q[j]));
    worst = std::max(worst, (a.p[j] - b.p[j]).norm());
  }
  return worst;
}

}  // namespace alat::lattice
