#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "alat/geometry.hpp"
#include "alat/profile.hpp"

namespace alat::hamiltonian {

using geometry::Manifold;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// H_infinity(q, p) = eps * h(||p||) with h convex, zero on [0, 2/3] and
/// equal to mu t + c for t >= 1. The cubic-smoothstep ramp of h' on [2/3, 1]
/// gives c = -5 mu / 6.
struct AsymptoticPiece {
  double eps = 0.1;  // in (0, beta); slope at infinity is eps * mu
  double mu = 1.0;

  double h(double t) const;
  double hp(double t) const;
  double hpp(double t) const;
  double intercept() const { return -5.0 * mu / 6.0; }  // the constant c of h

  double value(double pnorm) const { return eps * h(pnorm); }
  double slope_at_infinity() const { return eps * mu; }

  AsymptoticPiece scaled(double t) const { return {t * eps, mu}; }
};

/// Exact-Lagrangian embedding j: DT*L -> D_{1/2} T*N as the graph of an
/// exact 1-form dg composed with a fiber/base rescale,
///   j(x, xi) = (x / rho, rho xi + dg(q)),
/// where L is N with all periods scaled by rho. Then dF = j^* lambda_N -
/// lambda_L holds with F = g / rho >= 0 (g normalized to min 0).
struct LagrangianEmbedding {
  Manifold base;            // N
  double rho = 0.5;         // fiber scale; L period = rho * N period
  std::vector<double> g_amp;  // g(q) = sum_i amp_i (1 - cos(2 pi q_i / P_i))/2

  LagrangianEmbedding(const Manifold& N, double rho_,
                      std::vector<double> amp);

  double g(const Vec& q) const;
  Vec dg(const Vec& q) const;
  Mat d2g(const Vec& q) const;

  double F(const Vec& q) const { return g(q) / rho; }
  double F_norm() const;          // sup F = (sum amp_i) / rho
  double max_dg_norm() const;     // sup ||dg||
  /// image containment: rho + sup||dg|| <= 1/2
  bool contained_in_half_disc() const;

  /// ||j^{-1}(z)||_L for z = (q,p); may exceed 1 (z outside the image).
  double j_inv_norm(const Vec& q, const Vec& p) const;

  /// lengths of closed geodesics of L up to max_len (0 included), sorted
  std::vector<double> geodesic_lengths(double max_len) const;
  double min_nonzero_geodesic_length() const;
};

/// A Hamiltonian on T*N with evaluators; scale supports exact doubling (2H).
/// When momentum_only is set (H independent of q on a flat manifold) the
/// time-t flow is closed form: q(t) = q + t dH/dp(p), p constant.
class Hamiltonian {
 public:
  double value(const Vec& q, const Vec& p) const { return scale_ * val_(q, p); }
  Vec grad_q(const Vec& q, const Vec& p) const { return scale_ * dq_(q, p); }
  Vec grad_p(const Vec& q, const Vec& p) const { return scale_ * dp_(q, p); }
  bool momentum_only() const { return momentum_only_; }
  /// d^2 H / dp^2 at (q,p) when available (momentum-only analytic path)
  std::optional<Mat> hess_pp(const Vec& q, const Vec& p) const;

  double scale() const { return scale_; }
  Hamiltonian doubled() const {
    Hamiltonian h = *this;
    h.scale_ *= 2;
    return h;
  }

  // --- factories ---
  static Hamiltonian constant(int dim, double c);
  /// H = g(||p||) from radial handles (value, derivative, second derivative)
  static Hamiltonian radial(std::function<double(double)> g,
                            std::function<double(double)> gp,
                            std::function<double(double)> gpp);
  /// H = W(p_0) for d = 1 momentum wiggles
  static Hamiltonian momentum_1d(std::function<double(double)> W,
                                 std::function<double(double)> Wp,
                                 std::function<double(double)> Wpp);
  static Hamiltonian asymptotic(const AsymptoticPiece& hinf);

 private:
  double scale_ = 1.0;
  bool momentum_only_ = false;
  std::function<double(const Vec&, const Vec&)> val_;
  std::function<Vec(const Vec&, const Vec&)> dq_, dp_;
  std::function<Mat(const Vec&, const Vec&)> dpp_;  // may be empty

  friend Hamiltonian assemble_Hs(const LagrangianEmbedding&,
                                 const CappedFamily&, const AsymptoticPiece&,
                                 double);
};

/// H^s(z) = f_s(||j^{-1}(z)||_L) on the image of j, H_infty(z) + s outside.
/// Throws if the embedding is not contained in the half disc bundle.
Hamiltonian assemble_Hs(const LagrangianEmbedding& L, const CappedFamily& fam,
                        const AsymptoticPiece& hinf, double s);

/// Sampled sup of first/second covariant derivative norms of H over DT*N,
/// inflated by the documented safety factor 1.1.
struct DerivativeBounds {
  double c1 = 0;
  double c2 = 0;
  double sum() const { return c1 + c2; }
};
DerivativeBounds c1_c2(const Hamiltonian& H, const Manifold& m,
                       int grid_per_dim = 24);

/// Sampled admissibility: H(q,p) = mu ||p|| + c for ||p|| >= 1 with
/// mu in (0, epsilon0].
struct AdmissibilityReport {
  bool admissible = false;
  double mu = 0;
  double c = 0;
  double worst_residual = 0;
};
AdmissibilityReport check_admissible(const Hamiltonian& H, const Manifold& m,
                                     int samples = 400);

/// One property check of the f1-f8 / H1-H4 suite.
struct PropertyCheck {
  std::string id;
  bool pass = false;
  double worst = 0;  // worst margin observed (sign convention per property)
  std::string note;
};

struct ProfileSuiteReport {
  std::vector<PropertyCheck> checks;
  bool all_pass() const;
  const PropertyCheck& get(const std::string& id) const;
};

/// Runs the documented sampled checks f1..f8 and H1..H4.
ProfileSuiteReport verify_profile_suite(const CappedFamily& fam,
                                        const AsymptoticPiece& hinf,
                                        const Manifold& m,
                                        const LagrangianEmbedding& L);

/// Piecewise-cubic momentum wiggle W for d = 1 testbeds: W' has prescribed
/// simple zeros inside (-1, 1) and W = mu |p| + c0 outside (same constant on
/// both sides). The first n-1 critical depths below the boundary value
/// mu + c0 are prescribed; the last one is solved from the balance condition
/// that the integral of W' over [-1, 1] vanishes.
class WiggleW {
 public:
  WiggleW(double mu, double c0, std::vector<double> zeros,
          std::vector<double> dips);

  double value(double p) const;
  double deriv(double p) const;
  double second(double p) const;

  const std::vector<double>& zeros() const { return zeros_; }
  /// W(z_k) for each zero (minima and maxima alternate, first is a minimum)
  std::vector<double> critical_values() const;
  double max_abs_deriv() const;
  double mu() const { return mu_; }

  Hamiltonian hamiltonian() const;

 private:
  double mu_, c0_;
  std::vector<double> zeros_, sigmas_;
  std::vector<double> knot_t_, knot_v_, knot_s_;  // Hermite data on [-1, 1]
  std::vector<double> knot_area_;                 // cumulative integral of W'
};

}  // namespace alat::hamiltonian
