#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "alat/lattice.hpp"

namespace alat::dynamics {

using geometry::Vec;
using lattice::FlowData;
using lattice::LatticeContext;
using lattice::LatticePoint;
using Mat = Eigen::MatrixXd;

/// 1-d bump: 1 below epsilon0/5, 0 above epsilon0/4, C^2 in between.
double chi(double x, double eps0);
/// chi_r(z) = prod_j chi(||eps_{q_j}||)
double chi_r(const FlowData& fd, double eps0);
double chi_r(const LatticeContext& ctx, const LatticePoint& z);

enum class FieldKind { Full, Fiber };  // X_r vs Y_r

/// Pseudo-gradient in closed packed coordinates (q_0, p_0, q_1, ...):
/// X_r = (chi_r grad_q S, grad_p S); Y_r additionally zeroes the q_0 slot.
Vec pseudo_gradient(const LatticeContext& ctx, const LatticePoint& z,
                    FieldKind kind);

/// Generic gradient-like system in R^n; the morse module runs on these.
struct System {
  int dim = 0;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> grad;
  std::function<Vec(const Vec&)> pseudo;  // defaults to grad if empty
  std::function<Mat(const Vec&)> hess;
  std::function<bool(const Vec&)> in_domain;  // optional guard

  Vec field(const Vec& x) const { return pseudo ? pseudo(x) : grad(x); }
  bool inside(const Vec& x) const { return !in_domain || in_domain(x); }
};

/// Lattice S_r (or S_{q,r}) as a System over packed coordinates.
System lattice_system(const LatticeContext& ctx, bool fiber,
                      const Vec& q0_fixed);

struct TrajectoryStats {
  Vec end;
  double value_end = 0;
  double max_p_rate = 0;       // max per-step |d||p_j||/dt| (lattice systems)
  bool invariant_violated = false;
  bool left_domain = false;
  int steps = 0;
};

/// RK4 flow of sign * field for the given duration. For lattice systems the
/// adjacency invariant is monitored; violation aborts with a diagnostic.
TrajectoryStats flow(const LatticeContext& ctx, const LatticePoint& z,
                     FieldKind kind, double sign, double duration,
                     double step);

/// Converged critical datum.
struct CriticalPoint {
  LatticePoint point;
  double value = 0;
  double grad_norm = 0;
  int morse_index = 0;
  int nullity = 0;
  std::vector<double> hessian_spectrum;  // sorted ascending
  bool degenerate = false;
  bool ill_conditioned = false;
  int cluster_size = 1;
  // orbit reconstruction
  double closure_error = 0;
  double orbit_action = 0;
  Vec winding;  // unreduced time-1 base displacement / period, per dimension
};

struct SearchOptions {
  bool fiber = false;
  Vec q0 = Vec();             // fiber basepoint
  double descent_tol = 1e-3;  // switch to Newton below this gradient norm
  double newton_tol = 1e-9;
  int newton_max_iter = 80;
  double dedup_distance = 1e-6;
  double bott_cluster_distance = 1e-4;
  double orbit_tol = 1e-6;
  double value_floor = -1e300;  // abandon descents below this value
  double descent_time = 50.0;
  double null_tol_factor = 1e-5;  // nullity threshold vs spectral radius
};

/// Descent along -X_r (or -Y_{q,r}) then Newton on the gradient; duplicates
/// merged; every output carries its orbit reconstruction.
std::vector<CriticalPoint> find_critical(const LatticeContext& ctx,
                                         const std::vector<LatticePoint>& seeds,
                                         const SearchOptions& opt);

/// Eigenvalue signature of the Hessian at a converged point.
void hessian_signature(const LatticeContext& ctx, const SearchOptions& opt,
                       CriticalPoint& cp);

/// Seeds from radial root finds: dissections of winding-candidate orbits
/// (momentum-only Hamiltonians on flat manifolds), plus uniform random seeds.
std::vector<LatticePoint> orbit_candidate_seeds(const LatticeContext& ctx,
                                                bool fiber, const Vec& q0,
                                                int random_seeds,
                                                std::uint64_t rng_seed);

// ------------------------------------------------------------- suites

struct SuiteReport {
  std::string id;
  long samples = 0;
  long violations = 0;
  double worst_margin = 0;  // property-specific sign convention
  std::string note;
  bool pass() const { return violations == 0; }
};

/// A family of contexts indexed by the parameter s (the H^s instances).
using ContextFamily = std::function<LatticeContext(double)>;

/// Lemma 2.3 gradient estimates; K calibrated on an independent sample then
/// frozen (returned in k_out) and verified on fresh draws.
SuiteReport verify_lemma_2_3(const LatticeContext& ctx, long samples,
                             std::uint64_t rng_seed, double* k_out = nullptr);

/// Flow completeness proxy: rate of change of every ||p_j|| along +-X_r
/// flows of the given duration stays below 5 epsilon0 / 4 + 1e-6.
SuiteReport verify_lemma_3_4(const LatticeContext& ctx, int trajectories,
                             double duration, std::uint64_t rng_seed);

/// Gradient lower bound outside B_r = {dist <= eps0/2 or P <= 2}; returns
/// the sampled epsilon_lower in worst_margin.
SuiteReport verify_lemma_3_5(const LatticeContext& ctx, long samples,
                             std::uint64_t rng_seed);

/// Momentum lemma: P >= 2 and sum_{j != 0} ||eps_p|| <= P/2 implies
/// min_j ||p_j|| >= P/2.
SuiteReport verify_lemma_3_6(const LatticeContext& ctx, long samples,
                             std::uint64_t rng_seed);

/// Drift law: d/ds S^s at fiber-critical points with value < -||F|| is -1.
SuiteReport verify_lemma_6_4(const ContextFamily& family,
                             const std::vector<double>& s_values,
                             double f_norm, const Vec& q0, int winding_max,
                             double tol = 1e-4);

/// Fiber-gradient bound ||grad S|| <= 2 + 1e-6 at found fiber criticals.
SuiteReport verify_lemma_7_1(const LatticeContext& ctx, const Vec& q0,
                             int winding_max);

/// |d/ds (S-bar)| <= k (P+1) for the tilted family S + c_infty + s;
/// k calibrated then verified fresh.
SuiteReport verify_lemma_10_5(const ContextFamily& family, double c_infty,
                              const std::vector<double>& s_values,
                              long samples, std::uint64_t rng_seed,
                              double* k_out = nullptr);

// -------------------------------------------------- space-like machinery

/// A path t -> (q(t), s(t)) in base x parameter space.
struct ParamPath {
  std::function<Vec(double)> q;
  std::function<double(double)> s;
};

struct SpacelikeReport {
  bool spacelike = true;
  double worst = -1e300;  // max over checked points of d/dt value (want < 0)
  long checked = 0;
};

/// True iff every fiber-critical point with value within value_band of a
/// along the path crosses downward: d/dt [S^{s(t)}_{q(t)}] < 0.
SpacelikeReport spacelike_check(const ContextFamily& family,
                                const ParamPath& path, double a,
                                double value_band, int winding_max,
                                int t_samples);

struct ZprimeOptions {
  double a = 0, b = 0;   // window bounds
  double tau = 1.0;      // stop-flow horizon defining C_tau
  bool momentum_scaled = false;  // Z' = d_s - k'(1+P) Y instead of d_s - c Y
  int certificate_samples = 200;
  double c_max = 1e6;
  std::uint64_t rng_seed = 1;
};

struct ZprimeResult {
  bool ok = false;
  double c = 1;                 // chosen gain (c or k')
  double worst_a_margin = 0;    // max Z'(f) on {f = a} (want < 0)
  double worst_b_margin = 0;    // max Z'(g) on {g = b} (want < 0)
  std::vector<LatticePoint> transported;
};

/// Parallel transport along s via the flow of Z' = d_s - c Y (fiber case):
/// c found by doubling against a sampled certificate.
ZprimeResult zprime_transport(const ContextFamily& family, double s_from,
                              double s_to, const Vec& q0,
                              const std::vector<LatticePoint>& points,
                              const ZprimeOptions& opt);

}  // namespace alat::dynamics
