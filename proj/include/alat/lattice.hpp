#pragma once

#include <optional>
#include <vector>

#include "alat/geometry.hpp"
#include "alat/hamiltonian.hpp"

namespace alat::lattice {

using geometry::Manifold;
using geometry::Vec;
using hamiltonian::Hamiltonian;
using Mat = Eigen::MatrixXd;

/// A point of the simplex Delta^{r-1}: interval lengths of the time-1 split.
struct Subdivision {
  std::vector<double> weights;

  int r() const { return static_cast<int>(weights.size()); }
  double length() const;  // l(alpha) = max_j alpha_j
  void validate() const;  // nonnegative, sums to 1 within 1e-12

  static Subdivision uniform(int r);
  /// top face map d_r: append a zero weight
  Subdivision stabilized() const;
  /// 2_r alpha: halve and repeat cyclically, (2_r alpha)_j = alpha_{j mod r}/2
  Subdivision doubled() const;
};

/// A point of T*Lambda_r N: entries (q_j, p_j), j in Z_r, with the adjacency
/// invariant dist(q_j, q_{j+1}) < epsilon0.
struct LatticePoint {
  std::vector<Vec> q;
  std::vector<Vec> p;

  int r() const { return static_cast<int>(q.size()); }
};

/// Evaluation context: manifold, Hamiltonian, subdivision. RK4 with
/// flow_substeps per piece is used whenever the closed-form momentum flow
/// does not apply (or force_rk4 is set).
struct LatticeContext {
  Manifold m;
  Hamiltonian H;
  Subdivision alpha;
  int flow_substeps = 32;
  bool force_rk4 = false;

  int r() const { return alpha.r(); }
  int dim() const { return m.dim(); }
  /// packed coordinate size (fiber: q_0 frozen)
  int packed_size(bool fiber) const {
    return (2 * r() - (fiber ? 1 : 0)) * dim();
  }
};

/// End of one Hamiltonian flow piece plus its action integral.
struct PieceEnd {
  Vec q;       // chart-reduced endpoint base
  Vec p;
  double action;  // integral of (lambda - H dt) along the piece
  Vec disp;    // unreduced chart displacement of the base point
};

/// Derived flow-mismatch data of a lattice point.
struct FlowData {
  std::vector<PieceEnd> ends;       // piece j flows from z_j for alpha_j
  std::vector<Vec> eps_q;           // eps_q[j] = exp^{-1}_{E_{j-1}.q}(q_j)
  std::vector<Vec> eps_q_tilde;     // transported back to q_{j-1}
  std::vector<Vec> eps_p;           // p_j - P(E_{j-1}.p)
  double momentum_sup = 0;          // P = max_j ||p_j||
  int delta0_flags = 0;  // nodes where dist(E_{j-1}.q, q_j) >= epsilon0

  double max_eps_q_norm() const;
};

void validate_lattice(const Manifold& m, const LatticePoint& z);

FlowData flow_data(const LatticeContext& ctx, const LatticePoint& z);

double eval_S(const LatticeContext& ctx, const LatticePoint& z);
double eval_S(const LatticeContext& ctx, const LatticePoint& z,
              const FlowData& fd);

/// Gradient of S_r in packed coordinates ((q_0,) p_0, q_1, p_1, ...; fiber
/// drops q_0). Exact formula for momentum-only Hamiltonians on flat
/// manifolds, Richardson finite differences otherwise.
Vec grad_S(const LatticeContext& ctx, const LatticePoint& z, bool fiber);
/// Finite-difference gradient (always available; the cross-check oracle).
Vec grad_S_fd(const LatticeContext& ctx, const LatticePoint& z, bool fiber);

/// Richardson FD gradient in the z_j slot only (touches two flow pieces,
/// O(1) work per node regardless of r).
void grad_S_fd_node(const LatticeContext& ctx, const LatticePoint& z, int j,
                    Vec& gq, Vec& gp);

/// Hessian of S_r: analytic for momentum-only flat contexts, finite
/// differences of the gradient otherwise.
Mat hess_S(const LatticeContext& ctx, const LatticePoint& z, bool fiber);

/// Does l(alpha) (C1 + C2) <= delta hold? (the gradient-estimate regime)
bool estimate_regime(const LatticeContext& ctx, double delta,
                     const hamiltonian::DerivativeBounds& bounds);

/// alpha-dissection of the time-1 flow curve of H starting at (q0, p0).
/// Throws if the sampled flow speed violates the lattice speed bound.
LatticePoint dissect(const LatticeContext& ctx, const Vec& q0, const Vec& p0);

/// Appends the entry (q_0, v). Use with the stabilized subdivision.
LatticePoint suspend_point(const LatticePoint& z, const Vec& v);

/// Flow the Hamiltonian for time t from (q, p); returns the endpoint and
/// accumulated action. Closed form for momentum-only H on flat manifolds.
PieceEnd flow_piece(const LatticeContext& ctx, const Vec& q, const Vec& p,
                    double t);

// --- packed coordinates -------------------------------------------------

Vec pack(const LatticeContext& ctx, const LatticePoint& z, bool fiber);
/// fiber unpack keeps q_0 = q0_fixed
LatticePoint unpack(const LatticeContext& ctx, const Vec& x, bool fiber,
                    const Vec& q0_fixed);

/// max over nodes of the quotient-metric distance between two points
double lattice_distance(const Manifold& m, const LatticePoint& a,
                        const LatticePoint& b);

}  // namespace alat::lattice
