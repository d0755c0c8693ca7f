#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace alat::geometry {

using Vec = Eigen::VectorXd;

enum class ManifoldKind { Circle, FlatTorus, Sphere2 };

/// A cotangent point z = (q, p). Covectors are identified with tangent
/// vectors through the metric, so both live in the same coordinate space.
struct CotangentPoint {
  Vec q;
  Vec p;
};

/// Model manifolds with closed-form geometry.
///
/// Circle and flat tori use global periodic chart coordinates with points
/// reduced to the fundamental domain [0, period). The round S2 uses embedded
/// unit vectors in R^3 with tangent vectors orthogonal to the base point.
class Manifold {
 public:
  static Manifold circle(double circumference, double epsilon0 = -1.0);
  static Manifold flat_torus(const std::vector<double>& periods,
                             double epsilon0 = -1.0);
  static Manifold sphere2(double epsilon0 = -1.0);

  ManifoldKind kind() const { return kind_; }
  int dim() const { return dim_; }
  bool flat() const { return kind_ != ManifoldKind::Sphere2; }
  double injectivity_radius() const { return injectivity_radius_; }
  double epsilon0() const { return epsilon0_; }
  const std::vector<double>& periods() const { return periods_; }

  /// Ambient coordinate size of a point (dim for charts, 3 for S2).
  int point_size() const { return kind_ == ManifoldKind::Sphere2 ? 3 : dim_; }

  /// Reduce chart coordinates to the fundamental domain (normalizes S2 points).
  Vec reduce(const Vec& q) const;

  double dist(const Vec& q, const Vec& q2) const;
  Vec exp(const Vec& q, const Vec& v) const;
  /// Inverse of exp; requires dist(q, q2) < injectivity radius.
  Vec log(const Vec& q, const Vec& q2) const;
  /// Parallel transport of v from q to q2 along the unique short geodesic;
  /// requires dist(q, q2) < 2 * epsilon0.
  Vec transport(const Vec& q, const Vec& q2, const Vec& v) const;

  /// Shortest representative of q2 - q in the chart (flat manifolds only).
  Vec chart_diff(const Vec& q, const Vec& q2) const;

  /// Uniformly random point (chart-uniform; area-uniform on S2).
  Vec random_point(std::uint64_t& state) const;
  /// Random tangent vector at q with norm at most max_norm.
  Vec random_tangent(const Vec& q, double max_norm, std::uint64_t& state) const;

 private:
  Manifold() = default;
  void validate() const;

  ManifoldKind kind_ = ManifoldKind::Circle;
  int dim_ = 1;
  double injectivity_radius_ = 0.0;
  double epsilon0_ = 0.0;
  std::vector<double> periods_;
};

}  // namespace alat::geometry
