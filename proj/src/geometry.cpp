#include "alat/geometry.hpp"

#include <cmath>

namespace alat::geometry {

namespace {

// xorshift-style mix, enough for reproducible test sampling
double next_uniform(std::uint64_t& state) {
  state ^= state << 13;
  state ^= state >> 7;
  state ^= state << 17;
  return static_cast<double>(state >> 11) * 0x1.0p-53;
}

double wrap(double x, double period) {
  double r = std::fmod(x, period);
  if (r < 0) r += period;
  return r;
}

// shortest signed representative of x modulo period, in [-period/2, period/2]
double wrap_diff(double x, double period) {
  double r = std::fmod(x, period);
  if (r < -period / 2) r += period;
  if (r > period / 2) r -= period;
  return r;
}

}  // namespace

Manifold Manifold::circle(double circumference, double epsilon0) {
  Manifold m;
  m.kind_ = ManifoldKind::Circle;
  m.dim_ = 1;
  m.periods_ = {circumference};
  m.injectivity_radius_ = circumference / 2;
  m.epsilon0_ = epsilon0 > 0 ? epsilon0 : m.injectivity_radius_ / 4;
  m.validate();
  return m;
}

Manifold Manifold::flat_torus(const std::vector<double>& periods,
                              double epsilon0) {
  Manifold m;
  m.kind_ = ManifoldKind::FlatTorus;
  m.dim_ = static_cast<int>(periods.size());
  m.periods_ = periods;
  double shortest = periods.empty() ? 0.0 : periods[0];
  for (double p : periods) shortest = std::min(shortest, p);
  m.injectivity_radius_ = shortest / 2;
  m.epsilon0_ = epsilon0 > 0 ? epsilon0 : m.injectivity_radius_ / 4;
  m.validate();
  return m;
}

Manifold Manifold::sphere2(double epsilon0) {
  Manifold m;
  m.kind_ = ManifoldKind::Sphere2;
  m.dim_ = 2;
  m.injectivity_radius_ = M_PI;
  m.epsilon0_ = epsilon0 > 0 ? epsilon0 : m.injectivity_radius_ / 4;
  m.validate();
  return m;
}

void Manifold::validate() const {
  if (dim_ < 1) throw std::invalid_argument("manifold dimension must be >= 1");
  for (double p : periods_) {
    if (!(p > 0)) throw std::invalid_argument("period entries must be > 0");
  }
  if (!(2 * epsilon0_ < injectivity_radius_)) {
    throw std::invalid_argument("need 2*epsilon0 < injectivity radius");
  }
}

Vec Manifold::reduce(const Vec& q) const {
  if (kind_ == ManifoldKind::Sphere2) {
    double n = q.norm();
    if (!(n > 0)) throw std::invalid_argument("S2 point must be nonzero");
    return q / n;
  }
  Vec r(dim_);
  for (int i = 0; i < dim_; ++i) r[i] = wrap(q[i], periods_[i]);
  return r;
}

Vec Manifold::chart_diff(const Vec& q, const Vec& q2) const {
  if (kind_ == ManifoldKind::Sphere2) {
    throw std::logic_error("chart_diff is only defined on flat manifolds");
  }
  Vec r(dim_);
  for (int i = 0; i < dim_; ++i) r[i] = wrap_diff(q2[i] - q[i], periods_[i]);
  return r;
}

double Manifold::dist(const Vec& q, const Vec& q2) const {
  if (kind_ == ManifoldKind::Sphere2) {
    Vec a = reduce(q), b = reduce(q2);
    double c = std::clamp(a.dot(b), -1.0, 1.0);
    Eigen::Vector3d cr = Eigen::Vector3d(a[0], a[1], a[2])
                             .cross(Eigen::Vector3d(b[0], b[1], b[2]));
    return std::atan2(cr.norm(), c);
  }
  return chart_diff(q, q2).norm();
}

Vec Manifold::exp(const Vec& q, const Vec& v) const {
  if (kind_ == ManifoldKind::Sphere2) {
    Vec base = reduce(q);
    double n = v.norm();
    if (n < 1e-300) return base;
    return reduce(std::cos(n) * base + std::sin(n) * (v / n));
  }
  return reduce(q + v);
}

Vec Manifold::log(const Vec& q, const Vec& q2) const {
  double d = dist(q, q2);
  if (d >= injectivity_radius_) {
    throw std::domain_error("log: points at or beyond injectivity radius");
  }
  if (kind_ == ManifoldKind::Sphere2) {
    Vec a = reduce(q), b = reduce(q2);
    Vec w = b - a.dot(b) * a;
    double n = w.norm();
    if (n < 1e-300) return Vec::Zero(3);
    return (d / n) * w;
  }
  return chart_diff(q, q2);
}

Vec Manifold::transport(const Vec& q, const Vec& q2, const Vec& v) const {
  double d = dist(q, q2);
  if (d >= 2 * epsilon0_) {
    throw std::domain_error("transport: points beyond 2*epsilon0 apart");
  }
  if (kind_ != ManifoldKind::Sphere2) return v;  // flat: identity in the chart
  if (d < 1e-300) return v;
  Vec a = reduce(q), b = reduce(q2);
  Vec u = log(a, b) / d;                    // unit tangent at q toward q2
  Vec u2 = std::cos(d) * u - std::sin(d) * a;  // geodesic direction at q2
  double along = v.dot(u);
  Vec ortho = v - along * u;
  return ortho + along * u2;
}

Vec Manifold::random_point(std::uint64_t& state) const {
  if (kind_ == ManifoldKind::Sphere2) {
    // area-uniform: z uniform in [-1,1], angle uniform
    double z = 2 * next_uniform(state) - 1;
    double phi = 2 * M_PI * next_uniform(state);
    double r = std::sqrt(std::max(0.0, 1 - z * z));
    Vec q(3);
    q << r * std::cos(phi), r * std::sin(phi), z;
    return q;
  }
  Vec q(dim_);
  for (int i = 0; i < dim_; ++i) q[i] = periods_[i] * next_uniform(state);
  return q;
}

Vec Manifold::random_tangent(const Vec& q, double max_norm,
                             std::uint64_t& state) const {
  int n = point_size();
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = 2 * next_uniform(state) - 1;
  if (kind_ == ManifoldKind::Sphere2) {
    Vec base = reduce(q);
    v -= v.dot(base) * base;
  }
  double norm = v.norm();
  if (norm < 1e-12) return Vec::Zero(n);
  return v * (max_norm * next_uniform(state) / norm);
}

}  // namespace alat::geometry
