#pragma once

namespace alat::detail {

/// Cubic Hermite piece on [a, b] through (va, sa) and (vb, sb): value,
/// derivative, and antiderivative measured from a.
struct Hermite {
  double a, b, va, sa, vb, sb;

  double value(double t) const {
    double h = b - a, u = (t - a) / h;
    double u2 = u * u, u3 = u2 * u;
    return va * (2 * u3 - 3 * u2 + 1) + sa * h * (u3 - 2 * u2 + u) +
           vb * (-2 * u3 + 3 * u2) + sb * h * (u3 - u2);
  }
  double deriv(double t) const {
    double h = b - a, u = (t - a) / h;
    double u2 = u * u;
    return (va * (6 * u2 - 6 * u) + sa * h * (3 * u2 - 4 * u + 1) +
            vb * (-6 * u2 + 6 * u) + sb * h * (3 * u2 - 2 * u)) /
           h;
  }
  double integral(double t) const {
    double h = b - a, u = (t - a) / h;
    double u2 = u * u, u3 = u2 * u, u4 = u2 * u2;
    return h *
           (va * (u4 / 2 - u3 + u) + sa * h * (u4 / 4 - 2 * u3 / 3 + u2 / 2) +
            vb * (-u4 / 2 + u3) + sb * h * (u4 / 4 - u3 / 3));
  }
  double full_integral() const { return integral(b); }
};

}  // namespace alat::detail
