#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <string>
#include <vector>

namespace alat::algebra {

using Int = boost::multiprecision::cpp_int;
using IMat = std::vector<std::vector<long long>>;  // dense, desk scale

struct RingSpec {
  enum Kind { Fp, Q, Z } kind = Fp;
  long p = 2;

  static RingSpec f2() { return {Fp, 2}; }
  static RingSpec fp(long p) { return {Fp, p}; }
  static RingSpec rationals() { return {Q, 0}; }
  static RingSpec integers() { return {Z, 0}; }
  std::string name() const;
};

long rank_mod_p(IMat m, long p);
/// exact rank over Q (fraction-free Bareiss elimination in big integers)
long rank_rational(const IMat& m);

/// nonzero invariant factors of an integer matrix, canonical (each divides
/// the next); exact arbitrary-precision arithmetic
std::vector<Int> smith_normal_form(const IMat& m);

/// Graded chain complex with boundary matrices boundary[k]: C_k -> C_{k-1}
/// (entry rows = C_{k-1} generators, cols = C_k generators).
struct ChainComplex {
  RingSpec ring;
  std::vector<long> dims;       // generator counts, degree 0..top
  std::vector<IMat> boundary;   // boundary[0] unused; size = dims.size()

  int top_degree() const { return static_cast<int>(dims.size()) - 1; }
  void validate() const;  // shape and d^2 = 0 over the ring
};

struct HomologyResult {
  std::vector<long> ranks;                 // free rank per degree
  std::vector<std::vector<Int>> torsion;   // per degree, Z only
};

HomologyResult homology(const ChainComplex& c);

}  // namespace alat::algebra
