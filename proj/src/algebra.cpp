#include "alat/algebra.hpp"

#include <stdexcept>

namespace alat::algebra {

std::string RingSpec::name() const {
  switch (kind) {
    case Fp:
      return "F" + std::to_string(p);
    case Q:
      return "Q";
    case Z:
      return "Z";
  }
  return "?";
}

long rank_mod_p(IMat m, long p) {
  if (m.empty() || m[0].empty()) return 0;
  long rows = static_cast<long>(m.size()), cols = static_cast<long>(m[0].size());
  auto norm = [p](long long v) {
    long long r = v % p;
    if (r < 0) r += p;
    return r;
  };
  for (auto& row : m) {
    for (auto& v : row) v = norm(v);
  }
  long rank = 0;
  for (long c = 0; c < cols && rank < rows; ++c) {
    long pivot = -1;
    for (long r = rank; r < rows; ++r) {
      if (m[r][c] != 0) {
        pivot = r;
        break;
      }
    }
    if (pivot < 0) continue;
    std::swap(m[rank], m[pivot]);
    // scale pivot row to 1
    long long inv = 1, base = m[rank][c] % p, e = p - 2;
    long long acc = base;
    while (e) {  // modular inverse by exponentiation (p prime)
      if (e & 1) inv = (inv * acc) % p;
      acc = (acc * acc) % p;
      e >>= 1;
    }
    for (long cc = c; cc < cols; ++cc) m[rank][cc] = (m[rank][cc] * inv) % p;
    for (long r = 0; r < rows; ++r) {
      if (r == rank || m[r][c] == 0) continue;
      long long f = m[r][c];
      for (long cc = c; cc < cols; ++cc) {
        m[r][cc] = norm(m[r][cc] - f * m[rank][cc]);
      }
    }
    ++rank;
  }
  return rank;
}

long rank_rational(const IMat& m) {
  if (m.empty() || m[0].empty()) return 0;
  long rows = static_cast<long>(m.size()), cols = static_cast<long>(m[0].size());
  std::vector<std::vector<Int>> a(rows, std::vector<Int>(cols));
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) a[r][c] = m[r][c];
  }
  Int prev = 1;
  long rank = 0;
  for (long c = 0; c < cols && rank < rows; ++c) {
    long pivot = -1;
    for (long r = rank; r < rows; ++r) {
      if (a[r][c] != 0) {
        pivot = r;
        break;
      }
    }
    if (pivot < 0) continue;
    std::swap(a[rank], a[pivot]);
    for (long r = rank + 1; r < rows; ++r) {
      for (long cc = cols - 1; cc >= c; --cc) {
        a[r][cc] = (a[rank][c] * a[r][cc] - a[r][c] * a[rank][cc]) / prev;
      }
    }
    prev = a[rank][c];
    ++rank;
  }
  return rank;
}

std::vector<Int> smith_normal_form(const IMat& m) {
  if (m.empty() || m[0].empty()) return {};
  long rows = static_cast<long>(m.size()), cols = static_cast<long>(m[0].size());
  std::vector<std::vector<Int>> a(rows, std::vector<Int>(cols));
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) a[r][c] = m[r][c];
  }
  long t = 0;
  std::vector<Int> factors;
  while (t < rows && t < cols) {
    // find a nonzero pivot with minimal absolute value
    long pr = -1, pc = -1;
    Int best = 0;
    for (long r = t; r < rows; ++r) {
      for (long c = t; c < cols; ++c) {
        if (a[r][c] != 0 && (pr < 0 || abs(a[r][c]) < best)) {
          pr = r;
          pc = c;
          best = abs(a[r][c]);
        }
      }
    }
    if (pr < 0) break;
    std::swap(a[t], a[pr]);
    for (long r = 0; r < rows; ++r) std::swap(a[r][t], a[r][pc]);
    bool clean = false;
    while (!clean) {
      clean = true;
      for (long r = t + 1; r < rows; ++r) {
        if (a[r][t] == 0) continue;
        Int q = a[r][t] / a[t][t];
        for (long c = t; c < cols; ++c) a[r][c] -= q * a[t][c];
        if (a[r][t] != 0) {  // remainder smaller than pivot: swap up
          std::swap(a[t], a[r]);
          clean = false;
        }
      }
      for (long c = t + 1; c < cols; ++c) {
        if (a[t][c] == 0) continue;
        Int q = a[t][c] / a[t][t];
        for (long r = t; r < rows; ++r) a[r][c] -= q * a[r][t];
        if (a[t][c] != 0) {
          for (long r = 0; r < rows; ++r) std::swap(a[r][t], a[r][c]);
          clean = false;
        }
      }
      if (clean) {
        // enforce divisibility of the remaining block by the pivot
        for (long r = t + 1; r < rows && clean; ++r) {
          for (long c = t + 1; c < cols && clean; ++c) {
            if (a[r][c] % a[t][t] != 0) {
              for (long cc = t; cc < cols; ++cc) a[t][cc] += a[r][cc];
              clean = false;
            }
          }
        }
      }
    }
    factors.push_back(abs(a[t][t]));
    ++t;
  }
  return factors;
}

void ChainComplex::validate() const {
  if (dims.empty()) throw std::invalid_argument("empty complex");
  if (boundary.size() != dims.size()) {
    throw std::invalid_argument("boundary count mismatch");
  }
  for (size_t k = 1; k < dims.size(); ++k) {
    const IMat& b = boundary[k];
    if (dims[k] == 0) continue;
    if (static_cast<long>(b.size()) != dims[k - 1] ||
        (dims[k - 1] > 0 && static_cast<long>(b[0].size()) != dims[k])) {
      throw std::invalid_argument("boundary shape mismatch at degree " +
                                  std::to_string(k));
    }
  }
  // d^2 = 0 over the chosen ring
  for (size_t k = 2; k < dims.size(); ++k) {
    if (dims[k] == 0 || dims[k - 1] == 0 || dims[k - 2] == 0) continue;
    for (long i = 0; i < dims[k - 2]; ++i) {
      for (long j = 0; j < dims[k]; ++j) {
        Int sum = 0;
        for (long l = 0; l < dims[k - 1]; ++l) {
          sum += Int(boundary[k - 1][i][l]) * boundary[k][l][j];
        }
        if (ring.kind == RingSpec::Fp) sum %= ring.p;
        if (sum != 0) {
          throw std::invalid_argument("d^2 != 0 at degree " +
                                      std::to_string(k));
        }
      }
    }
  }
}

HomologyResult homology(const ChainComplex& c) {
  c.validate();
  int top = c.top_degree();
  HomologyResult res;
  res.ranks.assign(top + 1, 0);
  res.torsion.assign(top + 1, {});
  auto rank_of = [&](int k) -> long {
    if (k < 1 || k > top || c.dims[k] == 0 || c.dims[k - 1] == 0) return 0;
    if (c.ring.kind == RingSpec::Fp) return rank_mod_p(c.boundary[k], c.ring.p);
    return rank_rational(c.boundary[k]);
  };
  for (int k = 0; k <= top; ++k) {
    res.ranks[k] = c.dims[k] - rank_of(k) - rank_of(k + 1);
    if (c.ring.kind == RingSpec::Z && k + 1 <= top && c.dims[k + 1] > 0 &&
        c.dims[k] > 0) {
      for (const Int& f : smith_normal_form(c.boundary[k + 1])) {
        if (f > 1) res.torsion[k].push_back(f);
      }
    }
  }
  return res;
}

}  // namespace alat::algebra
