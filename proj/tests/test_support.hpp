#pragma once

#include <vector>

#include "quasim/core.hpp"
#include "quasim/rng.hpp"

namespace testsupport {

using quasim::Complex;
using quasim::Operator;
using quasim::Rng;
using quasim::Vec;

inline std::vector<long> random_permutation(Rng& rng, long n) {
  std::vector<long> perm(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) perm[std::size_t(i)] = i;
  for (long i = n - 1; i > 0; --i) {
    long k = long(rng.below(std::uint64_t(i + 1)));
    std::swap(perm[std::size_t(i)], perm[std::size_t(k)]);
  }
  return perm;
}

inline Operator permutation_unitary(Rng& rng, long dim) {
  auto perm = random_permutation(rng, dim);
  Operator u = Operator::Zero(dim, dim);
  for (long i = 0; i < dim; ++i) u(i, perm[std::size_t(i)]) = 1.0;
  return u;
}

// U e_x = e_{x+1 mod dim} read as a Koopman matrix U(x, x+1) = 1.
inline Operator cycle_unitary(long dim) {
  Operator u = Operator::Zero(dim, dim);
  for (long i = 0; i < dim; ++i) u(i, (i + 1) % dim) = 1.0;
  return u;
}

// QR of a gaussian matrix with the R-diagonal phase pushed into Q.
inline Operator haar_unitary(Rng& rng, long dim) {
  Operator g(dim, dim);
  for (long r = 0; r < dim; ++r)
    for (long c = 0; c < dim; ++c) g(r, c) = rng.complex_gaussian();
  Eigen::HouseholderQR<Operator> qr(g);
  Operator q = qr.householderQ() * Operator::Identity(dim, dim);
  Operator r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (long i = 0; i < dim; ++i) {
    Complex d = r(i, i);
    q.col(i) *= (std::abs(d) > 0.0) ? d / std::abs(d) : Complex(1.0);
  }
  return q;
}

inline Vec random_vec(Rng& rng, long dim) {
  Vec v(dim);
  for (long i = 0; i < dim; ++i) v(i) = rng.complex_gaussian();
  return v;
}

}  // namespace testsupport
