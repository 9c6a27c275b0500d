#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <string>
#include <vector>

#include "quasim/core.hpp"

namespace quasim {

using Rational = boost::multiprecision::cpp_rational;

Rational parse_rational(const std::string& text);  // "7", "1/3", "0.25"

// A permutation of finitely many points with an invariant probability vector
// (strictly positive, constant on cycles).  p_exact, when present, is the
// same vector in exact arithmetic and enables exact joining-space
// elimination.
struct FiniteMPS {
  long n = 0;
  std::vector<long> perm;
  RealVec p;
  std::vector<Rational> p_exact;

  void validate() const;  // throws on any inconsistency
  bool has_exact() const { return !p_exact.empty(); }
};

FiniteMPS uniform_cycle(long n);  // full cycle with uniform weights, exact

// Koopman 0/1 matrix: (U f)(x) = f(perm(x)).
RealMatrix koopman_matrix(const FiniteMPS& sys);

// --- joinings ----------------------------------------------------------------

// A joining is an n1 x n2 nonnegative matrix lambda with row sums p1, column
// sums p2, invariant under the product map: lambda(T1 x, T2 y) = lambda(x, y).

RealMatrix product_joining(const FiniteMPS& s1, const FiniteMPS& s2);

struct JoiningCheck {
  double min_entry = 0.0;
  double row_marginal_residual = 0.0;
  double col_marginal_residual = 0.0;
  double invariance_residual = 0.0;
  bool pass(double tol = 1e-12) const;
};

JoiningCheck validate_joining(const RealMatrix& lambda, const FiniteMPS& s1,
                              const FiniteMPS& s2);

// The affine space of all joinings: the product joining plus the span of the
// homogeneous directions (zero marginals, invariant).  The homogeneous
// constraints have integer entries regardless of how the weights are stored,
// so small problems get their basis from exact rational elimination;
// otherwise from an SVD nullspace.
struct JoiningSpace {
  long n1 = 0;
  long n2 = 0;
  RealMatrix particular;
  std::vector<RealMatrix> basis;
  bool exact = false;
  long dimension() const { return long(basis.size()); }
};

JoiningSpace joining_space(const FiniteMPS& s1, const FiniteMPS& s2,
                           bool prefer_exact = true);

// Extreme-point test: lambda is indecomposable iff no nonzero homogeneous
// direction vanishes outside the support of lambda.  support_margin is the
// smallest singular value of the zero-set restriction of the basis (large
// margin = decisively extreme).
struct ExtremePointReport {
  bool indecomposable = false;
  double support_margin = 0.0;
  long support_size = 0;
  long zero_count = 0;
  long space_dimension = 0;
  int trials = 0;
};

ExtremePointReport is_indecomposable(const RealMatrix& lambda,
                                     const JoiningSpace& space,
                                     std::uint64_t seed,
                                     double support_tol = 1e-12);

// --- Markov operators over the weighted spaces --------------------------------

// Convention: a Markov operator between the two systems is an n2 x n1 kernel
// phi with (phi f)(y) = sum_x phi(y, x) f(x) = the conditional expectation of
// f given y under the corresponding joining.

RealMatrix markov_from_joining(const RealMatrix& lambda, const FiniteMPS& s1,
                               const FiniteMPS& s2);
RealMatrix joining_from_markov(const RealMatrix& phi, const FiniteMPS& s1,
                               const FiniteMPS& s2);

// Adjoint with respect to the weighted inner products <f,g> = sum p f g.
RealMatrix weighted_adjoint(const RealMatrix& phi, const FiniteMPS& s1,
                            const FiniteMPS& s2);
// Operator norm between the weighted spaces.
double weighted_norm(const RealMatrix& phi, const FiniteMPS& s1,
                     const FiniteMPS& s2);

struct MarkovOpCheck {
  double min_entry = 0.0;
  double unit_residual = 0.0;          // phi 1 = 1
  double adjoint_unit_residual = 0.0;  // phi* 1 = 1
  double norm = 0.0;                   // weighted operator norm
  double intertwining_residual = 0.0;  // phi U1 - U2 phi, weighted norm
  bool pass(double tol = 1e-12, double norm_tol = 1e-10) const;
};

MarkovOpCheck validate_markov_operator(const RealMatrix& phi,
                                       const FiniteMPS& s1,
                                       const FiniteMPS& s2);

// Factor map pi: X1 -> X2 (equivariant, measure pushforward).  Returns the
// composition operator V f = f of pi as an n1 x n2 kernel; its graph joining
// lambda(x, y) = p1(x) [pi(x) = y] corresponds to the weighted adjoint of V.
RealMatrix markov_from_factor_map(const std::vector<long>& pi,
                                  const FiniteMPS& s1, const FiniteMPS& s2);
RealMatrix joining_from_factor_map(const std::vector<long>& pi,
                                   const FiniteMPS& s1, const FiniteMPS& s2);

RealMatrix compose_markov(const RealMatrix& outer, const RealMatrix& inner);

// Weighted-norm distance between phi and the rank-one projection onto
// constants (the kernel of the product joining).
double distance_to_constants(const RealMatrix& phi, const FiniteMPS& s1,
                             const FiniteMPS& s2);

}  // namespace quasim
