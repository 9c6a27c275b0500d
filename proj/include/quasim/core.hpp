#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace quasim {

// Dense working types.  Everything downstream is expressed over these;
// Eigen is the only linear-algebra dependency.
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Complex = std::complex<double>;
using Operator = Matrix<Complex>;
using Vec = Vector<Complex>;
using RealMatrix = Matrix<double>;
using RealVec = Vector<double>;

// <u, v>, linear in the first argument, conjugate-linear in the second.
inline Complex inner(const Vec& u, const Vec& v) { return v.dot(u); }

inline Operator adjoint(const Operator& a) { return a.adjoint(); }

// Singular values in descending order.  Jacobi for small problems (accuracy),
// divide-and-conquer above that.
RealVec singular_values(const Operator& a);

inline double spectral_norm(const Operator& a) {
  return singular_values(a)(0);
}
inline double smallest_singular_value(const Operator& a) {
  RealVec s = singular_values(a);
  return s(s.size() - 1);
}

// One eigenvalue of a unitary operator: angle as a fraction of a turn in
// [0, 1), plus an orthonormal basis of the eigenspace (columns).
struct EigenLine {
  double angle = 0.0;
  Operator basis;
  Eigen::Index multiplicity() const { return basis.cols(); }
};

// Full eigensystem of a unitary matrix, angles strictly increasing.
// Angles closer than angle_tol (circularly) are treated as equal.
//
// Works by diagonalizing the commuting Hermitian pair (U+U*)/2, (U-U*)/2i in
// two stages, so repeated eigenvalues still get orthonormal bases.
std::vector<EigenLine> unitary_eigensystem(const Operator& u,
                                           double angle_tol = 1e-8,
                                           double unitary_tol = 1e-10);

// Orthonormal basis (columns) of the smallest subspace containing the
// generators and invariant under u and its inverse.  For unitary u the
// forward orbit already spans it.  Vectors whose residual after
// orthogonalization falls below tol are treated as dependent.
Operator krylov_span(const Operator& u, const std::vector<Vec>& generators,
                     double tol = 1e-9);

}  // namespace quasim
